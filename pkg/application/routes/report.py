import logging
import os

from application.app.harness.reporting import REPORT_FORMATS, aggregate_report
from application.app.harness.results_store import load_results
from application.routes.cli_support import ManifestWriter, add_config_flag, as_list, require, resolve_settings, run_command

logger = logging.getLogger(__name__)

DEFAULTS = {"results": None, "format": "text", "out": None}

REPORT_FILES = {"text": "report.txt", "csv": "report.csv", "json": "report.json"}


def register(subparsers) -> None:
    parser = subparsers.add_parser("report", help="comparison tables over one or more results directories")
    parser.add_argument("--results", nargs="+", help="results directories")
    parser.add_argument("--format", choices=REPORT_FORMATS)
    parser.add_argument("--out", help="directory to also write the report into")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    return run_command("report", lambda: report(resolve_settings(args, DEFAULTS)))


def report(settings: dict) -> int:
    require(settings, "results")
    manifest = ManifestWriter("report", settings)
    text = aggregate_report(load_results(as_list(settings["results"])), settings["format"])
    if settings["out"]:
        os.makedirs(settings["out"], exist_ok=True)
        with open(os.path.join(settings["out"], REPORT_FILES[settings["format"]]), "w", encoding="utf-8") as f:
            f.write(text)
        manifest.write(settings["out"])
    print(text, end="" if text.endswith("\n") else "\n")
    return 0

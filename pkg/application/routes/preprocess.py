import json
import logging

from application.app.data.column_mapping import ColumnMapping
from application.app.data.dataset_loader import DatasetLoader
from application.routes.cli_support import ManifestWriter, add_config_flag, require, resolve_settings, run_command

logger = logging.getLogger(__name__)

DEFAULTS = {"raw": None, "mapping": None, "out": None}


def register(subparsers) -> None:
    parser = subparsers.add_parser("preprocess", help="parse a raw attempt export into a canonical dataset")
    parser.add_argument("raw", nargs="?", help="delimiter-separated file with student, skill and correct columns")
    parser.add_argument("--mapping", help="column mapping config (looked up under static/mappings)")
    parser.add_argument("--out", help="output dataset directory")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    return run_command("preprocess", lambda: preprocess(resolve_settings(args, DEFAULTS)))


def preprocess(settings: dict) -> int:
    """
    Runs ingestion and writes the canonical dataset plus its summary.
    """
    require(settings, "raw", "out")
    manifest = ManifestWriter("preprocess", settings)
    mapping = ColumnMapping()
    if settings["mapping"]:
        manifest.uses_config(settings["mapping"], "mappings")
        mapping = ColumnMapping.from_config(settings["mapping"])

    dataset, report = DatasetLoader.load_raw(settings["raw"], mapping)
    digest = DatasetLoader.save(dataset, settings["out"], report)
    manifest.write(settings["out"], dataset_digest=digest)
    print(json.dumps({**dataset.summary(), "preprocessing": report.to_dict()}, indent=2, sort_keys=True))
    return 0

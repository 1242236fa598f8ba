import json
import logging
import os

import pandas as pd

from application.app.harness.results_store import load_results
from application.app.harness.selection_loss import selection_loss_analysis
from application.app.harness.variations import VARIATION_FIELDS, variation_analysis
from application.routes.cli_support import ManifestWriter, add_config_flag, as_list, require, resolve_settings, run_command
from domain.metric_report import METRIC_NAMES

logger = logging.getLogger(__name__)

LOSS_MATRIX_JSON = "loss_matrix.json"
LOSS_MATRIX_CSV = "loss_matrix.csv"
VARIATIONS_CSV = "variations.csv"

SELECTION_LOSS_DEFAULTS = {"results": None, "metrics": ",".join(METRIC_NAMES), "out": None}
VARIATIONS_DEFAULTS = {"results": None, "field": None, "metric": "auc", "out": None}


def register(subparsers) -> None:
    parser = subparsers.add_parser("analyze", help="analyses over saved grid-search results")
    analyses = parser.add_subparsers(dest="analysis", required=True)

    loss = analyses.add_parser("selection-loss", help="score lost on one metric by selecting with another")
    loss.add_argument("--results", nargs="+", help="results directories")
    loss.add_argument("--metrics", nargs="+", help=f"metrics of the matrix (default: {', '.join(METRIC_NAMES)})")
    loss.add_argument("--out", help="directory for the loss matrix (json and csv)")
    add_config_flag(loss)
    loss.set_defaults(handler=handle_selection_loss)

    variations = analyses.add_parser("variations", help="best and worst score per value of one hyperparameter")
    variations.add_argument("--results", nargs="+", help="results directories")
    variations.add_argument("--field", choices=VARIATION_FIELDS)
    variations.add_argument("--metric", choices=METRIC_NAMES)
    variations.add_argument("--out", help="directory for the variation table")
    add_config_flag(variations)
    variations.set_defaults(handler=handle_variations)


def handle_selection_loss(args) -> int:
    return run_command("analyze selection-loss", lambda: analyze_selection_loss(resolve_settings(args, SELECTION_LOSS_DEFAULTS)))


def handle_variations(args) -> int:
    return run_command("analyze variations", lambda: analyze_variations(resolve_settings(args, VARIATIONS_DEFAULTS)))


def loss_matrix_frame(matrix) -> pd.DataFrame:
    """Mean loss per (selected by, evaluated on); rows are the selection metric."""
    frame = pd.DataFrame(index=list(matrix.metrics), columns=list(matrix.metrics), dtype=float)
    for (selected_by, evaluated_on), cell in matrix.cells.items():
        frame.loc[selected_by, evaluated_on] = cell.mean
    frame.index.name = "selected_by"
    return frame


def analyze_selection_loss(settings: dict) -> int:
    require(settings, "results")
    manifest = ManifestWriter("analyze selection-loss", settings)
    results = load_results(as_list(settings["results"]))
    matrix = selection_loss_analysis(results, tuple(as_list(settings["metrics"])))
    frame = loss_matrix_frame(matrix)
    if settings["out"]:
        out = settings["out"]
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, LOSS_MATRIX_JSON), "w", encoding="utf-8") as f:
            json.dump(matrix.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        frame.to_csv(os.path.join(out, LOSS_MATRIX_CSV), float_format="%.17g", lineterminator="\n")
        manifest.write(out)
    print(frame.to_string(float_format=lambda value: f"{value:.4f}"))
    return 0


def analyze_variations(settings: dict) -> int:
    require(settings, "results", "field")
    manifest = ManifestWriter("analyze variations", settings)
    results = load_results(as_list(settings["results"]))
    rows = variation_analysis(results, settings["field"], settings["metric"])
    frame = pd.DataFrame([row.to_dict() for row in rows], columns=[
        "dataset", "model", "field", "value", "best", "worst", "spread", "configurations",
    ])
    if settings["out"]:
        os.makedirs(settings["out"], exist_ok=True)
        frame.to_csv(os.path.join(settings["out"], VARIATIONS_CSV), index=False, float_format="%.17g", lineterminator="\n")
        manifest.write(settings["out"])
    print(frame.to_string(index=False))
    return 0

"""
Result directories.

    results.csv    one record per (dataset, model, configuration, max-attempt policy, fold)
    summary.json   mean and population std per metric for every result, plus command-specific extras
    manifest.json  the RunManifest of the command that wrote the directory

Undefined metric values are written as `undefined`. Nothing time-dependent is written outside the manifest,
so re-running a command with the same inputs reproduces results.csv and summary.json byte for byte.
"""
import hashlib
import json
import logging
import os
import platform
from datetime import datetime, timezone

import numpy as np
import pandas as pd
import scipy

from application.app.data.data_exceptions import DatasetParseException
from domain.hyper_params import HyperParams
from domain.max_attempt_policy import MaxAttemptPolicy
from domain.metric_report import METRIC_NAMES, MetricReport
from domain.run_manifest import RunManifest
from domain.run_result import FoldResult, RunResult

logger = logging.getLogger(__name__)

RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.json"
MANIFEST_FILE = "manifest.json"
ARTIFACT_VERSION = "1.0.0"

RESULT_COLUMNS = ("dataset", "model", "config", "max_attempt", "fold", "targets", "epochs", *METRIC_NAMES, "hyper_params")


def _write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def result_records(results: list[RunResult]) -> pd.DataFrame:
    rows = []
    for result in sorted(results, key=lambda r: r.identity):
        hyper = json.dumps(result.hyper_params.to_dict(), sort_keys=True) if result.hyper_params else ""
        for fold in sorted(result.folds, key=lambda f: f.fold):
            rows.append({
                "dataset": result.dataset,
                "model": result.model,
                "config": result.config_key,
                "max_attempt": str(result.policy),
                "fold": fold.fold,
                "targets": fold.targets,
                "epochs": "" if fold.epochs is None else fold.epochs,
                **fold.report.to_dict(),
                "hyper_params": hyper,
            })
    return pd.DataFrame(rows, columns=list(RESULT_COLUMNS))


def save_results(directory: str, results: list[RunResult], extra: dict | None = None) -> None:
    os.makedirs(directory, exist_ok=True)
    result_records(results).to_csv(
        os.path.join(directory, RESULTS_FILE), index=False, float_format="%.17g", lineterminator="\n"
    )
    summary = {"results": [result.to_dict() for result in sorted(results, key=lambda r: r.identity)]}
    if extra:
        summary.update(extra)
    _write_json(os.path.join(directory, SUMMARY_FILE), summary)
    logger.info(f"{len(results)} results written to '{directory}'")


def load_results(directories: list[str]) -> list[RunResult]:
    """Rebuilds RunResults from the results.csv of each directory."""
    results = []
    for directory in directories:
        path = os.path.join(directory, RESULTS_FILE)
        if not os.path.isfile(path):
            raise DatasetParseException(path, "no results file in this directory")
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DatasetParseException(path, str(e))
        missing = [column for column in RESULT_COLUMNS if column not in frame.columns]
        if missing:
            raise DatasetParseException(path, f"missing columns {missing}")

        for key, rows in frame.groupby(["dataset", "model", "hyper_params", "max_attempt"], sort=True):
            dataset, model, hyper, policy = key
            folds = tuple(
                FoldResult(
                    fold=int(row["fold"]),
                    report=MetricReport.from_dict({metric: row[metric] for metric in METRIC_NAMES}),
                    targets=int(row["targets"]),
                    epochs=int(row["epochs"]) if row["epochs"] else None,
                )
                for _, row in rows.sort_values("fold", key=lambda c: c.astype(int)).iterrows()
            )
            results.append(RunResult(
                model=model,
                dataset=dataset,
                folds=folds,
                hyper_params=HyperParams.from_dict(json.loads(hyper)) if hyper else None,
                policy=MaxAttemptPolicy.parse(policy),
            ))
    logger.info(f"Loaded {len(results)} results from {len(directories)} directories")
    return sorted(results, key=lambda r: r.identity)


def config_digest(paths: list[str], arguments: dict) -> str:
    """sha256 over the resolved arguments and the bytes of every config file used."""
    digest = hashlib.sha256(json.dumps(arguments, sort_keys=True, default=str).encode("utf-8"))
    for path in paths:
        with open(path, "rb") as f:
            digest.update(f.read())
    return digest.hexdigest()


def artifact_versions() -> dict[str, str]:
    return {
        "kt-bench": ARTIFACT_VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(directory: str, manifest: RunManifest) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, MANIFEST_FILE)
    _write_json(path, manifest.to_dict())
    return path

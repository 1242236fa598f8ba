"""
Comparison tables in the style of published knowledge-tracing results: one table per dataset, models as rows,
metrics as columns, cells `mean±std` with three decimals and no leading zero (".761±.009"). Undefined cells read
"—" and the best cell of each column is flagged with "*".
"""
import json
import logging
from collections import defaultdict

import pandas as pd

from application.app.config.config_exceptions import ConfigurationException
from application.app.harness.grid_search import best_defined
from domain.metric_report import METRIC_NAMES, UNDEFINED, MetricValue, better
from domain.run_result import MetricSummary, RunResult

logger = logging.getLogger(__name__)

UNDEFINED_CELL = "—"
BEST_FLAG = "*"
REPORT_FORMATS = ("text", "csv", "json")


def _decimal(value: float) -> str:
    text = f"{value:.3f}"
    if text.startswith("0."):
        return text[1:]
    if text.startswith("-0."):
        return "-" + text[2:]
    return text


def format_summary(summary: MetricSummary) -> str:
    if summary.mean is UNDEFINED:
        return UNDEFINED_CELL
    return f"{_decimal(summary.mean)}±{_decimal(summary.std)}"


def row_label(result: RunResult) -> str:
    label = result.model
    if str(result.policy) != "none":
        label += f" ({result.policy})"
    return label


def best_rows(results: list[RunResult]) -> list[RunResult]:
    """One result per (dataset, model, max-attempt policy): the configuration with the best mean AUC."""
    groups = defaultdict(list)
    for result in results:
        groups[(result.dataset, result.model, str(result.policy))].append(result)
    chosen = []
    for key in sorted(groups):
        group = groups[key]
        chosen.append(best_defined(group, "auc") or sorted(group, key=lambda r: r.identity)[0])
    return chosen


def column_winners(rows: list[RunResult], metric: str) -> set[int]:
    """Row positions holding the best mean of `metric` (argmin for rmse and log loss); ties all win."""
    best: MetricValue = UNDEFINED
    for result in rows:
        value = result.mean(metric)
        if value is not UNDEFINED and (best is UNDEFINED or better(metric, value, best)):
            best = value
    if best is UNDEFINED:
        return set()
    return {position for position, result in enumerate(rows) if result.mean(metric) == best}


def build_tables(results: list[RunResult]) -> dict[str, pd.DataFrame]:
    """Human-readable tables keyed by dataset name."""
    if not results:
        raise ConfigurationException("Nothing to report: no results were found")
    by_dataset = defaultdict(list)
    for result in best_rows(results):
        by_dataset[result.dataset].append(result)

    tables = {}
    for dataset, rows in sorted(by_dataset.items()):
        cells = {metric: [format_summary(result.summary(metric)) for result in rows] for metric in METRIC_NAMES}
        for metric in METRIC_NAMES:
            for position in column_winners(rows, metric):
                cells[metric][position] += BEST_FLAG
        frame = pd.DataFrame(cells, index=[row_label(result) for result in rows])
        frame.insert(0, "config", [result.config_key for result in rows])
        frame.index.name = "model"
        tables[dataset] = frame
    return tables


def records(results: list[RunResult]) -> list[dict]:
    """Machine-readable rows: one per reported result, means and standard deviations unformatted."""
    rows = best_rows(results)
    winners = {metric: column_winners(rows, metric) for metric in METRIC_NAMES}
    out = []
    for position, result in enumerate(rows):
        record = {
            "dataset": result.dataset,
            "model": result.model,
            "config": result.config_key,
            "max_attempt": str(result.policy),
        }
        for metric in METRIC_NAMES:
            summary = result.summary(metric).to_dict()
            record[f"{metric}_mean"] = summary["mean"]
            record[f"{metric}_std"] = summary["std"]
            record[f"{metric}_best"] = position in winners[metric]
        out.append(record)
    return out


def aggregate_report(results: list[RunResult], output_format: str = "text") -> str:
    if output_format not in REPORT_FORMATS:
        raise ConfigurationException(f"Unknown report format '{output_format}'. Valid formats: {', '.join(REPORT_FORMATS)}")
    if output_format == "json":
        build_tables(results)
        return json.dumps(records(results), indent=2, sort_keys=True) + "\n"
    if output_format == "csv":
        build_tables(results)
        return pd.DataFrame(records(results)).to_csv(index=False, lineterminator="\n")

    sections = []
    for dataset, table in build_tables(results).items():
        sections.append(f"== {dataset} ==\n{table.to_string()}\n")
    logger.info(f"Report over {len(results)} results in {len(sections)} dataset tables")
    return "\n".join(sections)

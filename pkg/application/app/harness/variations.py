import logging
from collections import defaultdict
from dataclasses import dataclass, fields

from application.app.config.config_exceptions import ConfigurationException
from application.app.harness.grid_search import check_metric
from domain.hyper_params import HyperParams
from domain.metric_report import LOWER_IS_BETTER, UNDEFINED
from domain.run_result import RunResult

logger = logging.getLogger(__name__)

VARIATION_FIELDS = tuple(f.name for f in fields(HyperParams) if f.name != "architecture")


@dataclass(frozen=True)
class VariationRow:
    """Best and worst mean score among the configurations sharing one value of a hyperparameter."""
    dataset: str
    model: str
    field: str
    value: object
    best: float
    worst: float
    configurations: int

    @property
    def spread(self) -> float:
        return abs(self.best - self.worst)

    def to_dict(self):
        return {
            "dataset": self.dataset,
            "model": self.model,
            "field": self.field,
            "value": self.value,
            "best": self.best,
            "worst": self.worst,
            "spread": self.spread,
            "configurations": self.configurations,
        }


def variation_analysis(results: list[RunResult], field: str, metric: str = "auc") -> list[VariationRow]:
    """
    For each (dataset, model, value of `field`), the best and worst mean `metric` over the grid points with that
    value, e.g. output-per-skill against skills-to-scalar, or seed 13 against 42.
    """
    check_metric(metric)
    if field not in VARIATION_FIELDS:
        raise ConfigurationException(f"Unknown hyperparameter '{field}'. Valid fields: {', '.join(VARIATION_FIELDS)}")

    groups = defaultdict(list)
    for result in results:
        if result.hyper_params is None:
            continue
        score = result.mean(metric)
        if score is UNDEFINED:
            logger.warning(f"{result.model} [{result.config_key}]: {metric} undefined; left out of the variation table")
            continue
        value = result.hyper_params.to_dict()[field]
        groups[(result.dataset, result.model, "-" if value is None else str(value))].append(score)

    rows = []
    for (dataset, model, value), scores in sorted(groups.items()):
        best, worst = (min(scores), max(scores)) if metric in LOWER_IS_BETTER else (max(scores), min(scores))
        rows.append(VariationRow(dataset, model, field, value, best, worst, len(scores)))
    logger.info(f"Variation analysis of '{field}' by {metric}: {len(rows)} rows")
    return rows

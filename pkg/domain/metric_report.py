import math
from dataclasses import dataclass, fields
from enum import Enum


class Undefined(Enum):
    """Marker for a metric whose formula divides by zero. Never coerced to 0."""
    MARKER = "undefined"

    def __repr__(self):
        return "UNDEFINED"

    def __str__(self):
        return "undefined"


UNDEFINED = Undefined.MARKER

MetricValue = float | Undefined

METRIC_NAMES = ("accuracy", "auc", "precision", "recall", "f1", "mcc", "rmse", "log_loss")

# Metrics where a smaller value is better; every other metric is maximised.
LOWER_IS_BETTER = frozenset({"rmse", "log_loss"})


def is_defined(value) -> bool:
    return value is not UNDEFINED and value is not None


def better(metric: str, candidate: float, incumbent: float) -> bool:
    if metric in LOWER_IS_BETTER:
        return candidate < incumbent
    return candidate > incumbent


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class MetricReport:
    """Scores of one prediction set. Any field may hold UNDEFINED."""
    accuracy: MetricValue
    auc: MetricValue
    precision: MetricValue
    recall: MetricValue
    f1: MetricValue
    mcc: MetricValue
    rmse: MetricValue
    log_loss: MetricValue

    def get(self, metric: str) -> MetricValue:
        if metric not in METRIC_NAMES:
            raise KeyError(f"Unknown metric '{metric}'. Valid metrics: {', '.join(METRIC_NAMES)}")
        return getattr(self, metric)

    def to_dict(self):
        return {f.name: _render(getattr(self, f.name)) for f in fields(self)}

    @staticmethod
    def from_dict(values: dict) -> "MetricReport":
        return MetricReport(**{name: _parse(values[name]) for name in METRIC_NAMES})


def _render(value: MetricValue):
    return str(UNDEFINED) if value is UNDEFINED else value


def _parse(value) -> MetricValue:
    if value is None or value == str(UNDEFINED) or value == "":
        return UNDEFINED
    value = float(value)
    return UNDEFINED if math.isnan(value) else value

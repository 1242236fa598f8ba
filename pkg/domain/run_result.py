from dataclasses import dataclass, field

import numpy as np

from domain.hyper_params import HyperParams
from domain.max_attempt_policy import MaxAttemptPolicy
from domain.metric_report import METRIC_NAMES, UNDEFINED, MetricReport, MetricValue


@dataclass(frozen=True)
class FoldResult:
    fold: int
    report: MetricReport
    targets: int
    epochs: int | None = None

    def to_dict(self):
        return {"fold": self.fold, "targets": self.targets, "epochs": self.epochs, **self.report.to_dict()}


@dataclass(frozen=True)
class MetricSummary:
    """Mean and population standard deviation of a metric over folds."""
    mean: MetricValue
    std: MetricValue

    def to_dict(self):
        render = lambda value: str(UNDEFINED) if value is UNDEFINED else value
        return {"mean": render(self.mean), "std": render(self.std)}


@dataclass(frozen=True)
class RunResult:
    """One cross-validated evaluation of one model configuration on one dataset."""
    model: str
    dataset: str
    folds: tuple[FoldResult, ...]
    hyper_params: HyperParams | None = None
    policy: MaxAttemptPolicy = field(default_factory=MaxAttemptPolicy)
    wall_clock_seconds: float = 0.0

    @property
    def config_key(self) -> str:
        return self.hyper_params.config_key() if self.hyper_params else "-"

    @property
    def identity(self) -> tuple:
        """Canonical sort key: (dataset, model, configuration, policy)."""
        hyper_key = self.hyper_params.sort_key() if self.hyper_params else ()
        return (self.dataset, self.model, hyper_key, str(self.policy))

    def summary(self, metric: str) -> MetricSummary:
        values = [fold.report.get(metric) for fold in self.folds]
        if not values or any(value is UNDEFINED for value in values):
            return MetricSummary(UNDEFINED, UNDEFINED)
        array = np.array(values, dtype=np.float64)
        return MetricSummary(float(array.mean()), float(array.std()))

    def mean(self, metric: str) -> MetricValue:
        return self.summary(metric).mean

    def to_dict(self):
        return {
            "model": self.model,
            "dataset": self.dataset,
            "config": self.config_key,
            "hyper_params": self.hyper_params.to_dict() if self.hyper_params else None,
            "max_attempt": str(self.policy),
            "epochs": [fold.epochs for fold in self.folds],
            "metrics": {metric: self.summary(metric).to_dict() for metric in METRIC_NAMES},
        }

import itertools
import logging
import math
import time
from dataclasses import dataclass, replace

from application.app.config.config_exceptions import ConfigurationException
from application.app.data.splitting import make_folds
from application.app.harness.cross_validation import DEFAULT_FOLDS, ModelSpec, collect, execute, fold_tasks, run_fold
from domain.dataset import Dataset
from domain.hyper_params import STUDY_GRID, Architecture, GridDomain, HyperParams
from domain.max_attempt_policy import MaxAttemptMode, MaxAttemptPolicy
from domain.metric_report import LOWER_IS_BETTER, METRIC_NAMES, UNDEFINED, better
from domain.run_result import RunResult
from domain.train_config import TrainConfig

logger = logging.getLogger(__name__)

GRID_SEARCH_POLICY = MaxAttemptPolicy(MaxAttemptMode.SPLIT, 200)


def check_metric(metric: str) -> str:
    if metric not in METRIC_NAMES:
        raise ConfigurationException(f"Unknown metric '{metric}'. Valid metrics: {', '.join(METRIC_NAMES)}")
    return metric


def enumerate_grid(architecture: Architecture, grid: GridDomain = STUDY_GRID) -> list[HyperParams]:
    """
    Every applicable combination of the grid for one architecture, normalised, duplicate-free and in
    canonical order. Sizes a variant ignores collapse, so one-hot points carry no embedding sizes,
    output-per-skill points no summary size, and only SAKT varies the head count.
    """
    architecture = Architecture(architecture)
    off_grid = grid != STUDY_GRID
    points = {}
    for values in itertools.product(
        grid.recurrent_sizes,
        grid.key_embed_sizes,
        grid.value_embed_sizes,
        grid.summary_sizes,
        grid.input_variants,
        grid.output_variants,
        grid.learning_rates,
        grid.dropout_rates,
        grid.attention_heads,
        grid.batch_sizes,
        grid.seeds,
    ):
        point = HyperParams(architecture, *values, off_grid=off_grid).normalized()
        points.setdefault(point.sort_key(), point)
    if not points:
        raise ConfigurationException(f"The grid for '{architecture.value}' is empty")
    return [points[key] for key in sorted(points)]


def _tie_break_key(result: RunResult) -> tuple:
    loss = result.mean("log_loss")
    return (math.inf if loss is UNDEFINED else loss, result.hyper_params.sort_key() if result.hyper_params else ())


def best_defined(results: list[RunResult], metric: str) -> RunResult | None:
    """
    The result with the best mean `metric`; ties go to the lower mean log loss, then the smaller
    configuration in canonical order. Results whose mean is undefined are skipped.
    """
    best = None
    for result in sorted(results, key=_tie_break_key):
        score = result.mean(metric)
        if score is UNDEFINED:
            logger.warning(f"{result.model} [{result.config_key}]: mean {metric} is undefined; excluded from selection")
            continue
        if best is None or better(metric, score, best.mean(metric)):
            best = result
    return best


def select_best(results: list[RunResult], metric: str) -> RunResult:
    best = best_defined(results, check_metric(metric))
    if best is None:
        raise ConfigurationException(f"No configuration has a defined mean {metric}")
    return best


@dataclass
class GridSearchResult:
    architecture: Architecture
    selection_metric: str
    best: RunResult
    results: list[RunResult]

    def to_dict(self):
        return {
            "model": self.architecture.value,
            "selection_metric": self.selection_metric,
            "direction": "min" if self.selection_metric in LOWER_IS_BETTER else "max",
            "points": len(self.results),
            "best": self.best.to_dict(),
        }


def grid_search(
    architecture: Architecture,
    dataset: Dataset,
    selection_metric: str = "auc",
    grid: GridDomain = STUDY_GRID,
    train_config: TrainConfig | None = None,
    policy: MaxAttemptPolicy = GRID_SEARCH_POLICY,
    k: int = DEFAULT_FOLDS,
    seed: int = 0,
    jobs: int = 1,
) -> GridSearchResult:
    """Cross-validates every grid point on the same fold plan and selects by mean `selection_metric`."""
    check_metric(selection_metric)
    architecture = Architecture(architecture)
    points = enumerate_grid(architecture, grid)
    logger.info(f"Grid search for {architecture.value} on '{dataset.name}': {len(points)} configurations, {k} folds")

    base_config = train_config or TrainConfig()
    plan = make_folds(dataset, k, seed)
    specs = [
        ModelSpec(architecture.value, point, replace(base_config, batch_size=point.batch_size), policy)
        for point in points
    ]
    tasks = [task for spec in specs for task in fold_tasks(spec, dataset, plan, seed)]
    started = time.perf_counter()
    outcomes = execute(run_fold, tasks, jobs)

    results = []
    for index, spec in enumerate(specs):
        result = collect(spec, dataset, outcomes[index * k:(index + 1) * k])
        logger.info(f"Grid point {index + 1}/{len(specs)} {spec.label}: mean {selection_metric} {result.mean(selection_metric)}")
        results.append(result)

    best = select_best(results, selection_metric)
    logger.info(
        f"Grid search for {architecture.value} finished in {time.perf_counter() - started:.1f}s; "
        f"best by {selection_metric}: {best.config_key} ({best.mean(selection_metric)})"
    )
    return GridSearchResult(architecture, selection_metric, best, results)

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

from application.app.data.preprocessing import apply_max_attempt
from application.app.data.splitting import make_folds, split_validation
from application.app.engine.engine_exceptions import ContractException
from application.app.harness.harness_exceptions import FoldFailedException
from application.app.harness.tracers import build_tracer
from application.app.metrics.metrics import evaluate_batch
from domain.dataset import Dataset
from domain.fold_plan import FoldPlan
from domain.hyper_params import HyperParams
from domain.max_attempt_policy import MaxAttemptPolicy
from domain.prediction_batch import PredictionBatch
from domain.run_result import FoldResult, RunResult
from domain.train_config import TrainConfig

logger = logging.getLogger(__name__)

DEFAULT_FOLDS = 5


@dataclass(frozen=True)
class ModelSpec:
    """What to cross-validate: a model tag, its hyperparameters (deep models only) and a max-attempt policy."""
    tag: str
    hyper_params: HyperParams | None = None
    train_config: TrainConfig = field(default_factory=TrainConfig)
    policy: MaxAttemptPolicy = field(default_factory=MaxAttemptPolicy)

    @property
    def label(self) -> str:
        if self.hyper_params is None:
            return self.tag
        return f"{self.tag} [{self.hyper_params.config_key()}]"

    def to_dict(self):
        return {
            "model": self.tag,
            "hyper_params": self.hyper_params.to_dict() if self.hyper_params else None,
            "train_config": self.train_config.to_dict(),
            "max_attempt": str(self.policy),
        }


@dataclass(frozen=True)
class FoldTask:
    spec: ModelSpec
    dataset: Dataset
    plan: FoldPlan
    fold: int
    seed: int
    checkpoint_stem: str | None = None


@dataclass(frozen=True)
class FoldOutcome:
    result: FoldResult
    predictions: PredictionBatch
    checkpoint: str | None = None


def fold_partition(plan: FoldPlan, fold: int, validation_fraction: float, seed: int) -> tuple[list, list, list]:
    """(train, validation, test) students of one fold; asserts that no test student leaks into the other two."""
    test = plan.students_in(fold)
    train, validation = split_validation(plan.students_outside(fold), validation_fraction, seed)
    leaked = set(test) & (set(train) | set(validation))
    if leaked:
        raise ContractException(f"Fold {fold}: test students {sorted(leaked)[:5]} also appear in training")
    return train, validation, test


def run_fold(task: FoldTask) -> FoldOutcome:
    """
    Trains a fresh model on one fold and scores the fold's test students in full.
    The max-attempt policy applies to training and validation students only.
    """
    spec = task.spec
    try:
        train, validation, test = fold_partition(task.plan, task.fold, spec.train_config.validation_fraction, task.seed)
        tracer = build_tracer(spec.tag, spec.hyper_params, spec.train_config)
        logger.info(
            f"Fold {task.fold} of {spec.label} on '{task.dataset.name}': "
            f"{len(train)} train, {len(validation)} validation, {len(test)} test students"
        )
        if tracer.early_stopping:
            tracer.fit(
                apply_max_attempt(task.dataset.subset(train), spec.policy),
                apply_max_attempt(task.dataset.subset(validation), spec.policy),
                seed=task.seed,
            )
        else:
            tracer.fit(apply_max_attempt(task.dataset.subset(train + validation), spec.policy), seed=task.seed)
        predictions = tracer.predict(task.dataset.subset(test)).sorted()
        checkpoint = tracer.save(task.checkpoint_stem) if task.checkpoint_stem else None
    except FoldFailedException:
        raise
    except Exception as e:
        logger.error(f"Fold {task.fold} of {spec.label} failed: {e}")
        raise FoldFailedException.wrap(task.fold, spec.tag, e) from e

    report = evaluate_batch(predictions)
    logger.info(f"Fold {task.fold} of {spec.label} finished: auc {report.auc}, {len(predictions)} targets")
    return FoldOutcome(FoldResult(task.fold, report, len(predictions), tracer.epochs), predictions, checkpoint)


def execute(function: Callable, tasks: Iterable, jobs: int = 1) -> list:
    """Runs `function` over `tasks` in order; with jobs > 1 in a process pool. Results keep task order."""
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [function(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(function, tasks))


def default_jobs() -> int:
    return os.cpu_count() or 1


def fold_tasks(
    spec: ModelSpec,
    dataset: Dataset,
    plan: FoldPlan,
    seed: int,
    checkpoint_dir: str | None = None,
) -> list[FoldTask]:
    tasks = []
    for fold in range(plan.fold_count):
        stem = None
        if checkpoint_dir is not None:
            stem = os.path.join(checkpoint_dir, f"{spec.tag}-fold{fold}")
        tasks.append(FoldTask(spec, dataset, plan, fold, seed, stem))
    return tasks


def collect(spec: ModelSpec, dataset: Dataset, outcomes: list[FoldOutcome], wall_clock: float = 0.0) -> RunResult:
    return RunResult(
        model=spec.tag,
        dataset=dataset.name,
        folds=tuple(outcome.result for outcome in sorted(outcomes, key=lambda o: o.result.fold)),
        hyper_params=spec.hyper_params,
        policy=spec.policy,
        wall_clock_seconds=wall_clock,
    )


def cross_validate(
    spec: ModelSpec,
    dataset: Dataset,
    k: int = DEFAULT_FOLDS,
    seed: int = 0,
    jobs: int = 1,
    checkpoint_dir: str | None = None,
) -> RunResult:
    """
    k-fold cross-validation by student. Every fold trains a fresh model; metrics are computed per fold on the
    pooled test targets and summarised as mean and population standard deviation.
    """
    started = time.perf_counter()
    plan = make_folds(dataset, k, seed)
    outcomes = execute(run_fold, fold_tasks(spec, dataset, plan, seed, checkpoint_dir), jobs)
    result = collect(spec, dataset, outcomes, time.perf_counter() - started)
    logger.info(
        f"Cross-validated {spec.label} on '{dataset.name}' ({k} folds, seed {seed}): "
        f"auc {result.summary('auc').to_dict()}"
    )
    return result

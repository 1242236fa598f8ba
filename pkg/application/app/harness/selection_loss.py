import logging
from collections import defaultdict

from application.app.config.config_exceptions import ConfigurationException
from application.app.engine.engine_exceptions import ContractException
from application.app.harness.grid_search import best_defined, check_metric
from domain.loss_matrix import LossCell, LossMatrix
from domain.metric_report import LOWER_IS_BETTER, METRIC_NAMES, UNDEFINED
from domain.run_result import RunResult

logger = logging.getLogger(__name__)


def group_results(results: list[RunResult]) -> dict[tuple[str, str], list[RunResult]]:
    """Results grouped by (dataset, model), in canonical order."""
    groups = defaultdict(list)
    for result in sorted(results, key=lambda r: r.identity):
        groups[(result.dataset, result.model)].append(result)
    return dict(sorted(groups.items()))


def selection_loss(group: list[RunResult], selected_by: str, evaluated_on: str) -> float | None:
    """
    Score lost on `evaluated_on` by picking the configuration that is best on `selected_by`,
    relative to the best achievable `evaluated_on` score. None when either side is undefined.
    """
    selected = best_defined(group, selected_by)
    achievable = best_defined(group, evaluated_on)
    if selected is None or achievable is None:
        return None
    obtained = selected.mean(evaluated_on)
    if obtained is UNDEFINED:
        logger.warning(
            f"{selected.model} on '{selected.dataset}': {evaluated_on} of the configuration selected by "
            f"{selected_by} is undefined"
        )
        return None
    best = achievable.mean(evaluated_on)
    return obtained - best if evaluated_on in LOWER_IS_BETTER else best - obtained


def selection_loss_analysis(results: list[RunResult], metrics: tuple[str, ...] = METRIC_NAMES) -> LossMatrix:
    """
    For every (selection metric a, evaluation metric b), the mean and maximum over (model, dataset) groups of
    the score lost on b when hyperparameters are chosen by a.
    """
    for metric in metrics:
        check_metric(metric)
    groups = {key: group for key, group in group_results(results).items() if len(group) >= 2}
    skipped = len(group_results(results)) - len(groups)
    if skipped:
        logger.warning(f"Selection loss: {skipped} (model, dataset) groups have a single configuration; skipped")
    if not groups:
        raise ConfigurationException("Selection loss needs at least two configurations of one model on one dataset")

    cells = {}
    for a in metrics:
        for b in metrics:
            losses = []
            for group in groups.values():
                loss = selection_loss(group, a, b)
                if loss is not None:
                    losses.append(loss)
            if not losses:
                continue
            cell = LossCell(mean=sum(losses) / len(losses), max=max(losses), groups=len(losses))
            if cell.max < 0 or (a == b and cell.max != 0.0):
                raise ContractException(f"Selection loss ({a}, {b}) = {cell.to_dict()} violates the loss bounds")
            cells[(a, b)] = cell

    logger.info(f"Selection loss over {len(groups)} (model, dataset) groups and {len(metrics)} metrics")
    return LossMatrix(tuple(metrics), cells)

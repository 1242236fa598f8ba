"""
Evaluation metrics. Threshold metrics use "positive iff probability >= 0.5"; any metric whose formula would
divide by zero is UNDEFINED rather than 0.
"""
import logging
import math

import numpy as np
from scipy.stats import rankdata

from application.app.engine.engine_exceptions import ContractException, DimensionMismatchException
from domain.metric_report import UNDEFINED, ConfusionCounts, MetricReport, MetricValue
from domain.prediction_batch import PredictionBatch

logger = logging.getLogger(__name__)

DECISION_THRESHOLD = 0.5
LOG_LOSS_CLIP = 1e-7


def _validate(labels, probs) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    if labels.shape != probs.shape or labels.ndim != 1:
        raise DimensionMismatchException("metric", labels.shape, probs.shape)
    if labels.size == 0:
        raise ContractException("Metrics need at least one scored target")
    return labels, probs


def confusion(labels, probs, threshold: float = DECISION_THRESHOLD) -> ConfusionCounts:
    labels, probs = _validate(labels, probs)
    if probs.min() < 0.0 or probs.max() > 1.0:
        raise ContractException("Probabilities must lie in [0, 1]")
    predicted = probs >= threshold
    actual = labels == 1
    return ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )


def _ratio(numerator: float, denominator: float) -> MetricValue:
    return UNDEFINED if denominator == 0 else numerator / denominator


def threshold_metrics(counts: ConfusionCounts) -> dict[str, MetricValue]:
    tp, fp, tn, fn = counts.tp, counts.fp, counts.tn, counts.fn
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is UNDEFINED or recall is UNDEFINED or precision + recall == 0:
        f1 = UNDEFINED
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    mcc_denominator = math.sqrt(float(tp + fp) * float(tp + fn) * float(tn + fp) * float(tn + fn))
    mcc = _ratio(float(tp) * tn - float(fp) * fn, mcc_denominator)
    return {
        "accuracy": _ratio(tp + tn, counts.total),
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "mcc": mcc,
    }


def auc(labels, probs) -> MetricValue:
    """Probability that a random positive outranks a random negative, ties counting one half."""
    labels, probs = _validate(labels, probs)
    positives = int(np.sum(labels == 1))
    negatives = labels.size - positives
    if positives == 0 or negatives == 0:
        return UNDEFINED
    ranks = rankdata(probs, method="average")
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives))


def rmse(labels, probs) -> float:
    labels, probs = _validate(labels, probs)
    return float(np.sqrt(np.mean((labels - probs) ** 2)))


def log_loss(labels, probs) -> float:
    labels, probs = _validate(labels, probs)
    clipped = np.clip(probs, LOG_LOSS_CLIP, 1.0 - LOG_LOSS_CLIP)
    return float(-np.mean(labels * np.log(clipped) + (1.0 - labels) * np.log(1.0 - clipped)))


def evaluate(labels, probs) -> MetricReport:
    """Every metric over one pooled set of targets."""
    counts = confusion(labels, probs)
    return MetricReport(
        auc=auc(labels, probs),
        rmse=rmse(labels, probs),
        log_loss=log_loss(labels, probs),
        **threshold_metrics(counts),
    )


def evaluate_batch(batch: PredictionBatch) -> MetricReport:
    return evaluate(batch.labels, batch.probabilities)

import numpy as np

from application.app.engine.engine_exceptions import ContractException
from domain.dataset import Dataset

NAPNM_WINDOWS = (3, 5, 9)


def mean_model(train: Dataset) -> float:
    """Global mean correctness of the training attempts."""
    if train.attempt_count == 0:
        raise ContractException("Mean model needs training attempts")
    return train.correct_count / train.attempt_count


def nap(correct) -> np.ndarray:
    """Next-as-previous: the prediction for attempt t+1 is c_t. One value per target t = 2..T."""
    correct = np.asarray(correct, dtype=np.float64)
    if correct.shape[0] < 2:
        raise ContractException("Next-as-previous needs a sequence of at least two attempts")
    return correct[:-1].copy()


def napnm(correct, window: int) -> np.ndarray:
    """Next-as-previous-N-mean: the mean of the last min(t, N) correctness values, per target t = 2..T."""
    if window < 1:
        raise ContractException(f"NaPNM window must be positive, got {window}")
    correct = np.asarray(correct, dtype=np.float64)
    if correct.shape[0] < 2:
        raise ContractException("NaPNM needs a sequence of at least two attempts")
    running = np.concatenate(([0.0], np.cumsum(correct)))
    ends = np.arange(1, correct.shape[0])
    starts = np.maximum(ends - window, 0)
    return (running[ends] - running[starts]) / (ends - starts)

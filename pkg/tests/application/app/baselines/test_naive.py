import numpy as np
import pytest

from application.app.baselines.naive import mean_model, napnm, nap
from application.app.engine.engine_exceptions import ContractException
from application.app.metrics.metrics import evaluate
from domain.dataset import Dataset, StudentSequence
from domain.metric_report import UNDEFINED


def test_mean_model_is_training_correctness():
    """The mean model predicts the training share of correct attempts."""
    train = Dataset(sequences=(StudentSequence(0, [0, 0, 0, 0], [1, 1, 1, 0]),), skill_count=1)

    assert mean_model(train) == pytest.approx(0.75)


def test_mean_model_ignores_student_order():
    """Shuffling the students leaves the mean unchanged."""
    rng = np.random.default_rng(6)
    sequences = tuple(
        StudentSequence(student, rng.integers(0, 3, size), rng.integers(0, 2, size))
        for student, size in enumerate(rng.integers(2, 12, 40))
    )
    shuffled = tuple(sequences[i] for i in rng.permutation(len(sequences)))

    assert mean_model(Dataset(sequences=shuffled, skill_count=3)) == mean_model(Dataset(sequences=sequences, skill_count=3))


def test_nap_repeats_previous_answer():
    """The prediction for attempt t+1 is c_t."""
    assert nap([1, 0, 0, 1]).tolist() == [1.0, 0.0, 0.0]


def test_nap_on_alternating_sequence_is_always_wrong():
    """Alternating correctness makes next-as-previous miss every target."""
    correct = np.array([1, 0, 1, 0])

    report = evaluate(correct[1:], nap(correct))

    assert report.accuracy == 0.0


def test_napnm_averages_available_history():
    """Early targets average over fewer than N attempts."""
    predictions = napnm([1, 0, 1, 1, 0], window=3)

    assert predictions.tolist() == pytest.approx([1.0, 0.5, 2 / 3, 2 / 3])


def test_napnm_window_one_is_nap():
    """A window of one reduces to next-as-previous."""
    correct = [0, 1, 1, 0, 1]

    assert napnm(correct, 1).tolist() == nap(correct).tolist()


def test_short_sequences_rejected():
    """A single attempt has no target."""
    with pytest.raises(ContractException):
        nap([1])
    with pytest.raises(ContractException):
        napnm([1], 3)


def test_mean_model_metrics_are_degenerate():
    """A constant predictor ranks nothing, never predicts a negative and has no defined correlation."""
    train = Dataset(sequences=(StudentSequence(0, [0, 0, 0, 0], [1, 1, 1, 0]),), skill_count=1)
    labels = np.array([1, 0, 1, 1, 0, 1])

    report = evaluate(labels, np.full(labels.size, mean_model(train)))

    assert report.auc == 0.5
    assert report.mcc is UNDEFINED
    assert report.recall == 1.0

import numpy as np
import pytest

from application.app.baselines.naive import napnm
from application.app.config.config_exceptions import ConfigurationException
from application.app.data.synthetic import generate_synthetic
from application.app.metrics.metrics import auc


def test_shape_follows_parameters():
    """Every student answers every exercise once, in the same order."""
    dataset = generate_synthetic(20, n_exercises=12, n_concepts=3, seed=1)

    assert len(dataset) == 20
    assert dataset.skill_count == 12
    assert all(s.skills.tolist() == list(range(12)) for s in dataset.sequences)
    assert dataset.metadata["n_concepts"] == 3


def test_same_seed_same_data():
    """Generation is reproducible from the seed."""
    assert generate_synthetic(30, seed=4) == generate_synthetic(30, seed=4)
    assert generate_synthetic(30, seed=4) != generate_synthetic(30, seed=5)


def test_two_concept_correctness_rate():
    """At two concepts about 70% of the answers are correct."""
    dataset = generate_synthetic(1000, n_exercises=50, n_concepts=2, seed=0)

    rate = dataset.correct_count / dataset.attempt_count
    assert 0.64 <= rate <= 0.75


def test_five_concept_correctness_rate():
    dataset = generate_synthetic(1000, n_exercises=50, n_concepts=5, seed=0)

    rate = dataset.correct_count / dataset.attempt_count
    assert 0.55 <= rate <= 0.75


def test_own_history_outranks_exercise_identity():
    """A student's recent answers predict better than the per-exercise correctness rate."""
    dataset = generate_synthetic(1000, n_exercises=50, n_concepts=2, seed=0)
    correct = np.stack([s.correct for s in dataset.sequences])
    per_exercise = np.broadcast_to(correct.mean(axis=0)[1:], correct[:, 1:].shape)
    history = np.stack([napnm(row, 9) for row in correct])

    labels = correct[:, 1:].ravel()
    assert auc(labels, history.ravel()) > auc(labels, per_exercise.ravel()) + 0.05


def test_learning_increment_raises_late_correctness():
    """With a large increment later exercises are answered correctly more often."""
    dataset = generate_synthetic(500, n_exercises=40, n_concepts=2, seed=2, learning_increment=0.5)
    correct = np.stack([s.correct for s in dataset.sequences])

    assert correct[:, -10:].mean() > correct[:, :10].mean()


@pytest.mark.parametrize("kwargs", [
    {"n_students": 0},
    {"n_students": 10, "n_concepts": 60},
    {"n_students": 10, "guess": 1.0},
    {"n_students": 10, "ability_scale": -1.0},
])
def test_invalid_parameters(kwargs):
    """Non-positive sizes, more concepts than exercises and a certain guess or a negative spread are rejected."""
    with pytest.raises(ConfigurationException):
        generate_synthetic(**kwargs)

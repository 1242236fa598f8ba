import pytest

from application.app.data.synthetic import generate_synthetic
from application.app.harness.cross_validation import ModelSpec, cross_validate, default_jobs
from domain.hyper_params import Architecture, HyperParams
from domain.train_config import TrainConfig


@pytest.mark.slow
def test_synthetic_two_concept_ordering():
    """On two hidden concepts LSTM-DKT clearly beats NaP9M, which beats BKT and the constant mean."""
    dataset = generate_synthetic(n_students=1000, n_exercises=50, n_concepts=2, seed=0)
    lstm = HyperParams(Architecture.LSTM_DKT, recurrent_size=100, learning_rate=0.01).normalized()
    specs = {
        "mean": ModelSpec("mean"),
        "nap9m": ModelSpec("nap9m"),
        "bkt": ModelSpec("bkt"),
        "glr": ModelSpec("glr"),
        "lstm-dkt": ModelSpec("lstm-dkt", lstm, TrainConfig(max_epochs=30, patience=5)),
    }

    auc = {tag: cross_validate(spec, dataset, k=5, seed=0, jobs=default_jobs()).mean("auc") for tag, spec in specs.items()}

    assert auc["mean"] == 0.5
    assert auc["lstm-dkt"] >= 0.75
    assert auc["lstm-dkt"] >= auc["nap9m"] + 0.05
    assert auc["nap9m"] > auc["bkt"]

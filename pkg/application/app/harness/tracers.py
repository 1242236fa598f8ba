"""
Every model the benchmark evaluates behind one interface: fit on students, score targets t = 2..T of other
students, and write whatever fitted state it has. Model tags follow the shorthand used in result tables.
"""
import logging
from typing import Callable

import numpy as np
import pandas as pd

from application.app.baselines.bkt import fit_bkt, predict_bkt
from application.app.baselines.glr import GLRLayout, design_matrix, fit_glr, predict_glr
from application.app.baselines.naive import mean_model, nap, napnm
from application.app.config.config_exceptions import ConfigurationException
from application.app.engine.engine_exceptions import ContractException
from application.app.engine.param_store import ParamStore
from application.app.harness.trainer import TrainingHistory, train_model
from application.app.models.deep_model import DeepModel
from application.app.models.model_factory import build_model
from domain.bkt_params import BKTParams
from domain.dataset import Dataset
from domain.hyper_params import Architecture, HyperParams
from domain.prediction_batch import PredictionBatch
from domain.train_config import TrainConfig

logger = logging.getLogger(__name__)

BASELINE_TAGS = ("mean", "nap", "nap3m", "nap5m", "nap9m", "bkt", "glr")
DEEP_TAGS = tuple(architecture.value for architecture in Architecture)
MODEL_TAGS = BASELINE_TAGS + DEEP_TAGS


def score_sequences(dataset: Dataset, predict: Callable[[object], np.ndarray]) -> PredictionBatch:
    """Builds the aligned prediction set from a per-sequence predictor returning T-1 probabilities."""
    pieces = []
    for sequence in dataset.sequences:
        targets = len(sequence) - 1
        pieces.append(PredictionBatch(
            students=np.full(targets, sequence.student),
            steps=np.arange(1, targets + 1),
            skills=sequence.skills[1:],
            labels=sequence.correct[1:],
            probabilities=predict(sequence),
        ))
    return PredictionBatch.concatenate(pieces)


class Tracer:
    """
    Base class. Tracers with `early_stopping` are fitted on the training students and monitor the validation
    students; the others are fitted on both.
    """
    early_stopping = False

    def __init__(self, tag: str):
        self.tag = tag
        self.fitted = False
        self.epochs: int | None = None

    def fit(self, train: Dataset, validation: Dataset | None = None, seed: int = 0) -> None:
        raise NotImplementedError

    def predict(self, test: Dataset) -> PredictionBatch:
        raise NotImplementedError

    def save(self, path_stem: str) -> str | None:
        """Writes the fitted state next to `path_stem`; returns the file written, if any."""
        return None

    def _check_fitted(self):
        if not self.fitted:
            raise ContractException(f"Model '{self.tag}' must be fitted before predicting")


class MeanTracer(Tracer):
    def __init__(self):
        super().__init__("mean")
        self.probability = 0.5

    def fit(self, train, validation=None, seed=0):
        self.probability = mean_model(train)
        self.fitted = True

    def predict(self, test):
        self._check_fitted()
        return score_sequences(test, lambda sequence: np.full(len(sequence) - 1, self.probability))


class NextAsPreviousTracer(Tracer):
    """NaP, or NaPNM when `window` is given."""
    def __init__(self, tag: str, window: int | None = None):
        super().__init__(tag)
        self.window = window

    def fit(self, train, validation=None, seed=0):
        self.fitted = True

    def predict(self, test):
        self._check_fitted()
        if self.window is None:
            return score_sequences(test, lambda sequence: nap(sequence.correct))
        return score_sequences(test, lambda sequence: napnm(sequence.correct, self.window))


class BKTTracer(Tracer):
    def __init__(self):
        super().__init__("bkt")
        self.params: BKTParams | None = None

    def fit(self, train, validation=None, seed=0):
        self.params = fit_bkt(train, seed=seed)
        self.fitted = True

    def predict(self, test):
        self._check_fitted()
        return score_sequences(test, lambda sequence: predict_bkt(self.params, sequence.skills, sequence.correct))

    def save(self, path_stem):
        path = f"{path_stem}.bkt.csv"
        rows = [
            {"skill": skill, "L0": p.prior, "T": p.transition, "G": p.guess, "S": p.slip}
            for skill, p in sorted(self.params.skills.items())
        ]
        pd.DataFrame(rows, columns=["skill", "L0", "T", "G", "S"]).to_csv(
            path, index=False, float_format="%.10g", lineterminator="\n"
        )
        return path


class GLRTracer(Tracer):
    """
    Students are matched to their ability column by original label, so pseudo-students created by a split
    policy never borrow the column of an unrelated test student.
    """
    def __init__(self):
        super().__init__("glr")
        self.layout: GLRLayout | None = None
        self.weights: np.ndarray | None = None
        self.columns_by_name: dict[str, int] = {}

    def fit(self, train, validation=None, seed=0):
        self.layout = GLRLayout.from_dataset(train)
        self.columns_by_name = {
            train.student_names.get(student, str(student)): column
            for student, column in self.layout.student_columns.items()
        }
        features, labels = design_matrix(train, self.layout)
        self.weights = fit_glr(features, labels, bias_column=self.layout.bias_column)
        self.fitted = True

    def predict(self, test):
        self._check_fitted()
        columns = {}
        for student in test.students:
            column = self.columns_by_name.get(test.student_names.get(student, str(student)))
            if column is not None:
                columns[student] = column
        features, labels = design_matrix(test, self.layout.rebind(columns), first_position=1)
        probabilities = predict_glr(self.weights, features)
        return PredictionBatch(
            students=np.concatenate([np.full(len(s) - 1, s.student) for s in test.sequences]),
            steps=np.concatenate([np.arange(1, len(s)) for s in test.sequences]),
            skills=np.concatenate([s.skills[1:] for s in test.sequences]),
            labels=labels,
            probabilities=probabilities,
        )

    def save(self, path_stem):
        path = f"{path_stem}.glr.ckpt"
        store = ParamStore()
        store.add("w", self.weights)
        store.save(path, {"model": "glr", "layout": self.layout.to_dict()})
        return path


class DeepTracer(Tracer):
    """A deep architecture trained with early stopping. Initialisation and shuffling follow `hp.seed`."""
    early_stopping = True

    def __init__(self, hp: HyperParams, config: TrainConfig):
        super().__init__(hp.architecture.value)
        self.hp = hp
        self.config = config
        self.model: DeepModel | None = None
        self.history: TrainingHistory | None = None

    def fit(self, train, validation=None, seed=0):
        if validation is None or len(validation) == 0:
            raise ContractException(f"'{self.tag}' needs validation students for early stopping")
        self.model = build_model(self.hp, train.skill_count, max_positions=train.max_attempts - 1)
        self.history = train_model(self.model, train, validation, self.config)
        self.epochs = self.history.epochs
        self.fitted = True

    def predict(self, test):
        self._check_fitted()
        return self.model.predict(test, self.config.batch_size)

    def save(self, path_stem):
        path = f"{path_stem}.ckpt"
        self.model.save(path)
        return path


def build_tracer(tag: str, hyper_params: HyperParams | None = None, config: TrainConfig | None = None) -> Tracer:
    """Creates an unfitted tracer for a model tag. Deep tags take their hyperparameters from `hyper_params`."""
    if tag not in MODEL_TAGS:
        raise ConfigurationException(f"Unknown model '{tag}'. Valid models: {', '.join(MODEL_TAGS)}")
    if tag == "mean":
        return MeanTracer()
    if tag == "nap":
        return NextAsPreviousTracer(tag)
    if tag in ("nap3m", "nap5m", "nap9m"):
        return NextAsPreviousTracer(tag, window=int(tag[3]))
    if tag == "bkt":
        return BKTTracer()
    if tag == "glr":
        return GLRTracer()

    hp = hyper_params or HyperParams(architecture=Architecture(tag))
    if hp.architecture.value != tag:
        raise ConfigurationException(f"Hyperparameters are for '{hp.architecture.value}', not '{tag}'")
    config = config or TrainConfig(batch_size=hp.batch_size)
    return DeepTracer(hp, config)

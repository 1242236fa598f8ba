import logging

import numpy as np

from application.app.engine.param_store import ParamKind, ParamSpec, ParamStore
from application.app.engine.tensor import (
    PROBABILITY_CLIP,
    Tensor,
    add,
    binary_cross_entropy,
    dropout,
    gather_last,
    matmul,
    no_grad,
    reshape,
    sigmoid,
    tanh,
)
from application.app.models.batching import Batch, make_batches
from application.app.models.embedding import embedding_specs
from domain.dataset import Dataset
from domain.hyper_params import HyperParams, OutputVariant
from domain.prediction_batch import PredictionBatch

logger = logging.getLogger(__name__)


class DeepModel:
    """
    A deep knowledge-tracing model: its hyperparameters, skill count and ParamStore.

    Subclasses declare their parameters in `core_specs` and map a padded Batch to the (batch, T-1) tensor of
    head inputs in `encode`; the output head, dropout on the head input, loss and prediction are shared.
    Prediction t scores attempt t+1 using attempts 1..t and the skill of attempt t+1 only.
    """
    dropout_on_head_input = True

    def __init__(self, hp: HyperParams, skill_count: int, store: ParamStore, max_positions: int | None = None):
        self.hp = hp
        self.skill_count = skill_count
        self.store = store
        self.max_positions = max_positions

    # --- parameter inventory

    @classmethod
    def core_specs(cls, hp: HyperParams, skill_count: int, max_positions: int | None) -> list[ParamSpec]:
        raise NotImplementedError

    @classmethod
    def head_input_width(cls, hp: HyperParams, skill_count: int) -> int:
        raise NotImplementedError

    @classmethod
    def head_specs(cls, hp: HyperParams, skill_count: int) -> list[ParamSpec]:
        width = cls.head_input_width(hp, skill_count)
        if hp.output_variant is OutputVariant.OUTPUT_PER_SKILL:
            return [
                ParamSpec("W_y", (width, skill_count)),
                ParamSpec("b_y", (skill_count,), ParamKind.BIAS),
            ]
        return [
            ParamSpec("W_s", (width, hp.summary_size)),
            ParamSpec("b_s", (hp.summary_size,), ParamKind.BIAS),
            ParamSpec("W_y", (hp.summary_size, 1)),
            ParamSpec("b_y", (1,), ParamKind.BIAS),
        ]

    @classmethod
    def param_specs(cls, hp: HyperParams, skill_count: int, max_positions: int | None = None) -> list[ParamSpec]:
        return (
            embedding_specs(hp, skill_count)
            + cls.core_specs(hp, skill_count, max_positions)
            + cls.head_specs(hp, skill_count)
        )

    @property
    def parameter_count(self) -> int:
        return self.store.count()

    # --- forward

    def encode(self, batch: Batch, training: bool, rng: np.random.Generator | None) -> Tensor:
        raise NotImplementedError

    def head(self, features: Tensor, next_skills: np.ndarray) -> Tensor:
        """
        Output-per-skill: sigmoid(features W_y + b_y) over all skills, component s_{t+1} selected.
        Skills-to-scalar: sigmoid(tanh(features W_s + b_s) W_y + b_y).
        """
        params = self.store
        if self.hp.output_variant is OutputVariant.OUTPUT_PER_SKILL:
            per_skill = sigmoid(add(matmul(features, params["W_y"]), params["b_y"]))
            return gather_last(per_skill, next_skills)
        summary = tanh(add(matmul(features, params["W_s"]), params["b_s"]))
        scalar = sigmoid(add(matmul(summary, params["W_y"]), params["b_y"]))
        return reshape(scalar, scalar.shape[:-1])

    def skill_vector(self, batch: Batch) -> np.ndarray:
        """The full output-per-skill vector at every step (batch, T-1, S)."""
        with no_grad():
            features = self.encode(batch, training=False, rng=None)
            return sigmoid(add(matmul(features, self.store["W_y"]), self.store["b_y"])).data

    def forward(self, batch: Batch, training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        """Probabilities for targets t = 2..T, shape (batch, T-1)."""
        features = self.encode(batch, training, rng)
        if self.dropout_on_head_input:
            features = dropout(features, self.hp.dropout_rate, training, rng)
        return self.head(features, batch.next_skills)

    def loss(self, batch: Batch, training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        probabilities = self.forward(batch, training, rng)
        return binary_cross_entropy(probabilities, batch.target_labels, batch.target_mask)

    def predict(self, dataset: Dataset, batch_size: int | None = None) -> PredictionBatch:
        """Scores every target of every sequence; probabilities are clipped into [1e-7, 1-1e-7]."""
        pieces = []
        with no_grad():
            for batch in make_batches(dataset, batch_size or self.hp.batch_size):
                probabilities = self.forward(batch, training=False).data
                rows, columns = np.nonzero(batch.target_mask)
                pieces.append(PredictionBatch(
                    students=batch.students[rows],
                    steps=columns + 1,
                    skills=batch.next_skills[rows, columns],
                    labels=batch.target_labels[rows, columns],
                    probabilities=np.clip(probabilities[rows, columns], PROBABILITY_CLIP, 1.0 - PROBABILITY_CLIP),
                ))
        return PredictionBatch.concatenate(pieces)

    # --- persistence

    def manifest(self) -> dict:
        return {
            "architecture": self.hp.architecture.value,
            "hyper_params": self.hp.to_dict(),
            "skill_count": self.skill_count,
            "max_positions": self.max_positions,
            "seed": self.hp.seed,
        }

    def save(self, path: str) -> None:
        self.store.save(path, self.manifest())
        logger.info(f"{self.hp.architecture.value} checkpoint written to '{path}' ({self.parameter_count} parameters)")

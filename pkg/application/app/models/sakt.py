import logging
import math

import numpy as np

from application.app.config.config_exceptions import ConfigurationException
from application.app.engine.param_store import ParamKind, ParamSpec
from application.app.engine.tensor import (
    Tensor,
    add,
    concat,
    dropout,
    masked_softmax,
    matmul,
    no_grad,
    relu,
    reshape,
    sigmoid,
    take_rows,
    transpose,
)
from application.app.models.batching import Batch
from application.app.models.deep_model import DeepModel
from application.app.models.embedding import embed_input
from domain.hyper_params import HyperParams, OutputVariant

logger = logging.getLogger(__name__)


class SAKT(DeepModel):
    """
    Self-attentive knowledge tracing.

    Queries come from the key embedding of skill t+1; keys and values from the value embeddings of attempts
    1..T-1 plus a learned position embedding W_p. Query t attends to attempts 1..t only. Attention output is
    projected (W_o), then passes a ReLU layer and a linear layer before the output head; dropout follows the
    attention projection and the feed-forward block. Under skills-to-scalar the linear layer is S' wide and
    feeds the one-neuron sigmoid directly. Sequences longer than the position table are scored in consecutive
    windows of `max_positions` targets.
    """
    dropout_on_head_input = False

    @classmethod
    def core_specs(cls, hp: HyperParams, skill_count: int, max_positions: int | None) -> list[ParamSpec]:
        size = hp.recurrent_size
        heads = hp.attention_heads
        if heads is None or heads < 1:
            raise ConfigurationException(f"SAKT needs a positive number of attention heads, got {heads}")
        if size % heads:
            raise ConfigurationException(f"SAKT attention size {size} is not divisible by {heads} heads")
        if not max_positions or max_positions < 1:
            raise ConfigurationException("SAKT needs the number of input positions (longest training sequence - 1)")
        value_width = hp.value_width(skill_count)
        specs = [
            ParamSpec("W_p", (max_positions, value_width), ParamKind.EMBEDDING),
            ParamSpec("W_k", (hp.key_width(skill_count), size)),
        ]
        if not hp.shared_kv_projection:
            specs.append(ParamSpec("W_kv", (value_width, size)))
        specs += [
            ParamSpec("W_v", (value_width, size)),
            ParamSpec("W_o", (size, size)),
            ParamSpec("b_o", (size,), ParamKind.BIAS),
            ParamSpec("W_f1", (size, size)),
            ParamSpec("b_f1", (size,), ParamKind.BIAS),
            ParamSpec("W_f2", (size, cls.head_input_width(hp, skill_count))),
            ParamSpec("b_f2", (cls.head_input_width(hp, skill_count),), ParamKind.BIAS),
        ]
        return specs

    @classmethod
    def head_input_width(cls, hp: HyperParams, skill_count: int) -> int:
        if hp.output_variant is OutputVariant.SKILLS_TO_SCALAR:
            return hp.summary_size
        return hp.recurrent_size

    @classmethod
    def head_specs(cls, hp: HyperParams, skill_count: int) -> list[ParamSpec]:
        if hp.output_variant is OutputVariant.OUTPUT_PER_SKILL:
            return super().head_specs(hp, skill_count)
        return [
            ParamSpec("W_y", (hp.summary_size, 1)),
            ParamSpec("b_y", (1,), ParamKind.BIAS),
        ]

    @property
    def heads(self) -> int:
        return self.hp.attention_heads

    def head(self, features: Tensor, next_skills: np.ndarray) -> Tensor:
        if self.hp.output_variant is OutputVariant.OUTPUT_PER_SKILL:
            return super().head(features, next_skills)
        scalar = sigmoid(add(matmul(features, self.store["W_y"]), self.store["b_y"]))
        return reshape(scalar, scalar.shape[:-1])

    def encode(self, batch: Batch, training: bool, rng: np.random.Generator | None) -> Tensor:
        steps = batch.length - 1
        if steps <= self.max_positions:
            return self._encode_window(batch, training, rng)[0]
        logger.warning(
            f"SAKT: {steps} input positions exceed the position table ({self.max_positions}); scoring in windows"
        )
        pieces = []
        for start in range(0, steps, self.max_positions):
            window = batch.window(start, min(start + self.max_positions, steps) + 1)
            pieces.append(self._encode_window(window, training, rng)[0])
        return concat(pieces, axis=1)

    def _encode_window(self, batch: Batch, training: bool, rng: np.random.Generator | None) -> tuple[Tensor, Tensor]:
        params = self.store
        size = self.hp.recurrent_size
        heads = self.heads
        depth = size // heads
        steps = batch.length - 1
        rows = batch.size

        values, keys = embed_input(params, self.hp, self.skill_count, batch.encoded, batch.next_skills)
        positioned = add(values, take_rows(params["W_p"], np.arange(steps)))
        queries = matmul(keys, params["W_k"])
        attended_keys = matmul(positioned, params["W_v"] if self.hp.shared_kv_projection else params["W_kv"])
        attended_values = matmul(positioned, params["W_v"])

        def split(tensor):
            return transpose(reshape(tensor, (rows, steps, heads, depth)), (0, 2, 1, 3))

        scores = matmul(split(queries), transpose(split(attended_keys), (0, 1, 3, 2))) * (1.0 / math.sqrt(size))
        causal = np.tril(np.ones((steps, steps), dtype=np.int64))
        attention = masked_softmax(scores, causal)
        mixed = reshape(transpose(matmul(attention, split(attended_values)), (0, 2, 1, 3)), (rows, steps, size))

        projected = add(matmul(mixed, params["W_o"]), params["b_o"])
        projected = dropout(projected, self.hp.dropout_rate, training, rng)
        hidden = relu(add(matmul(projected, params["W_f1"]), params["b_f1"]))
        output = add(matmul(hidden, params["W_f2"]), params["b_f2"])
        return dropout(output, self.hp.dropout_rate, training, rng), attention

    def attention_weights(self, batch: Batch) -> np.ndarray:
        """(batch, heads, T-1, T-1) attention of the first window."""
        with no_grad():
            return self._encode_window(batch, training=False, rng=None)[1].data

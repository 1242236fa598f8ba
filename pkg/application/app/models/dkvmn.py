import numpy as np

from application.app.engine.param_store import ParamKind, ParamSpec
from application.app.engine.tensor import Tensor, add, concat, no_grad, select_step, stack
from application.app.models.batching import Batch
from application.app.models.deep_model import DeepModel
from application.app.models.embedding import embed_input
from application.app.models.kernels import dkvmn_read, dkvmn_write
from domain.hyper_params import Architecture, HyperParams


class DKVMN(DeepModel):
    """
    Dynamic key-value memory network, repository (`dkvmn`) or article (`dkvmn-paper`) attention.

    At step t the key of skill t+1 reads the value memory, which holds attempts 1..t-1; the head reads
    concat(k_t, r_t); then attempt t is written. The first read depends only on the skill and the initial
    (trainable) value memory M_v0.
    """

    @property
    def article_variant(self) -> bool:
        return self.hp.architecture is Architecture.DKVMN_PAPER

    @classmethod
    def core_specs(cls, hp: HyperParams, skill_count: int, max_positions: int | None) -> list[ParamSpec]:
        slots = hp.recurrent_size
        key_width = hp.key_width(skill_count)
        value_width = hp.value_width(skill_count)
        specs = [ParamSpec("M_k", (slots, key_width), ParamKind.MEMORY)]
        if hp.architecture is Architecture.DKVMN:
            specs += [
                ParamSpec("W_kq", (key_width, key_width)),
                ParamSpec("b_kq", (key_width,), ParamKind.BIAS),
                ParamSpec("b_w", (slots,), ParamKind.BIAS),
            ]
        specs += [
            ParamSpec("W_e", (value_width, value_width)),
            ParamSpec("b_e", (value_width,), ParamKind.BIAS),
            ParamSpec("W_a", (value_width, value_width)),
            ParamSpec("b_a", (value_width,), ParamKind.BIAS),
            ParamSpec("M_v0", (slots, value_width), ParamKind.MEMORY),
        ]
        return specs

    @classmethod
    def head_input_width(cls, hp: HyperParams, skill_count: int) -> int:
        return hp.key_width(skill_count) + hp.value_width(skill_count)

    def initial_memory(self, batch_size: int) -> Tensor:
        initial = self.store["M_v0"]
        return add(Tensor(np.zeros((batch_size,) + initial.shape)), initial)

    def encode(self, batch: Batch, training: bool, rng: np.random.Generator | None) -> Tensor:
        params = self.store
        values, keys = embed_input(params, self.hp, self.skill_count, batch.encoded, batch.next_skills)
        memory = self.initial_memory(batch.size)
        features = []
        for t in range(batch.length - 1):
            key = select_step(keys, t)
            weights, read = dkvmn_read(key, memory, params, self.article_variant)
            features.append(concat([key, read]))
            memory = dkvmn_write(select_step(values, t), weights, memory, params, self.hp.weighted_add)
        return stack(features, axis=1)

    def attention_weights(self, batch: Batch) -> np.ndarray:
        """w_t for every step, (batch, T-1, M)."""
        with no_grad():
            values, keys = embed_input(self.store, self.hp, self.skill_count, batch.encoded, batch.next_skills)
            memory = self.initial_memory(batch.size)
            collected = []
            for t in range(batch.length - 1):
                weights, _ = dkvmn_read(select_step(keys, t), memory, self.store, self.article_variant)
                collected.append(weights.data)
                memory = dkvmn_write(select_step(values, t), weights, memory, self.store, self.hp.weighted_add)
        return np.stack(collected, axis=1)

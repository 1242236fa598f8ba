import numpy as np

from application.app.engine.param_store import ParamKind, ParamSpec
from application.app.engine.tensor import Tensor, concat, matmul, select_step, stack
from application.app.models.batching import Batch
from application.app.models.deep_model import DeepModel
from application.app.models.embedding import embed_input
from application.app.models.kernels import lstm_step, vanilla_step
from domain.hyper_params import Architecture, HyperParams, OutputVariant

LSTM_GATES = ("i", "f", "o", "m")


class RecurrentDKT(DeepModel):
    """
    Vanilla-DKT, LSTM-DKT and LSTM-DKT-S+. The kernel reads x_t = embedded attempt t (LSTM-DKT-S+ appends the
    key of skill t+1); the head reads h_t, or concat(h_t, key) for the LSTM-DKT-S+ skills-to-scalar summary.
    """

    @staticmethod
    def input_width(hp: HyperParams, skill_count: int) -> int:
        width = hp.value_width(skill_count)
        if hp.architecture is Architecture.LSTM_DKT_S_PLUS:
            width += hp.key_width(skill_count)
        return width

    @classmethod
    def core_specs(cls, hp: HyperParams, skill_count: int, max_positions: int | None) -> list[ParamSpec]:
        width = cls.input_width(hp, skill_count)
        hidden = hp.recurrent_size
        if hp.architecture is Architecture.VANILLA_DKT:
            return [
                ParamSpec("W_x", (width, hidden)),
                ParamSpec("W_h", (hidden, hidden)),
                ParamSpec("b", (hidden,), ParamKind.BIAS),
            ]
        return (
            [ParamSpec(f"W_{gate}", (width, hidden)) for gate in LSTM_GATES]
            + [ParamSpec(f"U_{gate}", (hidden, hidden)) for gate in LSTM_GATES]
            + [ParamSpec(f"b_{gate}", (hidden,), ParamKind.BIAS) for gate in LSTM_GATES]
        )

    @classmethod
    def head_input_width(cls, hp: HyperParams, skill_count: int) -> int:
        if hp.architecture is Architecture.LSTM_DKT_S_PLUS and hp.output_variant is OutputVariant.SKILLS_TO_SCALAR:
            return hp.recurrent_size + hp.key_width(skill_count)
        return hp.recurrent_size

    def encode(self, batch: Batch, training: bool, rng: np.random.Generator | None) -> Tensor:
        params = self.store
        values, keys = embed_input(params, self.hp, self.skill_count, batch.encoded, batch.next_skills)
        inputs = concat([values, keys]) if self.hp.architecture is Architecture.LSTM_DKT_S_PLUS else values
        steps = batch.length - 1
        hidden = Tensor(np.zeros((batch.size, self.hp.recurrent_size)))
        states = []

        if self.hp.architecture is Architecture.VANILLA_DKT:
            projected = matmul(inputs, params["W_x"])
            for t in range(steps):
                hidden = vanilla_step(select_step(projected, t), hidden, params)
                states.append(hidden)
        else:
            projected = {gate: matmul(inputs, params[f"W_{gate}"]) for gate in LSTM_GATES}
            cell = Tensor(np.zeros((batch.size, self.hp.recurrent_size)))
            for t in range(steps):
                step_inputs = {gate: select_step(projected[gate], t) for gate in LSTM_GATES}
                hidden, cell = lstm_step(step_inputs, hidden, cell, params, self.hp.swapped_lstm_activations)
                states.append(hidden)

        features = stack(states, axis=1)
        if self.hp.architecture is Architecture.LSTM_DKT_S_PLUS and self.hp.output_variant is OutputVariant.SKILLS_TO_SCALAR:
            features = concat([features, keys])
        return features

import logging

from application.app.config.config_exceptions import ConfigurationException
from application.app.engine.param_store import ParamStore, init_params
from application.app.models.deep_model import DeepModel
from application.app.models.dkvmn import DKVMN
from application.app.models.rnn_dkt import RecurrentDKT
from application.app.models.sakt import SAKT
from domain.hyper_params import STUDY_GRID, Architecture, GridDomain, HyperParams, InputVariant, OutputVariant

logger = logging.getLogger(__name__)

MODEL_CLASSES: dict[Architecture, type[DeepModel]] = {
    Architecture.VANILLA_DKT: RecurrentDKT,
    Architecture.LSTM_DKT: RecurrentDKT,
    Architecture.LSTM_DKT_S_PLUS: RecurrentDKT,
    Architecture.DKVMN: DKVMN,
    Architecture.DKVMN_PAPER: DKVMN,
    Architecture.SAKT: SAKT,
}


def validate_hyper_params(hp: HyperParams, grid: GridDomain = STUDY_GRID) -> HyperParams:
    """
    Normalises `hp` and rejects contradictions. Unless `off_grid` is set every searched value must lie in `grid`.
    """
    hp = hp.normalized()
    architecture = hp.architecture
    if hp.swapped_lstm_activations and architecture not in (Architecture.LSTM_DKT, Architecture.LSTM_DKT_S_PLUS):
        raise ConfigurationException(f"swapped_lstm_activations applies to LSTM architectures, not {architecture.value}")
    if hp.weighted_add and architecture not in (Architecture.DKVMN, Architecture.DKVMN_PAPER):
        raise ConfigurationException(f"weighted_add applies to DKVMN architectures, not {architecture.value}")
    if hp.shared_kv_projection and architecture is not Architecture.SAKT:
        raise ConfigurationException(f"shared_kv_projection applies to SAKT, not {architecture.value}")
    if architecture is Architecture.SAKT and (hp.attention_heads is None or hp.attention_heads < 1):
        raise ConfigurationException(f"SAKT needs a positive number of attention heads, got {hp.attention_heads}")
    if architecture is Architecture.SAKT and hp.recurrent_size % hp.attention_heads:
        raise ConfigurationException(
            f"SAKT attention size {hp.recurrent_size} is not divisible by {hp.attention_heads} heads"
        )
    if hp.input_variant is InputVariant.EMBEDDING:
        if hp.value_embed_size is None or (architecture.uses_keys and hp.key_embed_size is None):
            raise ConfigurationException("Embedding input needs key and value embedding sizes")
    if hp.output_variant is OutputVariant.SKILLS_TO_SCALAR and hp.summary_size is None:
        raise ConfigurationException("Skills-to-scalar output needs a summary size")
    if not 0.0 <= hp.dropout_rate < 1.0:
        raise ConfigurationException(f"Dropout rate must be in [0, 1), got {hp.dropout_rate}")

    if not hp.off_grid:
        checks = [
            ("recurrent_size", hp.recurrent_size, grid.recurrent_sizes),
            ("key_embed_size", hp.key_embed_size, grid.key_embed_sizes),
            ("value_embed_size", hp.value_embed_size, grid.value_embed_sizes),
            ("summary_size", hp.summary_size, grid.summary_sizes),
            ("learning_rate", hp.learning_rate, grid.learning_rates),
            ("dropout_rate", hp.dropout_rate, grid.dropout_rates),
            ("attention_heads", hp.attention_heads, grid.attention_heads),
            ("batch_size", hp.batch_size, grid.batch_sizes),
            ("seed", hp.seed, grid.seeds),
        ]
        for name, value, allowed in checks:
            if value is not None and value not in allowed:
                raise ConfigurationException(
                    f"{name}={value} is outside the grid {list(allowed)}; set off_grid=true to allow it"
                )
    return hp


def build_model(hp: HyperParams, skill_count: int, max_positions: int | None = None) -> DeepModel:
    """
    Allocates exactly the parameters `hp` needs, initialised from `hp.seed`.
    `max_positions` sizes the SAKT position table (longest training sequence - 1).
    """
    hp = validate_hyper_params(hp)
    model_class = MODEL_CLASSES[hp.architecture]
    positions = max_positions if model_class is SAKT else None
    store = init_params(model_class.param_specs(hp, skill_count, positions), hp.seed)
    model = model_class(hp, skill_count, store, positions)
    logger.info(
        f"Built {hp.architecture.value} ({hp.config_key()}) for {skill_count} skills: "
        f"{model.parameter_count} trainable parameters"
    )
    return model


def load_model(path: str) -> DeepModel:
    """Rebuilds a model from a checkpoint written by DeepModel.save."""
    store, manifest = ParamStore.load(path)
    hp = HyperParams.from_dict(manifest["hyper_params"])
    model_class = MODEL_CLASSES[hp.architecture]
    expected = [spec.name for spec in model_class.param_specs(hp, manifest["skill_count"], manifest["max_positions"])]
    if expected != store.names():
        raise ConfigurationException(f"Checkpoint '{path}' does not match the {hp.architecture.value} parameter inventory")
    return model_class(hp, manifest["skill_count"], store, manifest["max_positions"])

from dataclasses import dataclass, fields, replace
from enum import Enum


class Architecture(str, Enum):
    VANILLA_DKT = "vanilla-dkt"
    LSTM_DKT = "lstm-dkt"
    LSTM_DKT_S_PLUS = "lstm-dkt-s+"
    DKVMN = "dkvmn"
    DKVMN_PAPER = "dkvmn-paper"
    SAKT = "sakt"

    @property
    def uses_keys(self) -> bool:
        """Whether the architecture consumes the next-skill key input."""
        return self in (Architecture.LSTM_DKT_S_PLUS, Architecture.DKVMN, Architecture.DKVMN_PAPER, Architecture.SAKT)

    @property
    def is_recurrent(self) -> bool:
        return self in (Architecture.VANILLA_DKT, Architecture.LSTM_DKT, Architecture.LSTM_DKT_S_PLUS)


class InputVariant(str, Enum):
    ONE_HOT = "one-hot"
    EMBEDDING = "embedding"


class OutputVariant(str, Enum):
    OUTPUT_PER_SKILL = "output-per-skill"
    SKILLS_TO_SCALAR = "skills-to-scalar"


@dataclass(frozen=True)
class GridDomain:
    """The option sets searched per hyperparameter. Defaults are the full benchmark grid."""
    recurrent_sizes: tuple[int, ...] = (50, 100)
    key_embed_sizes: tuple[int, ...] = (20, 50)
    value_embed_sizes: tuple[int, ...] = (20, 50)
    summary_sizes: tuple[int, ...] = (50, 100)
    input_variants: tuple[InputVariant, ...] = (InputVariant.ONE_HOT, InputVariant.EMBEDDING)
    output_variants: tuple[OutputVariant, ...] = (OutputVariant.OUTPUT_PER_SKILL, OutputVariant.SKILLS_TO_SCALAR)
    learning_rates: tuple[float, ...] = (0.01, 0.001)
    dropout_rates: tuple[float, ...] = (0.2,)
    attention_heads: tuple[int, ...] = (1, 5)
    batch_sizes: tuple[int, ...] = (32,)
    seeds: tuple[int, ...] = (13, 42)

    def to_dict(self):
        return {f.name: [getattr(v, "value", v) for v in getattr(self, f.name)] for f in fields(self)}


STUDY_GRID = GridDomain()


@dataclass(frozen=True)
class HyperParams:
    """
    One grid-search point for a deep model.

    Sizes that a variant makes irrelevant are normalised to None: key/value embedding sizes under one-hot
    input, the summary size under output-per-skill, the key size for architectures without keys and the
    head count outside SAKT. `recurrent_size` is the hidden size (RNNs), memory slot count M (DKVMN) or
    attention size A (SAKT).
    """
    architecture: Architecture
    recurrent_size: int = 50
    key_embed_size: int | None = 20
    value_embed_size: int | None = 20
    summary_size: int | None = 50
    input_variant: InputVariant = InputVariant.EMBEDDING
    output_variant: OutputVariant = OutputVariant.OUTPUT_PER_SKILL
    learning_rate: float = 0.001
    dropout_rate: float = 0.2
    attention_heads: int | None = 1
    batch_size: int = 32
    seed: int = 13
    swapped_lstm_activations: bool = False
    weighted_add: bool = False
    shared_kv_projection: bool = False
    off_grid: bool = False

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "input_variant", InputVariant(self.input_variant))
        object.__setattr__(self, "output_variant", OutputVariant(self.output_variant))

    def normalized(self) -> "HyperParams":
        """Returns a copy where every size the variants ignore is None."""
        one_hot = self.input_variant is InputVariant.ONE_HOT
        return replace(
            self,
            key_embed_size=None if one_hot or not self.architecture.uses_keys else self.key_embed_size,
            value_embed_size=None if one_hot else self.value_embed_size,
            summary_size=None if self.output_variant is OutputVariant.OUTPUT_PER_SKILL else self.summary_size,
            attention_heads=self.attention_heads if self.architecture is Architecture.SAKT else None,
        )

    def key_width(self, skill_count: int) -> int:
        if self.input_variant is InputVariant.ONE_HOT:
            return skill_count
        return self.key_embed_size

    def value_width(self, skill_count: int) -> int:
        if self.input_variant is InputVariant.ONE_HOT:
            return 2 * skill_count
        return self.value_embed_size

    def sort_key(self) -> tuple:
        """Total order used for deterministic tie-breaking (None sorts first)."""
        key = []
        for f in fields(self):
            value = getattr(self, f.name)
            value = getattr(value, "value", value)
            key.append((0, "") if value is None else (1, value))
        return tuple(key)

    def config_key(self) -> str:
        """Short human-readable identity of the point, e.g. `r50-k20-v20-s--emb-ops-lr0.001-h1-seed13`."""
        def size(value):
            return "-" if value is None else str(value)

        return "-".join([
            f"r{self.recurrent_size}",
            f"k{size(self.key_embed_size)}",
            f"v{size(self.value_embed_size)}",
            f"s{size(self.summary_size)}",
            "onehot" if self.input_variant is InputVariant.ONE_HOT else "emb",
            "ops" if self.output_variant is OutputVariant.OUTPUT_PER_SKILL else "s2s",
            f"lr{self.learning_rate:g}",
            f"h{size(self.attention_heads)}",
            f"seed{self.seed}",
        ])

    def to_dict(self):
        return {f.name: getattr(getattr(self, f.name), "value", getattr(self, f.name)) for f in fields(self)}

    @staticmethod
    def from_dict(values: dict) -> "HyperParams":
        known = {f.name for f in fields(HyperParams)}
        return HyperParams(**{name: value for name, value in values.items() if name in known})

import numpy as np

from application.app.data.data_exceptions import AttemptOutOfBoundsException
from application.app.engine.param_store import ParamKind, ParamSpec
from application.app.engine.tensor import Tensor, one_hot, take_rows
from domain.hyper_params import HyperParams, InputVariant


def embedding_specs(hp: HyperParams, skill_count: int) -> list[ParamSpec]:
    """E_v (2S x V) and, for architectures with keys, E_k (S x K). One-hot input has no parameters."""
    if hp.input_variant is InputVariant.ONE_HOT:
        return []
    specs = [ParamSpec("E_v", (2 * skill_count, hp.value_embed_size), ParamKind.EMBEDDING)]
    if hp.architecture.uses_keys:
        specs.append(ParamSpec("E_k", (skill_count, hp.key_embed_size), ParamKind.EMBEDDING))
    return specs


def embed_values(params, hp: HyperParams, skill_count: int, encoded) -> Tensor:
    """Value vectors of encoded attempts 2s+c: a 2S one-hot, or row 2s+c of E_v."""
    encoded = np.asarray(encoded, dtype=np.int64)
    if encoded.size and (encoded.min() < 0 or encoded.max() >= 2 * skill_count):
        bad = int(encoded[(encoded < 0) | (encoded >= 2 * skill_count)].ravel()[0])
        raise AttemptOutOfBoundsException(bad // 2, skill_count)
    if hp.input_variant is InputVariant.ONE_HOT:
        return one_hot(encoded, 2 * skill_count)
    return take_rows(params["E_v"], encoded)


def embed_keys(params, hp: HyperParams, skill_count: int, skills) -> Tensor:
    """Key vectors of next skills: an S one-hot, or row s of E_k."""
    skills = np.asarray(skills, dtype=np.int64)
    if skills.size and (skills.min() < 0 or skills.max() >= skill_count):
        raise AttemptOutOfBoundsException(int(skills[(skills < 0) | (skills >= skill_count)].ravel()[0]), skill_count)
    if hp.input_variant is InputVariant.ONE_HOT:
        return one_hot(skills, skill_count)
    return take_rows(params["E_k"], skills)


def embed_input(params, hp: HyperParams, skill_count: int, encoded, next_skills) -> tuple[Tensor, Tensor | None]:
    """(value vector of the current attempt, key vector of the next skill or None when the architecture has no keys)."""
    values = embed_values(params, hp, skill_count, encoded)
    keys = embed_keys(params, hp, skill_count, next_skills) if hp.architecture.uses_keys else None
    return values, keys

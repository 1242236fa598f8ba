import logging
import os
from dataclasses import fields, replace

from dotenv import dotenv_values

from application.app.config.config_exceptions import ConfigurationException, UnknownConfigKeyException
from domain.hyper_params import STUDY_GRID, GridDomain, HyperParams, InputVariant, OutputVariant
from domain.train_config import TrainConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_DIR = "static"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigLoader:
    """
    Reads the `key=value` config files (column mappings, hyperparameters, command configs).

    A bare file name that does not exist relative to the working directory is looked up under
    `$KT_CONFIG_DIR` (default `static/`), so `--hyper lstm-dkt.env` finds `static/hyper/lstm-dkt.env`.
    """

    @staticmethod
    def resolve(path: str, subdirectory: str = "") -> str:
        if os.path.exists(path):
            return path
        config_dir = os.environ.get("KT_CONFIG_DIR", DEFAULT_CONFIG_DIR)
        for candidate in (os.path.join(config_dir, subdirectory, path), os.path.join(config_dir, path)):
            if os.path.exists(candidate):
                return candidate
        raise ConfigurationException(f"Config file not found: {path} (also searched {config_dir}/{subdirectory})")

    @staticmethod
    def read(path: str, valid_keys, subdirectory: str = "") -> dict[str, str]:
        """Returns the non-empty values of the file. Unknown keys raise UnknownConfigKeyException."""
        resolved = ConfigLoader.resolve(path, subdirectory)
        values = dotenv_values(resolved)
        valid_keys = set(valid_keys)
        for key in values:
            if key not in valid_keys:
                raise UnknownConfigKeyException(resolved, key, valid_keys)
        logger.debug(f"Config '{resolved}' read with keys {sorted(values)}")
        return {key: value for key, value in values.items() if value not in (None, "")}

    @staticmethod
    def load_hyper_params(path: str, architecture: str) -> tuple[HyperParams, TrainConfig]:
        """
        Reads a hyperparameter file. Any HyperParams field plus the TrainConfig fields may appear;
        the architecture always comes from the caller (the model tag).
        """
        hyper_fields = {f.name: f for f in fields(HyperParams) if f.name != "architecture"}
        train_fields = {f.name: f for f in fields(TrainConfig)}
        values = ConfigLoader.read(path, set(hyper_fields) | set(train_fields), subdirectory="hyper")

        hyper_values = {}
        train_values = {}
        for key, raw in values.items():
            if key in hyper_fields:
                hyper_values[key] = _coerce(path, key, raw, _field_type(hyper_fields[key]))
            if key in train_fields:
                train_values[key] = _coerce(path, key, raw, _field_type(train_fields[key]))
        if "batch_size" in hyper_values:
            train_values.setdefault("batch_size", hyper_values["batch_size"])
        try:
            hyper_params = HyperParams(architecture=architecture, **hyper_values)
            train_config = TrainConfig(**train_values)
        except ValueError as e:
            raise ConfigurationException(f"Invalid hyperparameter file '{path}': {e}")
        logger.info(f"Hyperparameters loaded from '{path}': {hyper_params.config_key()}")
        return hyper_params, train_config


def _field_type(field) -> type:
    default = field.default
    if isinstance(default, bool):
        return bool
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    return str


def _coerce(path: str, key: str, raw: str, kind: type):
    text = raw.strip()
    try:
        if kind is bool:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise ConfigurationException(f"Config '{path}': value '{raw}' for '{key}' is not a valid {kind.__name__}")
    return text


def merge_settings(defaults: dict, config: dict, flags: dict) -> dict:
    """Flags override config values, config values override defaults. `None` flags count as unset."""
    merged = dict(defaults)
    merged.update(config)
    merged.update({key: value for key, value in flags.items() if value is not None})
    return merged


def read_command_config(path: str, defaults: dict) -> dict:
    """
    A command config: keys are the long flag names with '-' replaced by '_'. Values take the type of the
    flag's default; flags without a typed default stay strings.
    """
    values = ConfigLoader.read(path, defaults)
    return {
        key: _coerce(path, key, raw, type(defaults[key]) if defaults[key] is not None else str)
        for key, raw in values.items()
    }


def load_grid(path: str) -> GridDomain:
    """A grid file lists comma-separated option values per GridDomain field; absent fields keep the study grid."""
    grid_fields = {f.name: f for f in fields(GridDomain)}
    values = ConfigLoader.read(path, grid_fields, subdirectory="grids")
    options = {}
    for key, raw in values.items():
        kind = type(getattr(STUDY_GRID, key)[0])
        items = [item.strip() for item in raw.split(",") if item.strip()]
        if not items:
            raise ConfigurationException(f"Grid '{path}': '{key}' lists no values")
        if kind in (InputVariant, OutputVariant):
            try:
                options[key] = tuple(kind(item) for item in items)
            except ValueError as e:
                raise ConfigurationException(f"Grid '{path}': {e}")
        else:
            options[key] = tuple(_coerce(path, key, item, kind) for item in items)
    logger.info(f"Grid loaded from '{path}': {sorted(options)} overridden")
    return replace(STUDY_GRID, **options)

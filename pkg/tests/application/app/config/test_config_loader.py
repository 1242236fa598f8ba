import os

import pytest

from application.app.config.config_exceptions import ConfigurationException, UnknownConfigKeyException
from application.app.config.config_loader import (
    ConfigLoader,
    load_grid,
    merge_settings,
    read_command_config,
)
from domain.hyper_params import STUDY_GRID, Architecture, InputVariant, OutputVariant

HYPER_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "..", "..", "static", "hyper")


@pytest.fixture
def config_dir(tmp_path, monkeypatch):
    (tmp_path / "hyper").mkdir()
    (tmp_path / "grids").mkdir()
    monkeypatch.setenv("KT_CONFIG_DIR", str(tmp_path))
    return tmp_path


# --- ConfigLoader.resolve ---

def test_existing_path_is_used_as_is(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("seed=1\n")

    assert ConfigLoader.resolve(str(path)) == str(path)


def test_bare_name_is_found_in_the_config_directory(config_dir):
    (config_dir / "hyper" / "mine.env").write_text("recurrent_size=100\n")

    assert ConfigLoader.resolve("mine.env", "hyper") == str(config_dir / "hyper" / "mine.env")


def test_missing_config_is_a_usage_error(config_dir):
    with pytest.raises(ConfigurationException, match="Config file not found: nothing.env") as error:
        ConfigLoader.resolve("nothing.env", "hyper")

    assert error.value.exit_code == 2


# --- ConfigLoader.read ---

def test_unknown_key_is_rejected(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("seed=1\nfolds=3\nwarp=9\n")

    with pytest.raises(UnknownConfigKeyException, match="Unknown key 'warp'"):
        ConfigLoader.read(str(path), {"seed", "folds"})


def test_empty_values_are_dropped(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("seed=1\nfolds=\n")

    assert ConfigLoader.read(str(path), {"seed", "folds"}) == {"seed": "1"}


# --- load_hyper_params ---

def test_hyperparameter_file_sets_model_and_training(config_dir):
    (config_dir / "hyper" / "sakt-test.env").write_text(
        "recurrent_size=100\nattention_heads=5\ninput_variant=one-hot\n"
        "output_variant=skills-to-scalar\nshared_kv_projection=true\nmax_epochs=40\npatience=5\nbatch_size=32\n"
    )

    hp, config = ConfigLoader.load_hyper_params("sakt-test.env", "sakt")

    assert hp.architecture is Architecture.SAKT
    assert hp.recurrent_size == 100
    assert hp.input_variant is InputVariant.ONE_HOT
    assert hp.output_variant is OutputVariant.SKILLS_TO_SCALAR
    assert hp.shared_kv_projection is True
    assert (config.max_epochs, config.patience, config.batch_size) == (40, 5, 32)


def test_badly_typed_value_names_the_key(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("learning_rate=fast\n")

    with pytest.raises(ConfigurationException, match="'fast' for 'learning_rate' is not a valid float"):
        ConfigLoader.load_hyper_params(str(path), "lstm-dkt")


def test_invalid_training_settings_are_usage_errors(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("max_epochs=5\npatience=5\n")

    with pytest.raises(ConfigurationException, match="patience must be in"):
        ConfigLoader.load_hyper_params(str(path), "lstm-dkt")


def test_shipped_hyperparameter_files_load():
    """Every file under static/hyper parses for its own architecture."""
    for architecture in Architecture:
        hp, _ = ConfigLoader.load_hyper_params(os.path.join(HYPER_DIR, f"{architecture.value}.env"), architecture.value)

        assert hp.architecture is architecture


# --- load_grid ---

def test_grid_file_overrides_only_listed_fields(config_dir):
    (config_dir / "grids" / "tiny.env").write_text(
        "recurrent_sizes=20, 30\ninput_variants=embedding\nlearning_rates=0.01\n"
    )

    grid = load_grid("tiny.env")

    assert grid.recurrent_sizes == (20, 30)
    assert grid.input_variants == (InputVariant.EMBEDDING,)
    assert grid.learning_rates == (0.01,)
    assert grid.seeds == STUDY_GRID.seeds


def test_grid_with_unknown_variant_is_rejected(tmp_path):
    path = tmp_path / "grid.env"
    path.write_text("output_variants=per-skill\n")

    with pytest.raises(ConfigurationException, match="per-skill"):
        load_grid(str(path))


# --- Command settings ---

def test_flags_beat_config_beat_defaults():
    merged = merge_settings(
        {"seed": 0, "folds": 5, "jobs": 1},
        {"seed": 7, "folds": 3},
        {"seed": 11, "folds": None},
    )

    assert merged == {"seed": 11, "folds": 3, "jobs": 1}


def test_command_config_values_take_the_default_type(tmp_path):
    path = tmp_path / "train.env"
    path.write_text("seed=7\nmodel=bkt\nmax_attempt=split:200\n")

    values = read_command_config(str(path), {"seed": 0, "model": None, "max_attempt": "none"})

    assert values == {"seed": 7, "model": "bkt", "max_attempt": "split:200"}

import json
import os
from unittest.mock import patch

import pytest

from application.app.engine.engine_exceptions import TrainingDivergenceException
from main import main

STATIC = os.path.join(os.path.dirname(__file__), "..", "..", "..", "static")
FIXTURES = os.path.join(STATIC, "fixtures")
DESK_GRID = os.path.join(STATIC, "grids", "desk.env")


@pytest.fixture(scope="module")
def synthetic_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synthetic")
    status = main([
        "synth", "--students", "30", "--exercises", "8", "--concepts", "2", "--seed", "1", "--out", str(out),
    ])
    assert status == 0
    return str(out)


@pytest.fixture(scope="module")
def grid_dir(synthetic_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("grid")
    status = main([
        "gridsearch", "--model", "vanilla-dkt", "--dataset", synthetic_dir, "--grid", DESK_GRID,
        "--max-attempt", "none", "--max-epochs", "2", "--patience", "1", "--folds", "2", "--jobs", "1",
        "--out", str(out),
    ])
    assert status == 0
    return str(out)


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


# --- preprocess / synth ---

def test_preprocess_writes_a_canonical_dataset(tmp_path, capsys):
    out = tmp_path / "data"

    status = main(["preprocess", os.path.join(FIXTURES, "attempts_small.csv"), "--out", str(out)])

    summary = json.loads(capsys.readouterr().out)
    assert status == 0
    assert (summary["students"], summary["attempts"], summary["correct"]) == (2, 5, 3)
    assert summary["preprocessing"]["dropped_students"] == 2
    assert sorted(os.listdir(out)) == ["dataset.csv", "manifest.json", "metadata.json", "summary.json", "vocabulary.json"]
    assert read_json(out / "manifest.json")["command"] == "preprocess"


def test_synth_records_its_seed(synthetic_dir):
    manifest = read_json(os.path.join(synthetic_dir, "manifest.json"))

    assert manifest["master_seed"] == 1
    assert len(manifest["dataset_digest"]) == 64
    assert read_json(os.path.join(synthetic_dir, "summary.json"))["students"] == 30


# --- train ---

def test_train_writes_results_and_manifest(synthetic_dir, tmp_path, capsys):
    out = tmp_path / "mean"

    status = main(["train", "--model", "mean", "--dataset", synthetic_dir, "--folds", "3", "--jobs", "1", "--out", str(out)])

    assert status == 0
    assert {"results.csv", "summary.json", "manifest.json"} <= set(os.listdir(out))
    assert read_json(out / "summary.json")["folds"] == 3
    assert read_json(out / "manifest.json")["master_seed"] == 0
    assert "== synthetic-k2 ==" in capsys.readouterr().out


def test_train_reruns_are_byte_identical(synthetic_dir, tmp_path):
    for name in ("first", "second"):
        assert main([
            "train", "--model", "bkt", "--dataset", synthetic_dir, "--seed", "4", "--folds", "2", "--jobs", "1",
            "--out", str(tmp_path / name),
        ]) == 0

    for name in ("results.csv", "summary.json"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()


def test_train_writes_fold_checkpoints(synthetic_dir, tmp_path):
    out = tmp_path / "glr"

    main(["train", "--model", "glr", "--dataset", synthetic_dir, "--folds", "2", "--jobs", "1", "--out", str(out)])

    assert sorted(os.listdir(out / "checkpoints")) == ["glr-fold0.glr.ckpt", "glr-fold1.glr.ckpt"]


def test_train_split_policy_logs_derived_sequences(tmp_path, caplog):
    """A 950-attempt student under split:100 becomes 10 pseudo-students."""
    caplog.set_level("INFO")
    data = tmp_path / "long"
    assert main(["preprocess", os.path.join(FIXTURES, "long_student.csv"), "--out", str(data)]) == 0

    status = main([
        "train", "--model", "mean", "--dataset", str(data), "--max-attempt", "split:100", "--folds", "2",
        "--jobs", "1", "--out", str(tmp_path / "run"),
    ])

    assert status == 0
    assert "split into 10 derived sequences" in caplog.text
    assert read_json(tmp_path / "run" / "summary.json")["run"]["max_attempt"] == "split:100"


def test_config_file_fills_unset_flags(synthetic_dir, tmp_path):
    config = tmp_path / "train.env"
    config.write_text(f"model=nap\ndataset={synthetic_dir}\nfolds=2\nseed=9\njobs=1\n")
    out = tmp_path / "nap"

    status = main(["train", "--config", str(config), "--seed", "5", "--out", str(out)])

    arguments = read_json(out / "manifest.json")["arguments"]
    assert status == 0
    assert (arguments["model"], arguments["folds"], arguments["seed"]) == ("nap", 2, 5)


# --- Exit statuses ---

def test_bad_policy_is_a_usage_error(synthetic_dir, tmp_path, capsys):
    status = main([
        "train", "--model", "mean", "--dataset", synthetic_dir, "--max-attempt", "trim:5", "--out", str(tmp_path),
    ])

    assert status == 2
    assert "error[usage]: Invalid max-attempt policy 'trim:5'" in capsys.readouterr().err


def test_missing_flags_are_a_usage_error(capsys):
    status = main(["train", "--model", "mean"])

    assert status == 2
    assert "error[usage]: Missing required setting(s): --dataset, --out" in capsys.readouterr().err


def test_unknown_model_is_rejected_by_the_parser():
    assert main(["train", "--model", "dkt"]) == 2


def test_missing_input_file_is_a_data_error(tmp_path, capsys):
    status = main(["preprocess", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "out")])

    assert status == 3
    assert "error[data]:" in capsys.readouterr().err


def test_gridsearch_refuses_baselines(synthetic_dir, tmp_path):
    assert main(["gridsearch", "--model", "bkt", "--dataset", synthetic_dir, "--out", str(tmp_path)]) == 2


def test_divergence_has_its_own_exit_status(synthetic_dir, tmp_path, capsys):
    with patch("application.routes.train.cross_validate", side_effect=TrainingDivergenceException("epoch 3 batch 2")):
        status = main(["train", "--model", "mean", "--dataset", synthetic_dir, "--out", str(tmp_path)])

    assert status == 4
    assert "error[divergence]: Training diverged at epoch 3 batch 2" in capsys.readouterr().err


def test_unexpected_errors_are_internal(synthetic_dir, tmp_path, capsys):
    with patch("application.routes.train.cross_validate", side_effect=RuntimeError("boom")):
        status = main(["train", "--model", "mean", "--dataset", synthetic_dir, "--out", str(tmp_path)])

    assert status == 5
    assert "error[internal]: boom" in capsys.readouterr().err


# --- gridsearch / analyze / report ---

def test_gridsearch_covers_the_grid(grid_dir):
    summary = read_json(os.path.join(grid_dir, "summary.json"))

    assert summary["grid_search"]["points"] == 4
    assert len(summary["results"]) == 4
    assert summary["grid_search"]["selection_metric"] == "auc"


def test_selection_loss_over_grid_results(grid_dir, tmp_path, capsys):
    out = tmp_path / "loss"

    status = main(["analyze", "selection-loss", "--results", grid_dir, "--metrics", "auc", "accuracy", "--out", str(out)])

    matrix = read_json(out / "loss_matrix.json")
    assert status == 0
    assert matrix["metrics"] == ["auc", "accuracy"]
    assert [cell["max"] for cell in matrix["cells"] if cell["selected_by"] == cell["evaluated_on"]] == [0.0, 0.0]
    assert "selected_by" in capsys.readouterr().out


def test_variations_over_grid_results(grid_dir, tmp_path):
    out = tmp_path / "variations"

    status = main(["analyze", "variations", "--results", grid_dir, "--field", "output_variant", "--out", str(out)])

    lines = (out / "variations.csv").read_text().strip().split("\n")
    assert status == 0
    assert len(lines) == 3


def test_report_combines_directories(grid_dir, synthetic_dir, tmp_path, capsys):
    baseline = tmp_path / "nap"
    main(["train", "--model", "nap", "--dataset", synthetic_dir, "--folds", "2", "--jobs", "1", "--out", str(baseline)])
    capsys.readouterr()

    status = main(["report", "--results", grid_dir, str(baseline), "--format", "json", "--out", str(tmp_path / "report")])

    records = json.loads(capsys.readouterr().out)
    assert status == 0
    assert [record["model"] for record in records] == ["nap", "vanilla-dkt"]
    assert (tmp_path / "report" / "report.json").exists()


def test_report_without_results_is_a_data_error(tmp_path):
    assert main(["report", "--results", str(tmp_path)]) == 3


# --- selftest ---

def test_selftest_passes(capsys):
    status = main(["selftest", "--max-entries", "3"])

    out = capsys.readouterr().out
    assert status == 0
    assert "FAIL" not in out
    assert "checks passed" in out

import pytest

from domain.hyper_params import Architecture, HyperParams
from domain.metric_report import UNDEFINED, MetricReport, better
from domain.run_result import FoldResult, RunResult


def report(auc=0.7, mcc=0.2, rmse=0.4):
    return MetricReport(accuracy=0.7, auc=auc, precision=0.6, recall=0.5, f1=0.55, mcc=mcc, rmse=rmse, log_loss=0.6)


# --- Fold aggregation ---

def test_summary_is_mean_and_population_std():
    """Fold scores aggregate to mean and population standard deviation."""
    result = RunResult("mean", "toy", (FoldResult(0, report(auc=0.6), 10), FoldResult(1, report(auc=0.8), 10)))

    summary = result.summary("auc")

    assert summary.mean == pytest.approx(0.7)
    assert summary.std == pytest.approx(0.1)


def test_undefined_fold_makes_aggregate_undefined():
    """A metric undefined in any fold is undefined overall, never averaged as zero."""
    result = RunResult("mean", "toy", (FoldResult(0, report(mcc=UNDEFINED), 10), FoldResult(1, report(), 10)))

    assert result.mean("mcc") is UNDEFINED
    assert result.to_dict()["metrics"]["mcc"] == {"mean": "undefined", "std": "undefined"}


def test_config_key_of_baseline_is_dash():
    """Baselines have no configuration."""
    assert RunResult("bkt", "toy", ()).config_key == "-"


def test_identity_orders_by_dataset_then_model():
    """Results sort canonically by dataset, model and configuration."""
    a = RunResult("sakt", "a", (), HyperParams(Architecture.SAKT))
    b = RunResult("bkt", "b", ())

    assert sorted([b, a], key=lambda r: r.identity) == [a, b]


# --- Metric reports ---

def test_metric_report_parses_undefined_marker():
    """Saved 'undefined' cells reload as the UNDEFINED marker."""
    values = {**report().to_dict(), "mcc": "undefined", "precision": ""}

    parsed = MetricReport.from_dict(values)

    assert parsed.mcc is UNDEFINED
    assert parsed.precision is UNDEFINED
    assert parsed.auc == 0.7


def test_unknown_metric_name_rejected():
    """Only the eight metrics exist."""
    with pytest.raises(KeyError, match="Unknown metric"):
        report().get("brier")


def test_better_respects_metric_direction():
    """rmse and log loss are minimised, everything else maximised."""
    assert better("rmse", 0.3, 0.4)
    assert not better("auc", 0.3, 0.4)

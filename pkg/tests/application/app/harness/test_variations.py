import pytest

from application.app.config.config_exceptions import ConfigurationException
from application.app.harness.variations import VARIATION_FIELDS, variation_analysis
from domain.hyper_params import Architecture, HyperParams, OutputVariant
from domain.metric_report import MetricReport
from domain.run_result import FoldResult, RunResult


def make_result(auc, output_variant, seed=13, rmse=0.4):
    report = MetricReport(
        accuracy=0.7, auc=auc, precision=0.6, recall=0.5, f1=0.55, mcc=0.3, rmse=rmse, log_loss=0.5,
    )
    hp = HyperParams(Architecture.DKVMN, output_variant=output_variant, seed=seed).normalized()
    return RunResult("dkvmn", "toy", (FoldResult(0, report, 10),), hyper_params=hp)


@pytest.fixture
def results():
    return [
        make_result(0.70, OutputVariant.OUTPUT_PER_SKILL, rmse=0.41),
        make_result(0.74, OutputVariant.OUTPUT_PER_SKILL, seed=42, rmse=0.39),
        make_result(0.76, OutputVariant.SKILLS_TO_SCALAR, rmse=0.38),
        make_result(0.75, OutputVariant.SKILLS_TO_SCALAR, seed=42, rmse=0.40),
    ]


def test_rows_per_output_variant(results):
    rows = variation_analysis(results, "output_variant")

    assert [row.value for row in rows] == ["output-per-skill", "skills-to-scalar"]
    assert (rows[0].best, rows[0].worst) == (0.74, 0.70)
    assert rows[1].spread == pytest.approx(0.01)
    assert rows[1].configurations == 2


def test_seed_rows_for_lower_is_better_metric(results):
    rows = variation_analysis(results, "seed", metric="rmse")

    assert [row.value for row in rows] == ["13", "42"]
    assert (rows[0].best, rows[0].worst) == (0.38, 0.41)


def test_baselines_are_left_out(results):
    baseline = RunResult("mean", "toy", results[0].folds)

    assert len(variation_analysis(results + [baseline], "seed")) == 2


def test_architecture_is_not_a_variation_field():
    assert "architecture" not in VARIATION_FIELDS

    with pytest.raises(ConfigurationException, match="Unknown hyperparameter 'architecture'"):
        variation_analysis([], "architecture")

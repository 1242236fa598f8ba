import pytest

from application.app.config.config_exceptions import ConfigurationException
from application.app.harness.selection_loss import group_results, selection_loss, selection_loss_analysis
from domain.hyper_params import Architecture, HyperParams
from domain.metric_report import MetricReport
from domain.run_result import FoldResult, RunResult


def make_result(auc, accuracy, recurrent_size=50, model="lstm-dkt", dataset="toy", rmse=0.4, log_loss=0.5):
    report = MetricReport(
        accuracy=accuracy, auc=auc, precision=0.6, recall=0.5, f1=0.55, mcc=0.3, rmse=rmse, log_loss=log_loss,
    )
    hp = HyperParams(Architecture(model), recurrent_size=recurrent_size).normalized()
    return RunResult(model, dataset, (FoldResult(0, report, 10),), hyper_params=hp)


@pytest.fixture
def two_configs():
    return [make_result(0.80, 0.70), make_result(0.79, 0.75, recurrent_size=100)]


def test_selecting_by_auc_costs_accuracy(two_configs):
    """The AUC winner is .05 below the best accuracy."""
    assert selection_loss(two_configs, "auc", "accuracy") == pytest.approx(0.05)
    assert selection_loss(two_configs, "accuracy", "auc") == pytest.approx(0.01)


def test_lower_is_better_metrics_lose_upwards():
    group = [make_result(0.80, 0.70, rmse=0.42), make_result(0.79, 0.75, recurrent_size=100, rmse=0.40)]

    assert selection_loss(group, "auc", "rmse") == pytest.approx(0.02)


def test_loss_matrix_has_a_zero_diagonal(two_configs):
    matrix = selection_loss_analysis(two_configs, ("auc", "accuracy"))

    assert matrix.cell("auc", "auc").max == 0.0
    assert matrix.cell("accuracy", "accuracy").mean == 0.0
    assert matrix.cell("auc", "accuracy").mean == pytest.approx(0.05)
    assert matrix.cell("auc", "accuracy").groups == 1


def test_loss_is_averaged_over_groups(two_configs):
    other = [
        make_result(0.70, 0.60, dataset="other"),
        make_result(0.69, 0.61, recurrent_size=100, dataset="other"),
    ]

    cell = selection_loss_analysis(two_configs + other, ("auc", "accuracy")).cell("auc", "accuracy")

    assert cell.groups == 2
    assert cell.mean == pytest.approx(0.03)
    assert cell.max == pytest.approx(0.05)


def test_groups_follow_dataset_and_model(two_configs):
    groups = group_results(two_configs + [make_result(0.7, 0.7, model="dkvmn")])

    assert list(groups) == [("toy", "dkvmn"), ("toy", "lstm-dkt")]
    assert len(groups[("toy", "lstm-dkt")]) == 2


def test_single_configuration_groups_cannot_be_analysed():
    with pytest.raises(ConfigurationException, match="at least two configurations"):
        selection_loss_analysis([make_result(0.8, 0.7)])


def test_unknown_metric_is_rejected(two_configs):
    with pytest.raises(ConfigurationException, match="Unknown metric"):
        selection_loss_analysis(two_configs, ("auc", "kappa"))

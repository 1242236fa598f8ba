import pytest

from application.app.harness.harness_exceptions import SelfTestFailedException
from application.app.harness.self_test import bkt_checks, gradient_checks, metric_checks, run_self_test


def test_metric_checks_pass():
    outcomes = metric_checks()

    assert len(outcomes) == 6
    assert all(outcome.passed for outcome in outcomes), [o.to_dict() for o in outcomes if not o.passed]


def test_bkt_filter_check_passes():
    assert all(outcome.passed for outcome in bkt_checks())


def test_gradient_checks_cover_every_variant():
    outcomes = gradient_checks(max_entries=5)

    assert len(outcomes) == 6 * 2 * 2
    assert len({outcome.name for outcome in outcomes}) == 24


@pytest.mark.slow
def test_full_self_test_passes(caplog):
    caplog.set_level("INFO")

    outcomes = run_self_test(max_entries=10)

    assert all(outcome.passed for outcome in outcomes)
    assert "bkt filter step: pass" in caplog.text


def test_failure_lists_the_failed_checks():
    error = SelfTestFailedException(["gradient sakt one-hot output-per-skill"])

    assert error.exit_code == 5
    assert "1 self-test checks failed" in str(error)

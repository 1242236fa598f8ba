import numpy as np
import pytest

from application.app.baselines.glr import GLRLayout, build_glr_features, design_matrix, fit_glr, predict_glr, rescale
from application.app.engine.engine_exceptions import ContractException
from domain.dataset import Dataset, StudentSequence


@pytest.fixture
def train():
    """Two students over two skills."""
    return Dataset(
        sequences=(
            StudentSequence(0, [0, 0, 1, 0], [1, 0, 1, 1]),
            StudentSequence(1, [1, 1, 0], [0, 1, 1]),
        ),
        skill_count=2,
    )


def noisy_points(seed: int, count: int = 300):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=count)
    labels = (rng.random(count) < 1.0 / (1.0 + np.exp(-2.0 * x))).astype(float)
    return np.column_stack([x, np.ones(count)]), labels


# --- Features ---

def test_features_only_use_earlier_attempts(train):
    """Counts at position 3 come from positions 0..2."""
    layout = GLRLayout.from_dataset(train)

    features = build_glr_features(train.sequences[0], 3, layout)

    assert features.skill == 0
    assert features.skill_successes == pytest.approx(rescale(1))
    assert features.skill_failures == pytest.approx(rescale(1))
    assert features.total_successes == pytest.approx(rescale(2))
    assert features.total_failures == pytest.approx(rescale(1))


def test_design_matrix_rows_match_single_feature_vectors(train):
    """The sparse design matrix equals the per-attempt feature vectors."""
    layout = GLRLayout.from_dataset(train)

    matrix, labels = design_matrix(train, layout, first_position=1)

    expected = [
        build_glr_features(sequence, position, layout).vector(layout)
        for sequence in train.sequences
        for position in range(1, len(sequence))
    ]
    assert np.allclose(matrix.toarray(), np.array(expected))
    assert labels.tolist() == [0, 1, 1, 1, 1]


def test_unseen_student_has_no_ability_column(train):
    """A student missing from training contributes no ability feature."""
    layout = GLRLayout.from_dataset(train)
    stranger = StudentSequence(7, [0, 1], [1, 1])

    row = build_glr_features(stranger, 1, layout).vector(layout)

    assert row[: layout.skill_offset].sum() == 0.0


def test_rebind_keeps_column_positions(train):
    """Rebinding students leaves every other block where it was."""
    layout = GLRLayout.from_dataset(train)

    rebound = layout.rebind({5: 1})

    assert rebound.skill_offset == layout.skill_offset
    assert rebound.width == layout.width


# --- Fitting ---

def test_separable_toy_is_learned():
    """x < 0 -> 0 and x > 0 -> 1 with margin 1 reach accuracy of at least 0.95."""
    x = np.concatenate([np.linspace(-3, -1, 50), np.linspace(1, 3, 50)])
    features = np.column_stack([x, np.ones(100)])
    labels = (x > 0).astype(float)

    weights = fit_glr(features, labels)

    assert ((predict_glr(weights, features) >= 0.5) == labels).mean() >= 0.95


def test_stronger_penalty_never_grows_weights():
    """Doubling the L2 penalty does not increase the weight norm."""
    features, labels = noisy_points(0)
    norms = [np.linalg.norm(fit_glr(features, labels, l2=l2)[:-1]) for l2 in (1.0, 2.0, 4.0, 8.0)]

    assert all(later <= earlier + 1e-6 for earlier, later in zip(norms, norms[1:]))


def test_single_label_rejected():
    """Logistic regression needs both labels."""
    with pytest.raises(ContractException):
        fit_glr(np.ones((3, 2)), np.ones(3))

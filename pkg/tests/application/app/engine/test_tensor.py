import numpy as np
import pytest

from application.app.engine.engine_exceptions import ContractException, DimensionMismatchException
from application.app.engine.param_store import ParamStore
from application.app.engine.gradient_check import gradient_check
from application.app.engine.tensor import (
    Tensor,
    backward,
    binary_cross_entropy,
    concat,
    constant,
    dropout,
    gather_last,
    masked_softmax,
    matmul,
    mean,
    no_grad,
    one_hot,
    sigmoid,
    softmax,
    stack,
    sum_all,
    take_rows,
    tanh,
)


@pytest.fixture
def store():
    """A small store with a weight matrix, bias and lookup table."""
    rng = np.random.default_rng(0)
    store = ParamStore()
    store.add("W", rng.normal(size=(4, 3)))
    store.add("b", rng.normal(size=3))
    store.add("E", rng.normal(size=(5, 4)))
    return store


# --- Forward values ---

def test_bce_of_single_prediction():
    """BCE(y=0.8, c=1) is -ln 0.8."""
    loss = binary_cross_entropy(constant([0.8]), [1])

    assert loss.item() == pytest.approx(0.22314355, abs=1e-7)


def test_bce_clips_certain_predictions():
    """A wrong certain prediction is clipped instead of infinite."""
    loss = binary_cross_entropy(constant([0.0]), [1])

    assert loss.item() == pytest.approx(-np.log(1e-7))


def test_bce_masked_positions_contribute_nothing():
    """Masked positions change neither the value nor the gradient."""
    probabilities = Tensor([0.8, 0.3], requires_grad=True)

    loss = binary_cross_entropy(probabilities, [1, 1], mask=[1, 0])
    backward(loss)

    assert loss.item() == pytest.approx(-np.log(0.8))
    assert probabilities.grad[1] == 0.0


def test_bce_empty_mask():
    """A loss over no positions is a contract error."""
    with pytest.raises(ContractException, match="empty mask"):
        binary_cross_entropy(constant([0.5]), [1], mask=[0])


def test_masked_softmax_zeroes_masked_entries():
    """Masked entries get exactly zero weight and the rest sums to one."""
    weights = masked_softmax(constant([[1.0, 2.0, 3.0]]), np.array([[1, 0, 1]])).data

    assert weights[0, 1] == 0.0
    assert weights.sum() == pytest.approx(1.0)
    assert weights[0, 2] / weights[0, 0] == pytest.approx(np.e ** 2)


def test_masked_softmax_fully_masked_row_is_zero():
    """A row with nothing to attend to stays all zeros."""
    weights = masked_softmax(constant([[1.0, 2.0]]), np.array([[0, 0]])).data

    assert weights.tolist() == [[0.0, 0.0]]


def test_dropout_rate_is_respected():
    """About 20% of a large tensor is zeroed and survivors are rescaled."""
    out = dropout(constant(np.ones(100_000)), 0.2, training=True, rng=np.random.default_rng(1)).data

    assert (out == 0).mean() == pytest.approx(0.2, abs=0.02)
    assert out.max() == pytest.approx(1.25)


def test_dropout_is_identity_outside_training():
    """Evaluation never drops units."""
    x = constant(np.ones(10))

    assert dropout(x, 0.5, training=False, rng=None) is x


def test_one_hot_rows():
    """one_hot builds identity rows."""
    assert one_hot([2, 0], 3).data.tolist() == [[0, 0, 1], [1, 0, 0]]


# --- Errors ---

def test_matmul_shape_mismatch_names_both_shapes():
    """Incompatible operands raise with both shapes."""
    with pytest.raises(DimensionMismatchException, match=r"\(2, 3\) and \(4, 5\)"):
        matmul(constant(np.ones((2, 3))), constant(np.ones((4, 5))))


def test_backward_needs_scalar():
    """backward on a vector is a contract error."""
    with pytest.raises(ContractException, match="scalar"):
        backward(Tensor(np.ones(3), requires_grad=True))


def test_lookup_outside_table():
    """Row lookups check their indices."""
    with pytest.raises(ContractException):
        take_rows(constant(np.ones((3, 2))), [3])


def test_no_grad_records_nothing(store):
    """Nothing is recorded inside no_grad."""
    with no_grad():
        out = matmul(constant(np.ones((1, 4))), store["W"])

    assert not out.requires_grad


# --- Gradients ---

def test_shared_node_gradient_accumulates():
    """A tensor used twice receives the sum of both contributions."""
    x = Tensor([3.0], requires_grad=True)

    backward(sum_all(x * x + x))

    assert x.grad.tolist() == [7.0]


def test_unused_parameter_gets_exact_zero_gradient(store):
    """A parameter outside the loss graph reports a gradient of exact zeros with its own shape."""
    store.zero_grad()
    backward(sum_all(tanh(matmul(constant(np.ones((2, 4))), store["W"]) + store["b"])))

    gradients = store.gradients()

    assert gradients["E"].shape == (5, 4)
    assert (gradients["E"] == 0.0).all()
    assert np.abs(gradients["W"]).sum() > 0


def test_composite_graph_matches_finite_differences(store):
    """Lookups, matmul, activations and softmax pass a finite-difference check."""
    indices = np.array([[0, 3], [4, 1]])
    picks = np.array([[2, 0], [1, 1]])

    def loss():
        rows = take_rows(store["E"], indices)
        hidden = tanh(matmul(rows, store["W"]) + store["b"])
        mixed = concat([softmax(hidden), sigmoid(hidden)], axis=-1)
        chosen = gather_last(mixed, picks)
        return mean(stack([chosen, chosen * chosen], axis=1))

    result = gradient_check(store, loss)

    assert result.worst < 1e-4


def test_bce_gradient_matches_finite_differences(store):
    """The loss gradient through sigmoid matches central differences."""
    x = np.random.default_rng(3).normal(size=(6, 4))
    labels = np.array([[1, 0, 1], [0, 0, 1], [1, 1, 1], [0, 1, 0], [1, 0, 0], [0, 1, 1]])
    mask = np.array([[1, 1, 0], [1, 1, 1], [0, 1, 1], [1, 1, 1], [1, 0, 1], [1, 1, 1]])

    result = gradient_check(
        store,
        lambda: binary_cross_entropy(sigmoid(matmul(constant(x), store["W"]) + store["b"]), labels, mask),
        names=["W", "b"],
    )

    assert result.worst < 1e-4

"""
Reverse-mode differentiation over numpy float64 arrays.

A Tensor remembers the tensors it was computed from and a closure that pushes its gradient back to them.
Nothing is recorded when no input requires a gradient, or inside `no_grad()`.
"""
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from numbers import Number

import numpy as np
from scipy.special import expit

from application.app.engine.engine_exceptions import ContractException, DimensionMismatchException

PROBABILITY_CLIP = 1e-7

_recording = ContextVar("recording", default=True)


@contextmanager
def no_grad():
    token = _recording.set(False)
    try:
        yield
    finally:
        _recording.reset(token)


class Tensor:
    def __init__(self, data, requires_grad: bool = False, name: str | None = None, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name
        self.grad = None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad += grad

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        label = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add_scalar(self, other) if isinstance(other, Number) else add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add_scalar(self, -other) if isinstance(other, Number) else sub(self, other)

    def __rsub__(self, other):
        return add_scalar(scale(self, -1.0), other)

    def __mul__(self, other):
        return scale(self, other) if isinstance(other, Number) else mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def constant(data) -> Tensor:
    return Tensor(data)


def _node(data: np.ndarray, parents: tuple, backward) -> Tensor:
    if _recording.get() and any(parent.requires_grad for parent in parents):
        return Tensor(data, requires_grad=True, _parents=parents, _backward=backward)
    return Tensor(data)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sums `grad` down to `shape` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(operation: str, a: Tensor, b: Tensor) -> tuple:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionMismatchException(operation, a.shape, b.shape)


# --- arithmetic

def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("add", a, b)

    def backward(grad):
        if a.requires_grad:
            a.accumulate(_unbroadcast(grad, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(grad, b.shape))

    return _node(a.data + b.data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("sub", a, b)

    def backward(grad):
        if a.requires_grad:
            a.accumulate(_unbroadcast(grad, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(-grad, b.shape))

    return _node(a.data - b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product."""
    _broadcast_shape("mul", a, b)

    def backward(grad):
        if a.requires_grad:
            a.accumulate(_unbroadcast(grad * b.data, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(grad * a.data, b.shape))

    return _node(a.data * b.data, (a, b), backward)


def scale(x: Tensor, factor: float) -> Tensor:
    def backward(grad):
        x.accumulate(grad * factor)

    return _node(x.data * factor, (x,), backward)


def add_scalar(x: Tensor, value: float) -> Tensor:
    def backward(grad):
        x.accumulate(grad)

    return _node(x.data + value, (x,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes; leading axes broadcast."""
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionMismatchException("matmul", a.shape, b.shape)

    def backward(grad):
        if a.requires_grad:
            a.accumulate(_unbroadcast(grad @ np.swapaxes(b.data, -1, -2), a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(np.swapaxes(a.data, -1, -2) @ grad, b.shape))

    return _node(a.data @ b.data, (a, b), backward)


# --- shape

def concat(tensors: list[Tensor], axis: int = -1) -> Tensor:
    reference = tensors[0]
    for other in tensors[1:]:
        if other.ndim != reference.ndim or any(
            x != y for i, (x, y) in enumerate(zip(reference.shape, other.shape)) if i != axis % reference.ndim
        ):
            raise DimensionMismatchException("concat", reference.shape, other.shape)
    sizes = [t.shape[axis] for t in tensors]
    boundaries = np.cumsum(sizes)[:-1]

    def backward(grad):
        for tensor, piece in zip(tensors, np.split(grad, boundaries, axis=axis)):
            if tensor.requires_grad:
                tensor.accumulate(piece)

    return _node(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward)


def stack(tensors: list[Tensor], axis: int = 1) -> Tensor:
    for other in tensors[1:]:
        if other.shape != tensors[0].shape:
            raise DimensionMismatchException("stack", tensors[0].shape, other.shape)

    def backward(grad):
        for index, tensor in enumerate(tensors):
            if tensor.requires_grad:
                tensor.accumulate(np.take(grad, index, axis=axis))

    return _node(np.stack([t.data for t in tensors], axis=axis), tuple(tensors), backward)


def reshape(x: Tensor, shape: tuple) -> Tensor:
    def backward(grad):
        x.accumulate(grad.reshape(x.shape))

    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise DimensionMismatchException("reshape", x.shape, shape)
    return _node(data, (x,), backward)


def transpose(x: Tensor, axes: tuple) -> Tensor:
    inverse = np.argsort(axes)

    def backward(grad):
        x.accumulate(np.transpose(grad, inverse))

    return _node(np.transpose(x.data, axes), (x,), backward)


def select_step(x: Tensor, step: int) -> Tensor:
    """x[:, step] for a (batch, time, ...) tensor."""
    def backward(grad):
        if x.grad is None:
            x.grad = np.zeros_like(x.data)
        x.grad[:, step] += grad

    return _node(x.data[:, step], (x,), backward)


def take_rows(table: Tensor, indices) -> Tensor:
    """Row lookup: result[..., :] = table[indices[...], :]."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= table.shape[0]):
        raise ContractException(f"Row index outside [0, {table.shape[0]}) in lookup")

    def backward(grad):
        full = np.zeros_like(table.data)
        np.add.at(full, indices, grad)
        table.accumulate(full)

    return _node(table.data[indices], (table,), backward)


def gather_last(x: Tensor, indices) -> Tensor:
    """Picks x[..., indices[...]] along the last axis; the result drops that axis."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.shape != x.shape[:-1]:
        raise DimensionMismatchException("gather_last", x.shape, indices.shape)
    expanded = indices[..., None]

    def backward(grad):
        full = np.zeros_like(x.data)
        np.put_along_axis(full, expanded, grad[..., None], axis=-1)
        x.accumulate(full)

    return _node(np.take_along_axis(x.data, expanded, axis=-1)[..., 0], (x,), backward)


def one_hot(indices, width: int) -> Tensor:
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= width):
        raise ContractException(f"One-hot index outside [0, {width})")
    return Tensor(np.eye(width)[indices])


# --- activations

def sigmoid(x: Tensor) -> Tensor:
    out = expit(x.data)

    def backward(grad):
        x.accumulate(grad * out * (1.0 - out))

    return _node(out, (x,), backward)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def backward(grad):
        x.accumulate(grad * (1.0 - out * out))

    return _node(out, (x,), backward)


def relu(x: Tensor) -> Tensor:
    positive = x.data > 0

    def backward(grad):
        x.accumulate(grad * positive)

    return _node(np.where(positive, x.data, 0.0), (x,), backward)


def _softmax_backward(x: Tensor, out: np.ndarray):
    def backward(grad):
        x.accumulate(out * (grad - (grad * out).sum(axis=-1, keepdims=True)))

    return backward


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    out = exps / exps.sum(axis=-1, keepdims=True)
    return _node(out, (x,), _softmax_backward(x, out))


def masked_softmax(x: Tensor, mask) -> Tensor:
    """
    Softmax over the last axis restricted to entries where `mask` is 1; masked entries are exactly 0.
    A row with no unmasked entry is all zeros.
    """
    mask = np.broadcast_to(np.asarray(mask), x.shape)
    if not np.isin(mask, (0, 1)).all():
        raise ContractException("masked_softmax mask must be binary")
    keep = mask.astype(bool)
    logits = np.where(keep, x.data, -np.inf)
    row_max = logits.max(axis=-1, keepdims=True)
    row_max = np.where(np.isfinite(row_max), row_max, 0.0)
    exps = np.where(keep, np.exp(logits - row_max), 0.0)
    totals = exps.sum(axis=-1, keepdims=True)
    out = np.divide(exps, totals, out=np.zeros_like(exps), where=totals > 0)
    return _node(out, (x,), _softmax_backward(x, out))


def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout: zero each element with probability `rate`, scale survivors by 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ContractException(f"Dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return mul(x, Tensor(keep))


# --- reductions and losses

def sum_all(x: Tensor) -> Tensor:
    def backward(grad):
        x.accumulate(np.broadcast_to(grad, x.shape))

    return _node(np.asarray(x.data.sum()), (x,), backward)


def mean(x: Tensor) -> Tensor:
    count = max(x.data.size, 1)

    def backward(grad):
        x.accumulate(np.broadcast_to(grad / count, x.shape))

    return _node(np.asarray(x.data.mean()), (x,), backward)


def binary_cross_entropy(probabilities: Tensor, labels, mask=None) -> Tensor:
    """
    Mean of -(c ln y + (1-c) ln(1-y)) over positions where `mask` is 1.
    Probabilities are clipped to [1e-7, 1-1e-7]; masked positions add exactly 0 to the value and the gradient.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != probabilities.shape:
        raise DimensionMismatchException("binary_cross_entropy", probabilities.shape, labels.shape)
    weights = np.ones_like(labels) if mask is None else np.asarray(mask, dtype=np.float64)
    if weights.shape != labels.shape:
        raise DimensionMismatchException("binary_cross_entropy", labels.shape, weights.shape)
    count = weights.sum()
    if count == 0:
        raise ContractException("binary_cross_entropy over an empty mask")

    clipped = np.clip(probabilities.data, PROBABILITY_CLIP, 1.0 - PROBABILITY_CLIP)
    terms = -(labels * np.log(clipped) + (1.0 - labels) * np.log(1.0 - clipped))
    value = (terms * weights).sum() / count
    inside = (probabilities.data >= PROBABILITY_CLIP) & (probabilities.data <= 1.0 - PROBABILITY_CLIP)

    def backward(grad):
        local = -(labels / clipped - (1.0 - labels) / (1.0 - clipped)) * weights * inside / count
        probabilities.accumulate(grad * local)

    return _node(np.asarray(value), (probabilities,), backward)


# --- backward pass

@dataclass
class Graph:
    """The recorded nodes reachable from a loss, in topological order (inputs first)."""
    nodes: list[Tensor] = field(default_factory=list)

    def __len__(self):
        return len(self.nodes)


def backward(loss: Tensor) -> Graph:
    """
    Accumulates d(loss)/d(node) into `.grad` of every recorded node reachable from `loss`.
    Each node's backward rule runs exactly once, in reverse topological order.
    """
    if loss.data.size != 1 or loss.ndim > 1:
        raise ContractException(f"backward needs a scalar loss, got shape {loss.shape}")
    if not np.isfinite(loss.data).all():
        raise ContractException(f"backward on a non-finite loss ({loss.item()})")

    order = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited or not node.requires_grad:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))

    loss.accumulate(np.ones_like(loss.data))
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
    return Graph(order)

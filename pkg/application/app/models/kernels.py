"""
Single-step recurrent kernels. Inputs are (batch, width) tensors; `params` maps parameter names to tensors.
"""
from application.app.engine.tensor import (
    Tensor,
    add,
    matmul,
    mul,
    reshape,
    sigmoid,
    softmax,
    tanh,
    transpose,
)


def vanilla_step(x_projection: Tensor, h_prev: Tensor, params) -> Tensor:
    """h_t = tanh(h_prev W_h + x_t W_x + b); `x_projection` is x_t W_x."""
    return tanh(add(add(matmul(h_prev, params["W_h"]), x_projection), params["b"]))


def lstm_step(x_projections: dict[str, Tensor], h_prev: Tensor, m_prev: Tensor, params, swapped_activations: bool = False) -> tuple[Tensor, Tensor]:
    """
    Standard LSTM: sigmoid input/forget/output gates, tanh candidate, m_t = f*m + i*candidate, h_t = o*tanh(m_t).
    `x_projections[g]` is x_t W_g. With `swapped_activations` the output gate is tanh and the candidate sigmoid.
    """
    def pre(gate):
        return add(add(x_projections[gate], matmul(h_prev, params[f"U_{gate}"])), params[f"b_{gate}"])

    input_gate = sigmoid(pre("i"))
    forget_gate = sigmoid(pre("f"))
    output_gate = tanh(pre("o")) if swapped_activations else sigmoid(pre("o"))
    candidate = sigmoid(pre("m")) if swapped_activations else tanh(pre("m"))
    m_t = add(mul(forget_gate, m_prev), mul(input_gate, candidate))
    h_t = mul(output_gate, tanh(m_t))
    return h_t, m_t


def dkvmn_attention(key: Tensor, params, article_variant: bool) -> Tensor:
    """
    Attention over the M memory slots. Article variant: softmax(k M_k^T). Repository variant: k passes a tanh
    dense layer, then a softmax dense layer whose weights are M_k.
    """
    transposed = transpose(params["M_k"], (1, 0))
    if article_variant:
        return softmax(matmul(key, transposed))
    query = tanh(add(matmul(key, params["W_kq"]), params["b_kq"]))
    return softmax(add(matmul(query, transposed), params["b_w"]))


def dkvmn_read(key: Tensor, value_memory: Tensor, params, article_variant: bool) -> tuple[Tensor, Tensor]:
    """Returns (w_t, r_t) with r_t = sum_i w_t(i) M_v(i). `value_memory` is (batch, M, V)."""
    weights = dkvmn_attention(key, params, article_variant)
    batch, slots = weights.shape
    read = matmul(reshape(weights, (batch, 1, slots)), value_memory)
    return weights, reshape(read, (batch, value_memory.shape[2]))


def dkvmn_write(value: Tensor, weights: Tensor, value_memory: Tensor, params, weighted_add: bool = False) -> Tensor:
    """
    e_t = sigmoid(v W_e + b_e), a_t = tanh(v W_a + b_a), M_v(i) <- a_t + M_v(i) * (1 - w_t(i) e_t).
    With `weighted_add` the addition is w_t(i) a_t.
    """
    batch, slots, width = value_memory.shape
    erase = sigmoid(add(matmul(value, params["W_e"]), params["b_e"]))
    addition = tanh(add(matmul(value, params["W_a"]), params["b_a"]))
    slot_weights = reshape(weights, (batch, slots, 1))
    kept = 1.0 - mul(slot_weights, reshape(erase, (batch, 1, width)))
    added = reshape(addition, (batch, 1, width))
    if weighted_add:
        added = mul(slot_weights, added)
    return add(added, mul(value_memory, kept))


"""
MGRN building blocks with hand-derived backward passes.

All forward functions accept a leading batch of days (or samples) where
that makes sense, so a whole minibatch of trading days runs through one
numpy call per layer. Each `*_forward` that is differentiated returns a
cache consumed by the matching `*_backward`.
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from utils.errors import LengthMismatch, RowMismatch, ShapeMismatch
from utils.model.config import N_CLASSES, PROB_CLIP
from utils.numerics.linalg import relu, sigmoid, softmax_axis


# =============================================================================
# GCN
# =============================================================================

@dataclass
class GcnCache:
    propagated: List[np.ndarray]   # A_hat H^(l), per layer
    pre: List[np.ndarray]          # A_hat H^(l) W^(l), per layer


def _check_gcn_shapes(a_hat: np.ndarray, x: np.ndarray, weights: Sequence[np.ndarray]):
    if a_hat.ndim != 2 or a_hat.shape[0] != a_hat.shape[1]:
        raise ShapeMismatch(f"Adjacency must be square, got {a_hat.shape}")
    if x.ndim < 2 or x.shape[-2] != a_hat.shape[0]:
        raise ShapeMismatch(f"Features {x.shape} do not match a {a_hat.shape[0]}-node graph")
    if not weights:
        raise ShapeMismatch("GCN needs at least one layer")
    width = x.shape[-1]
    for l, w in enumerate(weights):
        if w.ndim != 2 or w.shape[0] != width:
            raise ShapeMismatch(f"GCN layer {l} weight {w.shape} does not accept width {width}")
        width = w.shape[1]


def gcn_forward_cached(a_hat: np.ndarray, x: np.ndarray, weights: Sequence[np.ndarray]) -> Tuple[np.ndarray, GcnCache]:
    """
    H^(l+1) = ReLU(A_hat H^(l) W^(l)) for hidden layers; the last layer is linear.

    `x` is (n, d) or (days, n, d).
    """
    _check_gcn_shapes(a_hat, x, weights)
    cache = GcnCache(propagated=[], pre=[])
    h = x
    last = len(weights) - 1
    for l, w in enumerate(weights):
        prop = a_hat @ h
        pre = prop @ w
        cache.propagated.append(prop)
        cache.pre.append(pre)
        h = pre if l == last else relu(pre)
    return h, cache


def gcn_forward(a_hat: np.ndarray, x: np.ndarray, weights: Sequence[np.ndarray]) -> np.ndarray:
    return gcn_forward_cached(a_hat, x, weights)[0]


def gcn_backward(
    d_out: np.ndarray, a_hat: np.ndarray, weights: Sequence[np.ndarray], cache: GcnCache
) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Returns:
        (gradient per weight matrix, gradient with respect to the input features)
    """
    grads: List[np.ndarray] = [np.zeros_like(w) for w in weights]
    dh = d_out
    last = len(weights) - 1
    for l in range(last, -1, -1):
        dpre = dh if l == last else dh * (cache.pre[l] > 0)
        prop = cache.propagated[l]
        grads[l] = prop.reshape(-1, prop.shape[-1]).T @ dpre.reshape(-1, dpre.shape[-1])
        dprop = dpre @ weights[l].T
        dh = a_hat.T @ dprop
    return grads, dh


# =============================================================================
# ATTENTION ACROSS GRAPHS
# =============================================================================

@dataclass
class AttentionCache:
    z: np.ndarray       # (g, ..., n, f)
    alpha: np.ndarray   # (g, ..., n)
    v: np.ndarray       # (f,) = W_a q


def _stack_graph_outputs(z_list) -> np.ndarray:
    if isinstance(z_list, np.ndarray):
        z = z_list
    else:
        if len(z_list) == 0:
            raise ShapeMismatch("Attention needs at least one graph output")
        shapes = {np.shape(m) for m in z_list}
        if len(shapes) != 1:
            raise ShapeMismatch(f"Graph outputs have different shapes: {sorted(shapes)}")
        z = np.stack(z_list)
    if z.ndim < 3 or z.shape[0] < 1:
        raise ShapeMismatch(f"Expected (g, n, f) graph outputs, got {z.shape}")
    return z


def attention_aggregate_cached(z_list, w_a: np.ndarray, q_attn: np.ndarray) -> Tuple[np.ndarray, np.ndarray, AttentionCache]:
    """
    Per-node softmax over graphs of Z_i W_a q, then the alpha-weighted sum.

    Args:
        z_list: g graph outputs, each (n, f) or (days, n, f), or one stacked array
        w_a: (f, w) projection
        q_attn: (w, 1) query

    Returns:
        (fused Z, alpha of shape (g, ..., n), cache)
    """
    z = _stack_graph_outputs(z_list)
    f = z.shape[-1]
    if w_a.ndim != 2 or w_a.shape[0] != f:
        raise ShapeMismatch(f"Attention projection {w_a.shape} does not accept width {f}")
    if q_attn.shape != (w_a.shape[1], 1):
        raise ShapeMismatch(f"Attention query must be ({w_a.shape[1]}, 1), got {q_attn.shape}")
    v = (w_a @ q_attn).reshape(-1)
    logits = z @ v
    alpha = softmax_axis(logits, axis=0)
    fused = np.sum(alpha[..., None] * z, axis=0)
    return fused, alpha, AttentionCache(z=z, alpha=alpha, v=v)


def attention_aggregate(z_list, w_a: np.ndarray, q_attn: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    fused, alpha, _ = attention_aggregate_cached(z_list, w_a, q_attn)
    return fused, alpha


def attention_backward(
    d_out: np.ndarray, w_a: np.ndarray, q_attn: np.ndarray, cache: AttentionCache
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Returns:
        (dZ stacked like the cached z, dW_a, dq)
    """
    z, alpha, v = cache.z, cache.alpha, cache.v
    dz = alpha[..., None] * d_out
    d_alpha = np.sum(d_out * z, axis=-1)
    d_logits = alpha * (d_alpha - np.sum(alpha * d_alpha, axis=0, keepdims=True))
    dz += d_logits[..., None] * v
    dv = z.reshape(-1, z.shape[-1]).T @ d_logits.reshape(-1)
    d_wa = np.outer(dv, q_attn.reshape(-1))
    dq = (w_a.T @ dv).reshape(-1, 1)
    return dz, d_wa, dq


# =============================================================================
# CONCATENATION
# =============================================================================

def concat_features(x_d: np.ndarray, z_d: np.ndarray) -> np.ndarray:
    """X_hat = [X | Z] row-wise."""
    if x_d.shape[:-1] != z_d.shape[:-1]:
        raise RowMismatch(f"Cannot concatenate rows of {x_d.shape} and {z_d.shape}")
    return np.concatenate([x_d, z_d], axis=-1)


# =============================================================================
# LSTM
# =============================================================================

@dataclass
class LstmStepCache:
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    tanh_c: np.ndarray


LstmLayer = Tuple[np.ndarray, np.ndarray, np.ndarray]  # W (in, 4H), U (H, 4H), b (4H,)


def lstm_forward_cached(sequence: np.ndarray, layers: Sequence[LstmLayer]) -> Tuple[np.ndarray, List[List[LstmStepCache]]]:
    """
    Stacked LSTM over (batch, steps, in) or (steps, in), oldest step first.

    Gate blocks in W, U and b are ordered input, forget, output, candidate.
    Hidden and cell states start at zero.

    Returns:
        (top-layer hidden state after the last step, per-layer step caches)
    """
    squeeze = sequence.ndim == 2
    seq = sequence[None] if squeeze else sequence
    if seq.ndim != 3 or seq.shape[1] < 1:
        raise ShapeMismatch(f"LSTM input must be (batch, steps, features), got {sequence.shape}")
    batch, steps, _ = seq.shape
    caches: List[List[LstmStepCache]] = []
    inputs = seq
    h = np.zeros((batch, 0))
    for k, (w, u, b) in enumerate(layers):
        hidden = u.shape[0]
        if w.shape != (inputs.shape[2], 4 * hidden) or u.shape != (hidden, 4 * hidden) or b.shape != (4 * hidden,):
            raise ShapeMismatch(f"LSTM layer {k} shapes W{w.shape} U{u.shape} b{b.shape} do not fit input width {inputs.shape[2]}")
        h = np.zeros((batch, hidden))
        c = np.zeros((batch, hidden))
        outputs = np.empty((batch, steps, hidden))
        layer_cache: List[LstmStepCache] = []
        for t in range(steps):
            x_t = inputs[:, t]
            a = x_t @ w + h @ u + b
            i = sigmoid(a[:, :hidden])
            f = sigmoid(a[:, hidden:2 * hidden])
            o = sigmoid(a[:, 2 * hidden:3 * hidden])
            g = np.tanh(a[:, 3 * hidden:])
            c_new = f * c + i * g
            tanh_c = np.tanh(c_new)
            layer_cache.append(LstmStepCache(x=x_t, h_prev=h, c_prev=c, i=i, f=f, o=o, g=g, tanh_c=tanh_c))
            h = o * tanh_c
            c = c_new
            outputs[:, t] = h
        caches.append(layer_cache)
        inputs = outputs
    return (h[0] if squeeze else h), caches


def lstm_forward(sequence: np.ndarray, layers: Sequence[LstmLayer]) -> np.ndarray:
    return lstm_forward_cached(sequence, layers)[0]


def lstm_backward(
    d_h_top: np.ndarray, layers: Sequence[LstmLayer], caches: List[List[LstmStepCache]]
) -> Tuple[List[LstmLayer], np.ndarray]:
    """
    Backpropagation through time from the top hidden state of the last step.

    Returns:
        (per-layer (dW, dU, db), gradient with respect to the input sequence)
    """
    squeeze = d_h_top.ndim == 1
    d_top = d_h_top[None] if squeeze else d_h_top
    steps = len(caches[0])
    batch = d_top.shape[0]

    top_hidden = layers[-1][1].shape[0]
    d_seq = np.zeros((batch, steps, top_hidden))
    d_seq[:, -1] = d_top

    grads: List[LstmLayer] = [None] * len(layers)
    for k in range(len(layers) - 1, -1, -1):
        w, u, _ = layers[k]
        hidden = u.shape[0]
        dw = np.zeros_like(w)
        du = np.zeros_like(u)
        db = np.zeros(4 * hidden)
        d_inputs = np.zeros((batch, steps, w.shape[0]))
        dh_next = np.zeros((batch, hidden))
        dc_next = np.zeros((batch, hidden))
        for t in range(steps - 1, -1, -1):
            s = caches[k][t]
            dh = d_seq[:, t] + dh_next
            dc = dc_next + dh * s.o * (1.0 - s.tanh_c ** 2)
            da = np.concatenate([
                dc * s.g * s.i * (1.0 - s.i),
                dc * s.c_prev * s.f * (1.0 - s.f),
                dh * s.tanh_c * s.o * (1.0 - s.o),
                dc * s.i * (1.0 - s.g ** 2),
            ], axis=1)
            dw += s.x.T @ da
            du += s.h_prev.T @ da
            db += da.sum(axis=0)
            d_inputs[:, t] = da @ w.T
            dh_next = da @ u.T
            dc_next = dc * s.f
        grads[k] = (dw, du, db)
        d_seq = d_inputs
    return grads, (d_seq[0] if squeeze else d_seq)


# =============================================================================
# OUTPUT HEAD AND LOSS
# =============================================================================

def head_forward(hidden: np.ndarray, fc_w: np.ndarray, fc_b: np.ndarray) -> np.ndarray:
    """Softmax class probabilities (batch, 2); column 0 is up."""
    if hidden.shape[-1] != fc_w.shape[0] or fc_w.shape[1] != N_CLASSES or fc_b.shape != (N_CLASSES,):
        raise ShapeMismatch(f"Head W{fc_w.shape} b{fc_b.shape} does not accept hidden width {hidden.shape[-1]}")
    return softmax_axis(hidden @ fc_w + fc_b, axis=-1)


def predict(hidden: np.ndarray, fc_w: np.ndarray, fc_b: np.ndarray) -> Tuple[float, float]:
    """(p_up, p_down) for a single hidden vector."""
    probs = head_forward(np.asarray(hidden, dtype=np.float64).reshape(1, -1), fc_w, fc_b)[0]
    return float(probs[0]), float(probs[1])


def _clip(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)


def bce_loss(p_up: Sequence[float], y: Sequence[int]) -> float:
    """Summed binary cross entropy, probabilities clipped to [1e-12, 1-1e-12]."""
    p = np.asarray(p_up, dtype=np.float64).reshape(-1)
    labels = np.asarray(y, dtype=np.float64).reshape(-1)
    if p.shape != labels.shape:
        raise LengthMismatch(f"{p.size} probabilities for {labels.size} labels")
    p = _clip(p)
    return float(-np.sum(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))


def bce_logit_grad(probs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Gradient of the summed loss with respect to the two head logits.

    Samples whose up-probability sits on the clip boundary get zero gradient.
    """
    labels = np.asarray(y, dtype=np.float64).reshape(-1)
    target = np.stack([labels, 1.0 - labels], axis=1)
    grad = probs - target
    p = probs[:, 0]
    clipped = (p < PROB_CLIP) | (p > 1.0 - PROB_CLIP)
    grad[clipped] = 0.0
    return grad

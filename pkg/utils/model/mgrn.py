"""
The multi-graph recurrent network.

For each trading day an independent GCN per graph turns the news features
X_d into Z_{d,i}; per-node attention fuses the g outputs into Z_d, which is
appended to X_d. A stock's fused rows over the look-back window then go
through a stacked LSTM and a two-way softmax head.

Within a minibatch every trading day that any sample's window touches is
pushed through the GCNs once, and gradients from all samples that share a
day are accumulated into that day's activations before flowing back.
"""

from __future__ import annotations
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from operation.logging.logging_config import get_logger
from utils.errors import MissingDay, NoGraphs, ShapeMismatch, StaleTrace
from utils.graphs.graph_builder import RelationGraph
from utils.model.config import FORGET_BIAS_INIT, N_CLASSES, WEIGHT_INIT, ModelConfig
from utils.model.layers import (
    AttentionCache, GcnCache, LstmStepCache,
    attention_aggregate_cached, attention_backward, bce_logit_grad, bce_loss, concat_features,
    gcn_backward, gcn_forward_cached, head_forward, lstm_backward, lstm_forward_cached,
)
from utils.numerics.linalg import ensure_finite
from utils.numerics.rng import Rng, init_matrix, make_rng

logger = get_logger(__name__)


class MgrnParams:
    """
    Ordered, named parameter tensors.

    Names: gcn{i}.W{l} per graph i and layer l, attn.W_a, attn.q,
    lstm{k}.W / lstm{k}.U / lstm{k}.b per LSTM layer, fc.W, fc.b.
    The order is fixed and defines the checkpoint layout.

    `version` increases on every mutation; traces remember the version they
    were computed with.
    """

    def __init__(self, tensors: "OrderedDict[str, np.ndarray]", n_graphs: int, n_gcn_layers: int, n_lstm_layers: int):
        self._tensors = tensors
        self.n_graphs = n_graphs
        self.n_gcn_layers = n_gcn_layers
        self.n_lstm_layers = n_lstm_layers
        self.version = 0

    @staticmethod
    def layout(cfg: ModelConfig, n_graphs: int) -> List[Tuple[str, Tuple[int, ...]]]:
        """(name, shape) of every tensor in checkpoint order."""
        blocks: List[Tuple[str, Tuple[int, ...]]] = []
        for i in range(n_graphs):
            width = cfg.d
            for l, out in enumerate(cfg.gcn_dims):
                blocks.append((f"gcn{i}.W{l}", (width, out)))
                width = out
        blocks.append(("attn.W_a", (cfg.f_out, cfg.attn_w)))
        blocks.append(("attn.q", (cfg.attn_w, 1)))
        width = cfg.lstm_in
        for k, hidden in enumerate(cfg.lstm_dims):
            blocks.append((f"lstm{k}.W", (width, 4 * hidden)))
            blocks.append((f"lstm{k}.U", (hidden, 4 * hidden)))
            blocks.append((f"lstm{k}.b", (4 * hidden,)))
            width = hidden
        blocks.append(("fc.W", (cfg.lstm_dims[-1], N_CLASSES)))
        blocks.append(("fc.b", (N_CLASSES,)))
        return blocks

    @classmethod
    def initialize(cls, cfg: ModelConfig, n_graphs: int, rng: Rng) -> "MgrnParams":
        """Xavier-uniform matrices, zero biases, forget-gate biases at +1."""
        tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
        for name, shape in cls.layout(cfg, n_graphs):
            if len(shape) == 1:
                bias = np.zeros(shape, dtype=np.float64)
                if name.startswith("lstm"):
                    hidden = shape[0] // 4
                    bias[hidden:2 * hidden] = FORGET_BIAS_INIT
                tensors[name] = bias
            else:
                tensors[name] = init_matrix(rng, shape[0], shape[1], WEIGHT_INIT)
        return cls(tensors, n_graphs, len(cfg.gcn_dims), len(cfg.lstm_dims))

    @classmethod
    def from_arrays(cls, cfg: ModelConfig, n_graphs: int, arrays: Dict[str, np.ndarray]) -> "MgrnParams":
        tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
        for name, shape in cls.layout(cfg, n_graphs):
            if name not in arrays:
                raise ShapeMismatch(f"Missing parameter '{name}'")
            value = np.array(arrays[name], dtype=np.float64)
            if value.shape != shape:
                raise ShapeMismatch(f"Parameter '{name}' has shape {value.shape}, expected {shape}")
            tensors[name] = value
        return cls(tensors, n_graphs, len(cfg.gcn_dims), len(cfg.lstm_dims))

    def __getitem__(self, name: str) -> np.ndarray:
        return self._tensors[name]

    def __setitem__(self, name: str, value: np.ndarray):
        if name not in self._tensors:
            raise KeyError(name)
        if np.shape(value) != self._tensors[name].shape:
            raise ShapeMismatch(f"Parameter '{name}' has shape {self._tensors[name].shape}, got {np.shape(value)}")
        self._tensors[name] = np.array(value, dtype=np.float64)
        self.version += 1

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def names(self) -> List[str]:
        return list(self._tensors)

    def items(self):
        return self._tensors.items()

    @property
    def tensors(self) -> "OrderedDict[str, np.ndarray]":
        """Live tensors for in-place optimizer updates; call mark_updated() afterwards."""
        return self._tensors

    def mark_updated(self):
        self.version += 1

    def copy(self) -> "MgrnParams":
        clone = MgrnParams(
            OrderedDict((k, v.copy()) for k, v in self._tensors.items()),
            self.n_graphs, self.n_gcn_layers, self.n_lstm_layers,
        )
        return clone

    def gcn_weights(self, i: int) -> List[np.ndarray]:
        return [self._tensors[f"gcn{i}.W{l}"] for l in range(self.n_gcn_layers)]

    def lstm_layers(self) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        return [
            (self._tensors[f"lstm{k}.W"], self._tensors[f"lstm{k}.U"], self._tensors[f"lstm{k}.b"])
            for k in range(self.n_lstm_layers)
        ]

    def count(self) -> int:
        return int(sum(v.size for v in self._tensors.values()))


@dataclass
class ForwardTrace:
    """Activations of one batched forward pass."""
    params_version: int
    days: np.ndarray                 # calendar positions pushed through the GCNs, sorted
    stocks: np.ndarray               # (B,) sample stock index
    window_pos: np.ndarray           # (B, T+1) rows of `days` per sample, oldest first
    gcn_caches: List[GcnCache]
    attention: AttentionCache
    x_days: np.ndarray               # (D, n, d)
    lstm_caches: List[List[LstmStepCache]]
    hidden: np.ndarray               # (B, H_top)
    probs: np.ndarray                # (B, 2)

    @property
    def p_up(self) -> np.ndarray:
        return self.probs[:, 0]

    @property
    def alpha(self) -> np.ndarray:
        """(g, D, n) attention coefficients per graph, day and node."""
        return self.attention.alpha


class MgrnModel:
    """
    MGRN over a fixed set of relation graphs.

    Args:
        cfg: Model configuration
        graphs: One or more RelationGraph over the same stock universe
    """

    def __init__(self, cfg: ModelConfig, graphs: Sequence[RelationGraph]):
        if not graphs:
            raise NoGraphs("MGRN needs at least one relation graph")
        sizes = {g.n for g in graphs}
        if len(sizes) != 1:
            raise ShapeMismatch(f"Graphs cover different universes: sizes {sorted(sizes)}")
        self.cfg = cfg
        self.graphs = list(graphs)
        self.a_hats = [np.asarray(g.a_hat) for g in graphs]
        self.n = sizes.pop()

    @property
    def graph_names(self) -> List[str]:
        return [g.name for g in self.graphs]

    def init_params(self, seed: Optional[int] = None) -> MgrnParams:
        rng = make_rng(self.cfg.seed if seed is None else seed)
        return MgrnParams.initialize(self.cfg, len(self.graphs), rng)

    # -------------------------------------------------------------------------
    # Forward
    # -------------------------------------------------------------------------

    def _check_features(self, features: np.ndarray):
        if features.ndim != 3 or features.shape[1] != self.n or features.shape[2] != self.cfg.d:
            raise ShapeMismatch(
                f"Features must be (days, {self.n}, {self.cfg.d}), got {features.shape}"
            )

    def fuse_days(self, params: MgrnParams, x_days: np.ndarray) -> Tuple[np.ndarray, List[GcnCache], AttentionCache]:
        """X_hat for a stack of days: (D, n, d + f_L)."""
        z_list = []
        caches = []
        for i, a_hat in enumerate(self.a_hats):
            z_i, cache = gcn_forward_cached(a_hat, x_days, params.gcn_weights(i))
            z_list.append(z_i)
            caches.append(cache)
        fused, _, att_cache = attention_aggregate_cached(z_list, params["attn.W_a"], params["attn.q"])
        return concat_features(x_days, fused), caches, att_cache

    def forward(self, params: MgrnParams, features: np.ndarray, stocks: Sequence[int], days: Sequence[int]) -> ForwardTrace:
        """
        Batched forward for samples (stocks[k], days[k]).

        Args:
            params: Model parameters
            features: (calendar days, n, d) news features
            stocks: Stock index per sample
            days: Calendar position of the prediction day per sample

        Raises:
            MissingDay: when a window reaches before the first calendar day
        """
        self._check_features(features)
        stocks = np.asarray(stocks, dtype=np.int64)
        days = np.asarray(days, dtype=np.int64)
        lookback = self.cfg.T
        if stocks.shape != days.shape or stocks.ndim != 1 or stocks.size == 0:
            raise ShapeMismatch("stocks and days must be equal-length, non-empty 1-D sequences")
        if days.min() - lookback < 0 or days.max() >= features.shape[0]:
            raise MissingDay(
                f"Windows of {lookback + 1} days need positions in [{lookback}, {features.shape[0] - 1}]"
            )

        windows = days[:, None] - np.arange(lookback, -1, -1)[None, :]
        needed, window_pos = np.unique(windows, return_inverse=True)
        window_pos = window_pos.reshape(windows.shape)

        x_days = features[needed]
        x_hat, gcn_caches, att_cache = self.fuse_days(params, x_days)
        sequences = x_hat[window_pos, stocks[:, None]]
        hidden, lstm_caches = lstm_forward_cached(sequences, params.lstm_layers())
        probs = head_forward(hidden, params["fc.W"], params["fc.b"])
        ensure_finite(probs, "predicted probabilities")
        return ForwardTrace(
            params_version=params.version,
            days=needed, stocks=stocks, window_pos=window_pos,
            gcn_caches=gcn_caches, attention=att_cache, x_days=x_days,
            lstm_caches=lstm_caches, hidden=hidden, probs=probs,
        )

    def forward_window(self, params: MgrnParams, window: np.ndarray, stock: int) -> float:
        """
        p_up for one stock from its (T+1, n, d) feature window, oldest day first.

        Raises:
            MissingDay: when the window does not hold exactly T+1 days
        """
        window = np.asarray(window, dtype=np.float64)
        if window.ndim != 3 or window.shape[0] != self.cfg.T + 1:
            raise MissingDay(f"Window must hold {self.cfg.T + 1} trading days, got shape {window.shape}")
        trace = self.forward(params, window, [stock], [self.cfg.T])
        return float(trace.p_up[0])

    def loss(self, trace: ForwardTrace, labels: Sequence[int]) -> float:
        return bce_loss(trace.p_up, labels)

    # -------------------------------------------------------------------------
    # Backward
    # -------------------------------------------------------------------------

    def backward(
        self, params: MgrnParams, trace: ForwardTrace, labels: Sequence[int], input_grad: bool = False
    ):
        """
        Gradients of the summed loss of the traced batch.

        Returns:
            Dict name -> gradient (same order and shapes as params); with
            input_grad=True also the (D, n, d) gradient for trace.x_days

        Raises:
            StaleTrace: when params changed since the forward pass
        """
        if trace.params_version != params.version:
            raise StaleTrace(
                f"Trace was computed with parameter version {trace.params_version}, now {params.version}"
            )
        labels = np.asarray(labels, dtype=np.float64).reshape(-1)
        if labels.shape[0] != trace.probs.shape[0]:
            raise ShapeMismatch(f"{labels.shape[0]} labels for {trace.probs.shape[0]} samples")

        grads: Dict[str, np.ndarray] = OrderedDict((name, None) for name in params.names())

        d_logits = bce_logit_grad(trace.probs, labels)
        grads["fc.W"] = trace.hidden.T @ d_logits
        grads["fc.b"] = d_logits.sum(axis=0)
        d_hidden = d_logits @ params["fc.W"].T

        layer_grads, d_seq = lstm_backward(d_hidden, params.lstm_layers(), trace.lstm_caches)
        for k, (dw, du, db) in enumerate(layer_grads):
            grads[f"lstm{k}.W"] = dw
            grads[f"lstm{k}.U"] = du
            grads[f"lstm{k}.b"] = db

        d_xhat = np.zeros(trace.x_days.shape[:2] + (d_seq.shape[-1],))
        np.add.at(d_xhat, (trace.window_pos, trace.stocks[:, None]), d_seq)
        d = self.cfg.d
        d_x = d_xhat[..., :d].copy()
        d_fused = d_xhat[..., d:]

        d_z, d_wa, d_q = attention_backward(d_fused, params["attn.W_a"], params["attn.q"], trace.attention)
        grads["attn.W_a"] = d_wa
        grads["attn.q"] = d_q

        for i, a_hat in enumerate(self.a_hats):
            w_grads, d_x_i = gcn_backward(d_z[i], a_hat, params.gcn_weights(i), trace.gcn_caches[i])
            for l, gw in enumerate(w_grads):
                grads[f"gcn{i}.W{l}"] = gw
            d_x += d_x_i

        if input_grad:
            return grads, d_x
        return grads

    # -------------------------------------------------------------------------
    # Inference helpers
    # -------------------------------------------------------------------------

    def predict_proba(
        self, params: MgrnParams, features: np.ndarray, stocks: Sequence[int], days: Sequence[int],
        batch_size: int = 256,
    ) -> np.ndarray:
        """p_up for every sample, evaluated in chunks."""
        stocks = np.asarray(stocks, dtype=np.int64)
        days = np.asarray(days, dtype=np.int64)
        out = np.empty(stocks.shape[0], dtype=np.float64)
        for lo in range(0, stocks.shape[0], batch_size):
            hi = lo + batch_size
            out[lo:hi] = self.forward(params, features, stocks[lo:hi], days[lo:hi]).p_up
        return out

    def attention_summary(self, params: MgrnParams, features: np.ndarray, days: Sequence[int]) -> Dict[str, float]:
        """Mean attention coefficient per graph over the given days and all nodes."""
        self._check_features(features)
        positions = np.unique(np.asarray(days, dtype=np.int64))
        if positions.size == 0:
            return {name: float("nan") for name in self.graph_names}
        _, _, att_cache = self.fuse_days(params, features[positions])
        means = att_cache.alpha.reshape(len(self.graphs), -1).mean(axis=1)
        summary: Dict[str, float] = {}
        for name, value in zip(self.graph_names, means):
            key = name if name not in summary else f"{name}#{len(summary)}"
            summary[key] = float(value)
        return summary

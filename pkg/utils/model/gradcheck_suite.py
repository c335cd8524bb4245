"""
Finite-difference verification of the MGRN backward pass.

Every parameter tensor (and optionally the news features) is perturbed
coordinate by coordinate; the central-difference gradient of the summed
loss must match the analytic gradient within a relative tolerance.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from operation.logging.logging_config import get_logger
from utils.errors import GradCheckError, InvalidConfig
from utils.graphs.graph_builder import RelationGraph, custom_graph
from utils.graphs.universe import StockUniverse
from utils.model.config import GRADCHECK_STEP, GRADCHECK_TOLERANCE, ModelConfig
from utils.model.mgrn import MgrnModel, MgrnParams
from utils.numerics.gradcheck import finite_diff_grad, relative_error
from utils.numerics.rng import Rng, make_rng

logger = get_logger(__name__)

INPUT_KEY = "input"

# Bounds for randomly drawn configurations per size preset
SIZE_PRESETS: Dict[str, Dict] = {
    "tiny": {
        "n": (2, 5), "d": (2, 8), "T": (1, 3), "attn_w": (2, 4), "batch": 4,
        "gcn_dims": [[6, 4], [5, 3], [4], [3, 2]],
        "lstm_dims": [[5], [4], [3]],
    },
    "small": {
        "n": (4, 8), "d": (4, 10), "T": (2, 4), "attn_w": (3, 6), "batch": 6,
        "gcn_dims": [[8, 6], [6, 4], [6]],
        "lstm_dims": [[6], [5, 4]],
    },
}


@dataclass
class GradCheckReport:
    label: str
    errors: Dict[str, float] = field(default_factory=dict)
    tolerance: float = GRADCHECK_TOLERANCE

    @property
    def max_error(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def failures(self) -> Dict[str, float]:
        return {k: v for k, v in self.errors.items() if v >= self.tolerance}


def random_graph(rng: Rng, universe: StockUniverse, name: str, density: float = 0.6) -> RelationGraph:
    """Symmetric random adjacency with unit diagonal, entries in [0, 1]."""
    n = len(universe)
    weights = rng.uniform(0.0, 1.0, size=(n, n))
    mask = rng.uniform(size=(n, n)) < density
    a = np.triu(weights * mask, k=1)
    a = a + a.T
    np.fill_diagonal(a, 1.0)
    return custom_graph(a, universe, name=name)


def check_model_gradients(
    model: MgrnModel,
    params: MgrnParams,
    features: np.ndarray,
    stocks: Sequence[int],
    days: Sequence[int],
    labels: Sequence[int],
    h: float = GRADCHECK_STEP,
    tolerance: float = GRADCHECK_TOLERANCE,
    include_input: bool = True,
    label: str = "model",
) -> GradCheckReport:
    """Compare analytic and central-difference gradients for every tensor."""
    trace = model.forward(params, features, stocks, days)
    grads, d_x_days = model.backward(params, trace, labels, input_grad=True)

    report = GradCheckReport(label=label, tolerance=tolerance)
    for name in params.names():
        def loss_at(theta: np.ndarray, name=name) -> float:
            perturbed = params.copy()
            perturbed[name] = theta
            return model.loss(model.forward(perturbed, features, stocks, days), labels)

        numeric = finite_diff_grad(loss_at, params[name], h=h)
        report.errors[name] = relative_error(grads[name], numeric)

    if include_input:
        def loss_of_features(x: np.ndarray) -> float:
            return model.loss(model.forward(params, x, stocks, days), labels)

        numeric = finite_diff_grad(loss_of_features, features, h=h)
        analytic = np.zeros_like(features)
        analytic[trace.days] = d_x_days
        report.errors[INPUT_KEY] = relative_error(analytic, numeric)
    return report


def random_case(rng: Rng, size: str, n_graphs: int, case_seed: int):
    """Draw (model, params, features, stocks, days, labels) for one check."""
    if size not in SIZE_PRESETS:
        raise InvalidConfig(f"Unknown gradcheck size '{size}', expected one of {sorted(SIZE_PRESETS)}")
    preset = SIZE_PRESETS[size]

    def draw(bounds):
        return int(rng.integers(bounds[0], bounds[1] + 1))

    n, d, lookback = draw(preset["n"]), draw(preset["d"]), draw(preset["T"])
    cfg = ModelConfig(
        d=d,
        gcn_dims=list(preset["gcn_dims"][int(rng.integers(len(preset["gcn_dims"])))]),
        attn_w=draw(preset["attn_w"]),
        lstm_dims=list(preset["lstm_dims"][int(rng.integers(len(preset["lstm_dims"])))]),
        T=lookback,
        seed=case_seed,
    )
    universe = StockUniverse.from_tickers([f"G{i}" for i in range(n)])
    graphs = [random_graph(rng, universe, name=f"random{i}") for i in range(n_graphs)]
    model = MgrnModel(cfg, graphs)
    params = model.init_params()

    n_days = lookback + 3
    features = rng.standard_normal((n_days, n, d))
    batch = preset["batch"]
    stocks = rng.integers(0, n, size=batch)
    days = rng.integers(lookback, n_days, size=batch)
    labels = rng.integers(0, 2, size=batch)
    return model, params, features, stocks, days, labels


def run_gradcheck_suite(
    size: str = "tiny",
    n_cases: int = 5,
    seed: int = 0,
    tolerance: float = GRADCHECK_TOLERANCE,
    raise_on_failure: bool = True,
) -> List[GradCheckReport]:
    """
    Check gradients on `n_cases` random configurations, cycling g over 1, 2, 3.

    Raises:
        GradCheckError: when any tensor exceeds the tolerance and raise_on_failure is set
    """
    rng = make_rng(seed)
    reports: List[GradCheckReport] = []
    for case in range(n_cases):
        n_graphs = 1 + case % 3
        model, params, features, stocks, days, labels = random_case(rng, size, n_graphs, seed + case)
        cfg = model.cfg
        label = (f"case{case}: n={model.n} d={cfg.d} g={n_graphs} gcn={cfg.gcn_dims} "
                 f"w={cfg.attn_w} lstm={cfg.lstm_dims} T={cfg.T}")
        report = check_model_gradients(model, params, features, stocks, days, labels,
                                       tolerance=tolerance, label=label)
        status = "ok" if report.passed else "FAILED"
        logger.info(f"gradcheck {label}: max relative error {report.max_error:.3e} [{status}]")
        reports.append(report)

    failed = [r for r in reports if not r.passed]
    if failed and raise_on_failure:
        details = "; ".join(f"{r.label} -> {r.failures()}" for r in failed)
        raise GradCheckError(f"{len(failed)} of {len(reports)} gradient checks failed: {details}")
    return reports

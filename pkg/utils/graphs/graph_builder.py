# graphs/graph_builder.py
from __future__ import annotations
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union
import numpy as np
import pandas as pd
import networkx as nx

from operation.logging.logging_config import get_logger
from operation.monitoring.metrics import get_metrics_registry, DEGENERATE_SERIES, SUPPLY_EDGES_SKIPPED
from utils.errors import DimensionMismatch, LengthMismatch, MissingMembership, ZeroDegree, InvalidConfig
from utils.graphs.config import (
    BOOLEAN, CONTINUOUS, CORRELATION, SECTOR, SUPPLY_CHAIN, IDENTITY, CUSTOM,
    GRAPH_NAMES, SYMMETRY_TOLERANCE, get_level_name,
)
from utils.graphs.universe import StockUniverse
from utils.numerics.linalg import Matrix, ensure_finite

logger = get_logger(__name__)

ReturnsInput = Union[pd.DataFrame, Mapping[str, Sequence[float]]]
MembershipInput = Union[pd.DataFrame, Mapping[str, Sequence[str]]]


@dataclass(frozen=True)
class RelationGraph:
    """
    A named stock-relation graph: raw adjacency A (unit diagonal, symmetric)
    and its symmetric normalization A_hat = D^-1/2 A D^-1/2.
    """
    name: str
    kind: str
    a: Matrix
    a_hat: Matrix
    tickers: Tuple[str, ...] = ()
    skipped: int = 0

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def summary(self) -> Dict[str, Any]:
        """Edge count, density and connected components (self-loops excluded)."""
        off_diag = self.a - np.diag(np.diag(self.a))
        g = nx.from_numpy_array(off_diag)
        return {
            "name": self.name,
            "kind": self.kind,
            "n": self.n,
            "edges": g.number_of_edges(),
            "density": float(nx.density(g)) if self.n > 1 else 0.0,
            "components": nx.number_connected_components(g),
            "skipped": self.skipped,
        }


def _freeze(m: np.ndarray) -> np.ndarray:
    m = np.ascontiguousarray(m, dtype=np.float64)
    m.setflags(write=False)
    return m


def normalize_adjacency(a: Matrix) -> Matrix:
    """
    Symmetric normalization D^-1/2 A D^-1/2 with D_ii = sum_k A_ik.

    Raises:
        DimensionMismatch: a is not square
        InvalidConfig: a is not symmetric or has negative entries
        ZeroDegree: a row sums to zero or less
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"Adjacency must be square, got shape {a.shape}")
    ensure_finite(a, "adjacency")
    if np.any(a < 0):
        raise InvalidConfig("Adjacency entries must be non-negative")
    if not np.allclose(a, a.T, rtol=0.0, atol=SYMMETRY_TOLERANCE):
        raise InvalidConfig("Adjacency must be symmetric")
    degree = a.sum(axis=1)
    if np.any(degree <= 0):
        bad = np.flatnonzero(degree <= 0).tolist()
        raise ZeroDegree(f"Nodes with non-positive degree: {bad}")
    inv_sqrt = 1.0 / np.sqrt(degree)
    # outer(s, s) is exactly symmetric, so the result is too
    return a * np.outer(inv_sqrt, inv_sqrt)


def _make_graph(name: str, kind: str, a: np.ndarray, universe: Optional[StockUniverse], skipped: int = 0) -> RelationGraph:
    np.fill_diagonal(a, 1.0)
    a_hat = normalize_adjacency(a)
    tickers = universe.tickers if universe is not None else ()
    return RelationGraph(name=name, kind=kind, a=_freeze(a), a_hat=_freeze(a_hat), tickers=tickers, skipped=skipped)


def build_correlation_graph(returns: ReturnsInput, universe: StockUniverse) -> RelationGraph:
    """
    Weighted graph of positively clamped Pearson correlations.

    Args:
        returns: Per-ticker aligned return series over the training period,
                 either a mapping ticker -> series or a DataFrame with one
                 column per ticker
        universe: Fixes the row/column order

    Returns:
        Continuous RelationGraph with A_ij = max(rho_ij, 0), unit diagonal
    """
    series: List[np.ndarray] = []
    for ticker in universe:
        if isinstance(returns, pd.DataFrame):
            if ticker not in returns.columns:
                raise LengthMismatch(f"No return series for {ticker}")
            values = returns[ticker].to_numpy(dtype=np.float64)
        else:
            if ticker not in returns:
                raise LengthMismatch(f"No return series for {ticker}")
            values = np.asarray(returns[ticker], dtype=np.float64)
        series.append(values)

    lengths = {len(s) for s in series}
    if len(lengths) > 1:
        raise LengthMismatch(f"Return series have different lengths: {sorted(lengths)}")
    if series and series[0].size < 2:
        raise LengthMismatch("Correlation needs at least 2 observations per series")

    x = np.vstack(series) if series else np.zeros((0, 2))
    ensure_finite(x, "returns")
    degenerate = np.ptp(x, axis=1) == 0.0

    # constant series come back as NaN
    rho = pd.DataFrame(x.T).corr(method="pearson").to_numpy(dtype=np.float64)
    rho = (rho + rho.T) / 2.0
    a = np.clip(np.nan_to_num(rho, nan=0.0), 0.0, 1.0)
    a[degenerate, :] = 0.0
    a[:, degenerate] = 0.0

    if degenerate.any():
        names = [universe.tickers[i] for i in np.flatnonzero(degenerate)]
        logger.warning(f"{len(names)} constant return series get no correlation edges: {names}")
        get_metrics_registry().counter(DEGENERATE_SERIES).inc(len(names))

    return _make_graph(CORRELATION, CONTINUOUS, a, universe, skipped=int(degenerate.sum()))


def build_sector_graph(membership: MembershipInput, universe: StockUniverse, level: int = 3) -> RelationGraph:
    """
    Boolean graph linking stocks that share a GICS code at the given level.

    Args:
        membership: ticker -> (level1, level2, level3, level4) codes, or a
                    DataFrame with columns ticker, level1..level4
        universe: Fixes the row/column order
        level: GICS granularity 1 (Sector) .. 4 (Sub-Industry)
    """
    get_level_name(level)
    if isinstance(membership, pd.DataFrame):
        table = membership.set_index("ticker")[f"level{level}"]
        codes_by_ticker = {str(k): v for k, v in table.items()}
    else:
        codes_by_ticker = {}
        for ticker, codes in membership.items():
            if len(codes) >= level:
                codes_by_ticker[ticker] = codes[level - 1]

    codes = []
    for ticker in universe:
        code = codes_by_ticker.get(ticker)
        if code is None or (isinstance(code, float) and np.isnan(code)) or str(code).strip() == "":
            raise MissingMembership(ticker, level)
        codes.append(str(code).strip())

    labels = np.array(codes, dtype=object)
    a = (labels[:, None] == labels[None, :]).astype(np.float64)
    return _make_graph(SECTOR, BOOLEAN, a, universe)


def build_supply_chain_graph(edges: Iterable[Tuple[str, str]], universe: StockUniverse) -> RelationGraph:
    """
    Boolean, undirected supplier-customer graph.

    Edges touching a ticker outside the universe are skipped; the skip count
    is logged and kept on the returned graph.
    """
    n = len(universe)
    a = np.zeros((n, n), dtype=np.float64)
    skipped = 0
    for supplier, customer in edges:
        if supplier not in universe or customer not in universe:
            skipped += 1
            continue
        i, j = universe.position(supplier), universe.position(customer)
        a[i, j] = 1.0
        a[j, i] = 1.0

    if skipped:
        logger.warning(f"Skipped {skipped} supply-chain edge(s) with tickers outside the universe")
        get_metrics_registry().counter(SUPPLY_EDGES_SKIPPED).inc(skipped)

    return _make_graph(SUPPLY_CHAIN, BOOLEAN, a, universe, skipped=skipped)


def identity_graph(n: int, universe: Optional[StockUniverse] = None) -> RelationGraph:
    """A = A_hat = I: no cross-stock mixing (the no-graph RNN baseline)."""
    if n < 1:
        raise InvalidConfig("Identity graph needs n >= 1")
    if universe is not None and len(universe) != n:
        raise DimensionMismatch(f"Universe has {len(universe)} tickers, expected {n}")
    eye = np.eye(n)
    return RelationGraph(name=IDENTITY, kind=BOOLEAN, a=_freeze(eye), a_hat=_freeze(eye.copy()),
                         tickers=universe.tickers if universe is not None else ())


def custom_graph(a: Matrix, universe: StockUniverse, name: str = CUSTOM) -> RelationGraph:
    """Wrap a user-supplied adjacency; kind is inferred from its entries."""
    a = np.array(a, dtype=np.float64, copy=True)
    if a.shape != (len(universe), len(universe)):
        raise DimensionMismatch(f"Adjacency shape {a.shape} does not match universe size {len(universe)}")
    if np.any(a < 0) or np.any(a > 1):
        raise InvalidConfig("Custom adjacency entries must lie in [0, 1]")
    kind = BOOLEAN if np.all((a == 0) | (a == 1)) else CONTINUOUS
    if name not in GRAPH_NAMES:
        logger.debug(f"Custom graph registered under non-standard name '{name}'")
    return _make_graph(name, kind, a, universe)


def permute_graph(graph: RelationGraph, order: Sequence[int]) -> RelationGraph:
    """Reorder both axes of A and A_hat; order[i] is the old index of new node i."""
    idx = np.asarray(order)
    tickers = tuple(graph.tickers[i] for i in idx) if graph.tickers else ()
    return RelationGraph(
        name=graph.name, kind=graph.kind,
        a=_freeze(graph.a[np.ix_(idx, idx)]), a_hat=_freeze(graph.a_hat[np.ix_(idx, idx)]),
        tickers=tickers, skipped=graph.skipped,
    )


class GraphBuilder:
    """
    Builds the configured set of graphs for one stock universe.
    """

    def __init__(self, universe: StockUniverse):
        self.universe = universe

    def build(
        self,
        names: Sequence[str],
        train_returns: Optional[ReturnsInput] = None,
        membership: Optional[MembershipInput] = None,
        supply_edges: Optional[Iterable[Tuple[str, str]]] = None,
        sector_level: int = 3,
        custom_adjacency: Optional[Matrix] = None,
    ) -> List[RelationGraph]:
        """
        Build graphs in the requested order.

        Args:
            names: Canonical graph names
            train_returns: Training-range returns, required for the correlation graph
            membership: GICS codes, required for the sector graph
            supply_edges: (supplier, customer) pairs, required for the supply-chain graph
            sector_level: GICS granularity for the sector graph
            custom_adjacency: Adjacency for the custom graph
        """
        graphs: List[RelationGraph] = []
        for name in names:
            if name == CORRELATION:
                if train_returns is None:
                    raise InvalidConfig("Correlation graph requested but no training returns given")
                graph = build_correlation_graph(train_returns, self.universe)
            elif name == SECTOR:
                if membership is None:
                    raise InvalidConfig("Sector graph requested but no sector file configured")
                graph = build_sector_graph(membership, self.universe, sector_level)
            elif name == SUPPLY_CHAIN:
                if supply_edges is None:
                    raise InvalidConfig("Supply-chain graph requested but no supply file configured")
                graph = build_supply_chain_graph(supply_edges, self.universe)
            elif name == IDENTITY:
                graph = identity_graph(len(self.universe), self.universe)
            elif name == CUSTOM:
                if custom_adjacency is None:
                    raise InvalidConfig("Custom graph requested but no adjacency given")
                graph = custom_graph(custom_adjacency, self.universe)
            else:
                raise InvalidConfig(f"Unknown graph '{name}'")
            logger.info(f"Built graph {graph.summary()}")
            graphs.append(graph)
        return graphs

"""
Readers for graph inputs and the graph export format.

Export format: `<name>.csv` is the adjacency with a header row and an index
column of tickers; `<name>.json` is the sidecar {name, kind, n, normalized}.
"""

from __future__ import annotations
import json
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd

from utils.errors import MalformedRecord, DataError
from utils.graphs.config import RETURNS_COLUMNS, SECTOR_COLUMNS, SUPPLY_COLUMNS
from utils.graphs.graph_builder import RelationGraph, custom_graph
from utils.graphs.universe import StockUniverse

PathLike = Union[str, Path]


def _read_csv(path: PathLike, columns, dtype=None) -> pd.DataFrame:
    df = pd.read_csv(path, dtype=dtype, float_precision="round_trip")
    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}")
    return df


def load_returns_csv(path: PathLike) -> pd.DataFrame:
    """Read `date,ticker,adj_return` into a date x ticker frame."""
    df = _read_csv(path, RETURNS_COLUMNS, dtype={"ticker": str})
    df["date"] = pd.to_datetime(df["date"]).dt.date
    return df.pivot(index="date", columns="ticker", values="adj_return").sort_index()


def load_sector_membership(path: PathLike) -> Dict[str, Tuple[str, str, str, str]]:
    """Read `ticker,level1..level4`; GICS codes are kept as opaque strings."""
    df = _read_csv(path, SECTOR_COLUMNS, dtype=str)
    out: Dict[str, Tuple[str, str, str, str]] = {}
    for row_no, row in enumerate(df.itertuples(index=False), start=2):
        ticker = str(row.ticker).strip()
        if not ticker or ticker == "nan":
            raise MalformedRecord(row_no, "empty ticker")
        out[ticker] = tuple("" if pd.isna(v) else str(v).strip() for v in (row.level1, row.level2, row.level3, row.level4))
    return out


def load_supply_edges(path: PathLike) -> List[Tuple[str, str]]:
    """Read `supplier,customer` pairs."""
    df = _read_csv(path, SUPPLY_COLUMNS, dtype=str)
    return [(str(s).strip(), str(c).strip()) for s, c in zip(df["supplier"], df["customer"])]


def export_graph(graph: RelationGraph, out_dir: PathLike, normalized: bool = False) -> Path:
    """
    Write a graph as a ticker-labelled CSV plus JSON sidecar.

    Returns:
        Path of the CSV file
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matrix = graph.a_hat if normalized else graph.a
    labels = list(graph.tickers) if graph.tickers else [str(i) for i in range(graph.n)]
    frame = pd.DataFrame(np.asarray(matrix), index=labels, columns=labels)
    frame.index.name = "ticker"
    csv_path = out / f"{graph.name}.csv"
    frame.to_csv(csv_path, float_format="%.17g")
    sidecar = {"name": graph.name, "kind": graph.kind, "n": graph.n, "normalized": bool(normalized)}
    (out / f"{graph.name}.json").write_text(json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return csv_path


def load_graph_csv(path: PathLike, universe: StockUniverse, name: str = "custom") -> RelationGraph:
    """Load an exported (raw, unnormalized) adjacency and align it to the universe."""
    frame = pd.read_csv(path, dtype={"ticker": str}, float_precision="round_trip").set_index("ticker")
    frame.index = frame.index.astype(str)
    frame.columns = frame.columns.astype(str)
    missing = [t for t in universe if t not in frame.index or t not in frame.columns]
    if missing:
        raise DataError(f"{path}: adjacency lacks tickers {missing}")
    order = universe.to_list()
    return custom_graph(frame.loc[order, order].to_numpy(dtype=np.float64), universe, name=name)

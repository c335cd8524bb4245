"""
Planted-signal synthetic datasets.

Every stock-day draws a latent sentiment z. News embeddings point along a
fixed unit direction scaled by z, plus noise. The next-day market-adjusted
return of a stock is beta times the mean z over its ground-truth neighbours
(self included) plus noise, so the label can only be predicted well by a
model that sees the neighbours' news.

The bundle is written in the same file formats the pipeline reads.
"""

from __future__ import annotations
import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from operation.logging.logging_config import get_logger, log_performance
from utils.artifacts import write_json
from utils.errors import InvalidConfig
from utils.graphs.config import DEFAULT_SECTOR_LEVEL
from utils.graphs.graph_builder import build_sector_graph, build_supply_chain_graph
from utils.graphs.universe import StockUniverse
from utils.news.config import (
    SYNTH_BASE_PRICE, SYNTH_EMBED_NOISE, SYNTH_FILES, SYNTH_INDEX_LEVEL, SYNTH_NEWS_RATE,
    SYNTH_SPLIT_FRACTIONS, SYNTH_START_DATE,
)
from utils.numerics.rng import make_rng

logger = get_logger(__name__)

PathLike = Union[str, Path]

# News on day d is stamped between these UTC times, always before the close
NEWS_FIRST_MINUTE = 8 * 60
NEWS_LAST_MINUTE = 15 * 60

# Returns never fall below this, keeping every synthetic price positive
MIN_RETURN = -0.5

# Level used for the "correlation" truth: coarser groups than the sector truth
CORRELATION_TRUTH_LEVEL = 2


class SynthConfig(BaseModel):
    """Synthetic bundle parameters."""
    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=2, description="Number of stocks")
    d: int = Field(ge=1, description="Embedding dimension")
    days: int = Field(ge=10, description="Number of trading days")
    beta: float = Field(ge=0.0, description="Signal strength")
    sigma: float = Field(ge=0.0, description="Return noise standard deviation")
    truth_graph: Literal["sector", "supply", "correlation", "sector+supply"] = "sector"
    seed: int = 0
    news_rate: float = Field(default=SYNTH_NEWS_RATE, ge=0.0, description="Mean news items per stock-day")
    embed_noise: float = Field(default=SYNTH_EMBED_NOISE, ge=0.0)
    start_date: str = SYNTH_START_DATE

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SynthConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise InvalidConfig(f"Invalid synthetic config: {e}") from e

    @classmethod
    def from_json(cls, path: PathLike) -> "SynthConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise InvalidConfig(f"Synthetic config not found: {path}") from e
        except json.JSONDecodeError as e:
            raise InvalidConfig(f"{path} is not valid JSON: {e}") from e
        return cls.from_dict(data)


@dataclass(frozen=True)
class SynthBundle:
    out_dir: Path
    files: Dict[str, Path]
    tickers: Tuple[str, ...]
    dates: Tuple[str, ...]
    splits: Dict[str, Dict[str, str]]


def synth_tickers(n: int) -> List[str]:
    width = max(3, len(str(n - 1)))
    return [f"S{i:0{width}d}" for i in range(n)]


def synth_membership(tickers: Sequence[str], perm: np.ndarray) -> Dict[str, Tuple[str, str, str, str]]:
    """
    Nested GICS-like codes: stocks are laid out in `perm` order and grouped in
    pairs (level 4), fours (level 3), eights (level 2) and sixteens (level 1).
    """
    out = {}
    for pos, idx in enumerate(perm):
        level1 = f"{10 + pos // 16}"
        level2 = level1 + f"{10 + (pos // 8) % 2}"
        level3 = level2 + f"{10 + (pos // 4) % 2}"
        level4 = level3 + f"{10 + (pos // 2) % 2}"
        out[tickers[int(idx)]] = (level1, level2, level3, level4)
    return out


def synth_supply_edges(tickers: Sequence[str], order: np.ndarray) -> List[Tuple[str, str]]:
    """A single supplier -> customer cycle through `order`."""
    n = len(order)
    count = n if n > 2 else n - 1
    return [(tickers[int(order[i])], tickers[int(order[(i + 1) % n])]) for i in range(count)]


def _row_normalized(a: np.ndarray) -> np.ndarray:
    return a / a.sum(axis=1, keepdims=True)


def truth_mixing(cfg: SynthConfig, universe: StockUniverse, membership, edges) -> np.ndarray:
    """Row-stochastic matrix W with r = beta * W z + noise."""
    if cfg.truth_graph == "sector":
        return _row_normalized(build_sector_graph(membership, universe, DEFAULT_SECTOR_LEVEL).a)
    if cfg.truth_graph == "correlation":
        return _row_normalized(build_sector_graph(membership, universe, CORRELATION_TRUTH_LEVEL).a)
    if cfg.truth_graph == "supply":
        return _row_normalized(build_supply_chain_graph(edges, universe).a)
    sector = _row_normalized(build_sector_graph(membership, universe, DEFAULT_SECTOR_LEVEL).a)
    supply = _row_normalized(build_supply_chain_graph(edges, universe).a)
    return 0.5 * sector + 0.5 * supply


def suggest_splits(dates: Sequence[str], fractions: Sequence[float] = SYNTH_SPLIT_FRACTIONS) -> Dict[str, Dict[str, str]]:
    """Contiguous train/dev/test date ranges covering `dates` in order."""
    total = len(dates)
    n_train = int(round(total * fractions[0]))
    n_dev = int(round(total * fractions[1]))
    if n_train < 1 or n_dev < 1 or total - n_train - n_dev < 1:
        raise InvalidConfig(f"{total} days cannot be split into non-empty train/dev/test ranges")
    bounds = {"train": (0, n_train), "dev": (n_train, n_train + n_dev), "test": (n_train + n_dev, total)}
    return {name: {"start": dates[lo], "end": dates[hi - 1]} for name, (lo, hi) in bounds.items()}


def run_config_template(splits: Dict[str, Dict[str, str]], seed: int) -> Dict[str, Any]:
    """Run config pointing at the bundle files (paths relative to the bundle)."""
    return {
        "paths": {
            "news": SYNTH_FILES["news"],
            "prices": SYNTH_FILES["prices"],
            "index": SYNTH_FILES["index"],
            "sector": SYNTH_FILES["sector"],
            "supply": SYNTH_FILES["supply"],
            "output_dir": "runs",
        },
        "splits": splits,
        "seed": int(seed),
    }


@log_performance
def synth_generate(cfg: SynthConfig, out_dir: PathLike, seed: Optional[int] = None) -> SynthBundle:
    """
    Generate and write a synthetic bundle.

    Args:
        cfg: Generator parameters
        out_dir: Directory receiving the bundle files
        seed: Overrides cfg.seed when given

    Returns:
        SynthBundle with the written file paths and suggested splits
    """
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": int(seed)})
    rng = make_rng(cfg.seed)
    n, d, days = cfg.n, cfg.d, cfg.days

    tickers = synth_tickers(n)
    universe = StockUniverse.from_tickers(tickers)
    membership = synth_membership(tickers, rng.permutation(n))
    edges = synth_supply_edges(tickers, rng.permutation(n))
    mixing = truth_mixing(cfg, universe, membership, edges)

    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    z = rng.standard_normal((days, n))
    counts = rng.poisson(cfg.news_rate, size=(days, n))
    total = int(counts.sum())
    noise = rng.standard_normal((total, d))
    minutes = rng.integers(NEWS_FIRST_MINUTE, NEWS_LAST_MINUTE + 1, size=total)
    eps = rng.standard_normal((days, n))

    # r[t] is the return from day t to day t+1
    returns = cfg.beta * (z @ mixing.T) + cfg.sigma * eps
    returns = np.maximum(returns, MIN_RETURN)
    prices = np.empty((days, n), dtype=np.float64)
    prices[0] = SYNTH_BASE_PRICE
    for t in range(1, days):
        prices[t] = prices[t - 1] * (1.0 + returns[t - 1])

    dates = [ts.date() for ts in pd.bdate_range(start=cfg.start_date, periods=days)]
    date_strs = [dt.isoformat() for dt in dates]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {key: out / name for key, name in SYNTH_FILES.items()}

    # news: one line per item, ordered by (day, stock, timestamp)
    day_idx = np.repeat(np.arange(days), counts.sum(axis=1))
    stock_idx = np.concatenate([np.repeat(np.arange(n), counts[t]) for t in range(days)]) if total else np.zeros(0, dtype=np.int64)
    embeddings = z[day_idx, stock_idx][:, None] * direction[None, :] + cfg.embed_noise * noise / np.sqrt(d)
    order = np.lexsort((minutes, stock_idx, day_idx))
    with open(files["news"], "w", encoding="utf-8", newline="\n") as fh:
        for k in order:
            t, s = int(day_idx[k]), int(stock_idx[k])
            stamp = datetime.combine(dates[t], datetime.min.time(), tzinfo=timezone.utc) + timedelta(minutes=int(minutes[k]))
            record = {
                "ticker": tickers[s],
                "ts": stamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "embedding": [round(float(v), 8) for v in embeddings[k]],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    price_frame = pd.DataFrame({
        "date": np.repeat(date_strs, n),
        "ticker": np.tile(tickers, days),
        "close": prices.reshape(-1),
    })
    price_frame.to_csv(files["prices"], index=False, float_format="%.17g", lineterminator="\n")
    pd.DataFrame({"date": date_strs, "close": SYNTH_INDEX_LEVEL}).to_csv(
        files["index"], index=False, float_format="%.17g", lineterminator="\n")
    sector_frame = pd.DataFrame(
        [(t, *membership[t]) for t in tickers], columns=["ticker", "level1", "level2", "level3", "level4"]
    )
    sector_frame.to_csv(files["sector"], index=False, lineterminator="\n")
    pd.DataFrame(edges, columns=["supplier", "customer"]).to_csv(files["supply"], index=False, lineterminator="\n")

    splits = suggest_splits(date_strs)
    write_json(files["config"], cfg.model_dump(mode="json"))
    write_json(files["splits"], splits)
    write_json(files["run_config"], run_config_template(splits, cfg.seed))

    logger.info(
        f"Synthetic bundle: n={n} d={d} days={days} truth={cfg.truth_graph} beta={cfg.beta} "
        f"sigma={cfg.sigma} news={total} -> {out}"
    )
    return SynthBundle(out_dir=out, files=files, tickers=tuple(tickers), dates=tuple(date_strs), splits=splits)

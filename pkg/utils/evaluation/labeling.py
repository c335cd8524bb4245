"""
Prices, market-adjusted returns and binary labels.

r_{s,t} = P_s(t+dt) / P_s(t) - P_m(t+dt) / P_m(t); the label is 1 when
r > 0 and 0 otherwise. `dt` counts trading days of the price table.
"""

from __future__ import annotations
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from operation.logging.logging_config import get_logger
from utils.errors import DataError, MissingPrice
from utils.evaluation.config import INDEX_COLUMNS, PRICE_COLUMNS

logger = get_logger(__name__)

PathLike = Union[str, Path]


def _read_csv(path: PathLike, columns: Sequence[str], dtype=None) -> pd.DataFrame:
    df = pd.read_csv(path, dtype=dtype, float_precision="round_trip")
    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}")
    return df


@dataclass(frozen=True)
class PriceSeries:
    """
    Close prices: `prices` is date x ticker, `index` is date -> market level.

    Missing prices are NaN; every present price is strictly positive.
    """
    prices: pd.DataFrame
    index: pd.Series

    def __post_init__(self):
        values = self.prices.to_numpy(dtype=np.float64)
        present = values[~np.isnan(values)]
        if np.any(present <= 0):
            raise DataError("Stock prices must be strictly positive")
        idx = self.index.to_numpy(dtype=np.float64)
        if np.any(idx[~np.isnan(idx)] <= 0):
            raise DataError("Index levels must be strictly positive")

    @classmethod
    def from_csv(cls, prices_path: PathLike, index_path: PathLike) -> "PriceSeries":
        return cls(load_prices(prices_path), load_index(index_path))

    @property
    def tickers(self) -> List[str]:
        return [str(c) for c in self.prices.columns]

    @property
    def dates(self) -> List[date]:
        return list(self.prices.index)

    def aligned(self, dates: Sequence[date], tickers: Sequence[str]) -> "PriceSeries":
        """Reindex on a calendar and ticker list; absent cells become NaN."""
        return PriceSeries(
            self.prices.reindex(index=list(dates), columns=list(tickers)),
            self.index.reindex(list(dates)),
        )

    def missing_tickers(self, dates: Sequence[date], tickers: Iterable[str]) -> List[str]:
        """Tickers lacking a price on any of the given dates."""
        frame = self.prices.reindex(index=list(dates), columns=list(tickers))
        return [str(t) for t in frame.columns[frame.isna().any(axis=0)]]

    def market_adjusted_return(self, ticker: str, t: date, delta_t: int = 1) -> float:
        dates = self.dates
        try:
            pos = dates.index(t)
        except ValueError:
            raise MissingPrice(f"{t} is not in the price table")
        if pos + delta_t >= len(dates):
            raise MissingPrice(f"No price {delta_t} trading day(s) after {t}")
        t_end = dates[pos + delta_t]
        if ticker not in self.prices.columns:
            raise MissingPrice(f"No prices for {ticker}")
        p0, p1 = self.prices.at[t, ticker], self.prices.at[t_end, ticker]
        m0, m1 = self.index.get(t, np.nan), self.index.get(t_end, np.nan)
        if any(pd.isna(v) for v in (p0, p1, m0, m1)):
            raise MissingPrice(f"Missing stock or index price for {ticker} between {t} and {t_end}")
        return float(p1 / p0 - m1 / m0)


def load_prices(path: PathLike) -> pd.DataFrame:
    """Read `date,ticker,close` into a date x ticker frame."""
    df = _read_csv(path, PRICE_COLUMNS, dtype={"ticker": str})
    df["date"] = pd.to_datetime(df["date"]).dt.date
    if df.duplicated(["date", "ticker"]).any():
        raise DataError(f"{path}: duplicate (date, ticker) rows")
    frame = df.pivot(index="date", columns="ticker", values="close").sort_index()
    frame.columns = [str(c) for c in frame.columns]
    return frame.astype(np.float64)


def load_index(path: PathLike) -> pd.Series:
    """Read `date,close` into a date -> level series."""
    df = _read_csv(path, INDEX_COLUMNS)
    df["date"] = pd.to_datetime(df["date"]).dt.date
    return df.set_index("date")["close"].astype(np.float64).sort_index()


def market_adjusted_return(prices: PriceSeries, ticker: str, t: date, delta_t: int = 1) -> float:
    """
    Stock simple return minus index simple return from t to t + delta_t.

    Raises:
        MissingPrice: when any of the four prices is absent
    """
    return prices.market_adjusted_return(ticker, t, delta_t)


def make_label(r: float) -> int:
    """1 for a strictly positive market-adjusted return, else 0."""
    return 1 if r > 0 else 0


@dataclass(frozen=True)
class ReturnTable:
    """
    Returns over a calendar, shape (days, n); row t is the move t -> t + delta_t.

    Cells without both endpoint prices are NaN.
    """
    raw: np.ndarray
    adjusted: np.ndarray
    market: np.ndarray
    delta_t: int

    @property
    def labels(self) -> np.ndarray:
        """int labels; -1 where the return is undefined."""
        out = np.where(self.adjusted > 0, 1, 0)
        return np.where(np.isnan(self.adjusted), -1, out)


def return_table(prices: PriceSeries, dates: Sequence[date], tickers: Sequence[str], delta_t: int = 1) -> ReturnTable:
    """Vectorized market-adjusted returns and labels on a trading calendar."""
    aligned = prices.aligned(dates, tickers)
    p = aligned.prices.to_numpy(dtype=np.float64)
    m = aligned.index.to_numpy(dtype=np.float64)
    n_days = p.shape[0]
    raw = np.full_like(p, np.nan)
    market = np.full(n_days, np.nan)
    if n_days > delta_t:
        raw[:-delta_t] = p[delta_t:] / p[:-delta_t] - 1.0
        market[:-delta_t] = m[delta_t:] / m[:-delta_t] - 1.0
    adjusted = raw - market[:, None]
    return ReturnTable(raw=raw, adjusted=adjusted, market=market, delta_t=delta_t)


def training_returns(prices: PriceSeries, dates: Sequence[date], tickers: Sequence[str]) -> pd.DataFrame:
    """
    One-day market-adjusted returns between consecutive dates of a range,
    as a frame with one column per ticker (input of the correlation graph).

    Returns:
        (len(dates) - 1) x n frame
    """
    table = return_table(prices, dates, tickers, delta_t=1)
    frame = pd.DataFrame(table.adjusted[:-1], index=list(dates)[:-1], columns=list(tickers))
    if frame.isna().any().any():
        missing = [str(t) for t in frame.columns[frame.isna().any(axis=0)]]
        raise MissingPrice(f"Training returns undefined for {missing}")
    return frame

"""
Daily news aggregation.

Each (stock, trading day) cell holds the mean embedding of the news
published between the previous close and that day's close, or the zero
vector when the stock had no news that day.
"""

from __future__ import annotations
from dataclasses import dataclass, asdict
from datetime import date
from typing import Dict, List, Optional, Sequence

import numpy as np

from operation.logging.logging_config import get_logger
from operation.monitoring.metrics import get_metrics_registry, NEWS_OUT_OF_CALENDAR, NEWS_SKIPPED
from operation.monitoring.performance import track_performance
from utils.errors import EmptyDataset, InconsistentDimension, MissingDay
from utils.graphs.universe import StockUniverse
from utils.news.calendar import TradingCalendar
from utils.news.news_loader import NewsRecord

logger = get_logger(__name__)


@dataclass(frozen=True)
class DailyFeatures:
    day: date
    x: np.ndarray  # n x d


@dataclass(frozen=True)
class AggregationReport:
    split: str
    zero_vector_rate: float
    news_count: int
    skip_count: int

    def to_dict(self) -> Dict:
        return asdict(self)


class FeatureTensor:
    """
    Features for every trading day of a calendar, stacked as (days, n, d).

    `counts[t, s]` is the number of news items averaged into cell (t, s).
    """

    def __init__(self, calendar: TradingCalendar, universe: StockUniverse, x: np.ndarray, counts: np.ndarray):
        if x.ndim != 3 or x.shape[0] != len(calendar) or x.shape[1] != len(universe):
            raise InconsistentDimension(
                f"Feature tensor shape {x.shape} does not match {len(calendar)} days x {len(universe)} stocks"
            )
        if counts.shape != x.shape[:2]:
            raise InconsistentDimension(f"Count matrix shape {counts.shape} does not match {x.shape[:2]}")
        self.calendar = calendar
        self.universe = universe
        self.x = x
        self.counts = counts
        self.x.setflags(write=False)
        self.counts.setflags(write=False)

    @property
    def dim(self) -> int:
        return int(self.x.shape[2])

    @property
    def n_days(self) -> int:
        return int(self.x.shape[0])

    @classmethod
    def from_daily(cls, daily: Sequence[DailyFeatures], calendar: TradingCalendar,
                   universe: StockUniverse) -> "FeatureTensor":
        """Stack per-day matrices; every calendar day must be present."""
        by_day = {f.day: f.x for f in daily}
        missing = [d for d in calendar.dates if d not in by_day]
        if missing:
            raise MissingDay(f"No features for trading day(s) {missing[:5]}")
        x = np.stack([np.asarray(by_day[d], dtype=np.float64) for d in calendar.dates])
        # news counts are lost in the means; a non-zero row counts as one item
        counts = (np.abs(x).sum(axis=2) > 0).astype(np.int64)
        return cls(calendar, universe, x, counts)

    def daily(self) -> List[DailyFeatures]:
        return [DailyFeatures(day=d, x=self.x[t]) for t, d in enumerate(self.calendar.dates)]

    def window(self, end: int, lookback: int) -> np.ndarray:
        """Features for positions end-lookback .. end, oldest first: (lookback+1, n, d)."""
        start = end - lookback
        if start < 0 or end >= self.n_days:
            raise MissingDay(f"Window [{start}, {end}] is outside the {self.n_days}-day calendar")
        return self.x[start:end + 1]

    def zero_vector_rate(self, positions: Sequence[int], stocks: Optional[Sequence[int]] = None) -> float:
        cells = self.counts[np.asarray(positions, dtype=np.int64)]
        if stocks is not None:
            cells = cells[:, np.asarray(stocks, dtype=np.int64)]
        if cells.size == 0:
            return 0.0
        return float(np.mean(cells == 0))

    def news_count(self, positions: Sequence[int], stocks: Optional[Sequence[int]] = None) -> int:
        cells = self.counts[np.asarray(positions, dtype=np.int64)]
        if stocks is not None:
            cells = cells[:, np.asarray(stocks, dtype=np.int64)]
        return int(cells.sum())

    def average_news_per_day(self, positions: Sequence[int]) -> Dict[str, float]:
        """Mean daily news count per ticker over the given days."""
        cells = self.counts[np.asarray(positions, dtype=np.int64)]
        means = cells.mean(axis=0) if len(cells) else np.zeros(len(self.universe))
        return {t: float(means[i]) for i, t in enumerate(self.universe)}

    def report(self, split: str, positions: Sequence[int], skip_count: int = 0) -> AggregationReport:
        return AggregationReport(
            split=split,
            zero_vector_rate=self.zero_vector_rate(positions),
            news_count=self.news_count(positions),
            skip_count=int(skip_count),
        )

    def restrict(self, universe: StockUniverse) -> "FeatureTensor":
        """Same calendar, columns limited to a sub-universe (order of `universe`)."""
        cols = [self.universe.position(t) for t in universe]
        return FeatureTensor(self.calendar, universe, np.array(self.x[:, cols]), np.array(self.counts[:, cols]))


@track_performance
def aggregate_features(
    news: Sequence[NewsRecord],
    universe: StockUniverse,
    calendar: TradingCalendar,
    dim: Optional[int] = None,
) -> FeatureTensor:
    """
    Mean-aggregate news embeddings into a FeatureTensor.

    Records are summed in a canonical order so the result does not depend on
    the order of `news`. Records outside the universe are skipped; records
    after the last close are dropped. Both are counted.
    """
    if dim is None:
        if not news:
            raise EmptyDataset("Cannot infer the embedding dimension from an empty news list")
        dim = news[0].dim

    keyed = []
    skipped = 0
    out_of_calendar = 0
    for record in news:
        if record.dim != dim:
            raise InconsistentDimension(f"Embedding for {record.ticker} has {record.dim} dimensions, expected {dim}")
        if record.ticker not in universe:
            skipped += 1
            continue
        day = calendar.assign_day(record.timestamp)
        if day is None:
            out_of_calendar += 1
            continue
        keyed.append((day, universe.position(record.ticker), record.timestamp, tuple(record.embedding.tolist()), record))
    keyed.sort(key=lambda k: k[:4])

    n_days, n = len(calendar), len(universe)
    sums = np.zeros((n_days, n, dim), dtype=np.float64)
    counts = np.zeros((n_days, n), dtype=np.int64)
    if keyed:
        days = np.array([k[0] for k in keyed], dtype=np.int64)
        stocks = np.array([k[1] for k in keyed], dtype=np.int64)
        emb = np.stack([k[4].embedding for k in keyed])
        # np.add.at accumulates sequentially in array order
        np.add.at(sums, (days, stocks), emb)
        np.add.at(counts, (days, stocks), 1)

    x = np.zeros_like(sums)
    has_news = counts > 0
    x[has_news] = sums[has_news] / counts[has_news][:, None]

    registry = get_metrics_registry()
    if skipped:
        logger.warning(f"Skipped {skipped} news record(s) for tickers outside the universe")
        registry.counter(NEWS_SKIPPED).inc(skipped)
    if out_of_calendar:
        logger.warning(f"Dropped {out_of_calendar} news record(s) published after the last close")
        registry.counter(NEWS_OUT_OF_CALENDAR).inc(out_of_calendar)
    logger.info(f"Aggregated {len(keyed)} news records into {n_days} days x {n} stocks (d={dim})")
    return FeatureTensor(calendar, universe, x, counts)


def aggregate_daily(
    news: Sequence[NewsRecord],
    universe: StockUniverse,
    calendar: TradingCalendar,
    dim: Optional[int] = None,
) -> List[DailyFeatures]:
    """One DailyFeatures per trading day, rows in universe order."""
    return aggregate_features(news, universe, calendar, dim=dim).daily()

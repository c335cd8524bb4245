"""
Chronological train / dev / test splits of (stock, day) samples.

A day belongs to a split when start <= day <= end. A sample (s, d) needs
T earlier trading days for its window (features may reach back across the
split start) and a defined label. Train and dev labels must be realized
inside their own range, i.e. d + delta_t <= the split's last day; test
labels may use prices after the test end when they exist.
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from operation.logging.logging_config import get_logger
from utils.errors import InvalidRange, OverlappingRanges
from utils.evaluation.labeling import ReturnTable
from utils.model.samples import SampleSet
from utils.news.calendar import TradingCalendar
from utils.pipeline.config import SPLIT_NAMES, SplitRanges, check_split_ranges

logger = get_logger(__name__)

# Splits whose labels must be realized inside the range
CONTAINED_LABEL_SPLITS = ("train", "dev")


@dataclass
class DatasetSplits:
    samples: Dict[str, SampleSet]
    positions: Dict[str, List[int]]

    @property
    def train(self) -> SampleSet:
        return self.samples["train"]

    @property
    def dev(self) -> SampleSet:
        return self.samples["dev"]

    @property
    def test(self) -> SampleSet:
        return self.samples["test"]

    def stats(self) -> Dict[str, Dict[str, int]]:
        return {
            name: {"days": len(self.positions[name]), "data_points": len(self.samples[name])}
            for name in SPLIT_NAMES
        }


def split_dataset(
    calendar: TradingCalendar,
    returns: ReturnTable,
    ranges: SplitRanges,
    lookback: int,
    stocks: Optional[Sequence[int]] = None,
) -> DatasetSplits:
    """
    Assign every labelled (stock, day) to the split containing its day.

    Args:
        calendar: Trading calendar the return table is aligned to
        returns: Market-adjusted returns and labels over the calendar
        ranges: Train, dev and test date ranges
        lookback: T, trading days needed before each prediction day
        stocks: Stock indices to use (default all)

    Raises:
        InvalidRange: a range holds no trading day
        OverlappingRanges: ranges overlap or are out of order
    """
    check_split_ranges(ranges)
    n_days, n = returns.adjusted.shape
    if n_days != len(calendar):
        raise InvalidRange(f"Return table covers {n_days} days, calendar has {len(calendar)}")
    stock_idx = np.arange(n) if stocks is None else np.asarray(stocks, dtype=np.int64)
    labels = returns.labels
    delta_t = returns.delta_t

    samples: Dict[str, SampleSet] = {}
    positions: Dict[str, List[int]] = {}
    seen: set = set()
    for name, r in ranges.ordered():
        pos = calendar.positions_between(r.start, r.end)
        if not pos:
            raise InvalidRange(f"{name} range {r.start}..{r.end} contains no trading day")
        if seen.intersection(pos):
            raise OverlappingRanges(f"{name} range shares trading days with an earlier split")
        seen.update(pos)
        positions[name] = pos

        last = pos[-1]
        days = [d for d in pos if d >= lookback]
        if name in CONTAINED_LABEL_SPLITS:
            days = [d for d in days if d + delta_t <= last]
        if not days:
            samples[name] = SampleSet.empty()
            continue
        day_grid = np.repeat(np.asarray(days, dtype=np.int64), stock_idx.size)
        stock_grid = np.tile(stock_idx, len(days))
        keep = labels[day_grid, stock_grid] >= 0
        day_grid, stock_grid = day_grid[keep], stock_grid[keep]
        samples[name] = SampleSet(
            stocks=stock_grid,
            days=day_grid,
            labels=labels[day_grid, stock_grid].astype(np.int64),
            returns=returns.adjusted[day_grid, stock_grid],
            raw_returns=returns.raw[day_grid, stock_grid],
        )

    logger.info("Splits: " + ", ".join(
        f"{name}={len(samples[name])} samples over {len(positions[name])} days" for name in SPLIT_NAMES
    ))
    return DatasetSplits(samples=samples, positions=positions)

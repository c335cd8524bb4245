from __future__ import annotations
from bisect import bisect_left
from dataclasses import dataclass, field
from datetime import date, datetime, time, timezone
from typing import Iterable, List, Optional, Sequence, Tuple
from zoneinfo import ZoneInfo

import pandas as pd

from utils.errors import InvalidConfig
from utils.news.config import DEFAULT_CLOSE_TIME, DEFAULT_TIMEZONE


@dataclass(frozen=True)
class TradingCalendar:
    """
    Strictly increasing trading dates with a market-close cutoff.

    Day d collects everything timestamped in (close(d-1), close(d)];
    anything before the first close belongs to the first day.
    """
    dates: Tuple[date, ...]
    close_time: time = DEFAULT_CLOSE_TIME
    tz: str = DEFAULT_TIMEZONE
    _closes_utc: Tuple[datetime, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dates = tuple(pd.Timestamp(d).date() for d in self.dates)
        if not dates:
            raise InvalidConfig("Trading calendar is empty")
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise InvalidConfig("Trading calendar dates must be strictly increasing")
        zone = ZoneInfo(self.tz)
        closes = tuple(
            datetime.combine(d, self.close_time, tzinfo=zone).astimezone(timezone.utc) for d in dates
        )
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "_closes_utc", closes)

    @classmethod
    def from_dates(cls, dates: Iterable, close_time: time = DEFAULT_CLOSE_TIME, tz: str = DEFAULT_TIMEZONE) -> "TradingCalendar":
        return cls(tuple(sorted({pd.Timestamp(d).date() for d in dates})), close_time, tz)

    def __len__(self) -> int:
        return len(self.dates)

    def close_utc(self, i: int) -> datetime:
        return self._closes_utc[i]

    def assign_day(self, ts: datetime) -> Optional[int]:
        """
        Calendar position of the day a timestamp belongs to, or None when it
        falls after the last close.
        """
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        idx = bisect_left(self._closes_utc, ts)
        if idx >= len(self.dates):
            return None
        return idx

    def position(self, d: date) -> int:
        idx = bisect_left(self.dates, d)
        if idx >= len(self.dates) or self.dates[idx] != d:
            raise KeyError(f"{d} is not a trading day")
        return idx

    def positions_between(self, start: date, end: date) -> List[int]:
        """Positions of trading days with start <= day <= end."""
        lo = bisect_left(self.dates, start)
        hi = bisect_left(self.dates, end)
        if hi < len(self.dates) and self.dates[hi] == end:
            hi += 1
        return list(range(lo, hi))

    def subset(self, positions: Sequence[int]) -> "TradingCalendar":
        return TradingCalendar(tuple(self.dates[i] for i in positions), self.close_time, self.tz)

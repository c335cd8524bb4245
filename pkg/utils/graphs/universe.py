from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from utils.errors import InvalidConfig


@dataclass(frozen=True)
class StockUniverse:
    """
    Ordered, duplicate-free list of tickers. The order is the row/column
    order of every matrix in the pipeline.
    """
    tickers: Tuple[str, ...]
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tickers = tuple(str(t) for t in self.tickers)
        if len(set(tickers)) != len(tickers):
            dupes = sorted({t for t in tickers if tickers.count(t) > 1})
            raise InvalidConfig(f"Duplicate tickers in universe: {dupes}")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "index", {t: i for i, t in enumerate(tickers)})

    @classmethod
    def from_tickers(cls, tickers: Iterable[str]) -> "StockUniverse":
        return cls(tuple(tickers))

    def __len__(self) -> int:
        return len(self.tickers)

    def __contains__(self, ticker: object) -> bool:
        return ticker in self.index

    def __iter__(self):
        return iter(self.tickers)

    def position(self, ticker: str) -> int:
        return self.index[ticker]

    def permute(self, order: Sequence[int]) -> "StockUniverse":
        """Universe whose i-th ticker is self.tickers[order[i]]."""
        return StockUniverse(tuple(self.tickers[i] for i in order))

    def subset(self, keep: Iterable[str]) -> "StockUniverse":
        """Keep the listed tickers, preserving universe order."""
        wanted = set(keep)
        return StockUniverse(tuple(t for t in self.tickers if t in wanted))

    def to_list(self) -> List[str]:
        return list(self.tickers)

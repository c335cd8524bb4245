from __future__ import annotations
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class SampleSet:
    """
    (stock, day) samples of one split.

    `days` are calendar positions of the prediction day d; `labels` and
    `returns` describe the move from d to d + delta_t. `raw_returns` are the
    stock's own (not market-adjusted) returns over the same horizon.
    """
    stocks: np.ndarray
    days: np.ndarray
    labels: np.ndarray
    returns: np.ndarray = field(default_factory=lambda: np.zeros(0))
    raw_returns: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("stocks", "days", "labels", "returns"):
            object.__setattr__(self, name, np.asarray(getattr(self, name)))
        if self.returns.size == 0 and self.labels.size:
            object.__setattr__(self, "returns", np.zeros(self.labels.size))

    def __len__(self) -> int:
        return int(self.stocks.shape[0])

    def take(self, idx: np.ndarray) -> "SampleSet":
        return SampleSet(
            stocks=self.stocks[idx], days=self.days[idx], labels=self.labels[idx],
            returns=self.returns[idx],
            raw_returns=None if self.raw_returns is None else self.raw_returns[idx],
        )

    @classmethod
    def empty(cls) -> "SampleSet":
        z = np.zeros(0, dtype=np.int64)
        return cls(stocks=z, days=z, labels=z, returns=np.zeros(0))

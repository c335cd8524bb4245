"""
Scores, per-day percentile selection and percentile accuracy.

Per day with m predictions, the top and bottom ceil(m*q/200) scores are
selected. Ties are broken by ticker so selections are deterministic.
"""

from __future__ import annotations
import math
from collections import OrderedDict
from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from operation.logging.logging_config import get_logger
from utils.errors import DataError, EmptyDataset
from utils.evaluation.config import FLOAT_FORMAT, PREDICTION_COLUMNS, REQUIRED_PREDICTION_COLUMNS, validate_q
from utils.graphs.universe import StockUniverse
from utils.news.calendar import TradingCalendar
from utils.numerics.rng import make_rng

logger = get_logger(__name__)

PathLike = Union[str, Path]


def score(p_up):
    """S = (p_up - 0.5) * 2; works on scalars and arrays."""
    if isinstance(p_up, (float, int)):
        return (float(p_up) - 0.5) * 2.0
    return (np.asarray(p_up, dtype=np.float64) - 0.5) * 2.0


@dataclass(frozen=True)
class PredictionRecord:
    ticker: str
    day: date
    p_up: float
    score: float
    label: int
    realized_return: float
    raw_return: Optional[float] = None

    @classmethod
    def make(cls, ticker: str, day: date, p_up: float, label: int, realized_return: float,
             raw_return: Optional[float] = None) -> "PredictionRecord":
        p = float(p_up)
        return cls(ticker=ticker, day=day, p_up=p, score=score(p), label=int(label),
                   realized_return=float(realized_return),
                   raw_return=None if raw_return is None else float(raw_return))

    @property
    def predicts_up(self) -> bool:
        return self.score > 0

    @property
    def correct(self) -> bool:
        return self.predicts_up == (self.label == 1)


def selection_count(m: int, q: float) -> int:
    """ceil(m * q / 200), computed exactly."""
    value = validate_q(q)
    return math.ceil(Fraction(m) * Fraction(str(value)) / 200)


def group_by_day(preds: Sequence[PredictionRecord]) -> "OrderedDict[date, List[PredictionRecord]]":
    days: Dict[date, List[PredictionRecord]] = {}
    for p in preds:
        days.setdefault(p.day, []).append(p)
    return OrderedDict((d, days[d]) for d in sorted(days))


def select_day(day_preds: Sequence[PredictionRecord], q: float) -> Tuple[List[PredictionRecord], List[PredictionRecord]]:
    """
    (top, bottom) selections of one day's cross-section.

    With an odd cross-section and q=100 the middle name is in both sides.
    """
    k = selection_count(len(day_preds), q)
    top = sorted(day_preds, key=lambda p: (-p.score, p.ticker))[:k]
    bottom = sorted(day_preds, key=lambda p: (p.score, p.ticker))[:k]
    return top, bottom


def percentile_accuracy(preds: Sequence[PredictionRecord], q: float) -> float:
    """
    Accuracy over the union of each day's top and bottom selections, pooled
    over days. S > 0 counts as an up call, S <= 0 as down.

    Raises:
        InvalidQ: unless 0 < q <= 100
        EmptyDataset: when there are no predictions
    """
    validate_q(q)
    if not preds:
        raise EmptyDataset("No predictions to evaluate")
    correct = 0
    total = 0
    for _, day_preds in group_by_day(preds).items():
        top, bottom = select_day(day_preds, q)
        chosen = {p.ticker: p for p in top}
        chosen.update({p.ticker: p for p in bottom})
        total += len(chosen)
        correct += sum(1 for p in chosen.values() if p.correct)
    return correct / total


def accuracy_table(preds: Sequence[PredictionRecord], q_list: Sequence[float]) -> "OrderedDict[str, float]":
    """{"acc_100": ..., "acc_50": ...} in q_list order."""
    return OrderedDict((f"acc_{_q_label(q)}", percentile_accuracy(preds, q)) for q in q_list)


def _q_label(q: float) -> str:
    value = float(q)
    return str(int(value)) if value.is_integer() else str(value)


def random_scorer(
    universe: StockUniverse,
    calendar: TradingCalendar,
    seed: int,
    outcomes: Optional[Mapping[Tuple[str, date], Tuple[int, float, Optional[float]]]] = None,
) -> List[PredictionRecord]:
    """
    Uniform random p_up in (0, 1) for every (stock, day) of the calendar.

    Draws always cover the full calendar in (day, stock) order, so the score
    of a cell does not depend on which cells are kept. With `outcomes`
    ((ticker, day) -> (label, realized_return, raw_return)) only cells that
    have an outcome are returned, carrying it; otherwise label and returns
    are 0.
    """
    rng = make_rng(seed)
    draws = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=(len(calendar), len(universe)))
    out: List[PredictionRecord] = []
    for t, day in enumerate(calendar.dates):
        for s, ticker in enumerate(universe):
            if outcomes is None:
                out.append(PredictionRecord.make(ticker, day, draws[t, s], 0, 0.0))
                continue
            outcome = outcomes.get((ticker, day))
            if outcome is not None:
                label, realized, raw = outcome
                out.append(PredictionRecord.make(ticker, day, draws[t, s], label, realized, raw))
    return out


# =============================================================================
# PREDICTIONS CSV
# =============================================================================

def predictions_frame(preds: Sequence[PredictionRecord]) -> pd.DataFrame:
    rows = [
        (p.day.isoformat(), p.ticker, p.p_up, p.score, p.label, p.realized_return,
         np.nan if p.raw_return is None else p.raw_return)
        for p in sorted(preds, key=lambda p: (p.day, p.ticker))
    ]
    return pd.DataFrame(rows, columns=PREDICTION_COLUMNS)


def write_predictions(path: PathLike, preds: Sequence[PredictionRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    predictions_frame(preds).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_predictions(path: PathLike) -> List[PredictionRecord]:
    """Read a predictions CSV; `raw_return` is optional."""
    df = pd.read_csv(path, dtype={"ticker": str}, float_precision="round_trip")
    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in REQUIRED_PREDICTION_COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}")
    has_raw = "raw_return" in df.columns
    out: List[PredictionRecord] = []
    for row in df.itertuples(index=False):
        raw = getattr(row, "raw_return") if has_raw else None
        out.append(PredictionRecord(
            ticker=str(row.ticker),
            day=pd.Timestamp(row.date).date(),
            p_up=float(row.p_up),
            score=float(row.score),
            label=int(row.label),
            realized_return=float(row.realized_return),
            raw_return=None if raw is None or pd.isna(raw) else float(raw),
        ))
    logger.info(f"Read {len(out)} predictions from {path}")
    return out

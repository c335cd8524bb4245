# evaluation/backtest.py
from __future__ import annotations
import math
from dataclasses import dataclass, field
from datetime import date
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from operation.logging.logging_config import get_logger
from utils.artifacts import write_json
from utils.errors import EmptyDataset, MissingPrice, SigmaZero
from utils.evaluation.config import (
    ANNUALIZATION, RETURN_BASIS_ADJUSTED, RETURN_BASIS_RAW, TRADING_DAYS_PER_YEAR, validate_q,
)
from utils.evaluation.metrics import PredictionRecord, group_by_day, select_day

logger = get_logger(__name__)


@dataclass(frozen=True)
class BacktestDay:
    day: date
    r: float
    longs: List[str]
    shorts: List[str]

    @property
    def long_weights(self) -> Dict[str, Fraction]:
        return {t: Fraction(1, len(self.longs)) for t in self.longs}

    @property
    def short_weights(self) -> Dict[str, Fraction]:
        return {t: Fraction(1, len(self.shorts)) for t in self.shorts}


@dataclass
class BacktestReport:
    """
    Daily long/short returns and their summary.

    `ann_return_pct` is mean daily return x 252 x 100 (simple). `sharpe` is
    None when the daily returns have no spread.
    """
    q: float
    daily: List[BacktestDay] = field(default_factory=list)
    ann_return_pct: float = 0.0
    sharpe: Optional[float] = None
    max_drawdown_pct: float = 0.0
    return_basis: str = RETURN_BASIS_RAW
    annualization: str = ANNUALIZATION

    @property
    def days(self) -> int:
        return len(self.daily)

    @property
    def returns(self) -> np.ndarray:
        return np.array([d.r for d in self.daily], dtype=np.float64)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "q": self.q,
            "ann_return_pct": self.ann_return_pct,
            "sharpe": self.sharpe,
            "max_drawdown_pct": self.max_drawdown_pct,
            "days": self.days,
            "annualization": self.annualization,
            "return_basis": self.return_basis,
            "daily": [
                {"date": d.day.isoformat(), "r": d.r, "longs": list(d.longs), "shorts": list(d.shorts)}
                for d in self.daily
            ],
        }

    def summary(self) -> Dict[str, Any]:
        out = self.to_dict()
        out.pop("daily")
        return out


def sharpe_ratio(returns: Sequence[float], periods_per_year: int = TRADING_DAYS_PER_YEAR) -> float:
    """
    mean / sample std x sqrt(periods_per_year).

    Raises:
        SigmaZero: fewer than two returns or zero standard deviation
    """
    r = np.asarray(returns, dtype=np.float64)
    if r.size < 2:
        raise SigmaZero(f"Sharpe ratio needs at least 2 daily returns, got {r.size}")
    sigma = float(np.std(r, ddof=1))
    if sigma == 0.0:
        raise SigmaZero("Daily strategy returns have zero standard deviation")
    return float(np.mean(r) / sigma * math.sqrt(periods_per_year))


def annualized_return_pct(returns: Sequence[float], periods_per_year: int = TRADING_DAYS_PER_YEAR) -> float:
    r = np.asarray(returns, dtype=np.float64)
    if r.size == 0:
        return 0.0
    return float(math.fsum(r) / r.size * periods_per_year * 100.0)


def max_drawdown_pct(returns: Sequence[float]) -> float:
    """Largest peak-to-trough fall of the compounded equity curve, in % (<= 0)."""
    r = pd.Series(np.asarray(returns, dtype=np.float64))
    if r.empty:
        return 0.0
    cumulative_returns = pd.concat([pd.Series([1.0]), (1 + r).cumprod()], ignore_index=True)
    running_max = cumulative_returns.cummax()
    drawdown = (cumulative_returns - running_max) / running_max
    return float(drawdown.min() * 100)


def _position_return(p: PredictionRecord, use_raw: bool) -> float:
    value = p.raw_return if (use_raw and p.raw_return is not None) else p.realized_return
    if value is None or not np.isfinite(value):
        raise MissingPrice(f"No realized return for {p.ticker} on {p.day}")
    return float(value)


def backtest(preds: Sequence[PredictionRecord], q: float, use_raw: bool = True) -> BacktestReport:
    """
    Equal-weight, dollar-neutral long/short simulation.

    Each day goes long the top ceil(m*q/200) scores and short the bottom
    ceil(m*q/200), each side weighted 1/k. R_d = mean(long) - mean(short).

    Args:
        preds: Predictions carrying next-period returns
        q: Percentile level, 0 < q <= 100
        use_raw: Use raw stock returns when available, else market-adjusted
    """
    q = validate_q(q)
    if not preds:
        raise EmptyDataset("No predictions to backtest")
    daily: List[BacktestDay] = []
    basis_raw = use_raw and all(p.raw_return is not None for p in preds)
    for day, day_preds in group_by_day(preds).items():
        top, bottom = select_day(day_preds, q)
        long_r = math.fsum(_position_return(p, basis_raw) for p in top) / len(top)
        short_r = math.fsum(_position_return(p, basis_raw) for p in bottom) / len(bottom)
        daily.append(BacktestDay(day=day, r=long_r - short_r,
                                 longs=[p.ticker for p in top], shorts=[p.ticker for p in bottom]))

    report = BacktestReport(q=q, daily=daily,
                            return_basis=RETURN_BASIS_RAW if basis_raw else RETURN_BASIS_ADJUSTED)
    r = report.returns
    report.ann_return_pct = annualized_return_pct(r)
    report.max_drawdown_pct = max_drawdown_pct(r)
    try:
        report.sharpe = sharpe_ratio(r)
    except SigmaZero as e:
        logger.warning(f"Sharpe ratio undefined at q={q}: {e}")
        report.sharpe = None
    logger.info(
        f"Backtest q={q}: {report.days} days, annualized return {report.ann_return_pct:.2f}%, "
        f"Sharpe {report.sharpe if report.sharpe is not None else 'undefined'}"
    )
    return report


def write_backtest_report(path: Union[str, Path], report: BacktestReport) -> Path:
    return write_json(path, report.to_dict())

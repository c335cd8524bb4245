"""
Evaluation Module

Market-adjusted labeling, percentile accuracy and the long/short trading
simulation.
"""

from .labeling import PriceSeries, ReturnTable, market_adjusted_return, make_label, return_table, training_returns
from .metrics import (
    PredictionRecord,
    score,
    selection_count,
    select_day,
    percentile_accuracy,
    accuracy_table,
    random_scorer,
    write_predictions,
    read_predictions,
)
from .backtest import BacktestReport, BacktestDay, backtest, sharpe_ratio, max_drawdown_pct, write_backtest_report

__all__ = [
    'PriceSeries',
    'ReturnTable',
    'market_adjusted_return',
    'make_label',
    'return_table',
    'training_returns',
    'PredictionRecord',
    'score',
    'selection_count',
    'select_day',
    'percentile_accuracy',
    'accuracy_table',
    'random_scorer',
    'write_predictions',
    'read_predictions',
    'BacktestReport',
    'BacktestDay',
    'backtest',
    'sharpe_ratio',
    'max_drawdown_pct',
    'write_backtest_report',
]

"""
Unit tests for utils/evaluation/backtest
"""

import sys
import os
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import json
import math
import tempfile
import unittest
from datetime import date, timedelta
from fractions import Fraction
from pathlib import Path

import numpy as np

from utils.errors import EmptyDataset, InvalidQ, MissingPrice, SigmaZero
from utils.evaluation.backtest import (
    annualized_return_pct,
    backtest,
    max_drawdown_pct,
    sharpe_ratio,
    write_backtest_report,
)
from utils.evaluation.config import RETURN_BASIS_ADJUSTED, RETURN_BASIS_RAW
from utils.evaluation.metrics import PredictionRecord
from utils.numerics import make_rng

DAY = date(2024, 1, 2)


def pred(ticker, s, ret, day=DAY, raw=None):
    return PredictionRecord(ticker=ticker, day=day, p_up=0.5 + s / 2.0, score=s, label=int(ret > 0),
                            realized_return=ret, raw_return=raw)


def random_days(n_days=5, m=10, seed=0):
    rng = make_rng(seed)
    out = []
    for t in range(n_days):
        day = DAY + timedelta(days=t)
        for s, (sc, r) in enumerate(zip(rng.uniform(-1, 1, size=m), rng.normal(0, 0.02, size=m))):
            out.append(pred(f"T{s:02d}", float(sc), float(r), day=day))
    return out


class TestBacktest(unittest.TestCase):

    def test_hand_fixture(self):
        preds = [pred("A", 0.8, 0.01), pred("B", 0.6, 0.03), pred("C", -0.2, 0.0), pred("D", -0.6, -0.02)]
        report = backtest(preds, 100)
        self.assertEqual(report.days, 1)
        self.assertAlmostEqual(report.daily[0].r, 0.03, places=15)
        self.assertEqual(report.daily[0].longs, ["A", "B"])
        self.assertEqual(report.daily[0].shorts, ["D", "C"])
        self.assertIsNone(report.sharpe)
        self.assertAlmostEqual(report.ann_return_pct, 0.03 * 252 * 100, places=9)

    def test_all_zero_has_undefined_sharpe(self):
        preds = [pred(t, 0.0, 0.0, day=DAY + timedelta(days=k)) for k in range(3) for t in "ABCD"]
        report = backtest(preds, 50)
        np.testing.assert_array_equal(report.returns, np.zeros(3))
        self.assertEqual(report.ann_return_pct, 0.0)
        self.assertIsNone(report.sharpe)
        self.assertEqual(report.max_drawdown_pct, 0.0)

    def test_dollar_neutral_every_day(self):
        for q in (100, 50, 20, 10, 2):
            for day in backtest(random_days(), q).daily:
                self.assertEqual(sum(day.long_weights.values()), Fraction(1))
                self.assertEqual(sum(day.short_weights.values()), Fraction(1))
                self.assertEqual(len(day.longs), len(day.shorts))

    def test_constant_shift_cancels(self):
        preds = random_days(seed=1)
        shifted = [pred(p.ticker, p.score, p.realized_return + 0.05, day=p.day) for p in preds]
        np.testing.assert_allclose(backtest(shifted, 20).returns, backtest(preds, 20).returns, atol=1e-15)

    def test_raw_returns_preferred(self):
        preds = [pred("A", 0.5, 0.01, raw=0.04), pred("B", -0.5, 0.0, raw=0.01)]
        report = backtest(preds, 100)
        self.assertAlmostEqual(report.daily[0].r, 0.03, places=15)
        self.assertEqual(report.return_basis, RETURN_BASIS_RAW)
        adjusted = backtest(preds, 100, use_raw=False)
        self.assertAlmostEqual(adjusted.daily[0].r, 0.01, places=15)
        self.assertEqual(adjusted.return_basis, RETURN_BASIS_ADJUSTED)

    def test_partial_raw_falls_back_to_adjusted(self):
        preds = [pred("A", 0.5, 0.01, raw=0.04), pred("B", -0.5, 0.0)]
        self.assertEqual(backtest(preds, 100).return_basis, RETURN_BASIS_ADJUSTED)

    def test_errors(self):
        with self.assertRaises(EmptyDataset):
            backtest([], 10)
        with self.assertRaises(InvalidQ):
            backtest([pred("A", 0.1, 0.0)], 0)
        with self.assertRaises(MissingPrice):
            backtest([pred("A", 0.1, float("nan")), pred("B", -0.1, 0.0)], 100)

    def test_report_json(self):
        report = backtest(random_days(n_days=2, m=4), 50)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_backtest_report(Path(tmp) / "backtest.json", report)
            payload = json.loads(path.read_text())
        self.assertEqual(payload["q"], 50.0)
        self.assertEqual(payload["annualization"], "simple")
        self.assertEqual(len(payload["daily"]), 2)
        self.assertNotIn("daily", report.summary())


class TestSummaryStatistics(unittest.TestCase):

    def test_sharpe_fixture(self):
        self.assertAlmostEqual(sharpe_ratio([0.02, 0.0]), 11.22, delta=0.01)
        self.assertAlmostEqual(sharpe_ratio([0.02, 0.0]), math.sqrt(0.5) * math.sqrt(252), places=12)

    def test_sharpe_sigma_zero(self):
        with self.assertRaises(SigmaZero):
            sharpe_ratio([0.25, 0.25, 0.25])
        with self.assertRaises(SigmaZero):
            sharpe_ratio([0.01])

    def test_annualized_return_is_simple(self):
        self.assertAlmostEqual(annualized_return_pct([0.01, 0.03]), 0.02 * 252 * 100, places=9)
        self.assertEqual(annualized_return_pct([]), 0.0)

    def test_max_drawdown(self):
        self.assertAlmostEqual(max_drawdown_pct([0.1, -0.5, 0.2]), -50.0, places=10)
        self.assertEqual(max_drawdown_pct([0.01, 0.02]), 0.0)
        self.assertAlmostEqual(max_drawdown_pct([-0.1]), -10.0, places=10)


if __name__ == '__main__':
    unittest.main()

"""
Unit tests for operation/ (logging, monitoring, retry, health checks)
"""

import sys
import os
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import json
import logging
import tempfile
import unittest
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np

from operation.healthcheck import (
    CompositeHealthCheck, CsvSchemaHealthCheck, FilesystemHealthCheck, HealthCheck, HealthStatus,
)
from operation.logging.logging_config import (
    RunIdFilter, StructuredFormatter, get_logger, get_run_id, set_run_id, setup_logging,
)
from operation.monitoring.metrics import MetricsRegistry, NEWS_SKIPPED, get_metrics_registry
from operation.monitoring.performance import performance_timer
from operation.retry import RetryConfig, RetryStrategy, calculate_backoff, retry_from_config, retry_with_backoff
from utils.artifacts import atomic_write_text, read_json, write_json
from utils.graphs.universe import StockUniverse
from utils.news.aggregation import aggregate_features
from utils.news.calendar import TradingCalendar
from utils.news.news_loader import NewsRecord


class TestLogging(unittest.TestCase):

    def tearDown(self):
        set_run_id(None)

    def test_formatter_includes_run_id(self):
        set_run_id("run-20240101-000000-7")
        self.assertEqual(get_run_id(), "run-20240101-000000-7")
        record = logging.LogRecord("utils.test", logging.INFO, __file__, 1, "hello %s", ("world",), None)
        RunIdFilter().filter(record)
        line = StructuredFormatter().format(record)
        self.assertIn("[INFO] [run-20240101-000000-7] [utils.test] hello world", line)

    def test_missing_run_id_renders_dash(self):
        record = logging.LogRecord("x", logging.WARNING, __file__, 1, "msg", None, None)
        RunIdFilter().filter(record)
        self.assertEqual(record.run_id, "-")

    def test_log_file_receives_lines(self):
        with tempfile.TemporaryDirectory() as tmp:
            log_file = Path(tmp) / "nested" / "run.log"
            setup_logging("DEBUG", str(log_file), force=True)
            get_logger("utils.test").info("to the file")
            for handler in logging.getLogger().handlers:
                handler.flush()
            text = log_file.read_text(encoding="utf-8")
            setup_logging("INFO", force=True)
        self.assertIn("to the file", text)


class TestMetrics(unittest.TestCase):

    def test_counter_gauge_timer(self):
        registry = MetricsRegistry()
        registry.counter("a").inc()
        registry.counter("a").inc(2)
        registry.gauge("g").set(0.5)
        registry.timer("t").record(0.25)
        snap = registry.snapshot()
        self.assertEqual(snap["counter.a"], 3.0)
        self.assertEqual(snap["gauge.g"], 0.5)
        self.assertEqual(snap["timer.t"]["count"], 1)
        self.assertEqual(list(snap), sorted(snap))

    def test_counter_rejects_negative(self):
        with self.assertRaises(ValueError):
            MetricsRegistry().counter("a").inc(-1)

    def test_reset_all(self):
        registry = MetricsRegistry()
        registry.counter("a").inc(4)
        registry.timer("t").record(1.0)
        registry.reset_all()
        self.assertEqual(registry.counter("a").get(), 0.0)
        self.assertEqual(registry.timer("t").get_stats()["count"], 0)

    def test_performance_timer(self):
        before = get_metrics_registry().timer("test.block").get_stats()["count"]
        with performance_timer("test.block"):
            pass
        self.assertEqual(get_metrics_registry().timer("test.block").get_stats()["count"], before + 1)

    def test_aggregation_is_timed_and_counts_skips(self):
        registry = get_metrics_registry()
        timer_name = "utils.news.aggregation.aggregate_features"
        calls = registry.timer(timer_name).get_stats()["count"]
        skipped = registry.counter(NEWS_SKIPPED).get()
        news = [NewsRecord("ZZZ", datetime(2024, 1, 2, 9, tzinfo=timezone.utc), np.ones(2))]
        aggregate_features(news, StockUniverse.from_tickers(["A"]), TradingCalendar.from_dates([date(2024, 1, 2)]))
        self.assertEqual(registry.timer(timer_name).get_stats()["count"], calls + 1)
        self.assertEqual(registry.counter(NEWS_SKIPPED).get(), skipped + 1)


class TestRetry(unittest.TestCase):

    def test_backoff_strategies(self):
        self.assertEqual(calculate_backoff(3, 0.1, 5.0, 2.0), 0.4)
        self.assertEqual(calculate_backoff(3, 0.1, 5.0, 2.0, RetryStrategy.LINEAR), 0.30000000000000004)
        self.assertEqual(calculate_backoff(3, 0.1, 5.0, 2.0, RetryStrategy.FIXED), 0.1)
        self.assertEqual(calculate_backoff(20, 1.0, 5.0, 2.0), 5.0)

    def test_retries_then_succeeds(self):
        calls, sleeps = [], []

        @retry_with_backoff(max_attempts=3, initial_delay=0.1, sleep=sleeps.append)
        def flaky():
            calls.append(1)
            if len(calls) < 3:
                raise PermissionError("busy")
            return "ok"

        self.assertEqual(flaky(), "ok")
        self.assertEqual(sleeps, [0.1, 0.2])

    def test_gives_up_and_reraises(self):
        cfg = RetryConfig(max_attempts=2, initial_delay=0.0, max_delay=0.0, multiplier=1.0,
                          retryable_exceptions=(PermissionError,))

        @retry_from_config(cfg, sleep=lambda _: None)
        def always_fails():
            raise PermissionError("locked")

        with self.assertRaises(PermissionError):
            always_fails()

    def test_non_retryable_raises_immediately(self):
        calls = []

        @retry_with_backoff(max_attempts=5, retryable_exceptions=(PermissionError,), sleep=lambda _: None)
        def broken():
            calls.append(1)
            raise KeyError("x")

        with self.assertRaises(KeyError):
            broken()
        self.assertEqual(len(calls), 1)


class TestHealthChecks(unittest.TestCase):

    def test_filesystem_statuses(self):
        with tempfile.TemporaryDirectory() as tmp:
            present = Path(tmp) / "prices.csv"
            present.write_text("date,ticker,close\n")
            absent = str(Path(tmp) / "absent.csv")
            self.assertEqual(FilesystemHealthCheck([str(present)]).check().status, HealthStatus.HEALTHY)
            self.assertEqual(FilesystemHealthCheck([str(present)], [absent]).check().status, HealthStatus.DEGRADED)
            result = FilesystemHealthCheck([absent]).check()
        self.assertEqual(result.status, HealthStatus.UNHEALTHY)
        self.assertEqual(result.details["missing_files"], [absent])

    def test_csv_schema(self):
        with tempfile.TemporaryDirectory() as tmp:
            good = Path(tmp) / "good.csv"
            good.write_text("date, ticker ,close\n")
            bad = Path(tmp) / "bad.csv"
            bad.write_text("date,symbol\n")
            ok = CsvSchemaHealthCheck({good: ["date", "ticker", "close"]}).check()
            failed = CsvSchemaHealthCheck({good: ["date"], bad: ["date", "ticker"]}).check()
        self.assertEqual(ok.status, HealthStatus.HEALTHY)
        self.assertEqual(failed.status, HealthStatus.UNHEALTHY)
        self.assertEqual(failed.details["missing_columns"], {str(bad): ["ticker"]})

    def test_composite_folds_statuses(self):
        with tempfile.TemporaryDirectory() as tmp:
            absent = str(Path(tmp) / "absent.csv")
            composite = CompositeHealthCheck([FilesystemHealthCheck([], [absent]), CsvSchemaHealthCheck({})])
            self.assertEqual(composite.get_overall_status(), HealthStatus.DEGRADED)
        self.assertEqual(CompositeHealthCheck.overall_status({}), HealthStatus.UNHEALTHY)

    def test_raising_check_is_unhealthy(self):
        class Exploding(HealthCheck):
            def get_name(self):
                return "exploding"

            def check(self):
                raise RuntimeError("disk gone")

        results = CompositeHealthCheck([Exploding(), CsvSchemaHealthCheck({})]).check_all()
        self.assertEqual(results["exploding"].status, HealthStatus.UNHEALTHY)
        self.assertIn("disk gone", results["exploding"].message)
        self.assertEqual(CompositeHealthCheck.overall_status(results), HealthStatus.UNHEALTHY)


class TestArtifacts(unittest.TestCase):

    def test_json_keeps_key_order_and_replaces_atomically(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "out" / "metrics.json"
            write_json(path, {"b": 1, "a": [1, 2]})
            write_json(path, {"b": 2, "a": []})
            text = path.read_text(encoding="utf-8")
            leftovers = sorted(p.name for p in path.parent.iterdir())
            self.assertEqual(read_json(path), {"a": [], "b": 2})
        self.assertTrue(text.startswith('{\n  "b"'))
        self.assertEqual(list(json.loads(text)), ["b", "a"])
        self.assertTrue(text.endswith("\n"))
        self.assertEqual(leftovers, ["metrics.json"])

    def test_text_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = atomic_write_text(Path(tmp) / "note.txt", "é\n")
            self.assertEqual(path.read_bytes(), "é\n".encode("utf-8"))


if __name__ == '__main__':
    unittest.main()

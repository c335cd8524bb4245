"""
Metrics collection for pipeline runs.

Counters track data-quality events (skipped news, ignored supply edges,
dropped tickers), gauges hold the latest training losses and timers hold
stage and epoch durations.
"""

import threading
from typing import Any, Dict, List

# Well-known metric names
NEWS_SKIPPED = "news.skipped"
NEWS_OUT_OF_CALENDAR = "news.out_of_calendar"
SUPPLY_EDGES_SKIPPED = "graphs.supply_edges_skipped"
DEGENERATE_SERIES = "graphs.degenerate_series"
TICKERS_DROPPED = "universe.tickers_dropped"
TRAIN_LOSS = "train.loss"
DEV_LOSS = "train.dev_loss"


class Counter:
    """Counter metric that can only increase"""

    def __init__(self, name: str):
        self.name = name
        self._value = 0.0
        self._lock = threading.Lock()

    def inc(self, value: float = 1.0):
        if value < 0:
            raise ValueError("Counter increments must be non-negative")
        with self._lock:
            self._value += value

    def get(self) -> float:
        return self._value

    def reset(self):
        with self._lock:
            self._value = 0.0


class Gauge:
    """Gauge metric holding the last value set"""

    def __init__(self, name: str):
        self.name = name
        self._value = 0.0
        self._lock = threading.Lock()

    def set(self, value: float):
        with self._lock:
            self._value = float(value)

    def get(self) -> float:
        return self._value


class Timer:
    """Duration recorder keeping the most recent 1000 observations"""

    MAX_SAMPLES = 1000

    def __init__(self, name: str):
        self.name = name
        self._durations: List[float] = []
        self._count = 0
        self._lock = threading.Lock()

    def record(self, duration: float):
        with self._lock:
            self._count += 1
            self._durations.append(duration)
            if len(self._durations) > self.MAX_SAMPLES:
                self._durations = self._durations[-self.MAX_SAMPLES:]

    def get_stats(self) -> Dict[str, float]:
        with self._lock:
            values = list(self._durations)
            count = self._count
        if not values:
            return {"count": 0, "total": 0.0, "min": 0.0, "max": 0.0, "mean": 0.0}
        return {
            "count": count,
            "total": sum(values),
            "min": min(values),
            "max": max(values),
            "mean": sum(values) / len(values),
        }

    def reset(self):
        with self._lock:
            self._durations.clear()
            self._count = 0


class MetricsRegistry:
    """Central registry for all metrics"""

    def __init__(self):
        self._counters: Dict[str, Counter] = {}
        self._gauges: Dict[str, Gauge] = {}
        self._timers: Dict[str, Timer] = {}
        self._lock = threading.Lock()

    def counter(self, name: str) -> Counter:
        with self._lock:
            if name not in self._counters:
                self._counters[name] = Counter(name)
            return self._counters[name]

    def gauge(self, name: str) -> Gauge:
        with self._lock:
            if name not in self._gauges:
                self._gauges[name] = Gauge(name)
            return self._gauges[name]

    def timer(self, name: str) -> Timer:
        with self._lock:
            if name not in self._timers:
                self._timers[name] = Timer(name)
            return self._timers[name]

    def snapshot(self) -> Dict[str, Any]:
        """All metrics as a flat dictionary, keys sorted."""
        out: Dict[str, Any] = {}
        for name, counter in self._counters.items():
            out[f"counter.{name}"] = counter.get()
        for name, gauge in self._gauges.items():
            out[f"gauge.{name}"] = gauge.get()
        for name, timer in self._timers.items():
            out[f"timer.{name}"] = timer.get_stats()
        return dict(sorted(out.items()))

    def reset_all(self):
        with self._lock:
            for counter in self._counters.values():
                counter.reset()
            for timer in self._timers.values():
                timer.reset()
            self._gauges.clear()


_metrics_registry = MetricsRegistry()


def get_metrics_registry() -> MetricsRegistry:
    """Get the global metrics registry"""
    return _metrics_registry

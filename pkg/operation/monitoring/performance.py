"""
Performance monitoring utilities.
"""

import functools
import time
from contextlib import contextmanager
from typing import Callable

from operation.monitoring.metrics import get_metrics_registry


def track_performance(func: Callable) -> Callable:
    """Record each call's duration under '<module>.<function>'."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        timer = get_metrics_registry().timer(f"{func.__module__}.{func.__name__}")
        start = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            timer.record(time.perf_counter() - start)

    return wrapper


@contextmanager
def performance_timer(name: str):
    """
    Context manager for manual timing.

    Usage:
        with performance_timer("train.epoch"):
            run_epoch()
    """
    timer = get_metrics_registry().timer(name)
    start = time.perf_counter()
    try:
        yield
    finally:
        timer.record(time.perf_counter() - start)

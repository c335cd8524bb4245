# monitoring package
from .metrics import get_metrics_registry, MetricsRegistry
from .performance import track_performance, performance_timer

__all__ = [
    'get_metrics_registry',
    'MetricsRegistry',
    'track_performance',
    'performance_timer'
]

# logging package
from .logging_config import (
    setup_logging,
    get_logger,
    set_run_id,
    get_run_id,
    log_performance
)

__all__ = [
    'setup_logging',
    'get_logger',
    'set_run_id',
    'get_run_id',
    'log_performance'
]

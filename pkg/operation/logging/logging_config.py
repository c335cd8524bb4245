"""
Logging configuration for the MGRN pipeline.
Provides structured logging tagged with the current run id.
"""

import functools
import logging
import os
import sys
import time
from contextvars import ContextVar
from datetime import datetime
from typing import Optional

# Run id for attributing log lines to a pipeline run
run_id: ContextVar[Optional[str]] = ContextVar('run_id', default=None)

_logging_configured = False


class RunIdFilter(logging.Filter):
    """Add run id to log records"""
    def filter(self, record):
        record.run_id = run_id.get() or '-'
        return True


class StructuredFormatter(logging.Formatter):
    """Structured log formatter with run id"""
    def format(self, record):
        # Format: [TIMESTAMP] [LEVEL] [RUN_ID] [MODULE] MESSAGE
        timestamp = datetime.fromtimestamp(record.created).strftime("%Y-%m-%d %H:%M:%S")
        line = f"[{timestamp}] [{record.levelname}] [{getattr(record, 'run_id', '-')}] [{record.name}] {record.getMessage()}"
        if record.exc_info:
            line = f"{line}\n{self.formatException(record.exc_info)}"
        return line


def setup_logging(
    level: str = "INFO",
    log_file: Optional[str] = None,
    force: bool = False
) -> None:
    """
    Configure process-wide logging once.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional path to log file (its directory is created)
        force: Reconfigure even if logging was already set up
    """
    global _logging_configured

    if _logging_configured and not force:
        return

    log_level = getattr(logging, level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers.clear()

    formatter = StructuredFormatter()

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    console_handler.addFilter(RunIdFilter())
    root_logger.addHandler(console_handler)

    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)

        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(log_level)
        file_handler.setFormatter(formatter)
        file_handler.addFilter(RunIdFilter())
        root_logger.addHandler(file_handler)

    _logging_configured = True


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance (typically for __name__)."""
    return logging.getLogger(name)


def set_run_id(rid: str) -> str:
    """Tag subsequent log lines in this context with a run id."""
    run_id.set(rid)
    return rid


def get_run_id() -> Optional[str]:
    """Get current run id"""
    return run_id.get()


def log_performance(func):
    """Decorator to log function execution time"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        logger = get_logger(func.__module__)
        start_time = time.time()
        try:
            result = func(*args, **kwargs)
            logger.info(f"{func.__name__} executed in {time.time() - start_time:.3f}s")
            return result
        except Exception as e:
            logger.error(f"{func.__name__} failed after {time.time() - start_time:.3f}s: {e}")
            raise
    return wrapper

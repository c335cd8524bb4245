"""
Retry configuration for file I/O.
"""

from dataclasses import dataclass
from typing import Tuple, Type
import os

from .retry import RetryStrategy


@dataclass(frozen=True)
class RetryConfig:
    """Configuration for retry behavior"""
    max_attempts: int
    initial_delay: float
    max_delay: float
    multiplier: float
    retryable_exceptions: Tuple[Type[BaseException], ...]
    strategy: RetryStrategy = RetryStrategy.EXPONENTIAL


# Run-directory writes (manifest, reports, checkpoints)
FILE_RETRY_CONFIG = RetryConfig(
    max_attempts=int(os.getenv("FILE_MAX_RETRIES", "3")),
    initial_delay=float(os.getenv("FILE_INITIAL_DELAY", "0.1")),
    max_delay=float(os.getenv("FILE_MAX_DELAY", "5.0")),
    multiplier=1.5,
    retryable_exceptions=(
        PermissionError,
        BlockingIOError,
        InterruptedError,
    ),
    strategy=RetryStrategy.EXPONENTIAL
)

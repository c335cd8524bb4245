"""
Retry with backoff for operations that can fail transiently (file writes on
network or synced volumes).

Backoff is deterministic: no jitter is drawn from the process RNG so a retry
never perturbs seeded computations.
"""

import functools
import logging
import time
from enum import Enum
from typing import Callable, Optional, Tuple, Type

logger = logging.getLogger(__name__)


class RetryStrategy(Enum):
    EXPONENTIAL = "exponential"
    LINEAR = "linear"
    FIXED = "fixed"


def calculate_backoff(
    attempt: int,
    initial_delay: float,
    max_delay: float,
    multiplier: float,
    strategy: RetryStrategy = RetryStrategy.EXPONENTIAL
) -> float:
    """
    Delay before retrying after the given (1-indexed) failed attempt.

    Args:
        attempt: Attempt number that just failed
        initial_delay: Delay after the first failure, in seconds
        max_delay: Upper bound on any delay
        multiplier: Growth factor for the exponential strategy
        strategy: Exponential, linear or fixed spacing
    """
    if strategy == RetryStrategy.EXPONENTIAL:
        delay = initial_delay * (multiplier ** (attempt - 1))
    elif strategy == RetryStrategy.LINEAR:
        delay = initial_delay * attempt
    else:
        delay = initial_delay
    return min(delay, max_delay)


def retry_with_backoff(
    max_attempts: int = 3,
    initial_delay: float = 0.1,
    max_delay: float = 5.0,
    multiplier: float = 2.0,
    retryable_exceptions: Tuple[Type[BaseException], ...] = (OSError,),
    strategy: RetryStrategy = RetryStrategy.EXPONENTIAL,
    sleep: Optional[Callable[[float], None]] = None
):
    """
    Decorator retrying a function on the listed exceptions.

    The last exception is re-raised once all attempts are used.
    """
    do_sleep = sleep or time.sleep

    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            for attempt in range(1, max_attempts + 1):
                try:
                    return func(*args, **kwargs)
                except retryable_exceptions as e:
                    if attempt == max_attempts:
                        logger.error(f"{func.__name__} failed after {max_attempts} attempts: {e}")
                        raise
                    delay = calculate_backoff(attempt, initial_delay, max_delay, multiplier, strategy)
                    logger.warning(
                        f"{func.__name__} failed (attempt {attempt}/{max_attempts}): {e}. "
                        f"Retrying in {delay:.2f}s..."
                    )
                    do_sleep(delay)
        return wrapper
    return decorator


def retry_from_config(config, sleep: Optional[Callable[[float], None]] = None):
    """Build a retry decorator from a RetryConfig."""
    return retry_with_backoff(
        max_attempts=config.max_attempts,
        initial_delay=config.initial_delay,
        max_delay=config.max_delay,
        multiplier=config.multiplier,
        retryable_exceptions=config.retryable_exceptions,
        strategy=config.strategy,
        sleep=sleep,
    )

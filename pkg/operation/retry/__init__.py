# retry package
from .retry import retry_with_backoff, retry_from_config, RetryStrategy, calculate_backoff
from .retry_config import RetryConfig, FILE_RETRY_CONFIG

__all__ = [
    'retry_with_backoff',
    'retry_from_config',
    'RetryStrategy',
    'calculate_backoff',
    'RetryConfig',
    'FILE_RETRY_CONFIG'
]

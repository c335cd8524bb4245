# healthcheck package
from .health_check import (
    HealthCheck,
    HealthCheckResult,
    HealthStatus,
    CompositeHealthCheck
)
from .filesystem_check import FilesystemHealthCheck
from .schema_check import CsvSchemaHealthCheck

__all__ = [
    'HealthCheck',
    'HealthCheckResult',
    'HealthStatus',
    'CompositeHealthCheck',
    'FilesystemHealthCheck',
    'CsvSchemaHealthCheck'
]

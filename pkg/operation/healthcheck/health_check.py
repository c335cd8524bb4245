"""
Pre-flight checks run before a pipeline touches its inputs.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List


class HealthStatus(Enum):
    HEALTHY = "healthy"
    DEGRADED = "degraded"
    UNHEALTHY = "unhealthy"


@dataclass
class HealthCheckResult:
    """Result of a health check"""
    status: HealthStatus
    message: str
    details: Dict[str, Any] = field(default_factory=dict)
    timestamp: datetime = field(default_factory=datetime.now)


class HealthCheck(ABC):
    """Base class for health checks"""

    @abstractmethod
    def check(self) -> HealthCheckResult:
        """Perform health check"""

    @abstractmethod
    def get_name(self) -> str:
        """Get health check name"""


class CompositeHealthCheck:
    """Runs several checks and folds their statuses into one"""

    def __init__(self, checks: List[HealthCheck]):
        self.checks = checks

    def check_all(self) -> Dict[str, HealthCheckResult]:
        """Run every check; a check that raises counts as unhealthy."""
        results = {}
        for check in self.checks:
            try:
                results[check.get_name()] = check.check()
            except Exception as e:
                results[check.get_name()] = HealthCheckResult(
                    status=HealthStatus.UNHEALTHY,
                    message=f"Health check failed: {e}",
                    details={"error": str(e)},
                )
        return results

    @staticmethod
    def overall_status(results: Dict[str, HealthCheckResult]) -> HealthStatus:
        statuses = [r.status for r in results.values()]
        if not statuses or HealthStatus.UNHEALTHY in statuses:
            return HealthStatus.UNHEALTHY
        if HealthStatus.DEGRADED in statuses:
            return HealthStatus.DEGRADED
        return HealthStatus.HEALTHY

    def get_overall_status(self) -> HealthStatus:
        return self.overall_status(self.check_all())

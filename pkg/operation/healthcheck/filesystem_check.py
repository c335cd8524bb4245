"""
Input file availability check.
"""

import os
from pathlib import Path
from typing import List, Optional

from operation.healthcheck.health_check import HealthCheck, HealthCheckResult, HealthStatus


class FilesystemHealthCheck(HealthCheck):
    """Required input files exist and are readable; optional ones may be absent."""

    def __init__(self, required_files: Optional[List[str]] = None, optional_files: Optional[List[str]] = None):
        self.required_files = [str(p) for p in (required_files or [])]
        self.optional_files = [str(p) for p in (optional_files or [])]

    def get_name(self) -> str:
        return "filesystem"

    def check(self) -> HealthCheckResult:
        missing = [p for p in self.required_files if not Path(p).exists()]
        unreadable = [p for p in self.required_files if Path(p).exists() and not os.access(p, os.R_OK)]
        missing_optional = [p for p in self.optional_files if not Path(p).exists()]

        if missing or unreadable:
            return HealthCheckResult(
                status=HealthStatus.UNHEALTHY,
                message=f"File system check failed: {len(missing)} missing, {len(unreadable)} unreadable",
                details={"missing_files": missing, "unreadable_files": unreadable},
            )
        if missing_optional:
            return HealthCheckResult(
                status=HealthStatus.DEGRADED,
                message=f"{len(missing_optional)} optional input(s) absent",
                details={"missing_optional_files": missing_optional},
            )
        return HealthCheckResult(
            status=HealthStatus.HEALTHY,
            message="All required files are accessible",
            details={"checked_files": len(self.required_files) + len(self.optional_files)},
        )

"""
CSV header check for pipeline inputs.
"""

import csv
from pathlib import Path
from typing import Dict, List, Sequence

from operation.healthcheck.health_check import HealthCheck, HealthCheckResult, HealthStatus


class CsvSchemaHealthCheck(HealthCheck):
    """Each CSV's header row must contain the expected columns."""

    def __init__(self, schemas: Dict[str, Sequence[str]]):
        """
        Args:
            schemas: Mapping of CSV path to required column names
        """
        self.schemas = {str(k): list(v) for k, v in schemas.items()}

    def get_name(self) -> str:
        return "csv_schema"

    def check(self) -> HealthCheckResult:
        problems: Dict[str, List[str]] = {}
        for path, columns in self.schemas.items():
            if not Path(path).exists():
                continue
            with open(path, newline="", encoding="utf-8") as fh:
                header = next(csv.reader(fh), [])
            header = [h.strip() for h in header]
            missing = [c for c in columns if c not in header]
            if missing:
                problems[path] = missing

        if problems:
            return HealthCheckResult(
                status=HealthStatus.UNHEALTHY,
                message=f"{len(problems)} file(s) missing required columns",
                details={"missing_columns": problems},
            )
        return HealthCheckResult(
            status=HealthStatus.HEALTHY,
            message="CSV headers match expected schemas",
            details={"checked_files": len(self.schemas)},
        )

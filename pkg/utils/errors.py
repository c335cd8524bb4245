"""
Exception hierarchy for the MGRN pipeline.

Every domain error carries the process exit code the CLI reports for it.
All errors also subclass ValueError so existing `except ValueError` callers
keep working.
"""

from typing import Optional


class MgrnError(ValueError):
    """Base class for all pipeline errors."""
    exit_code = 2


# =============================================================================
# CONFIGURATION ERRORS (exit code 1)
# =============================================================================

class ConfigError(MgrnError):
    exit_code = 1


class InvalidConfig(ConfigError):
    pass


class InvalidQ(ConfigError):
    pass


class NoGraphs(ConfigError):
    pass


class InvalidRange(ConfigError):
    pass


class OverlappingRanges(InvalidRange):
    pass


# =============================================================================
# DATA ERRORS (exit code 2)
# =============================================================================

class DataError(MgrnError):
    exit_code = 2


class LengthMismatch(DataError):
    pass


class MalformedRecord(DataError):
    """A news line that cannot be parsed."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"Malformed record at line {line}: {reason}")


class InconsistentDimension(DataError):
    pass


class MissingMembership(DataError):
    def __init__(self, ticker: str, level: Optional[int] = None):
        self.ticker = ticker
        self.level = level
        where = f" at GICS level {level}" if level is not None else ""
        super().__init__(f"No sector membership for {ticker}{where}")


class MissingPrice(DataError):
    pass


class MissingDay(DataError):
    pass


class EmptyDataset(DataError):
    pass


# =============================================================================
# NUMERIC ERRORS (exit code 3)
# =============================================================================

class NumericError(MgrnError):
    exit_code = 3


class DimensionMismatch(NumericError):
    pass


ShapeMismatch = DimensionMismatch


class RowMismatch(DimensionMismatch):
    pass


class EmptyInput(NumericError):
    pass


class NonFiniteEvaluation(NumericError):
    pass


class ZeroDegree(NumericError):
    pass


class StaleTrace(NumericError):
    pass


class SigmaZero(NumericError):
    pass


# =============================================================================
# GRADIENT CHECK (exit code 4)
# =============================================================================

class GradCheckError(MgrnError):
    exit_code = 4


class StageError(MgrnError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: MgrnError):
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"Stage '{stage}' failed: {cause}")

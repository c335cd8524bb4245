"""
Evaluation Module Configuration

Labeling horizon, percentile-accuracy levels, backtest conventions and the
CSV / JSON schemas of prices, predictions and reports.
"""

from utils.errors import InvalidQ

# =============================================================================
# PERCENTILE ACCURACY
# =============================================================================

# Acc_q levels reported by default; Acc_100 is plain accuracy
DEFAULT_Q_LIST = [100, 50, 20, 10, 2]

# Default q for the trading simulation
DEFAULT_BACKTEST_Q = 10

# =============================================================================
# TRADING SIMULATION
# =============================================================================

TRADING_DAYS_PER_YEAR = 252

# mean daily return x trading days, not compounded
ANNUALIZATION = "simple"

# "raw" next-day stock returns, or "market-adjusted"
RETURN_BASIS_RAW = "raw"
RETURN_BASIS_ADJUSTED = "market-adjusted"

# =============================================================================
# FILE SCHEMAS
# =============================================================================

PRICE_COLUMNS = ["date", "ticker", "close"]
INDEX_COLUMNS = ["date", "close"]
PREDICTION_COLUMNS = ["date", "ticker", "p_up", "score", "label", "realized_return", "raw_return"]
REQUIRED_PREDICTION_COLUMNS = PREDICTION_COLUMNS[:-1]

FLOAT_FORMAT = "%.17g"


def validate_q(q: float) -> float:
    """Percentile level must satisfy 0 < q <= 100."""
    try:
        value = float(q)
    except (TypeError, ValueError):
        raise InvalidQ(f"q must be a number, got {q!r}")
    if not (0.0 < value <= 100.0):
        raise InvalidQ(f"q must satisfy 0 < q <= 100, got {q}")
    return value


def parse_q_list(text: str) -> list:
    """'100,50,20' -> [100, 50, 20] (integers kept as int)."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        value = validate_q(part)
        out.append(int(value) if value.is_integer() else value)
    return out

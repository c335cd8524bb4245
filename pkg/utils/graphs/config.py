"""
Graph Module Configuration

Names, kinds and GICS granularities for the relation graphs fed to the
multi-GCN layer.
"""

from typing import Dict, Tuple

from utils.errors import InvalidConfig

# =============================================================================
# GRAPH NAMES
# =============================================================================

CORRELATION = "correlation"
SECTOR = "sector"
SUPPLY_CHAIN = "supply-chain"
IDENTITY = "identity"
CUSTOM = "custom"

GRAPH_NAMES: Tuple[str, ...] = (CORRELATION, SECTOR, SUPPLY_CHAIN, IDENTITY, CUSTOM)

# Short aliases accepted on the command line and in run configs
GRAPH_ALIASES: Dict[str, str] = {
    "corr": CORRELATION,
    "correlation": CORRELATION,
    "sector": SECTOR,
    "supply": SUPPLY_CHAIN,
    "supply-chain": SUPPLY_CHAIN,
    "identity": IDENTITY,
    "custom": CUSTOM,
}

BOOLEAN = "boolean"
CONTINUOUS = "continuous"

# =============================================================================
# GICS GRANULARITIES
# =============================================================================

GICS_LEVEL_NAMES: Dict[int, str] = {
    1: "Sector",
    2: "Industry Group",
    3: "Industry",
    4: "Sub-Industry",
}

# Industry level (GICS level 3)
DEFAULT_SECTOR_LEVEL = 3

# =============================================================================
# INPUT SCHEMAS
# =============================================================================

RETURNS_COLUMNS = ("date", "ticker", "adj_return")
SECTOR_COLUMNS = ("ticker", "level1", "level2", "level3", "level4")
SUPPLY_COLUMNS = ("supplier", "customer")

SYMMETRY_TOLERANCE = 1e-12


def canonical_graph_name(name: str) -> str:
    """Resolve an alias to its canonical graph name."""
    key = name.strip().lower()
    if key not in GRAPH_ALIASES:
        raise InvalidConfig(f"Unknown graph '{name}', expected one of {sorted(GRAPH_ALIASES)}")
    return GRAPH_ALIASES[key]


def get_level_name(level: int) -> str:
    if level not in GICS_LEVEL_NAMES:
        raise InvalidConfig(f"GICS level must be 1..4, got {level}")
    return GICS_LEVEL_NAMES[level]

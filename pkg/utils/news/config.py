"""
News Module Configuration

Market-close cutoff, news file schema and synthetic-data defaults.
"""

from datetime import time

# =============================================================================
# TRADING CALENDAR
# =============================================================================

# News published after the close of day d-1 and up to the close of day d
# belongs to day d. European close: 17:30 CET.
DEFAULT_CLOSE_TIME = time(17, 30)
DEFAULT_TIMEZONE = "Europe/Paris"

# =============================================================================
# NEWS FILE SCHEMA (JSON lines)
# =============================================================================

NEWS_TICKER_FIELD = "ticker"
NEWS_TIMESTAMP_FIELD = "ts"
NEWS_EMBEDDING_FIELD = "embedding"
NEWS_HEADLINE_FIELD = "headline"

# =============================================================================
# FALLBACK EMBEDDER
# =============================================================================

DEFAULT_EMBED_DIM = 16
TOKEN_PATTERN = r"[a-z0-9]+"

# =============================================================================
# SYNTHETIC DATA DEFAULTS
# =============================================================================

SYNTH_START_DATE = "2016-01-04"
SYNTH_BASE_PRICE = 100.0
SYNTH_INDEX_LEVEL = 1000.0
SYNTH_NEWS_RATE = 2.0           # mean news items per stock-day (Poisson)
SYNTH_EMBED_NOISE = 0.3         # noise norm scale on each news embedding
SYNTH_SPLIT_FRACTIONS = (0.6, 0.2, 0.2)
SYNTH_TRUTH_GRAPHS = ("sector", "supply", "correlation", "sector+supply")

# Files written by the generator
SYNTH_FILES = {
    "news": "news.jsonl",
    "prices": "prices.csv",
    "index": "index.csv",
    "sector": "sector.csv",
    "supply": "supply.csv",
    "config": "synth_config.json",
    "splits": "splits.json",
    "run_config": "run_config.json",
}

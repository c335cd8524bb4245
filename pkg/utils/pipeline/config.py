"""
Pipeline Module Configuration

Run configuration (one JSON file per run, CLI flags override fields), run
directory naming and the names of the files a run writes.
"""

from __future__ import annotations
import json
from datetime import date, datetime, time
from pathlib import Path
from typing import Any, Dict, List, Optional, Union
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from utils.errors import InvalidConfig, InvalidRange, OverlappingRanges
from utils.evaluation.config import DEFAULT_BACKTEST_Q, DEFAULT_Q_LIST, validate_q
from utils.graphs.config import CORRELATION, DEFAULT_SECTOR_LEVEL, SECTOR, SUPPLY_CHAIN, canonical_graph_name
from utils.model.config import ModelConfig
from utils.news.config import DEFAULT_TIMEZONE

# =============================================================================
# RUN DIRECTORY
# =============================================================================

RUN_DIR_PREFIX = "run"
RUN_TIMESTAMP_FORMAT = "%Y%m%d-%H%M%S"
DEFAULT_OUTPUT_DIR = "runs"
CLOSE_TIME_FORMAT = "%H:%M"

# Files written under the run directory
RUN_FILES = {
    "manifest": "manifest.json",
    "config": "config.json",
    "checkpoint": "model.ckpt",
    "history": "history.csv",
    "predictions": "predictions.csv",
    "metrics": "metrics.json",
    "backtest": "backtest.json",
    "aggregation": "aggregation.json",
    "graphs": "graphs",
    "comparison": "comparison.csv",
    "comparison_backtest": "comparison_backtest.csv",
    "sector_levels": "sector_levels.csv",
    "log": "run.log",
}

SPLIT_NAMES = ("train", "dev", "test")

DEFAULT_GRAPHS = [CORRELATION, SECTOR, SUPPLY_CHAIN]

# Model variants trained by `compare`: label -> graph list (RAND has none)
VARIANTS: Dict[str, List[str]] = {
    "RAND": [],
    "RNN": ["identity"],
    "MGRN-Corr": [CORRELATION],
    "MGRN-Sector": [SECTOR],
    "MGRN-Supply": [SUPPLY_CHAIN],
    "MGRN": [CORRELATION, SECTOR, SUPPLY_CHAIN],
}

PathLike = Union[str, Path]


class PathsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    news: str
    prices: str
    index: str
    sector: Optional[str] = None
    supply: Optional[str] = None
    custom_graph: Optional[str] = None
    output_dir: str = DEFAULT_OUTPUT_DIR

    def resolved(self, base: Path) -> "PathsConfig":
        """Relative paths are taken relative to `base`."""
        data = {}
        for key, value in self.model_dump().items():
            if value is None:
                data[key] = None
            else:
                p = Path(value)
                data[key] = str(p if p.is_absolute() else base / p)
        return PathsConfig(**data)


class DateRange(BaseModel):
    model_config = ConfigDict(extra="forbid")

    start: date
    end: date


class SplitRanges(BaseModel):
    model_config = ConfigDict(extra="forbid")

    train: DateRange
    dev: DateRange
    test: DateRange

    def ordered(self) -> List[tuple]:
        return [(name, getattr(self, name)) for name in SPLIT_NAMES]


class UniverseFilter(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tickers: Optional[List[str]] = None
    min_avg_news_per_day: float = Field(default=0.0, ge=0.0)
    drop_delisted: bool = True


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    paths: PathsConfig
    splits: SplitRanges
    model: Dict[str, Any] = Field(default_factory=dict, description="ModelConfig fields except d")
    graphs: List[str] = Field(default_factory=lambda: list(DEFAULT_GRAPHS), min_length=1)
    sector_level: int = Field(default=DEFAULT_SECTOR_LEVEL, ge=1, le=4)
    q_list: List[float] = Field(default_factory=lambda: list(DEFAULT_Q_LIST), min_length=1)
    backtest_q: float = DEFAULT_BACKTEST_Q
    universe: UniverseFilter = Field(default_factory=UniverseFilter)
    close_time: str = "17:30"
    timezone: str = DEFAULT_TIMEZONE
    seed: int = 0

    @field_validator("graphs")
    @classmethod
    def _canonical_graphs(cls, names: List[str]) -> List[str]:
        return [canonical_graph_name(n) for n in names]

    @field_validator("q_list")
    @classmethod
    def _valid_q_list(cls, qs: List[float]) -> List[float]:
        return [int(q) if float(q).is_integer() else float(q) for q in (validate_q(q) for q in qs)]

    @field_validator("close_time")
    @classmethod
    def _valid_close_time(cls, value: str) -> str:
        datetime.strptime(value, CLOSE_TIME_FORMAT)
        return value

    @field_validator("timezone")
    @classmethod
    def _valid_timezone(cls, value: str) -> str:
        try:
            ZoneInfo(value)
        except (ZoneInfoNotFoundError, ValueError) as e:
            raise ValueError(f"unknown timezone {value!r}") from e
        return value

    @field_validator("model")
    @classmethod
    def _valid_model(cls, fields: Dict[str, Any]) -> Dict[str, Any]:
        if "d" in fields:
            raise ValueError("the embedding dimension d is read from the news file")
        ModelConfig.model_validate({**fields, "d": 1})
        return fields

    def close_time_of_day(self) -> time:
        return datetime.strptime(self.close_time, CLOSE_TIME_FORMAT).time()

    def model_config_for(self, d: int) -> ModelConfig:
        """ModelConfig for embedding dimension d, seeded with the run seed."""
        return ModelConfig.from_dict({**self.model, "d": d, "seed": self.seed})

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> "RunConfig":
        try:
            cfg = cls.model_validate(data)
        except ValidationError as e:
            raise InvalidConfig(f"Invalid run config: {e}") from e
        check_split_ranges(cfg.splits)
        if base_dir is not None:
            cfg = cfg.model_copy(update={"paths": cfg.paths.resolved(base_dir)})
        return cfg


def check_split_ranges(splits: SplitRanges):
    """
    Each range must be non-empty and train < dev < test without overlap.

    Raises:
        InvalidRange: start after end
        OverlappingRanges: ranges overlap or are out of order
    """
    ranges = splits.ordered()
    for name, r in ranges:
        if r.start > r.end:
            raise InvalidRange(f"{name} range is empty: start {r.start} is after end {r.end}")
    for (name_a, a), (name_b, b) in zip(ranges, ranges[1:]):
        if b.start <= a.end:
            raise OverlappingRanges(f"{name_b} range starts {b.start}, not after {name_a} end {a.end}")


def load_run_config(path: PathLike, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Read a run config (or the `config` block of a run manifest) and apply
    CLI overrides. Relative input paths resolve against the file's directory.

    Args:
        path: JSON config or manifest file
        overrides: Top-level fields (and `model.<field>` keys) to replace; None values are ignored
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise InvalidConfig(f"Config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InvalidConfig(f"{path} is not valid JSON: {e}") from e
    if isinstance(data, dict) and "config" in data and "outputs" in data:
        data = data["config"]
    data = apply_overrides(data, overrides or {})
    return RunConfig.from_dict(data, base_dir=path.parent)


def apply_overrides(data: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    out = json.loads(json.dumps(data))
    for key, value in overrides.items():
        if value is None:
            continue
        if key.startswith("model."):
            out.setdefault("model", {})[key.split(".", 1)[1]] = value
        elif key == "output_dir":
            out.setdefault("paths", {})["output_dir"] = value
        else:
            out[key] = value
    return out

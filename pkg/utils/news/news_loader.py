# news/news_loader.py
from __future__ import annotations
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from operation.logging.logging_config import get_logger
from operation.monitoring.metrics import get_metrics_registry, NEWS_SKIPPED
from utils.errors import InconsistentDimension, MalformedRecord
from utils.graphs.universe import StockUniverse
from utils.news.config import (
    NEWS_EMBEDDING_FIELD, NEWS_HEADLINE_FIELD, NEWS_TICKER_FIELD, NEWS_TIMESTAMP_FIELD,
)
from utils.news.embedder import TokenHashEmbedder

logger = get_logger(__name__)


@dataclass(frozen=True)
class NewsRecord:
    ticker: str
    timestamp: datetime
    embedding: np.ndarray
    headline: Optional[str] = None

    @property
    def dim(self) -> int:
        return int(self.embedding.shape[0])


def parse_timestamp(value: str) -> datetime:
    """ISO-8601 to an aware UTC datetime; naive values are read as UTC."""
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


class NewsLoader:
    """
    Reads the JSON-lines news file.

    Records for tickers outside the universe are skipped and counted in
    `skip_count`; every embedding must have the same dimension.
    """

    def __init__(
        self,
        universe: Optional[StockUniverse] = None,
        embedder: Optional[TokenHashEmbedder] = None,
        expected_dim: Optional[int] = None,
    ):
        """
        Args:
            universe: When given, records for other tickers are skipped
            embedder: Fallback used for records that carry only a headline
            expected_dim: Required embedding dimension (else set by the first record)
        """
        self.universe = universe
        self.embedder = embedder
        self.expected_dim = expected_dim
        self.skip_count = 0
        self.skipped: List[Tuple[str, datetime]] = []

    def _parse_line(self, line_no: int, raw: str) -> NewsRecord:
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as e:
            raise MalformedRecord(line_no, f"invalid JSON ({e.msg})")
        if not isinstance(obj, dict):
            raise MalformedRecord(line_no, "expected a JSON object")

        ticker = obj.get(NEWS_TICKER_FIELD)
        ts_raw = obj.get(NEWS_TIMESTAMP_FIELD)
        if not isinstance(ticker, str) or not ticker.strip():
            raise MalformedRecord(line_no, "missing ticker")
        if not isinstance(ts_raw, str):
            raise MalformedRecord(line_no, "missing timestamp")
        try:
            ts = parse_timestamp(ts_raw)
        except ValueError:
            raise MalformedRecord(line_no, f"unparseable timestamp {ts_raw!r}")

        headline = obj.get(NEWS_HEADLINE_FIELD)
        raw_embedding = obj.get(NEWS_EMBEDDING_FIELD)
        if raw_embedding is None:
            if self.embedder is None or not isinstance(headline, str):
                raise MalformedRecord(line_no, "missing embedding")
            embedding = self.embedder.embed(headline)
        else:
            if not isinstance(raw_embedding, list) or not raw_embedding:
                raise MalformedRecord(line_no, "embedding must be a non-empty list")
            try:
                embedding = np.asarray(raw_embedding, dtype=np.float64)
            except (TypeError, ValueError):
                raise MalformedRecord(line_no, "embedding must contain numbers")
            if embedding.ndim != 1 or not np.all(np.isfinite(embedding)):
                raise MalformedRecord(line_no, "embedding must be a flat list of finite numbers")

        embedding.setflags(write=False)
        return NewsRecord(ticker=ticker.strip(), timestamp=ts, embedding=embedding,
                          headline=headline if isinstance(headline, str) else None)

    def load(self, path: Union[str, Path]) -> List[NewsRecord]:
        records: List[NewsRecord] = []
        dim = self.expected_dim
        self.skip_count = 0
        self.skipped = []
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                record = self._parse_line(line_no, raw)
                if dim is None:
                    dim = record.dim
                elif record.dim != dim:
                    raise InconsistentDimension(
                        f"Line {line_no}: embedding has {record.dim} dimensions, expected {dim}"
                    )
                if self.universe is not None and record.ticker not in self.universe:
                    self.skip_count += 1
                    self.skipped.append((record.ticker, record.timestamp))
                    continue
                records.append(record)

        if self.skip_count:
            logger.warning(f"Skipped {self.skip_count} news record(s) for tickers outside the universe")
            get_metrics_registry().counter(NEWS_SKIPPED).inc(self.skip_count)
        logger.info(f"Loaded {len(records)} news records from {path}")
        return records


def load_news(
    path: Union[str, Path],
    universe: Optional[StockUniverse] = None,
    embedder: Optional[TokenHashEmbedder] = None,
) -> List[NewsRecord]:
    """Load news records from a JSON-lines file."""
    return NewsLoader(universe=universe, embedder=embedder).load(path)

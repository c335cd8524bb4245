"""
News Module

Embedded news ingestion, market-close day assignment, daily mean
aggregation and the planted-signal synthetic generator.
"""

from .calendar import TradingCalendar
from .news_loader import NewsRecord, NewsLoader, load_news
from .aggregation import DailyFeatures, FeatureTensor, AggregationReport, aggregate_daily, aggregate_features
from .embedder import TokenHashEmbedder
from .synth import SynthConfig, SynthBundle, synth_generate, suggest_splits

__all__ = [
    'TradingCalendar',
    'NewsRecord',
    'NewsLoader',
    'load_news',
    'DailyFeatures',
    'FeatureTensor',
    'AggregationReport',
    'aggregate_daily',
    'aggregate_features',
    'TokenHashEmbedder',
    'SynthConfig',
    'SynthBundle',
    'synth_generate',
    'suggest_splits',
]

"""
Pipeline Module

Run configuration, chronological splits and the stage runner that wires
news, graphs, model and evaluation together.
"""

from .config import RunConfig, PathsConfig, SplitRanges, DateRange, UniverseFilter, load_run_config, VARIANTS
from .splits import DatasetSplits, split_dataset
from .pipeline_manager import (
    PipelineManager,
    PreparedDataset,
    EvaluationResult,
    RunManifest,
    baseline_label,
    make_run_dir,
    run_pipeline,
    compare_variants,
    build_graphs,
    evaluate_checkpoint,
)

__all__ = [
    'RunConfig',
    'PathsConfig',
    'SplitRanges',
    'DateRange',
    'UniverseFilter',
    'load_run_config',
    'VARIANTS',
    'DatasetSplits',
    'split_dataset',
    'PipelineManager',
    'PreparedDataset',
    'EvaluationResult',
    'RunManifest',
    'baseline_label',
    'make_run_dir',
    'run_pipeline',
    'compare_variants',
    'build_graphs',
    'evaluate_checkpoint',
]

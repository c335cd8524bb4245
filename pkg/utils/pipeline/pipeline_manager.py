"""
Pipeline Manager

Runs one experiment end to end: pre-flight checks, loading, universe
filtering, news aggregation, splitting, graph construction, training,
evaluation and the trading simulation. Every stage is timed and tracked in
a PipelineState; a domain error raised inside a stage is re-raised as a
StageError naming that stage.

All artifacts land in one run directory `run-<timestamp>-<seed>/`.
"""

from __future__ import annotations
import logging
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from operation.healthcheck import CompositeHealthCheck, CsvSchemaHealthCheck, FilesystemHealthCheck, HealthStatus
from operation.logging.logging_config import get_logger, set_run_id, setup_logging
from operation.monitoring.metrics import TICKERS_DROPPED, get_metrics_registry
from operation.monitoring.performance import performance_timer
from state import PipelineState, StageStatus, initial_state
from utils.artifacts import read_json, write_json
from utils.errors import (
    DataError, EmptyDataset, InconsistentDimension, InvalidConfig, MgrnError, StageError,
)
from utils.evaluation.backtest import BacktestReport, backtest, write_backtest_report
from utils.evaluation.config import INDEX_COLUMNS, PRICE_COLUMNS
from utils.evaluation.labeling import PriceSeries, ReturnTable, return_table, training_returns
from utils.evaluation.metrics import PredictionRecord, accuracy_table, random_scorer, write_predictions
from utils.graphs.config import (
    CORRELATION, CUSTOM, SECTOR, SECTOR_COLUMNS, SUPPLY_CHAIN, SUPPLY_COLUMNS, get_level_name,
)
from utils.graphs.graph_builder import GraphBuilder, RelationGraph
from utils.graphs.graph_io import export_graph, load_graph_csv, load_sector_membership, load_supply_edges
from utils.graphs.universe import StockUniverse
from utils.model.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from utils.model.mgrn import MgrnModel, MgrnParams
from utils.model.samples import SampleSet
from utils.model.trainer import Trainer, TrainingData, TrainingHistory
from utils.news.aggregation import AggregationReport, FeatureTensor, aggregate_features
from utils.news.calendar import TradingCalendar
from utils.news.embedder import TokenHashEmbedder
from utils.news.news_loader import NewsLoader, NewsRecord
from utils.pipeline.config import (
    RUN_DIR_PREFIX, RUN_FILES, RUN_TIMESTAMP_FORMAT, SPLIT_NAMES, VARIANTS, RunConfig,
)
from utils.pipeline.splits import DatasetSplits, split_dataset

logger = get_logger(__name__)

PathLike = Union[str, Path]

STAGES = [
    "preflight", "load", "universe", "aggregate", "split", "graphs",
    "train", "evaluate", "backtest", "manifest",
]

# Input each built-in graph needs from the config paths
GRAPH_INPUTS = {SECTOR: "sector", SUPPLY_CHAIN: "supply", CUSTOM: "custom_graph"}


# =============================================================================
# RESULT TYPES
# =============================================================================

@dataclass
class LoadedInputs:
    prices: PriceSeries
    calendar: TradingCalendar
    universe: StockUniverse
    news: List[NewsRecord]
    skipped: List[Tuple[str, datetime]]


@dataclass
class PreparedDataset:
    """Everything downstream of the raw files, aligned on one calendar and universe."""
    calendar: TradingCalendar
    universe: StockUniverse
    prices: PriceSeries
    features: FeatureTensor
    returns: ReturnTable
    splits: DatasetSplits
    aggregation: Dict[str, AggregationReport]
    dropped: Dict[str, List[str]] = field(default_factory=dict)

    def statistics(self) -> Dict[str, Dict[str, Any]]:
        """Per-split days, data points, news count, zero-vector rate and skip count."""
        stats = self.splits.stats()
        out: Dict[str, Dict[str, Any]] = {}
        for name in SPLIT_NAMES:
            report = self.aggregation[name].to_dict()
            report.pop("split", None)
            out[name] = {**stats[name], **report, "stocks": len(self.universe)}
        return out


@dataclass
class EvaluationResult:
    predictions: List[PredictionRecord]
    accuracy: "OrderedDict[str, float]"
    backtests: "OrderedDict[str, BacktestReport]"
    attention: Dict[str, float] = field(default_factory=dict)

    def metrics(self) -> Dict[str, Any]:
        return {
            "accuracy": dict(self.accuracy),
            "attention": dict(self.attention),
            "backtest": {key: report.summary() for key, report in self.backtests.items()},
            "test_points": len(self.predictions),
        }


class RunManifest(BaseModel):
    """Record of one run; its `config` block reproduces the run."""
    model_config = ConfigDict(extra="forbid")

    run_id: str
    config: Dict[str, Any]
    seed: int
    baseline: str
    graphs: List[str]
    dataset: Dict[str, Dict[str, Any]] = Field(default_factory=dict)
    dropped_tickers: Dict[str, List[str]] = Field(default_factory=dict)
    checkpoint: Optional[str] = None
    outputs: Dict[str, str] = Field(default_factory=dict)
    metrics: Dict[str, Any] = Field(default_factory=dict)
    monitoring: Dict[str, Any] = Field(default_factory=dict)    # counters, gauges and timers of this run

    def write(self, path: PathLike) -> Path:
        return write_json(path, self.model_dump(mode="json"))

    @classmethod
    def load(cls, path: PathLike) -> "RunManifest":
        return cls.model_validate(read_json(path))


# =============================================================================
# HELPERS
# =============================================================================

def q_key(q: float) -> str:
    return f"{float(q):g}"


def baseline_label(graph_names: Sequence[str]) -> str:
    """Variant label of a graph set: RNN for identity only, MGRN-* for the built-ins."""
    names = list(graph_names)
    for label, variant in VARIANTS.items():
        if variant and sorted(variant) == sorted(names):
            return label
    return "MGRN(" + "+".join(names) + ")"


def make_run_dir(output_dir: PathLike, seed: int, now: Optional[datetime] = None) -> Path:
    """Create `run-<timestamp>-<seed>`, suffixed -1, -2, ... when taken."""
    stamp = (now or datetime.now()).strftime(RUN_TIMESTAMP_FORMAT)
    base = Path(output_dir) / f"{RUN_DIR_PREFIX}-{stamp}-{seed}"
    candidate, k = base, 1
    while candidate.exists():
        candidate = base.with_name(f"{base.name}-{k}")
        k += 1
    candidate.mkdir(parents=True)
    return candidate


def predictions_for(
    p_up: np.ndarray,
    samples: SampleSet,
    universe: StockUniverse,
    calendar: TradingCalendar,
) -> List[PredictionRecord]:
    raw = samples.raw_returns
    return [
        PredictionRecord.make(
            universe.tickers[int(s)], calendar.dates[int(d)], float(p), int(y), float(r),
            None if raw is None else float(raw[k]),
        )
        for k, (s, d, p, y, r) in enumerate(zip(samples.stocks, samples.days, p_up, samples.labels, samples.returns))
    ]


# =============================================================================
# PIPELINE MANAGER
# =============================================================================

class PipelineManager:
    """
    Stage-by-stage runner for one RunConfig.
    """

    def __init__(self, cfg: RunConfig, run_dir: Optional[PathLike] = None, log_to_file: bool = False):
        """
        Initialize the pipeline manager.

        Args:
            cfg: Resolved run configuration
            run_dir: Existing directory for the artifacts (default: a fresh run directory under paths.output_dir)
            log_to_file: Also write the log of this run to run.log inside the run directory
        """
        self.cfg = cfg
        self.log_to_file = log_to_file
        self.state: PipelineState = initial_state(cfg.seed, STAGES)
        self._run_dir: Optional[Path] = Path(run_dir) if run_dir is not None else None

    # -------------------------------------------------------------------------
    # Run directory and stage bookkeeping
    # -------------------------------------------------------------------------

    @property
    def run_dir(self) -> Path:
        if self._run_dir is None:
            self._run_dir = make_run_dir(self.cfg.paths.output_dir, self.cfg.seed)
        self._run_dir.mkdir(parents=True, exist_ok=True)
        if self.state.get("run_dir") is None:
            self.state["run_dir"] = str(self._run_dir)
            self.state["run_id"] = set_run_id(self._run_dir.name)
            if self.log_to_file:
                level = logging.getLevelName(logging.getLogger().getEffectiveLevel())
                setup_logging(level=level, log_file=str(self._run_dir / RUN_FILES["log"]), force=True)
            logger.info(f"Run directory {self._run_dir}")
        return self._run_dir

    def path(self, key: str) -> Path:
        return self.run_dir / RUN_FILES[key]

    def _record_output(self, key: str, path: Path):
        self.state["outputs"][key] = str(path.relative_to(self.run_dir))

    def _stage(self, name: str, func: Callable, *args, **kwargs):
        status = self.state["status_tracking"].setdefault(
            name, StageStatus(done=False, failed=False, seconds=0.0, error=None)
        )
        self.state["next_stage"] = name
        start = time.perf_counter()
        try:
            with performance_timer(f"pipeline.{name}"):
                result = func(*args, **kwargs)
        except StageError:
            raise
        except MgrnError as e:
            status.update(failed=True, error=str(e))
            logger.error(f"Stage '{name}' failed: {e}")
            raise StageError(name, e) from e
        except OSError as e:
            wrapped = DataError(f"{type(e).__name__}: {e}")
            status.update(failed=True, error=str(wrapped))
            logger.error(f"Stage '{name}' failed: {wrapped}")
            raise StageError(name, wrapped) from e
        finally:
            status["seconds"] = time.perf_counter() - start
        status["done"] = True
        following = STAGES.index(name) + 1 if name in STAGES else len(STAGES)
        self.state["next_stage"] = STAGES[following] if following < len(STAGES) else None
        logger.info(f"Stage '{name}' done in {status['seconds']:.2f}s")
        return result

    # -------------------------------------------------------------------------
    # Stages
    # -------------------------------------------------------------------------

    def preflight(self, graphs: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        """
        Input files exist and CSV headers match their schemas.

        `graphs` names the graphs whose inputs are required (default: the
        configured graphs); other graph inputs are checked only when present.
        """
        paths = self.cfg.paths
        required = [paths.news, paths.prices, paths.index]
        for graph in (self.cfg.graphs if graphs is None else graphs):
            attr = GRAPH_INPUTS.get(graph)
            if attr is None:
                continue
            value = getattr(paths, attr)
            if value is None:
                raise InvalidConfig(f"Graph '{graph}' needs paths.{attr}")
            required.append(value)
        optional = [p for p in (paths.sector, paths.supply) if p is not None and p not in required]

        schemas = {paths.prices: PRICE_COLUMNS, paths.index: INDEX_COLUMNS}
        if paths.sector is not None:
            schemas[paths.sector] = SECTOR_COLUMNS
        if paths.supply is not None:
            schemas[paths.supply] = SUPPLY_COLUMNS

        checks = CompositeHealthCheck([
            FilesystemHealthCheck(required_files=required, optional_files=optional),
            CsvSchemaHealthCheck(schemas),
        ])
        results = checks.check_all()
        if CompositeHealthCheck.overall_status(results) == HealthStatus.UNHEALTHY:
            problems = {name: r.details for name, r in results.items() if r.status == HealthStatus.UNHEALTHY}
            raise DataError(f"Pre-flight checks failed: {problems}")
        return {name: r.status.value for name, r in results.items()}

    def load(self) -> LoadedInputs:
        """Prices, the trading calendar (price dates with an index level) and the news file."""
        paths = self.cfg.paths
        prices = PriceSeries.from_csv(paths.prices, paths.index)
        index_dates = set(prices.index.dropna().index)
        dates = [d for d in prices.dates if d in index_dates]
        if not dates:
            raise EmptyDataset("Prices and index share no trading day")
        calendar = TradingCalendar(tuple(dates), self.cfg.close_time_of_day(), self.cfg.timezone)

        tickers = self.cfg.universe.tickers or prices.tickers
        universe = StockUniverse.from_tickers(tickers)
        loader = NewsLoader(universe=universe, embedder=TokenHashEmbedder())
        news = loader.load(paths.news)
        logger.info(f"Loaded {len(calendar)} trading days, {len(universe)} tickers, {len(news)} news records")
        return LoadedInputs(prices=prices, calendar=calendar, universe=universe, news=news, skipped=loader.skipped)

    def filter_delisted(self, inputs: LoadedInputs) -> Tuple[StockUniverse, Dict[str, List[str]]]:
        """Drop tickers missing a price on any trading day of any split."""
        dropped: Dict[str, List[str]] = {}
        universe = inputs.universe
        if self.cfg.universe.drop_delisted:
            split_dates = [
                inputs.calendar.dates[p]
                for _, r in self.cfg.splits.ordered()
                for p in inputs.calendar.positions_between(r.start, r.end)
            ]
            missing = inputs.prices.missing_tickers(split_dates, universe.to_list())
            if missing:
                dropped["delisted"] = missing
                universe = universe.subset(t for t in universe if t not in set(missing))
                logger.warning(f"Dropped {len(missing)} delisted ticker(s): {missing}")
                get_metrics_registry().counter(TICKERS_DROPPED).inc(len(missing))
        if len(universe) == 0:
            raise EmptyDataset("No ticker left after the delisting filter")
        return universe, dropped

    def aggregate(
        self, inputs: LoadedInputs, universe: StockUniverse, dropped: Dict[str, List[str]]
    ) -> Tuple[FeatureTensor, Dict[str, AggregationReport], Dict[str, List[str]]]:
        """Daily mean embeddings, the minimum-news filter and per-split aggregation reports."""
        features = aggregate_features(inputs.news, universe, inputs.calendar)
        calendar = inputs.calendar

        threshold = self.cfg.universe.min_avg_news_per_day
        if threshold > 0:
            train = self.cfg.splits.train
            averages = features.average_news_per_day(calendar.positions_between(train.start, train.end))
            sparse = [t for t in universe if averages[t] < threshold]
            if sparse:
                dropped = {**dropped, "min_news": sparse}
                universe = universe.subset(t for t in universe if t not in set(sparse))
                logger.warning(
                    f"Dropped {len(sparse)} ticker(s) averaging fewer than {threshold} news per training day"
                )
                get_metrics_registry().counter(TICKERS_DROPPED).inc(len(sparse))
            if len(universe) == 0:
                raise EmptyDataset(f"No ticker averages {threshold} news per training day")
            features = features.restrict(universe)

        # news that never reached the feature tensor, by publication day
        off_universe = [(t, ts) for t, ts in inputs.skipped]
        off_universe += [(r.ticker, r.timestamp) for r in inputs.news if r.ticker not in universe]
        skipped_days = [calendar.assign_day(ts) for _, ts in off_universe]

        reports: Dict[str, AggregationReport] = OrderedDict()
        for name, r in self.cfg.splits.ordered():
            positions = calendar.positions_between(r.start, r.end)
            in_split = set(positions)
            skips = sum(1 for d in skipped_days if d is not None and d in in_split)
            reports[name] = features.report(name, positions, skips)
        return features, reports, dropped

    def split(self, inputs: LoadedInputs, features: FeatureTensor) -> Tuple[ReturnTable, DatasetSplits]:
        model_cfg = self.cfg.model_config_for(features.dim)
        returns = return_table(inputs.prices, inputs.calendar.dates, features.universe.to_list(), model_cfg.delta_t)
        splits = split_dataset(inputs.calendar, returns, self.cfg.splits, model_cfg.T)
        return returns, splits

    def build_graphs(
        self, data: PreparedDataset, names: Optional[Sequence[str]] = None, sector_level: Optional[int] = None
    ) -> List[RelationGraph]:
        """
        Build the requested graphs over the dataset universe.

        The correlation graph only ever sees returns between training days.
        """
        names = list(self.cfg.graphs if names is None else names)
        level = self.cfg.sector_level if sector_level is None else sector_level
        paths = self.cfg.paths

        train_returns = None
        if CORRELATION in names:
            train_dates = [data.calendar.dates[p] for p in data.splits.positions["train"]]
            train_returns = training_returns(data.prices, train_dates, data.universe.to_list())
        membership = load_sector_membership(paths.sector) if SECTOR in names and paths.sector else None
        edges = load_supply_edges(paths.supply) if SUPPLY_CHAIN in names and paths.supply else None
        custom = None
        if CUSTOM in names and paths.custom_graph:
            custom = load_graph_csv(paths.custom_graph, data.universe).a

        return GraphBuilder(data.universe).build(
            names,
            train_returns=train_returns,
            membership=membership,
            supply_edges=edges,
            sector_level=level,
            custom_adjacency=custom,
        )

    def train(self, data: PreparedDataset, graphs: Sequence[RelationGraph]) -> Tuple[MgrnModel, MgrnParams, TrainingHistory]:
        model_cfg = self.cfg.model_config_for(data.features.dim)
        trainer = Trainer(model_cfg, graphs)
        params, history = trainer.train(TrainingData(data.features.x, data.splits.train, data.splits.dev))
        return trainer.model, params, history

    def evaluate(self, model: MgrnModel, params: MgrnParams, data: PreparedDataset,
                 q_list: Optional[Sequence[float]] = None) -> EvaluationResult:
        """Test-split predictions, Acc_q for each q, attention summary and backtests."""
        test = data.splits.test
        if len(test) == 0:
            raise EmptyDataset("Test split has no samples")
        p_up = model.predict_proba(params, data.features.x, test.stocks, test.days)
        preds = predictions_for(p_up, test, data.universe, data.calendar)
        attention = model.attention_summary(params, data.features.x, np.unique(test.days))
        return self.score_predictions(preds, q_list, attention)

    def score_predictions(self, preds: List[PredictionRecord], q_list: Optional[Sequence[float]] = None,
                          attention: Optional[Dict[str, float]] = None) -> EvaluationResult:
        qs = list(self.cfg.q_list if q_list is None else q_list)
        accuracy = accuracy_table(preds, qs)
        backtests: "OrderedDict[str, BacktestReport]" = OrderedDict()
        for q in sorted(set(qs) | {self.cfg.backtest_q}, reverse=True):
            backtests[q_key(q)] = backtest(preds, q)
        logger.info("Accuracy " + ", ".join(f"{k}={v:.4f}" for k, v in accuracy.items()))
        return EvaluationResult(predictions=preds, accuracy=accuracy, backtests=backtests, attention=attention or {})

    # -------------------------------------------------------------------------
    # Entry points
    # -------------------------------------------------------------------------

    def prepare(self, graphs: Optional[Sequence[str]] = None) -> PreparedDataset:
        """Run the stages up to and including the split."""
        self._stage("preflight", self.preflight, graphs)
        inputs = self._stage("load", self.load)
        universe, dropped = self._stage("universe", self.filter_delisted, inputs)
        features, reports, dropped = self._stage("aggregate", self.aggregate, inputs, universe, dropped)
        returns, splits = self._stage("split", self.split, inputs, features)
        data = PreparedDataset(
            calendar=inputs.calendar,
            universe=features.universe,
            prices=inputs.prices,
            features=features,
            returns=returns,
            splits=splits,
            aggregation=reports,
            dropped=dropped,
        )
        self.state["tickers"] = data.universe.to_list()
        self.state["dropped_tickers"] = dict(dropped)
        self.state["dataset"] = data.statistics()
        write_json(self.path("aggregation"), [reports[name].to_dict() for name in SPLIT_NAMES])
        self._record_output("aggregation", self.path("aggregation"))
        return data

    def run(self) -> RunManifest:
        """Full pipeline: aggregate -> graphs -> train -> evaluate -> backtest -> manifest."""
        get_metrics_registry().reset_all()
        cfg = self.cfg
        logger.info(f"Starting run with graphs {cfg.graphs}, seed {cfg.seed}")
        write_json(self.path("config"), cfg.model_dump(mode="json"))
        self._record_output("config", self.path("config"))
        data = self.prepare()

        graphs = self._stage("graphs", self.build_graphs, data)
        self.state["graph_names"] = [g.name for g in graphs]
        self.state["baseline"] = baseline_label(self.state["graph_names"])

        model, params, history = self._stage("train", self._train_and_save, data, graphs)
        result = self._stage("evaluate", self._evaluate_and_save, model, params, data, history=history)
        self._stage("backtest", self._save_backtest, result)
        return self._stage("manifest", self.write_manifest)

    def _train_and_save(self, data: PreparedDataset, graphs: Sequence[RelationGraph]):
        model, params, history = self.train(data, graphs)
        ckpt = Checkpoint(params=params, model_config=model.cfg, graph_names=model.graph_names, seed=self.cfg.seed)
        save_checkpoint(self.path("checkpoint"), ckpt)
        history.to_csv(self.path("history"))
        self._record_output("checkpoint", self.path("checkpoint"))
        self._record_output("history", self.path("history"))
        return model, params, history

    def _evaluate_and_save(self, model: MgrnModel, params: MgrnParams, data: PreparedDataset,
                           q_list: Optional[Sequence[float]] = None,
                           history: Optional[TrainingHistory] = None) -> EvaluationResult:
        result = self.evaluate(model, params, data, q_list)
        self._save_evaluation(result, history)
        return result

    def _save_evaluation(self, result: EvaluationResult, history: Optional[TrainingHistory] = None):
        write_predictions(self.path("predictions"), result.predictions)
        metrics = {
            "baseline": self.state.get("baseline"),
            "graphs": list(self.state.get("graph_names", [])),
            **result.metrics(),
        }
        if history is not None:
            metrics["training"] = {
                "epochs": len(history.records),
                "selected_epoch": history.selected_epoch,
                "train_loss": history.train_losses,
            }
        write_json(self.path("metrics"), metrics)
        self.state["metrics"] = metrics
        self._record_output("predictions", self.path("predictions"))
        self._record_output("metrics", self.path("metrics"))

    def _save_backtest(self, result: EvaluationResult):
        report = result.backtests[q_key(self.cfg.backtest_q)]
        write_backtest_report(self.path("backtest"), report)
        self._record_output("backtest", self.path("backtest"))

    def write_manifest(self) -> RunManifest:
        outputs = dict(self.state["outputs"])
        outputs["manifest"] = RUN_FILES["manifest"]
        if self.log_to_file:
            outputs["log"] = RUN_FILES["log"]
        manifest = RunManifest(
            run_id=self.run_dir.name,
            config=self.cfg.model_dump(mode="json"),
            seed=self.cfg.seed,
            baseline=self.state.get("baseline") or "",
            graphs=list(self.state.get("graph_names", [])),
            dataset=self.state.get("dataset", {}),
            dropped_tickers=self.state.get("dropped_tickers", {}),
            checkpoint=outputs.get("checkpoint"),
            outputs=outputs,
            metrics=self.state.get("metrics", {}),
            monitoring=get_metrics_registry().snapshot(),
        )
        manifest.write(self.path("manifest"))
        logger.info(f"Wrote manifest {self.path('manifest')}")
        return manifest

    def export_graphs(self) -> List[Path]:
        """Build the configured graphs and write each as CSV + JSON sidecar."""
        data = self.prepare()
        graphs = self._stage("graphs", self.build_graphs, data)
        out_dir = self.path("graphs")
        written = [export_graph(g, out_dir) for g in graphs]
        for g in graphs:
            logger.info(f"Graph {g.name}: {g.summary()}")
        self.state["graph_names"] = [g.name for g in graphs]
        self.state["outputs"]["graphs"] = RUN_FILES["graphs"]
        return written

    def evaluate_checkpoint(self, checkpoint_path: PathLike, q_list: Optional[Sequence[float]] = None) -> RunManifest:
        """Evaluate a saved model on the configured test split and write a manifest for it."""
        get_metrics_registry().reset_all()
        ckpt = self._stage("load", load_checkpoint, checkpoint_path)
        data = self.prepare()
        if ckpt.model_config.d != data.features.dim:
            raise StageError("evaluate", InconsistentDimension(
                f"Checkpoint expects d={ckpt.model_config.d}, news has d={data.features.dim}"
            ))
        graphs = self._stage("graphs", self.build_graphs, data, ckpt.graph_names)
        self.state["graph_names"] = [g.name for g in graphs]
        self.state["baseline"] = baseline_label(self.state["graph_names"])
        model = MgrnModel(ckpt.model_config, graphs)
        result = self._stage("evaluate", self._evaluate_and_save, model, ckpt.params, data, q_list)
        self._stage("backtest", self._save_backtest, result)
        self.state["outputs"]["checkpoint"] = str(Path(checkpoint_path))
        return self._stage("manifest", self.write_manifest)

    # -------------------------------------------------------------------------
    # Variant comparison
    # -------------------------------------------------------------------------

    def _variant_available(self, names: Sequence[str]) -> bool:
        for name in names:
            attr = GRAPH_INPUTS.get(name)
            if attr is not None and getattr(self.cfg.paths, attr) is None:
                return False
        return True

    def random_predictions(self, data: PreparedDataset) -> List[PredictionRecord]:
        test = data.splits.test
        outcomes = {}
        raw = test.raw_returns
        for k, (s, d, y, r) in enumerate(zip(test.stocks, test.days, test.labels, test.returns)):
            key = (data.universe.tickers[int(s)], data.calendar.dates[int(d)])
            outcomes[key] = (int(y), float(r), None if raw is None else float(raw[k]))
        calendar = data.calendar.subset(data.splits.positions["test"])
        return random_scorer(data.universe, calendar, self.cfg.seed, outcomes)

    def _variant_row(self, result: EvaluationResult) -> Tuple[Dict[str, Any], Dict[str, Any]]:
        backtest_row: Dict[str, Any] = {}
        for key, report in result.backtests.items():
            backtest_row[f"ann_return_pct_q{key}"] = report.ann_return_pct
            backtest_row[f"sharpe_q{key}"] = report.sharpe
        return dict(result.accuracy), backtest_row

    def compare(
        self, variants: Optional[Sequence[str]] = None, sector_levels: Optional[Sequence[int]] = None
    ) -> Dict[str, pd.DataFrame]:
        """
        Train every variant on the same dataset and tabulate accuracy and backtests.

        Args:
            variants: Variant labels (default: all of VARIANTS); variants whose
                graph inputs are not configured are skipped
            sector_levels: When given, also train MGRN-Sector at each GICS level

        Returns:
            {"comparison": ..., "comparison_backtest": ..., "sector_levels": ...}
        """
        labels = list(VARIANTS) if variants is None else list(variants)
        unknown = [v for v in labels if v not in VARIANTS]
        if unknown:
            raise InvalidConfig(f"Unknown variants {unknown}, expected {list(VARIANTS)}")
        get_metrics_registry().reset_all()
        write_json(self.path("config"), self.cfg.model_dump(mode="json"))
        # each variant checks its own graph inputs below
        data = self.prepare(graphs=[])

        acc_rows: List[Dict[str, Any]] = []
        bt_rows: List[Dict[str, Any]] = []
        for label in labels:
            names = VARIANTS[label]
            if not self._variant_available(names):
                logger.warning(f"Skipping {label}: graph inputs for {names} are not configured")
                continue
            logger.info(f"Variant {label}")
            if not names:
                result = self._stage("evaluate", self.score_predictions, self.random_predictions(data))
            else:
                graphs = self._stage("graphs", self.build_graphs, data, names)
                model, params, _ = self._stage("train", self.train, data, graphs)
                result = self._stage("evaluate", self.evaluate, model, params, data)
            acc, bt = self._variant_row(result)
            acc_rows.append({"variant": label, **acc})
            bt_rows.append({"variant": label, **bt})

        tables: Dict[str, pd.DataFrame] = {
            "comparison": pd.DataFrame(acc_rows),
            "comparison_backtest": pd.DataFrame(bt_rows),
        }
        if sector_levels:
            if self.cfg.paths.sector is None:
                raise StageError("graphs", InvalidConfig("Sector level sweep needs paths.sector"))
            level_rows: List[Dict[str, Any]] = []
            for level in sector_levels:
                level_name = get_level_name(int(level))
                graphs = self._stage("graphs", self.build_graphs, data, [SECTOR], int(level))
                model, params, _ = self._stage("train", self.train, data, graphs)
                result = self._stage("evaluate", self.evaluate, model, params, data)
                level_rows.append({"level": int(level), "level_name": level_name, **dict(result.accuracy)})
            tables["sector_levels"] = pd.DataFrame(level_rows)

        for key, frame in tables.items():
            frame.to_csv(self.path(key), index=False, float_format="%.17g", lineterminator="\n")
            self._record_output(key, self.path(key))
            logger.info(f"{key}:\n{frame.to_string(index=False)}")
        self.state["baseline"] = "comparison"
        self._stage("manifest", self.write_manifest)
        return tables


# =============================================================================
# MODULE-LEVEL WRAPPERS
# =============================================================================

def run_pipeline(cfg: RunConfig, run_dir: Optional[PathLike] = None, log_to_file: bool = False) -> RunManifest:
    """Run aggregate -> graphs -> train -> evaluate -> backtest and write the manifest."""
    return PipelineManager(cfg, run_dir=run_dir, log_to_file=log_to_file).run()


def compare_variants(
    cfg: RunConfig,
    variants: Optional[Sequence[str]] = None,
    sector_levels: Optional[Sequence[int]] = None,
    run_dir: Optional[PathLike] = None,
) -> Dict[str, pd.DataFrame]:
    return PipelineManager(cfg, run_dir=run_dir).compare(variants, sector_levels)


def build_graphs(cfg: RunConfig, run_dir: Optional[PathLike] = None) -> List[Path]:
    return PipelineManager(cfg, run_dir=run_dir).export_graphs()


def evaluate_checkpoint(
    cfg: RunConfig,
    checkpoint_path: PathLike,
    q_list: Optional[Sequence[float]] = None,
    run_dir: Optional[PathLike] = None,
) -> RunManifest:
    return PipelineManager(cfg, run_dir=run_dir).evaluate_checkpoint(checkpoint_path, q_list)

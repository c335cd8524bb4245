# model/trainer.py
from __future__ import annotations
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from operation.logging.logging_config import get_logger
from operation.monitoring.metrics import get_metrics_registry, DEV_LOSS, TRAIN_LOSS
from operation.monitoring.performance import performance_timer
from utils.errors import EmptyDataset, NoGraphs, NonFiniteEvaluation
from utils.graphs.graph_builder import RelationGraph
from utils.model.config import ModelConfig
from utils.model.layers import bce_loss
from utils.model.mgrn import MgrnModel, MgrnParams
from utils.model.optimizer import Adam
from utils.model.samples import SampleSet
from utils.numerics.rng import make_rng

logger = get_logger(__name__)

HISTORY_COLUMNS = ["epoch", "train_loss", "dev_loss", "dev_acc"]

# Offset between the init seed and the minibatch shuffling seed
SHUFFLE_SEED_OFFSET = 1


@dataclass(frozen=True)
class TrainingData:
    features: np.ndarray   # (calendar days, n, d)
    train: SampleSet
    dev: SampleSet


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_loss: float
    dev_acc: float


@dataclass
class TrainingHistory:
    records: List[EpochRecord] = field(default_factory=list)
    selected_epoch: int = 0    # 0 means the initial parameters

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.__dict__ for r in self.records], columns=HISTORY_COLUMNS)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path

    @property
    def train_losses(self) -> List[float]:
        return [r.train_loss for r in self.records]


def evaluate_samples(model: MgrnModel, params: MgrnParams, features: np.ndarray, samples: SampleSet,
                     batch_size: int = 256) -> Tuple[float, float]:
    """Mean per-sample loss and accuracy (p_up > 0.5 predicts up)."""
    if len(samples) == 0:
        return float("nan"), float("nan")
    p_up = model.predict_proba(params, features, samples.stocks, samples.days, batch_size=batch_size)
    loss = bce_loss(p_up, samples.labels) / len(samples)
    acc = float(np.mean((p_up > 0.5) == (samples.labels == 1)))
    return loss, acc


class Trainer:
    """
    Minibatch Adam training of an MGRN.

    Each epoch shuffles the training samples with a seeded generator. The
    update uses the batch-mean gradient. The returned parameters come from
    the epoch with the lowest dev loss, or the last epoch when the config
    asks for it or there is no dev split.
    """

    def __init__(self, cfg: ModelConfig, graphs: Sequence[RelationGraph]):
        if not graphs:
            raise NoGraphs("Training needs at least one relation graph")
        self.cfg = cfg
        self.model = MgrnModel(cfg, graphs)

    def train(self, data: TrainingData, params: Optional[MgrnParams] = None) -> Tuple[MgrnParams, TrainingHistory]:
        cfg = self.cfg
        if len(data.train) == 0:
            raise EmptyDataset("Training split has no samples")

        params = self.model.init_params() if params is None else params
        history = TrainingHistory()
        if cfg.epochs == 0:
            logger.info("epochs=0: returning initial parameters")
            return params, history

        optimizer = Adam(lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
        shuffle_rng = make_rng(cfg.seed + SHUFFLE_SEED_OFFSET)
        registry = get_metrics_registry()
        best_loss = np.inf
        best_params = params.copy()
        n_train = len(data.train)

        logger.info(
            f"Training MGRN on graphs {self.model.graph_names}: {n_train} train / {len(data.dev)} dev samples, "
            f"{params.count()} parameters, {cfg.epochs} epochs"
        )
        for epoch in range(1, cfg.epochs + 1):
            with performance_timer("train.epoch"):
                order = shuffle_rng.permutation(n_train)
                total = 0.0
                for lo in range(0, n_train, cfg.batch_size):
                    batch = data.train.take(order[lo:lo + cfg.batch_size])
                    trace = self.model.forward(params, data.features, batch.stocks, batch.days)
                    total += self.model.loss(trace, batch.labels)
                    grads = self.model.backward(params, trace, batch.labels)
                    scale = 1.0 / len(batch)
                    optimizer.step(params.tensors, {k: g * scale for k, g in grads.items()})
                    params.mark_updated()
                train_loss = total / n_train
                if not np.isfinite(train_loss):
                    raise NonFiniteEvaluation(f"Training loss became non-finite in epoch {epoch}")
                dev_loss, dev_acc = evaluate_samples(self.model, params, data.features, data.dev)

            history.records.append(EpochRecord(epoch, float(train_loss), dev_loss, dev_acc))
            registry.gauge(TRAIN_LOSS).set(train_loss)
            if np.isfinite(dev_loss):
                registry.gauge(DEV_LOSS).set(dev_loss)
            logger.info(f"epoch {epoch}/{cfg.epochs} train_loss={train_loss:.6f} dev_loss={dev_loss:.6f} dev_acc={dev_acc:.4f}")

            if np.isfinite(dev_loss) and dev_loss < best_loss:
                best_loss = dev_loss
                best_params = params.copy()
                history.selected_epoch = epoch

        if cfg.use_final_epoch or not np.isfinite(best_loss):
            history.selected_epoch = cfg.epochs
            return params, history
        logger.info(f"Selected epoch {history.selected_epoch} (dev_loss={best_loss:.6f})")
        return best_params, history


def train(data: TrainingData, graphs: Sequence[RelationGraph], cfg: ModelConfig) -> Tuple[MgrnParams, TrainingHistory]:
    """Train an MGRN and return (parameters, history)."""
    return Trainer(cfg, graphs).train(data)

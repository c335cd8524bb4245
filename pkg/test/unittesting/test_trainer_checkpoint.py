"""
Unit tests for utils/model/trainer, optimizer and checkpoint
"""

import sys
import os
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

from utils.errors import DataError, EmptyDataset, NoGraphs
from utils.graphs.graph_builder import identity_graph
from utils.model import Adam, Checkpoint, MgrnModel, ModelConfig, SampleSet, Trainer, TrainingData, load_checkpoint, save_checkpoint
from utils.model.checkpoint import decode_checkpoint, encode_checkpoint
from utils.model.trainer import HISTORY_COLUMNS
from utils.numerics import make_rng


def toy_data(n=4, d=2, days=40, split=30, seed=0):
    """Label is the sign of the first feature on the prediction day."""
    rng = make_rng(seed)
    features = rng.standard_normal((days, n, d))

    def samples(lo, hi):
        stocks, positions = np.meshgrid(np.arange(n), np.arange(lo, hi))
        stocks, positions = stocks.ravel(), positions.ravel()
        labels = (features[positions, stocks, 0] > 0).astype(np.int64)
        return SampleSet(stocks=stocks, days=positions, labels=labels)

    return TrainingData(features=features, train=samples(1, split), dev=samples(split, days))


def toy_config(**overrides):
    base = dict(d=2, gcn_dims=[4], attn_w=2, lstm_dims=[4], T=1, lr=0.02, epochs=12, batch_size=16, seed=3)
    base.update(overrides)
    return ModelConfig(**base)


class TestAdam(unittest.TestCase):

    def test_first_step_moves_by_lr(self):
        params = {"w": np.array([1.0, -1.0])}
        Adam(lr=0.1).step(params, {"w": np.array([2.0, -0.5])})
        np.testing.assert_allclose(params["w"], [0.9, -0.9], atol=1e-7)

    def test_zero_gradient_leaves_params(self):
        params = {"w": np.array([0.3])}
        Adam().step(params, {"w": np.zeros(1)})
        np.testing.assert_array_equal(params["w"], [0.3])


class TestTrainer(unittest.TestCase):

    def setUp(self):
        self.data = toy_data()
        self.graphs = [identity_graph(4)]

    def test_epochs_zero_returns_initial_params(self):
        cfg = toy_config(epochs=0)
        params, history = Trainer(cfg, self.graphs).train(self.data)
        initial = MgrnModel(cfg, self.graphs).init_params()
        for name in initial.names():
            self.assertEqual(params[name].tobytes(), initial[name].tobytes())
        self.assertEqual(history.records, [])
        self.assertEqual(history.selected_epoch, 0)

    def test_same_seed_same_result(self):
        cfg = toy_config(epochs=3)
        p1, h1 = Trainer(cfg, self.graphs).train(self.data)
        p2, h2 = Trainer(cfg, self.graphs).train(self.data)
        for name in p1.names():
            self.assertEqual(p1[name].tobytes(), p2[name].tobytes())
        pd.testing.assert_frame_equal(h1.to_frame(), h2.to_frame())

    def test_training_loss_decreases(self):
        _, history = Trainer(toy_config(), self.graphs).train(self.data)
        losses = history.train_losses
        self.assertEqual(len(losses), 12)
        self.assertGreater(losses[0], losses[1])
        self.assertGreater(losses[1], losses[2])
        self.assertLess(losses[-1], losses[0])

    def test_loss_strictly_decreases_on_separable_60_days(self):
        data = toy_data(days=60, split=45, seed=5)
        _, history = Trainer(toy_config(epochs=3), self.graphs).train(data)
        losses = history.train_losses
        self.assertTrue(losses[0] > losses[1] > losses[2], losses)

    def test_best_dev_epoch_selected(self):
        cfg = toy_config(epochs=4)
        _, history = Trainer(cfg, self.graphs).train(self.data)
        dev = [r.dev_loss for r in history.records]
        self.assertEqual(history.selected_epoch, int(np.argmin(dev)) + 1)
        self.assertEqual(list(history.to_frame().columns), HISTORY_COLUMNS)

    def test_final_epoch_option(self):
        cfg = toy_config(epochs=2, use_final_epoch=True)
        params, history = Trainer(cfg, self.graphs).train(self.data)
        self.assertEqual(history.selected_epoch, 2)

    def test_no_dev_split_keeps_last_epoch(self):
        data = TrainingData(features=self.data.features, train=self.data.train, dev=SampleSet.empty())
        _, history = Trainer(toy_config(epochs=2), self.graphs).train(data)
        self.assertEqual(history.selected_epoch, 2)
        self.assertTrue(np.isnan(history.records[0].dev_loss))

    def test_empty_train_split(self):
        data = TrainingData(features=self.data.features, train=SampleSet.empty(), dev=self.data.dev)
        with self.assertRaises(EmptyDataset):
            Trainer(toy_config(), self.graphs).train(data)

    def test_requires_graphs(self):
        with self.assertRaises(NoGraphs):
            Trainer(toy_config(), [])

    def test_history_csv(self):
        _, history = Trainer(toy_config(epochs=2), self.graphs).train(self.data)
        with tempfile.TemporaryDirectory() as tmp:
            path = history.to_csv(Path(tmp) / "history.csv")
            frame = pd.read_csv(path)
        self.assertEqual(list(frame["epoch"]), [1, 2])


class TestCheckpoint(unittest.TestCase):

    def setUp(self):
        self.cfg = toy_config()
        model = MgrnModel(self.cfg, [identity_graph(4)])
        self.ckpt = Checkpoint(params=model.init_params(), model_config=self.cfg, graph_names=model.graph_names, seed=3)

    def test_round_trip_is_byte_identical(self):
        with tempfile.TemporaryDirectory() as tmp:
            first = save_checkpoint(Path(tmp) / "model.ckpt", self.ckpt)
            loaded = load_checkpoint(first)
            second = save_checkpoint(Path(tmp) / "again.ckpt", loaded)
            self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertEqual(loaded.graph_names, ["identity"])
        self.assertEqual(loaded.seed, 3)
        self.assertEqual(loaded.model_config, self.cfg)
        for name in self.ckpt.params.names():
            np.testing.assert_array_equal(loaded.params[name], self.ckpt.params[name])

    def test_header_starts_with_magic(self):
        raw = encode_checkpoint(self.ckpt)
        self.assertEqual(raw[:8], b"MGRNCKPT")

    def test_bad_magic(self):
        raw = encode_checkpoint(self.ckpt)
        with self.assertRaises(DataError):
            decode_checkpoint(b"NOTACKPT" + raw[8:])

    def test_truncated(self):
        raw = encode_checkpoint(self.ckpt)
        with self.assertRaises(DataError):
            decode_checkpoint(raw[:-8])

    def test_truncated_inside_header(self):
        raw = encode_checkpoint(self.ckpt)
        for cut in (8, 10, 20):
            with self.assertRaises(DataError):
                decode_checkpoint(raw[:cut])

    def test_trailing_bytes(self):
        raw = encode_checkpoint(self.ckpt)
        with self.assertRaises(DataError):
            decode_checkpoint(raw + b"\x00" * 8)


if __name__ == '__main__':
    unittest.main()

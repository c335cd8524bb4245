"""
User-flow test: variant comparison and the sector-level sweep
"""

import sys
import os
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import json
import tempfile
import unittest
from pathlib import Path

import pandas as pd

from utils.errors import InvalidConfig
from utils.news.synth import SynthConfig, synth_generate
from utils.pipeline.config import RUN_FILES, load_run_config
from utils.pipeline.pipeline_manager import PipelineManager, compare_variants

SMALL_MODEL = {
    "model.epochs": 1,
    "model.T": 2,
    "model.gcn_dims": [4],
    "model.attn_w": 2,
    "model.lstm_dims": [4],
    "model.batch_size": 32,
}


class TestCompareFlow(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls._tmp = tempfile.TemporaryDirectory()
        tmp = Path(cls._tmp.name)
        bundle = synth_generate(SynthConfig(n=8, d=3, days=40, beta=0.02, sigma=0.01, seed=5), tmp / "bundle")
        cls.bundle = bundle
        cls.cfg = load_run_config(bundle.files["run_config"], {**SMALL_MODEL, "output_dir": str(tmp / "runs")})
        cls.manager = PipelineManager(cls.cfg)
        cls.tables = cls.manager.compare(["RAND", "RNN", "MGRN-Sector"], sector_levels=[1, 4])

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()

    def test_comparison_rows(self):
        comparison = self.tables["comparison"]
        self.assertEqual(comparison["variant"].tolist(), ["RAND", "RNN", "MGRN-Sector"])
        self.assertEqual(list(comparison.columns), ["variant", "acc_100", "acc_50", "acc_20", "acc_10", "acc_2"])
        values = comparison.drop(columns="variant").to_numpy()
        self.assertTrue(((values >= 0.0) & (values <= 1.0)).all())

    def test_backtest_columns(self):
        columns = list(self.tables["comparison_backtest"].columns)
        self.assertIn("ann_return_pct_q10", columns)
        self.assertIn("sharpe_q100", columns)

    def test_sector_levels(self):
        levels = self.tables["sector_levels"]
        self.assertEqual(levels["level"].tolist(), [1, 4])
        self.assertEqual(levels["level_name"].tolist(), ["Sector", "Sub-Industry"])

    def test_tables_written(self):
        run_dir = self.manager.run_dir
        for key in ("comparison", "comparison_backtest", "sector_levels", "manifest", "config"):
            self.assertTrue((run_dir / RUN_FILES[key]).exists(), key)
        frame = pd.read_csv(run_dir / RUN_FILES["comparison"])
        self.assertEqual(frame["variant"].tolist(), ["RAND", "RNN", "MGRN-Sector"])
        manifest = json.loads((run_dir / RUN_FILES["manifest"]).read_text())
        self.assertEqual(manifest["baseline"], "comparison")

    def test_random_baseline_is_seeded(self):
        again = compare_variants(self.cfg, ["RAND"], run_dir=Path(self._tmp.name) / "again")
        pd.testing.assert_frame_equal(again["comparison"], self.tables["comparison"].iloc[[0]].reset_index(drop=True))

    def test_unknown_variant(self):
        with self.assertRaises(InvalidConfig):
            compare_variants(self.cfg, ["GAT"], run_dir=Path(self._tmp.name) / "unknown")

    def test_unconfigured_variant_is_skipped(self):
        cfg = self.cfg.model_copy(update={"paths": self.cfg.paths.model_copy(update={"supply": None})})
        tables = compare_variants(cfg, ["RAND", "MGRN-Supply"], run_dir=Path(self._tmp.name) / "no_supply")
        self.assertEqual(tables["comparison"]["variant"].tolist(), ["RAND"])


if __name__ == '__main__':
    unittest.main()

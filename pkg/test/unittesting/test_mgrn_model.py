"""
Unit tests for utils/model/mgrn and utils/model/gradcheck_suite
"""

import sys
import os
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import unittest

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from utils.errors import GradCheckError, InvalidConfig, MissingDay, NoGraphs, ShapeMismatch, StaleTrace
from utils.graphs.graph_builder import custom_graph, identity_graph, permute_graph
from utils.graphs.universe import StockUniverse
from utils.model import MgrnModel, MgrnParams, ModelConfig
from utils.model.gradcheck_suite import check_model_gradients, random_graph, run_gradcheck_suite
from utils.model.layers import attention_aggregate
from utils.numerics import make_rng


def small_config(**overrides):
    base = dict(d=3, gcn_dims=[4, 3], attn_w=2, lstm_dims=[4], T=2, seed=5)
    base.update(overrides)
    return ModelConfig(**base)


def universe_of(n):
    return StockUniverse.from_tickers([f"U{i}" for i in range(n)])


def full_graph(n, name="custom"):
    return custom_graph(np.ones((n, n)), universe_of(n), name=name)


class TestMgrnParams(unittest.TestCase):

    def test_layout_order_and_shapes(self):
        cfg = small_config()
        names = [name for name, _ in MgrnParams.layout(cfg, 2)]
        self.assertEqual(names, [
            "gcn0.W0", "gcn0.W1", "gcn1.W0", "gcn1.W1", "attn.W_a", "attn.q",
            "lstm0.W", "lstm0.U", "lstm0.b", "fc.W", "fc.b",
        ])
        shapes = dict(MgrnParams.layout(cfg, 2))
        self.assertEqual(shapes["lstm0.W"], (3 + 3, 16))
        self.assertEqual(shapes["fc.W"], (4, 2))

    def test_forget_bias_initialized_to_one(self):
        params = MgrnParams.initialize(small_config(), 1, make_rng(0))
        np.testing.assert_array_equal(params["lstm0.b"], [0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0])
        np.testing.assert_array_equal(params["fc.b"], [0.0, 0.0])

    def test_seeded_init_is_reproducible(self):
        a = MgrnParams.initialize(small_config(), 2, make_rng(9))
        b = MgrnParams.initialize(small_config(), 2, make_rng(9))
        for name in a.names():
            self.assertEqual(a[name].tobytes(), b[name].tobytes())

    def test_setitem_checks_shape_and_bumps_version(self):
        params = MgrnParams.initialize(small_config(), 1, make_rng(0))
        version = params.version
        params["fc.b"] = np.array([0.1, -0.1])
        self.assertEqual(params.version, version + 1)
        with self.assertRaises(ShapeMismatch):
            params["fc.b"] = np.zeros(3)

    def test_from_arrays_rejects_missing_tensor(self):
        cfg = small_config()
        params = MgrnParams.initialize(cfg, 1, make_rng(0))
        arrays = dict(params.items())
        del arrays["attn.q"]
        with self.assertRaises(ShapeMismatch):
            MgrnParams.from_arrays(cfg, 1, arrays)


class TestMgrnForward(unittest.TestCase):

    def setUp(self):
        self.rng = make_rng(11)
        self.n = 4
        self.features = self.rng.standard_normal((8, self.n, 3))

    def test_requires_graphs(self):
        with self.assertRaises(NoGraphs):
            MgrnModel(small_config(), [])

    def test_zero_features_predict_half(self):
        model = MgrnModel(small_config(), [full_graph(self.n)])
        params = model.init_params()
        p = model.predict_proba(params, np.zeros((5, self.n, 3)), [0, 1, 2, 3], [2, 3, 4, 4])
        np.testing.assert_array_equal(p, np.full(4, 0.5))

    def test_identity_graph_isolates_stocks(self):
        model = MgrnModel(small_config(), [identity_graph(self.n)])
        params = model.init_params()
        base = model.predict_proba(params, self.features, [0], [6])[0]
        bumped = self.features.copy()
        bumped[:, 1:] += 5.0
        self.assertEqual(model.predict_proba(params, bumped, [0], [6])[0], base)

    def test_full_graph_mixes_stocks(self):
        model = MgrnModel(small_config(), [full_graph(self.n)])
        params = model.init_params()
        base = model.predict_proba(params, self.features, [0], [6])[0]
        bumped = self.features.copy()
        bumped[4:7, 2] += 1.0
        self.assertGreater(abs(model.predict_proba(params, bumped, [0], [6])[0] - base), 1e-9)

    def test_permutation_equivariance(self):
        graph = random_graph(self.rng, universe_of(self.n), "custom")
        order = [2, 0, 3, 1]
        model = MgrnModel(small_config(), [graph])
        permuted = MgrnModel(small_config(), [permute_graph(graph, order)])
        params = model.init_params()
        stocks = list(range(self.n))
        days = [6] * self.n
        p = model.predict_proba(params, self.features, stocks, days)
        q = permuted.predict_proba(params, self.features[:, order], stocks, days)
        np.testing.assert_allclose(q, p[order], rtol=0, atol=1e-12)

    def test_forward_window_matches_batched_forward(self):
        model = MgrnModel(small_config(), [full_graph(self.n)])
        params = model.init_params()
        expected = model.predict_proba(params, self.features, [3], [5])[0]
        window = self.features[3:6]
        self.assertAlmostEqual(model.forward_window(params, window, 3), expected, places=14)

    def test_window_too_short(self):
        model = MgrnModel(small_config(), [full_graph(self.n)])
        params = model.init_params()
        with self.assertRaises(MissingDay):
            model.forward(params, self.features, [0], [1])
        with self.assertRaises(MissingDay):
            model.forward_window(params, self.features[:2], 0)

    def test_feature_shape_checked(self):
        model = MgrnModel(small_config(), [full_graph(self.n)])
        with self.assertRaises(ShapeMismatch):
            model.forward(model.init_params(), np.zeros((8, self.n, 2)), [0], [4])

    def test_attention_rows_sum_to_one(self):
        graphs = [full_graph(self.n, "sector"), identity_graph(self.n), random_graph(self.rng, universe_of(self.n), "custom")]
        model = MgrnModel(small_config(), graphs)
        trace = model.forward(model.init_params(), self.features, [0, 1, 2], [2, 5, 7])
        self.assertEqual(trace.alpha.shape[0], 3)
        np.testing.assert_allclose(trace.alpha.sum(axis=0), 1.0, atol=1e-12)
        self.assertTrue(np.all(trace.alpha > 0))
        summary = model.attention_summary(model.init_params(), self.features, [2, 5, 7])
        self.assertEqual(list(summary), ["sector", "identity", "custom"])
        self.assertAlmostEqual(sum(summary.values()), 1.0, places=12)

    @pytest.mark.property
    @settings(max_examples=1000, deadline=None)
    @given(
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=1, max_value=6),
        st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_attention_invariants(self, g, n, seed):
        rng = make_rng(seed)
        z = rng.standard_normal((g, n, 3))
        fused, alpha = attention_aggregate(z, rng.standard_normal((3, 2)), rng.standard_normal((2, 1)))
        np.testing.assert_allclose(alpha.sum(axis=0), 1.0, atol=1e-12)
        self.assertTrue(np.all((alpha > 0) & (alpha <= 1.0)))
        lo, hi = z.min(axis=0), z.max(axis=0)
        self.assertTrue(np.all(fused >= lo - 1e-12) and np.all(fused <= hi + 1e-12))


class TestMgrnBackward(unittest.TestCase):

    def setUp(self):
        self.rng = make_rng(21)
        self.n = 3
        self.features = self.rng.standard_normal((7, self.n, 3))
        self.model = MgrnModel(small_config(), [full_graph(self.n), identity_graph(self.n)])
        self.params = self.model.init_params()

    def test_gradients_cover_every_tensor(self):
        trace = self.model.forward(self.params, self.features, [0, 2], [3, 6])
        grads = self.model.backward(self.params, trace, [1, 0])
        self.assertEqual(list(grads), self.params.names())
        for name, g in grads.items():
            self.assertEqual(g.shape, self.params[name].shape, name)
            self.assertTrue(np.all(np.isfinite(g)), name)

    def test_stale_trace(self):
        trace = self.model.forward(self.params, self.features, [0], [4])
        self.params["fc.b"] = np.array([0.2, -0.2])
        with self.assertRaises(StaleTrace):
            self.model.backward(self.params, trace, [1])

    def test_duplicate_sample_doubles_gradient(self):
        single = self.model.forward(self.params, self.features, [1], [5])
        g1 = self.model.backward(self.params, single, [1])
        double = self.model.forward(self.params, self.features, [1, 1], [5, 5])
        g2 = self.model.backward(self.params, double, [1, 1])
        for name in g1:
            np.testing.assert_allclose(g2[name], 2.0 * g1[name], rtol=1e-12, atol=1e-15, err_msg=name)

    def test_shared_days_match_gradcheck(self):
        report = check_model_gradients(
            self.model, self.params, self.features, [0, 1, 2, 0], [4, 4, 5, 6], [1, 0, 1, 1],
        )
        self.assertTrue(report.passed, report.failures())

    def test_label_count_checked(self):
        trace = self.model.forward(self.params, self.features, [0, 1], [4, 4])
        with self.assertRaises(ShapeMismatch):
            self.model.backward(self.params, trace, [1])


class TestGradcheckSuite(unittest.TestCase):

    def test_tiny_suite_passes(self):
        reports = run_gradcheck_suite(size="tiny", n_cases=3, seed=0)
        self.assertEqual(len(reports), 3)
        self.assertTrue(all(r.passed for r in reports))
        self.assertIn("input", reports[0].errors)

    def test_failure_raises(self):
        with self.assertRaises(GradCheckError):
            run_gradcheck_suite(size="tiny", n_cases=1, seed=0, tolerance=0.0)

    def test_failure_reported_without_raising(self):
        reports = run_gradcheck_suite(size="tiny", n_cases=1, seed=0, tolerance=0.0, raise_on_failure=False)
        self.assertFalse(reports[0].passed)

    def test_unknown_size(self):
        with self.assertRaises(InvalidConfig):
            run_gradcheck_suite(size="huge", n_cases=1)


if __name__ == '__main__':
    unittest.main()

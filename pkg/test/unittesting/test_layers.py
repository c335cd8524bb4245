"""
Unit tests for utils/model/layers
"""

import sys
import os
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import math
import unittest

import numpy as np

from utils.errors import LengthMismatch, RowMismatch, ShapeMismatch
from utils.model.config import GRADCHECK_TOLERANCE
from utils.model.layers import (
    attention_aggregate,
    attention_aggregate_cached,
    attention_backward,
    bce_loss,
    concat_features,
    gcn_backward,
    gcn_forward,
    gcn_forward_cached,
    lstm_backward,
    lstm_forward,
    lstm_forward_cached,
    predict,
)
from utils.numerics import finite_diff_grad, make_rng, relative_error


def random_lstm(rng, sizes):
    layers = []
    width = sizes[0]
    for hidden in sizes[1:]:
        layers.append((
            rng.uniform(-0.5, 0.5, size=(width, 4 * hidden)),
            rng.uniform(-0.5, 0.5, size=(hidden, 4 * hidden)),
            rng.uniform(-0.5, 0.5, size=4 * hidden),
        ))
        width = hidden
    return layers


class TestGcn(unittest.TestCase):

    def test_identity_graph_single_layer_is_linear(self):
        x = np.array([[1.0, -2.0], [3.0, 4.0]])
        out = gcn_forward(np.eye(2), x, [np.eye(2)])
        np.testing.assert_array_equal(out, x)

    def test_hidden_layer_applies_relu(self):
        x = np.array([[1.0, -2.0]])
        out = gcn_forward(np.eye(1), x, [np.eye(2), np.ones((2, 1))])
        np.testing.assert_array_equal(out, [[1.0]])

    def test_propagation_mixes_neighbours(self):
        a_hat = np.array([[0.5, 0.5], [0.5, 0.5]])
        out = gcn_forward(a_hat, np.array([[2.0], [4.0]]), [np.ones((1, 1))])
        np.testing.assert_allclose(out, [[3.0], [3.0]], atol=1e-15)

    def test_batched_days_match_single_days(self):
        rng = make_rng(0)
        a_hat = np.full((3, 3), 1.0 / 3.0)
        weights = [rng.standard_normal((4, 5)), rng.standard_normal((5, 2))]
        x = rng.standard_normal((6, 3, 4))
        batched = gcn_forward(a_hat, x, weights)
        for t in range(6):
            np.testing.assert_allclose(batched[t], gcn_forward(a_hat, x[t], weights), atol=1e-13)

    def test_shape_errors(self):
        with self.assertRaises(ShapeMismatch):
            gcn_forward(np.eye(2), np.ones((3, 2)), [np.eye(2)])
        with self.assertRaises(ShapeMismatch):
            gcn_forward(np.eye(2), np.ones((2, 2)), [np.ones((3, 1))])
        with self.assertRaises(ShapeMismatch):
            gcn_forward(np.eye(2), np.ones((2, 2)), [])

    def test_backward_matches_finite_differences(self):
        rng = make_rng(1)
        a = rng.uniform(0.0, 1.0, size=(4, 4))
        a = (a + a.T) / 2.0
        a_hat = a / a.sum(axis=1, keepdims=True)
        x = rng.standard_normal((2, 4, 3))
        weights = [rng.standard_normal((3, 5)), rng.standard_normal((5, 2))]
        r = rng.standard_normal((2, 4, 2))

        out, cache = gcn_forward_cached(a_hat, x, weights)
        grads, dx = gcn_backward(r, a_hat, weights, cache)
        for l in range(2):
            def loss(w, l=l):
                ws = list(weights)
                ws[l] = w
                return float(np.sum(gcn_forward(a_hat, x, ws) * r))
            self.assertLess(relative_error(grads[l], finite_diff_grad(loss, weights[l])), GRADCHECK_TOLERANCE)
        numeric_x = finite_diff_grad(lambda v: float(np.sum(gcn_forward(a_hat, v, weights) * r)), x)
        self.assertLess(relative_error(dx, numeric_x), GRADCHECK_TOLERANCE)


class TestAttention(unittest.TestCase):

    def test_single_graph_passes_through(self):
        z = np.array([[1.0, 2.0], [-3.0, 0.5]])
        fused, alpha = attention_aggregate([z], np.eye(2), np.ones((2, 1)))
        np.testing.assert_array_equal(alpha, np.ones((1, 2)))
        np.testing.assert_allclose(fused, z, atol=1e-15)

    def test_identical_graphs_share_weight(self):
        z = np.array([[1.0, 2.0]])
        fused, alpha = attention_aggregate([z, z], np.eye(2), np.ones((2, 1)))
        np.testing.assert_allclose(alpha, [[0.5], [0.5]], atol=1e-15)
        np.testing.assert_allclose(fused, z, atol=1e-15)

    def test_hand_example(self):
        z1 = np.array([[math.log(3.0), 0.0]])
        z2 = np.zeros((1, 2))
        fused, alpha = attention_aggregate([z1, z2], np.array([[1.0], [0.0]]), np.ones((1, 1)))
        np.testing.assert_allclose(alpha[:, 0], [0.75, 0.25], atol=1e-12)
        np.testing.assert_allclose(fused, [[0.75 * math.log(3.0), 0.0]], atol=1e-12)

    def test_shape_errors(self):
        with self.assertRaises(ShapeMismatch):
            attention_aggregate([], np.eye(2), np.ones((2, 1)))
        with self.assertRaises(ShapeMismatch):
            attention_aggregate([np.ones((2, 2)), np.ones((3, 2))], np.eye(2), np.ones((2, 1)))
        with self.assertRaises(ShapeMismatch):
            attention_aggregate([np.ones((2, 2))], np.eye(2), np.ones((3, 1)))

    def test_backward_matches_finite_differences(self):
        rng = make_rng(2)
        z = rng.standard_normal((3, 2, 4, 5))
        w_a = rng.standard_normal((5, 3))
        q = rng.standard_normal((3, 1))
        r = rng.standard_normal((2, 4, 5))

        fused, _, cache = attention_aggregate_cached(z, w_a, q)
        dz, d_wa, dq = attention_backward(r, w_a, q, cache)

        def loss(z_=z, w_=w_a, q_=q):
            return float(np.sum(attention_aggregate(z_, w_, q_)[0] * r))

        self.assertLess(relative_error(dz, finite_diff_grad(lambda v: loss(z_=v), z)), GRADCHECK_TOLERANCE)
        self.assertLess(relative_error(d_wa, finite_diff_grad(lambda v: loss(w_=v), w_a)), GRADCHECK_TOLERANCE)
        self.assertLess(relative_error(dq, finite_diff_grad(lambda v: loss(q_=v), q)), GRADCHECK_TOLERANCE)


class TestConcat(unittest.TestCase):

    def test_rowwise(self):
        out = concat_features(np.array([[1.0], [2.0]]), np.array([[3.0, 4.0], [5.0, 6.0]]))
        np.testing.assert_array_equal(out, [[1.0, 3.0, 4.0], [2.0, 5.0, 6.0]])

    def test_row_mismatch(self):
        with self.assertRaises(RowMismatch):
            concat_features(np.ones((2, 1)), np.ones((3, 1)))


class TestLstm(unittest.TestCase):

    def test_zero_weights_give_zero_state(self):
        layers = [(np.zeros((3, 8)), np.zeros((2, 8)), np.zeros(8))]
        h = lstm_forward(np.ones((4, 3)), layers)
        np.testing.assert_array_equal(h, np.zeros(2))

    def test_single_step_oracle(self):
        wi, wf, wo, wg = 0.3, -0.7, 1.1, 0.5
        layers = [(np.array([[wi, wf, wo, wg]]), np.zeros((1, 4)), np.zeros(4))]
        h = lstm_forward(np.array([[1.0]]), layers)

        def sig(v):
            return 1.0 / (1.0 + math.exp(-v))
        c = sig(wi) * math.tanh(wg)
        self.assertAlmostEqual(float(h[0]), sig(wo) * math.tanh(c), places=14)

    def test_batch_matches_single(self):
        rng = make_rng(3)
        layers = random_lstm(rng, [3, 4, 2])
        seq = rng.standard_normal((5, 6, 3))
        batched = lstm_forward(seq, layers)
        for b in range(5):
            np.testing.assert_allclose(batched[b], lstm_forward(seq[b], layers), atol=1e-14)

    def test_shape_error(self):
        with self.assertRaises(ShapeMismatch):
            lstm_forward(np.ones((2, 3)), [(np.zeros((4, 8)), np.zeros((2, 8)), np.zeros(8))])

    def test_backward_matches_finite_differences(self):
        rng = make_rng(4)
        layers = random_lstm(rng, [3, 4, 2])
        seq = rng.standard_normal((2, 5, 3))
        r = rng.standard_normal((2, 2))

        _, caches = lstm_forward_cached(seq, layers)
        grads, d_seq = lstm_backward(r, layers, caches)

        def loss_with(k, j, value):
            perturbed = [list(layer) for layer in layers]
            perturbed[k][j] = value
            return float(np.sum(lstm_forward(seq, [tuple(p) for p in perturbed]) * r))

        for k in range(len(layers)):
            for j in range(3):
                numeric = finite_diff_grad(lambda v, k=k, j=j: loss_with(k, j, v), layers[k][j])
                self.assertLess(relative_error(grads[k][j], numeric), GRADCHECK_TOLERANCE)
        numeric_seq = finite_diff_grad(lambda v: float(np.sum(lstm_forward(v, layers) * r)), seq)
        self.assertLess(relative_error(d_seq, numeric_seq), GRADCHECK_TOLERANCE)


class TestHeadAndLoss(unittest.TestCase):

    def test_predict_zero_head(self):
        p_up, p_down = predict(np.ones(3), np.zeros((3, 2)), np.zeros(2))
        self.assertEqual((p_up, p_down), (0.5, 0.5))

    def test_predict_bias(self):
        p_up, p_down = predict(np.zeros(2), np.zeros((2, 2)), np.array([math.log(3.0), 0.0]))
        self.assertAlmostEqual(p_up, 0.75, places=12)
        self.assertAlmostEqual(p_up + p_down, 1.0, places=15)

    def test_bce_half(self):
        self.assertAlmostEqual(bce_loss([0.5], [1]), math.log(2.0), places=12)

    def test_bce_perfect_is_clipped(self):
        loss = bce_loss([1.0, 0.0], [1, 0])
        self.assertTrue(math.isfinite(loss))
        self.assertLess(loss, 1e-9)

    def test_bce_confident_wrong(self):
        self.assertAlmostEqual(bce_loss([0.1], [1]), 2.302585, places=6)

    def test_bce_is_summed(self):
        self.assertAlmostEqual(bce_loss([0.5, 0.5, 0.5], [1, 0, 1]), 3.0 * math.log(2.0), places=12)

    def test_bce_length_mismatch(self):
        with self.assertRaises(LengthMismatch):
            bce_loss([0.5, 0.5], [1])


if __name__ == '__main__':
    unittest.main()

import math

import numpy as np
import pytest

from debiaslab.errors import NumericError
from debiaslab.numerics import (
    AdamState, adam_step, child_rng, cross_entropy, grad_check, layer_norm,
    make_rng, softmax,
)


class TestSoftmax:
    def test_uniform(self):
        np.testing.assert_allclose(softmax([0.0, 0.0, 0.0]), [1 / 3] * 3, atol=1e-15)

    def test_analytic_two_class(self):
        np.testing.assert_allclose(softmax([0.0, math.log(2)]), [1 / 3, 2 / 3], atol=1e-14)

    def test_shift_invariance(self):
        v = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(softmax(v + 5.0), softmax(v), atol=1e-15)

    def test_sums_to_one_and_order_preserving(self):
        rng = make_rng(0)
        for _ in range(200):
            v = rng.normal(0, 10, size=rng.integers(1, 30))
            p = softmax(v)
            assert abs(p.sum() - 1.0) <= 1e-12
            assert np.all(p > 0)
            assert np.array_equal(np.argsort(p, kind="stable"), np.argsort(v, kind="stable"))

    def test_empty_rejected(self):
        with pytest.raises(NumericError):
            softmax(np.array([]))

    def test_non_finite_rejected(self):
        with pytest.raises(NumericError):
            softmax([0.0, np.inf])


class TestLayerNorm:
    def test_constant_vector_returns_bias(self):
        out = layer_norm([5.0, 5.0, 5.0], np.ones(3), np.zeros(3), eps=1e-5)
        np.testing.assert_allclose(out, [0.0, 0.0, 0.0], atol=1e-12)

    def test_two_point_hand_case(self):
        out = layer_norm([1.0, 3.0], np.ones(2), np.zeros(2), eps=0.0)
        np.testing.assert_allclose(out, [-1.0, 1.0], atol=1e-12)

    def test_affine_of_previous(self):
        out = layer_norm([1.0, 3.0], [2.0, 2.0], [1.0, 1.0], eps=0.0)
        np.testing.assert_allclose(out, [-1.0, 3.0], atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(NumericError):
            layer_norm([1.0, 2.0], np.ones(3), np.zeros(3))

    def test_mean_and_variance(self):
        rng = make_rng(1)
        for _ in range(100):
            v = rng.normal(0, 3, size=rng.integers(2, 40))
            out = layer_norm(v, np.ones(v.size), np.zeros(v.size), eps=0.0)
            assert abs(out.mean()) < 1e-10
            np.testing.assert_allclose(out.var(), 1.0, atol=1e-9)


class TestCrossEntropy:
    def test_uniform_four_classes(self):
        assert abs(cross_entropy([1.0, 1.0, 1.0, 1.0], 2) - math.log(4)) < 1e-12

    def test_confident_correct(self):
        # -log sigmoid(20)
        expected = math.log1p(math.exp(-20.0))
        assert abs(cross_entropy([10.0, -10.0], 0) - expected) < 1e-15

    def test_two_class_tie(self):
        assert abs(cross_entropy([0.0, 0.0], 1) - math.log(2)) < 1e-12

    def test_loss_nonnegative(self):
        rng = make_rng(2)
        for _ in range(100):
            v = rng.normal(0, 5, size=rng.integers(2, 20))
            assert cross_entropy(v, int(rng.integers(v.size))) >= 0.0

    def test_target_out_of_range(self):
        with pytest.raises(NumericError):
            cross_entropy([0.0, 1.0], 2)


class TestAdam:
    def test_zero_grad_keeps_params(self):
        params = {"w": np.array([1.0, -2.0, 3.0])}
        state = AdamState(lr=0.1)
        adam_step(params, {"w": np.zeros(3)}, state)
        np.testing.assert_array_equal(params["w"], [1.0, -2.0, 3.0])

    def test_first_step_is_signed_lr(self):
        params = {"w": np.array([1.0])}
        state = AdamState(lr=0.1)
        adam_step(params, {"w": np.array([1.0])}, state)
        np.testing.assert_allclose(params["w"], [0.9], atol=1e-8)

    def test_identical_params_get_identical_updates(self):
        params = {"a": np.array([0.5]), "b": np.array([0.5])}
        state = AdamState(lr=0.01)
        for _ in range(5):
            adam_step(params, {"a": np.array([0.3]), "b": np.array([0.3])}, state)
        assert params["a"][0] == params["b"][0]

    def test_bitwise_determinism(self):
        def run():
            rng = make_rng(3)
            params = {"w": rng.normal(size=17)}
            state = AdamState(lr=0.05)
            for _ in range(10):
                adam_step(params, {"w": rng.normal(size=17)}, state)
            return params["w"]

        np.testing.assert_array_equal(run(), run())

    def test_step_counter_increments(self):
        state = AdamState(lr=0.1)
        params = {"w": np.zeros(2)}
        for expected in (1, 2, 3):
            adam_step(params, {"w": np.ones(2)}, state)
            assert state.step == expected

    def test_shape_mismatch(self):
        state = AdamState(lr=0.1)
        with pytest.raises(NumericError):
            adam_step({"w": np.zeros(2)}, {"w": np.zeros(3)}, state)

    def test_non_finite_gradient(self):
        state = AdamState(lr=0.1)
        with pytest.raises(NumericError):
            adam_step({"w": np.zeros(2)}, {"w": np.array([1.0, np.nan])}, state)


class TestGradCheck:
    def test_quadratic(self):
        f = lambda ps: float(ps[0][0] ** 2)
        grad = lambda ps: [np.array([2.0 * ps[0][0]])]
        err = grad_check(f, grad, [np.array([3.0])], h=1e-5)
        assert err < 1e-8

    def test_linear_is_near_exact(self):
        w = np.array([2.0, -1.5, 0.25])
        f = lambda ps: float(ps[0] @ w)
        grad = lambda ps: [w]
        err = grad_check(f, grad, [np.array([0.3, 0.7, -1.1])], h=1e-5)
        assert err < 1e-9

    def test_non_finite_rejected(self):
        f = lambda ps: float("nan")
        grad = lambda ps: [np.zeros(1)]
        with pytest.raises(NumericError):
            grad_check(f, grad, [np.zeros(1)])


class TestRng:
    def test_same_seed_same_stream(self):
        a = make_rng(42).random(100)
        b = make_rng(42).random(100)
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        assert not np.array_equal(make_rng(1).random(10), make_rng(2).random(10))

    def test_child_streams_are_independent_of_draw_order(self):
        a1 = child_rng(7, 1).random(5)
        b1 = child_rng(7, 2).random(5)
        b2 = child_rng(7, 2).random(5)
        a2 = child_rng(7, 1).random(5)
        np.testing.assert_array_equal(a1, a2)
        np.testing.assert_array_equal(b1, b2)
        assert not np.array_equal(a1, b1)

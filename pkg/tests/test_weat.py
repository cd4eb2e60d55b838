"""WEAT tests against an independent brute-force oracle.

The oracle below enumerates partitions directly from raw embeddings with
its own cosine/mean arithmetic; the implementation under test never
shares code with it.
"""

import itertools
import math

import numpy as np
import pytest

from debiaslab.errors import DataError, NumericError
from debiaslab.metrics import (
    cosine, weat_association, weat_effect_size, weat_p_value, weat_statistic,
)
from debiaslab.numerics import make_rng


# --- oracle (written first, kept deliberately naive) -----------------------

def oracle_cos(u, v):
    num = sum(a * b for a, b in zip(u, v))
    den = math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v))
    return num / den


def oracle_assoc(t, X, Y):
    return (sum(oracle_cos(t, x) for x in X) / len(X)
            - sum(oracle_cos(t, y) for y in Y) / len(Y))


def oracle_statistic(A, B, X, Y):
    return (sum(oracle_assoc(a, X, Y) for a in A)
            - sum(oracle_assoc(b, X, Y) for b in B))


def oracle_exact_p(A, B, X, Y):
    """Exhaustive one-sided permutation p over equal-size repartitions."""
    pool = list(A) + list(B)
    n_a = len(A)
    w_obs = oracle_statistic(pool[:n_a], pool[n_a:], X, Y)
    hits = 0
    total = 0
    for combo in itertools.combinations(range(len(pool)), n_a):
        a_star = [pool[i] for i in combo]
        b_star = [pool[i] for i in range(len(pool)) if i not in combo]
        if oracle_statistic(a_star, b_star, X, Y) >= w_obs:
            hits += 1
        total += 1
    return hits / total, total


def oracle_effect(A, B, X, Y):
    s_a = [oracle_assoc(a, X, Y) for a in A]
    s_b = [oracle_assoc(b, X, Y) for b in B]
    mean_a = sum(s_a) / len(s_a)
    mean_b = sum(s_b) / len(s_b)
    everything = s_a + s_b
    mu = sum(everything) / len(everything)
    sd = math.sqrt(sum((s - mu) ** 2 for s in everything) / len(everything))
    return (mean_a - mean_b) / sd


def _random_spec(rng, n_targets, n_attrs=3, dim=5):
    emb = lambda n: [rng.normal(0, 1, dim) for _ in range(n)]
    return emb(n_targets), emb(n_targets), emb(n_attrs), emb(n_attrs)


# --- association ------------------------------------------------------------

class TestAssociation:
    def test_same_attribute_sets_give_zero(self):
        rng = make_rng(0)
        X = rng.normal(0, 1, (4, 6))
        t = rng.normal(0, 1, 6)
        assert weat_association(t, X, X) == 0.0

    def test_one_dimensional_extremes(self):
        assert weat_association(np.array([1.0]), np.array([[1.0]]), np.array([[-1.0]])) == 2.0

    def test_orthogonal_term(self):
        t = np.array([0.0, 0.0, 1.0])
        X = np.array([[1.0, 0.0, 0.0], [0.5, 0.5, 0.0]])
        Y = np.array([[0.0, 1.0, 0.0]])
        assert abs(weat_association(t, X, Y)) < 1e-15

    def test_range_bound(self):
        rng = make_rng(1)
        for _ in range(100):
            t = rng.normal(0, 1, 4)
            X = rng.normal(0, 1, (3, 4))
            Y = rng.normal(0, 1, (3, 4))
            assert -2.0 <= weat_association(t, X, Y) <= 2.0

    def test_zero_vector_is_error(self):
        with pytest.raises(NumericError):
            cosine(np.zeros(3), np.ones(3))


class TestEffectSize:
    def test_one_dimensional_hand_case(self):
        one, neg = [np.array([1.0])], [np.array([-1.0])]
        assert abs(weat_effect_size(one, neg, one, neg) - 2.0) < 1e-12

    def test_equal_sets_give_zero(self):
        rng = make_rng(2)
        A = [rng.normal(0, 1, 5) for _ in range(4)]
        X = [rng.normal(0, 1, 5) for _ in range(3)]
        Y = [rng.normal(0, 1, 5) for _ in range(3)]
        assert abs(weat_effect_size(A, list(A), X, Y)) < 1e-12

    def test_negating_attributes_flips_sign(self):
        rng = make_rng(3)
        A, B, X, Y = _random_spec(rng, 4)
        e1 = weat_effect_size(A, B, X, Y)
        e2 = weat_effect_size(A, B, [-x for x in X], [-y for y in Y])
        assert abs(e1 + e2) < 1e-12

    def test_swapping_targets_negates(self):
        rng = make_rng(4)
        A, B, X, Y = _random_spec(rng, 5)
        assert abs(weat_effect_size(A, B, X, Y) + weat_effect_size(B, A, X, Y)) < 1e-12

    def test_positive_scaling_invariance(self):
        rng = make_rng(5)
        A, B, X, Y = _random_spec(rng, 4)
        e1 = weat_effect_size(A, B, X, Y)
        scale = lambda vs, c: [c * v for v in vs]
        e2 = weat_effect_size(scale(A, 3.7), scale(B, 0.2), scale(X, 11.0), scale(Y, 5.5))
        assert abs(e1 - e2) < 1e-12

    def test_matches_oracle(self):
        rng = make_rng(6)
        for _ in range(20):
            A, B, X, Y = _random_spec(rng, int(rng.integers(2, 6)))
            assert abs(weat_effect_size(A, B, X, Y) - oracle_effect(A, B, X, Y)) < 1e-10

    def test_zero_std_is_error(self):
        v = np.array([1.0, 0.0])
        with pytest.raises(NumericError):
            weat_effect_size([v, v], [v, v], [v], [v])

    def test_sample_std_mode(self):
        rng = make_rng(7)
        A, B, X, Y = _random_spec(rng, 4)
        e_pop = weat_effect_size(A, B, X, Y, std="population")
        e_smp = weat_effect_size(A, B, X, Y, std="sample")
        n = len(A) + len(B)
        assert abs(e_pop * math.sqrt((n - 1) / n) - e_smp) < 1e-12


class TestPermutationTest:
    def test_two_partitions_for_singletons(self):
        one, neg = [np.array([1.0])], [np.array([-1.0])]
        p, n, exact = weat_p_value(one, neg, one, neg, mode="exact")
        assert n == 2 and exact and p in (0.5, 1.0)
        assert p == 0.5  # the separated configuration is the better one

    def test_exact_matches_oracle_on_small_specs(self):
        rng = make_rng(8)
        for n_targets in (1, 2, 3, 4, 5, 6):
            for _ in range(4):
                A, B, X, Y = _random_spec(rng, n_targets)
                p_impl, n_impl, _ = weat_p_value(A, B, X, Y, mode="exact")
                p_oracle, n_oracle = oracle_exact_p(A, B, X, Y)
                assert n_impl == n_oracle == math.comb(2 * n_targets, n_targets)
                assert p_impl == p_oracle

    def test_statistic_matches_oracle(self):
        rng = make_rng(9)
        A, B, X, Y = _random_spec(rng, 4)
        assert abs(weat_statistic(A, B, X, Y) - oracle_statistic(A, B, X, Y)) < 1e-10

    def test_maximally_separated_identity_partition(self):
        # 8+8 one-hot-ish targets split along a single axis: only the
        # identity partition attains the observed statistic
        dim = 4
        A = [np.array([1.0, 0, 0, 0]) + 1e-3 * np.eye(dim)[i % dim] for i in range(8)]
        B = [np.array([-1.0, 0, 0, 0]) + 1e-3 * np.eye(dim)[i % dim] for i in range(8)]
        X = [np.array([1.0, 0.2, 0, 0])]
        Y = [np.array([-1.0, 0.2, 0, 0])]
        p, n, _ = weat_p_value(A, B, X, Y, mode="exact")
        assert n == math.comb(16, 8) == 12870
        assert p == pytest.approx(1.0 / 12870)

    def test_sampled_close_to_exact(self):
        rng = make_rng(10)
        A, B, X, Y = _random_spec(rng, 6)
        p_exact, _, _ = weat_p_value(A, B, X, Y, mode="exact")
        p_sampled, k, exact = weat_p_value(A, B, X, Y, mode="sampled", samples=50_000, seed=1)
        assert not exact and k == 50_000
        se = math.sqrt(max(p_exact * (1 - p_exact), 1e-12) / k)
        assert abs(p_sampled - p_exact) < max(3 * se, 1e-3)
        assert abs(p_sampled - p_exact) < 0.01

    def test_sampled_is_deterministic_per_seed(self):
        rng = make_rng(11)
        A, B, X, Y = _random_spec(rng, 5)
        p1, _, _ = weat_p_value(A, B, X, Y, mode="sampled", samples=2000, seed=9)
        p2, _, _ = weat_p_value(A, B, X, Y, mode="sampled", samples=2000, seed=9)
        assert p1 == p2

    def test_one_sided_tails_cover(self):
        rng = make_rng(12)
        for _ in range(10):
            A, B, X, Y = _random_spec(rng, 3)
            p_ab, n, _ = weat_p_value(A, B, X, Y, mode="exact")
            p_ba, _, _ = weat_p_value(B, A, X, Y, mode="exact")
            assert p_ab + p_ba >= 1.0 + 1.0 / n - 1e-12

    def test_unequal_sets_rejected_in_exact_mode(self):
        rng = make_rng(13)
        A = [rng.normal(0, 1, 4) for _ in range(3)]
        B = [rng.normal(0, 1, 4) for _ in range(2)]
        X = [rng.normal(0, 1, 4)]
        Y = [rng.normal(0, 1, 4)]
        with pytest.raises(DataError, match=r"\|A\| = \|B\|"):
            weat_p_value(A, B, X, Y, mode="exact")

    def test_partition_limit_enforced(self):
        rng = make_rng(14)
        A, B, X, Y = _random_spec(rng, 9)  # C(18,9) = 48620 > 20000
        with pytest.raises(DataError, match="sampled mode"):
            weat_p_value(A, B, X, Y, mode="exact")

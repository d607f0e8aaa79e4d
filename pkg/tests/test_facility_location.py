"""Facility-location greedy: gains, guarantees, and variant equivalence."""

import math

import numpy as np
import pytest

from selectkit import (
    CoverageState,
    EmbeddingMatrix,
    KernelSpec,
    NegativeShiftedUncertainty,
    SimilarityColumn,
    fl_gain,
    fl_greedy_lazy,
    fl_greedy_naive,
    fl_greedy_stochastic,
    mixture_gain,
    shifted_min_margin,
)
from selectkit.oracle import exhaustive_fl_opt, exhaustive_mixture_opt
from helpers import fl_value, random_stats, reference_kernel

KERNEL_3x3 = np.array([[1.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 1.0]])


def kernel_col(W, j):
    return SimilarityColumn(j=j, values=np.asarray(W, dtype=np.float64)[:, j].copy())


def check_greedy_consistency(result, n=None):
    """Diminishing gains, non-decreasing trace, and telescoping."""
    g = result.gains
    assert all(g[t + 1] <= g[t] + 1e-9 for t in range(len(g) - 1))
    tr = result.objective_trace
    assert all(b >= a - 1e-12 for a, b in zip(tr, tr[1:]))
    assert sum(g) == pytest.approx(tr[-1], rel=1e-6)
    if n is not None:
        assert tr[-1] <= n + 1e-9


class TestGain:
    def test_empty_state_gain_is_column_sum(self):
        state = CoverageState(3)
        assert fl_gain(state, kernel_col(KERNEL_3x3, 2)) == pytest.approx(1.3)

    def test_dominated_candidate_gains_nothing(self):
        state = CoverageState(3)
        state.add(kernel_col(KERNEL_3x3, 0), 1.6)
        dominated = SimilarityColumn(j=2, values=np.array([0.5, 0.25, 0.05]))
        assert fl_gain(state, dominated) == 0.0

    def test_hand_worked_three_point_instance(self):
        state = CoverageState(3)
        state.add(kernel_col(KERNEL_3x3, 0), 1.6)
        got = fl_gain(state, kernel_col(KERNEL_3x3, 2))
        assert got == pytest.approx(0.9)
        # same number from the set-function definition
        assert got == pytest.approx(fl_value(KERNEL_3x3, [0, 2]) - fl_value(KERNEL_3x3, [0]))

    def test_rejects_already_selected(self):
        state = CoverageState(3)
        state.add(kernel_col(KERNEL_3x3, 0), 1.6)
        with pytest.raises(ValueError):
            fl_gain(state, kernel_col(KERNEL_3x3, 0))


class TestMixtureGain:
    def test_zero_uncertainty_reduces_to_fl(self):
        state = CoverageState(3)
        col = kernel_col(KERNEL_3x3, 1)
        assert mixture_gain(state, col, u_sum=0.0, u_cand=0.0) == fl_gain(state, col)

    def test_pure_uncertainty_step_is_ln2(self):
        state = CoverageState(3)
        state.add(kernel_col(KERNEL_3x3, 1), 1.7)
        dominated = SimilarityColumn(j=0, values=np.array([0.4, 0.9, 0.1]))
        g = mixture_gain(state, dominated, u_sum=0.0, u_cand=1.0)
        assert g == pytest.approx(0.693147, abs=5e-7)

    def test_negative_shift_rejected(self):
        state = CoverageState(3)
        with pytest.raises(NegativeShiftedUncertainty):
            mixture_gain(state, kernel_col(KERNEL_3x3, 0), u_sum=0.0, u_cand=-0.1)


class TestNaiveGreedy:
    def test_first_pick_maximizes_column_sum(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((8, 3))
        spec = KernelSpec.rbf(2.0)
        W = reference_kernel(X, spec)
        r = fl_greedy_naive(X, spec, 1)
        assert r.indices == [int(np.argmax(W.sum(axis=0)))]
        assert r.gains[0] == pytest.approx(W.sum(axis=0).max(), rel=1e-9)

    def test_duplicate_row_suppressed_until_forced(self):
        rng = np.random.default_rng(6)
        base = rng.standard_normal((3, 4))
        X = np.vstack([base[0], base[0], base[1], base[2]])
        r = fl_greedy_naive(X, KernelSpec.rbf(1.0), 4)
        # one copy of the duplicate pair goes last, with zero gain
        assert r.indices[-1] in (0, 1)
        assert r.gains[-1] == 0.0
        assert set(r.indices) == {0, 1, 2, 3}

    @pytest.mark.parametrize("spec", [KernelSpec.rbf(0.5), KernelSpec.cosine()])
    @pytest.mark.parametrize("seed", range(20))
    def test_one_minus_inv_e_vs_exhaustive(self, spec, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 13))
        k = int(rng.integers(1, min(4, n) + 1))
        X = rng.standard_normal((n, 3))
        r = fl_greedy_naive(X, spec, k)
        W = reference_kernel(X, spec)
        _, opt = exhaustive_fl_opt(W, k)
        greedy_val = fl_value(W, r.indices)
        assert greedy_val >= (1.0 - 1.0 / math.e) * opt - 1e-9
        check_greedy_consistency(r, n)


class TestLazyGreedy:
    @pytest.mark.parametrize("spec", [KernelSpec.rbf(0.1), KernelSpec.rbf(3.0), KernelSpec.cosine()])
    @pytest.mark.parametrize("seed", range(10))
    def test_equals_naive(self, spec, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 60))
        k = int(rng.integers(1, n + 1))
        X = rng.standard_normal((n, int(rng.integers(2, 8))))
        naive = fl_greedy_naive(X, spec, k)
        lazy = fl_greedy_lazy(X, spec, k)
        assert lazy.indices == naive.indices
        np.testing.assert_allclose(lazy.gains, naive.gains, rtol=0, atol=1e-12)

    def test_equals_naive_with_mixture(self):
        rng = np.random.default_rng(33)
        n = 40
        X = rng.standard_normal((n, 5))
        u = shifted_min_margin(random_stats(rng, n))
        spec = KernelSpec.rbf(1.0)
        naive = fl_greedy_naive(X, spec, 12, uncertainty=u)
        lazy = fl_greedy_lazy(X, spec, 12, uncertainty=u)
        assert lazy.indices == naive.indices

    def test_identical_pool_selects_ascending_from_zero(self):
        X = np.ones((6, 3))
        r = fl_greedy_lazy(X, KernelSpec.rbf(0.5), 6)
        assert r.indices == [0, 1, 2, 3, 4, 5]
        assert r.gains[0] == pytest.approx(6.0)
        assert all(g == 0.0 for g in r.gains[1:])

    def test_full_coverage_objective_is_n_for_rbf(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((15, 4))
        r = fl_greedy_lazy(X, KernelSpec.rbf(0.7), 15)
        assert sorted(r.indices) == list(range(15))
        assert r.objective_trace[-1] == pytest.approx(15.0, rel=1e-9)

    def test_large_pool_path_equals_naive(self):
        # force the tiled/slack initialization branch
        import selectkit.facility_location as fl_mod

        rng = np.random.default_rng(44)
        X = rng.standard_normal((120, 6))
        original = fl_mod._EXACT_INIT_LIMIT
        try:
            fl_mod._EXACT_INIT_LIMIT = 8
            lazy = fl_greedy_lazy(X, KernelSpec.rbf(2.0), 30)
        finally:
            fl_mod._EXACT_INIT_LIMIT = original
        naive = fl_greedy_naive(X, KernelSpec.rbf(2.0), 30)
        assert lazy.indices == naive.indices

    def test_large_pool_path_handles_exact_ties(self):
        import selectkit.facility_location as fl_mod

        X = np.ones((30, 3))
        original = fl_mod._EXACT_INIT_LIMIT
        try:
            fl_mod._EXACT_INIT_LIMIT = 4
            lazy = fl_greedy_lazy(X, KernelSpec.rbf(0.5), 5)
        finally:
            fl_mod._EXACT_INIT_LIMIT = original
        assert lazy.indices == [0, 1, 2, 3, 4]


class TestStochasticGreedy:
    def test_saturating_sample_equals_naive(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((20, 4))
        spec = KernelSpec.rbf(1.5)
        # epsilon small enough that ceil((n/k) ln(1/eps)) >= n at every step
        st = fl_greedy_stochastic(X, spec, 5, epsilon=0.001, seed=0)
        assert st.indices == fl_greedy_naive(X, spec, 5).indices

    def test_seeded_determinism(self):
        rng = np.random.default_rng(10)
        X = rng.standard_normal((64, 6))
        spec = KernelSpec.rbf(2.0)
        a = fl_greedy_stochastic(X, spec, 8, epsilon=0.1, seed=123)
        b = fl_greedy_stochastic(X, spec, 8, epsilon=0.1, seed=123)
        assert a.indices == b.indices

    def test_mean_quality_vs_naive(self):
        rng = np.random.default_rng(11)
        X = rng.standard_normal((64, 6))
        spec = KernelSpec.rbf(2.0)
        W = reference_kernel(X, spec)
        naive_val = fl_value(W, fl_greedy_naive(X, spec, 8).indices)
        vals = [
            fl_value(W, fl_greedy_stochastic(X, spec, 8, epsilon=0.1, seed=s).indices)
            for s in range(20)
        ]
        assert np.mean(vals) >= 0.9 * naive_val

    def test_epsilon_bounds(self):
        X = np.zeros((4, 2))
        from selectkit import ValidationError

        with pytest.raises(ValidationError):
            fl_greedy_stochastic(X, KernelSpec.rbf(1.0), 2, epsilon=1.5, seed=0)


class TestMixtureGreedy:
    @pytest.mark.parametrize("seed", range(12))
    def test_one_minus_inv_e_vs_exhaustive_mixture(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 11))
        k = int(rng.integers(1, min(4, n) + 1))
        X = rng.standard_normal((n, 3))
        u = shifted_min_margin(random_stats(rng, n))
        spec = KernelSpec.rbf(1.0)
        r = fl_greedy_naive(X, spec, k, uncertainty=u)
        W = reference_kernel(X, spec)
        _, opt = exhaustive_mixture_opt(W, u, k)
        got = fl_value(W, r.indices) + math.log1p(float(u[r.indices].sum()))
        assert got >= (1.0 - 1.0 / math.e) * opt - 1e-9
        check_greedy_consistency(r)

    def test_trace_includes_log_term(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((10, 3))
        u = np.full(10, 0.5)
        r = fl_greedy_naive(X, KernelSpec.rbf(1.0), 3, uncertainty=u)
        W = reference_kernel(X, KernelSpec.rbf(1.0))
        expected = fl_value(W, r.indices) + math.log1p(1.5)
        assert r.objective_trace[-1] == pytest.approx(expected, rel=1e-9)

    def test_log_weight_scales_uncertainty_term(self):
        state = CoverageState(3)
        col = SimilarityColumn(j=0, values=np.zeros(3))
        g = mixture_gain(state, col, u_sum=0.0, u_cand=1.0, log_weight=2.0)
        assert g == pytest.approx(2.0 * math.log(2.0))


class TestStateInvariants:
    def test_objective_tracks_coverage_sum(self):
        rng = np.random.default_rng(14)
        X = rng.standard_normal((50, 5))
        spec = KernelSpec.rbf(1.0)
        from selectkit import similarity_column

        emb = EmbeddingMatrix(X)
        state = CoverageState(50)
        for j in (4, 17, 30):
            col = similarity_column(emb, j, spec)
            g = fl_gain(state, col)
            before = state.cur_max.copy()
            state.add(col, g)
            assert (state.cur_max >= before).all()
            assert state.objective == pytest.approx(float(state.cur_max.sum()), rel=1e-9)

"""Tests for sample autocovariances and the portmanteau statistic."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlserial.autocov import (autocov_arrays, _gamma0_inverse, portmanteau,
                              portmanteau_stat_arrays, r_squared_trace,
                              r_squared_trace_mats, sample_autocov)
from nlserial.errors import (DegenerateColumn, InsufficientSample,
                             SingularGamma0)


def _random_series(seed, T=200, K=2):
    return np.random.default_rng(seed).standard_normal((T, K))


class TestAutocovArrays:
    def test_matches_manual_computation(self):
        x = _random_series(0, T=50, K=2)
        g = autocov_arrays(x, 2)
        xc = x - x.mean(axis=0)
        n = len(x)
        assert np.allclose(g[0], xc.T @ xc / n)
        for h in (1, 2):
            assert np.allclose(g[h], xc[h:].T @ xc[:n - h] / n)

    def test_univariate_promoted(self):
        g = autocov_arrays(np.arange(10.0), 1)
        assert g[0].shape == (1, 1)

    def test_too_short_raises(self):
        with pytest.raises(InsufficientSample):
            autocov_arrays(np.ones((4, 1)), 3)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_block_toeplitz_psd(self, seed):
        """The stacked autocovariance sequence is positive semidefinite
        under full-sample-mean centering with the 1/T divisor."""
        H, K = 3, 2
        x = _random_series(seed, T=60, K=K)
        g = autocov_arrays(x, H)
        n_blocks = H + 1
        big = np.zeros((n_blocks * K, n_blocks * K))
        for i in range(n_blocks):
            for j in range(n_blocks):
                h = i - j
                block = g[h] if h >= 0 else g[-h].T
                big[i * K:(i + 1) * K, j * K:(j + 1) * K] = block
        w = np.linalg.eigvalsh(0.5 * (big + big.T))
        assert w.min() > -1e-8


class TestSampleAutocov:
    def test_stack_dimensions(self):
        stack = sample_autocov(_random_series(1, T=80, K=3), 4)
        assert stack.K == 3 and stack.H == 4 and stack.T == 80
        assert stack[0].shape == (3, 3)

    def test_constant_column_rejected(self):
        x = np.column_stack([np.ones(30), np.arange(30.0)])
        with pytest.raises(DegenerateColumn):
            sample_autocov(x, 1)


class TestGamma0Inverse:
    def test_inverse_correct(self):
        g0 = np.array([[2.0, 0.3], [0.3, 1.0]])
        assert np.allclose(_gamma0_inverse(g0) @ g0, np.eye(2), atol=1e-12)

    def test_singular_raises_without_ridge(self):
        g0 = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(SingularGamma0):
            _gamma0_inverse(g0)

    def test_ridge_recovers(self):
        g0 = np.array([[1.0, 1.0], [1.0, 1.0]])
        inv = _gamma0_inverse(g0, ridge=True)
        assert np.all(np.isfinite(inv))


class TestRSquaredTrace:
    def test_efficient_trace_equals_naive_product(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            gh = rng.standard_normal((3, 3))
            A = rng.standard_normal((3, 3))
            g0inv = A @ A.T + 0.1 * np.eye(3)
            naive = np.trace(gh @ g0inv @ gh.T @ g0inv)
            assert abs(r_squared_trace_mats(gh, g0inv) - naive) < 1e-10

    def test_bounded_by_k(self):
        stack = sample_autocov(_random_series(4, T=100, K=2), 3)
        for h in (1, 2, 3):
            v = r_squared_trace(stack, h)
            assert 0.0 <= v <= 2.0 + 1e-10

    def test_univariate_equals_squared_autocorrelation(self):
        x = _random_series(5, T=150, K=1).reshape(-1)
        stack = sample_autocov(x, 1)
        xc = x - x.mean()
        rho1 = (xc[1:] @ xc[:-1]) / (xc @ xc)
        assert abs(r_squared_trace(stack, 1) - rho1 ** 2) < 1e-12

    def test_lag_range_checked(self):
        stack = sample_autocov(_random_series(6), 2)
        with pytest.raises(ValueError):
            r_squared_trace(stack, 0)
        with pytest.raises(ValueError):
            r_squared_trace(stack, 3)


class TestPortmanteau:
    def test_statistic_is_t_times_trace_sum(self):
        x = _random_series(7, T=120, K=2)
        pm = portmanteau(x, 3)
        assert abs(pm.statistic - 120 * sum(pm.per_lag)) < 1e-9
        stat_arrays, per_lag = portmanteau_stat_arrays(x, 3)
        assert abs(stat_arrays - pm.statistic) < 1e-9
        assert np.allclose(per_lag, pm.per_lag)

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_invariant_under_affine_change_of_basis(self, seed):
        """The portmanteau statistic is a canonical-correlation summary:
        invariant to x -> x A + b for invertible A."""
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((80, 2))
        A = rng.standard_normal((2, 2))
        while abs(np.linalg.det(A)) < 0.3:
            A = rng.standard_normal((2, 2))
        b = rng.standard_normal(2)
        s1, _ = portmanteau_stat_arrays(x, 2)
        s2, _ = portmanteau_stat_arrays(x @ A + b, 2)
        assert abs(s1 - s2) < 1e-8 * max(1.0, abs(s1))

    def test_strong_dependence_inflates_statistic(self):
        rng = np.random.default_rng(8)
        e = rng.standard_normal(300)
        y = np.empty(300)
        y[0] = e[0]
        for t in range(1, 300):
            y[t] = 0.9 * y[t - 1] + e[t]
        x = np.column_stack([y, y * y])
        stat, _ = portmanteau_stat_arrays(x, 1)
        assert stat > 100.0  # chi2(4) 95% critical is 9.49

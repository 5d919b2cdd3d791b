"""Sample autocovariances of transformed series and portmanteau statistics.

All autocovariances use full-sample-mean centering and the 1/T divisor, so
the implied block-Toeplitz autocovariance sequence is positive semi-definite.
"""

import numpy as np

from .errors import DegenerateColumn, InsufficientSample, SingularGamma0


class AutocovStack:
    """Gamma-hat(0..H), each K x K, plus the sample size that built them."""

    def __init__(self, gamma, T):
        self.gamma = [np.asarray(g, dtype=float) for g in gamma]
        self.T = int(T)
        self.K = self.gamma[0].shape[0]
        self.H = len(self.gamma) - 1

    def __getitem__(self, h):
        return self.gamma[h]


def autocov_arrays(x, H):
    """Gamma-hat(h), h=0..H, for a T x K array.

    Gamma-hat(h) = (1/T) sum_t (x_t - xbar)(x_{t-h} - xbar)', with the
    full-sample mean xbar and divisor T.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n <= H + 1:
        raise InsufficientSample(f"T={n} too short for H={H}")
    xc = x - x.mean(axis=0)
    out = [xc.T @ xc / n]
    for h in range(1, H + 1):
        out.append(xc[h:].T @ xc[:n - h] / n)
    return out


def sample_autocov(x, H):
    """AutocovStack of a TimeSeries (or array) up to lag H.

    Rejects constant columns (DegenerateColumn) since they make Gamma(0)
    singular by construction.
    """
    vals = x.values if hasattr(x, "values") else np.asarray(x, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    ptp = vals.max(axis=0) - vals.min(axis=0)
    for k in range(vals.shape[1]):
        if ptp[k] == 0.0:
            raise DegenerateColumn(k)
    gamma = autocov_arrays(vals, H)
    return AutocovStack(gamma, vals.shape[0])


def _gamma0_inverse(g0, ridge=False):
    """Symmetric-eigendecomposition inverse of Gamma(0), optional ridge."""
    g0 = 0.5 * (g0 + g0.T)
    K = g0.shape[0]
    if K == 1:
        v = g0[0, 0]
        if v < 1e-14:
            raise SingularGamma0("Gamma(0) is numerically singular")
        return np.array([[1.0 / v]])
    w, V = np.linalg.eigh(g0)
    floor = 1e-10 * np.trace(g0) / K
    if w[0] <= floor:
        if not ridge:
            raise SingularGamma0(
                f"smallest eigenvalue {w[0]:.3e} below ridge floor")
        w = w + floor
    return (V / w) @ V.T


def r_squared_trace_mats(gh, g0inv):
    """Tr[Gamma(h) Gamma(0)^-1 Gamma(h)' Gamma(0)^-1] from raw matrices."""
    return float(np.sum((gh @ g0inv) * (g0inv @ gh)))


def r_squared_trace(stack, h, ridge=False):
    """The multivariate R-square trace at lag h, in [0, K].

    Equals the sum of squared canonical correlations between the series
    and its lag-h values.
    """
    if not 1 <= h <= stack.H:
        raise ValueError(f"lag {h} outside 1..{stack.H}")
    g0inv = _gamma0_inverse(stack[0], ridge=ridge)
    return r_squared_trace_mats(stack[h], g0inv)


class PortmanteauValue:
    """Portmanteau statistic T * sum_h Tr[R^2(h)] with its per-lag terms."""

    def __init__(self, statistic, per_lag, H, K, T):
        self.statistic = float(statistic)
        self.per_lag = [float(v) for v in per_lag]
        self.H = H
        self.K = K
        self.T = T


def portmanteau_stat_arrays(x, H, ridge=False):
    """(statistic, per-lag traces) for a plain array; the Monte Carlo
    hot path."""
    gamma = autocov_arrays(x, H)
    g0inv = _gamma0_inverse(gamma[0], ridge=ridge)
    per_lag = [r_squared_trace_mats(gamma[h], g0inv) for h in range(1, H + 1)]
    n = np.asarray(x).shape[0]
    return n * float(np.sum(per_lag)), per_lag


def portmanteau(x, H, ridge=False):
    """PortmanteauValue of a (transformed) series up to lag H."""
    stack = sample_autocov(x, H)
    g0inv = _gamma0_inverse(stack[0], ridge=ridge)
    per_lag = [r_squared_trace_mats(stack[h], g0inv)
               for h in range(1, H + 1)]
    stat = stack.T * float(np.sum(per_lag))
    return PortmanteauValue(stat, per_lag, H, stack.K, stack.T)

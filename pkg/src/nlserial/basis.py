"""Generator systems and the many-transformation specification test.

Exponential-weighted power generators a_{t,p}(u) = u^p exp(-t u) (or their
absolute-value variant) are orthonormalized against a reference residual
sample by regularized Gram-Schmidt forward regression.  The resulting
basis feeds an identity-weighted portmanteau statistic whose null law is
approximately chi-square with H K*^2 degrees of freedom, standardized to a
one-sided normal test when K* is large.
"""

import numpy as np
from scipy import optimize, stats

from .autocov import autocov_arrays
from .errors import AllRejected, InsufficientSample, NoConvergence
from .models import residual_array
from .nlsd import TestReport


class GeneratorGrid:
    """Enumerated generators a_{t,p} over a weight grid, ordered by (t, p).

    sign_mode "positive-support" uses u^p exp(-t u); "absolute-value" uses
    |u|^p exp(-t |u|), the variant suited to signed residuals.
    """

    SIGN_MODES = ("positive-support", "absolute-value")

    def __init__(self, pairs, sign_mode="positive-support"):
        if sign_mode not in self.SIGN_MODES:
            raise ValueError(f"unknown sign mode {sign_mode!r}")
        pairs = [(float(t), int(p)) for (t, p) in pairs]
        for t, p in pairs:
            if not 0.0 <= t <= 1.0:
                raise ValueError("weights t must lie in [0,1]")
            if p < 0:
                raise ValueError("powers p must be nonnegative integers")
        self.pairs = sorted(pairs)
        self.sign_mode = sign_mode

    @property
    def K_n(self):
        return len(self.pairs)

    def evaluate(self, u):
        """T x K_n matrix of generator values."""
        u = np.asarray(u, dtype=float).reshape(-1)
        if self.sign_mode == "absolute-value":
            base = np.abs(u)
        else:
            base = u
        cols = []
        for t, p in self.pairs:
            w = np.exp(-t * np.abs(u)) if self.sign_mode == "absolute-value" \
                else np.exp(-t * u)
            cols.append(base ** p * w)
        return np.column_stack(cols)

    def labels(self):
        sym = "|u|" if self.sign_mode == "absolute-value" else "u"
        return [f"{sym}^{p}*exp(-{t:g}{sym})" for t, p in self.pairs]

    def __repr__(self):
        return f"GeneratorGrid(K_n={self.K_n}, mode={self.sign_mode})"


def build_generators(P_n, n, sign_mode="positive-support", t_max=0.1):
    """Grid of (P_n + 1) * n generators: powers 0..P_n crossed with n
    exponential weights equi-spaced on [0, t_max] (only weights near zero
    carry information, so t_max defaults to 0.1)."""
    if P_n < 1 or n < 1:
        raise ValueError("P_n and n must be at least 1")
    t_grid = [0.0] if n == 1 else list(np.linspace(0.0, t_max, n))
    pairs = [(t, p) for t in t_grid for p in range(P_n + 1)]
    return GeneratorGrid(pairs, sign_mode)


def power_exp_generators(K, t=0.01, sign_mode="absolute-value"):
    """The many-transformation preset: |u|^k exp(-t|u|), k = 1..K."""
    return GeneratorGrid([(t, p) for p in range(1, K + 1)], sign_mode)


class OrthonormalBasis:
    """Affine recipes turning selected generators into an orthonormal,
    mean-zero system on the reference residual sample.

    Each selected element stores (generator index, intercept, loadings on
    the earlier elements, norm), so the basis can be evaluated on new
    residuals -- e.g. in bootstrap replicates -- without re-fitting.
    """

    def __init__(self, grid, selected, rejected, epsilon, fingerprint):
        self.grid = grid
        self.selected = selected          # list of (gen_idx, alpha, betas, norm)
        self.rejected = rejected          # list of (gen_idx, one_minus_r2)
        self.epsilon = float(epsilon)
        self.fingerprint = fingerprint

    @property
    def K_star(self):
        return len(self.selected)

    def evaluate(self, u):
        """T x K* matrix of orthonormalized transforms of new residuals."""
        raw = self.grid.evaluate(u)
        cols = []
        for gen_idx, alpha, betas, norm in self.selected:
            e = raw[:, gen_idx] - alpha
            for j, b in enumerate(betas):
                e = e - b * cols[j]
            cols.append(e / norm)
        return np.column_stack(cols)

    def to_dict(self):
        return {
            "sign_mode": self.grid.sign_mode,
            "pairs": self.grid.pairs,
            "epsilon": self.epsilon,
            "fingerprint": self.fingerprint,
            "selected": [
                {"generator": int(g), "intercept": float(a),
                 "loadings": [float(b) for b in bs], "norm": float(nm)}
                for g, a, bs, nm in self.selected],
            "rejected": [{"generator": int(g), "one_minus_r2": float(v)}
                         for g, v in self.rejected],
        }


def default_epsilon(K_n, T):
    """Regularization threshold: max(1e-8, K_n / T), vanishing with T while
    keeping the expected selection share bounded at desk scale."""
    return max(1e-8, K_n / T)


def orthonormalize(residuals, grid, epsilon=None):
    """Regularized Gram-Schmidt forward regression over the generator grid.

    Each generator is regressed on the constant and the previously
    accepted orthonormal elements; it is accepted iff its unexplained
    share 1 - R^2 exceeds epsilon, then centered, residualized, and
    normalized by its sample norm (1/T inner product).
    """
    u = residuals.values.reshape(-1) if hasattr(residuals, "values") \
        else np.asarray(residuals, dtype=float).reshape(-1)
    n = len(u)
    if n <= grid.K_n:
        raise InsufficientSample("need T > K_n for orthonormalization")
    if epsilon is None:
        epsilon = default_epsilon(grid.K_n, n)
    raw = grid.evaluate(u)
    selected, rejected, cols = [], [], []
    for k in range(grid.K_n):
        g = raw[:, k]
        alpha = g.mean()
        e = g - alpha
        sst = float(e @ e)
        betas = []
        for c in cols:
            b = float(e @ c) / n
            betas.append(b)
            e = e - b * c
        ssr = float(e @ e)
        one_minus_r2 = ssr / sst if sst > 0.0 else 0.0
        if one_minus_r2 > epsilon:
            norm = np.sqrt(ssr / n)
            cols.append(e / norm)
            selected.append((k, alpha, betas, norm))
        else:
            rejected.append((k, one_minus_r2))
    if not selected:
        raise AllRejected("every generator was rejected by the threshold")
    fingerprint = f"T={n},mean={u.mean():.12g},ss={float(u @ u):.12g}"
    return OrthonormalBasis(grid, selected, rejected, epsilon, fingerprint)


# ---------------------------------------------------------------------------
# the many-transformation statistic

def identity_weighted_objective(theta, template, y_vals, basis, H):
    """L_{n,T}(theta) = sum_h ||Gamma-hat(h)||_F^2 over the orthonormalized
    transforms of the residuals at theta (identity weighting, no matrix
    inversion)."""
    try:
        spec = template.make(theta)
        u = residual_array(spec, y_vals).reshape(-1)
        a = basis.evaluate(u)
        g = autocov_arrays(a, H)
    except Exception:
        return np.inf
    val = float(sum(np.sum(m * m) for m in g[1:]))
    return val if np.isfinite(val) else np.inf


def many_transform_statistic(template, y, theta_start, basis, H, refit=True,
                             xatol=1e-5, maxiter=1000):
    """xi = T * L_{n,T} at the minimizer (refit=True) or at the starting
    estimator (refit=False).  The basis must have been built from the
    residuals at theta_start."""
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)
    theta_start = np.atleast_1d(np.asarray(theta_start, dtype=float))

    def f(th):
        return identity_weighted_objective(th, template, y_vals, basis, H)

    if refit:
        res = optimize.minimize(f, theta_start, method="Nelder-Mead",
                                options={"xatol": xatol, "fatol": 1e-12,
                                         "maxiter": maxiter})
        theta, obj = res.x, float(res.fun)
    else:
        theta, obj = theta_start, f(theta_start)
    if not np.isfinite(obj):
        raise NoConvergence("identity-weighted objective not finite")
    n_resid = len(residual_array(template.make(theta), y_vals))
    return n_resid * obj, theta


def standardized_statistic(xi, H, K_star):
    """z = (xi - H K*^2) / sqrt(2 H K*^2): the normal standardization of
    the many-transformation statistic."""
    if K_star < 1:
        raise ValueError("K_star must be at least 1")
    center = H * K_star ** 2
    return (xi - center) / np.sqrt(2.0 * center)


def normal_report(xi, H, K_star, alpha=0.05, config=None):
    """One-sided normal test: reject when z exceeds the upper quantile."""
    z = standardized_statistic(xi, H, K_star)
    crit = float(stats.norm.ppf(1.0 - alpha))
    pval = float(1.0 - stats.norm.cdf(z))
    rec = {"z": float(z), "center": H * K_star ** 2,
           "scale": float(np.sqrt(2.0 * H * K_star ** 2))}
    report = TestReport(z, None, crit, pval, alpha, "many-transform",
                        config=config, normal=rec)
    return report


# ---------------------------------------------------------------------------
# diagonal GCov start

def diagonal_objective(theta, template, y_vals, grid, H):
    """GCov objective with Gamma(0) replaced by its diagonal -- a cheap,
    inversion-free criterion for large K."""
    try:
        spec = template.make(theta)
        u = residual_array(spec, y_vals).reshape(-1)
        a = grid.evaluate(u)
        g = autocov_arrays(a, H)
    except Exception:
        return np.inf
    d = np.diag(g[0]).copy()
    if np.any(d <= 0.0):
        return np.inf
    scale = np.outer(1.0 / d, 1.0 / d)
    val = float(sum(np.sum(m * m * scale) for m in g[1:]))
    return val if np.isfinite(val) else np.inf


def diagonal_gcov_start(template, y, grid, H, starts=None, grid_step=0.2,
                        xatol=1e-5, maxiter=1000):
    """Diagonal GCov estimator used as the starting value theta-tilde of
    the many-transformation procedure."""
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)

    def f(th):
        return diagonal_objective(th, template, y_vals, grid, H)

    if starts is None:
        starts = template.starts(step=grid_step)
    scored = []
    for idx, th in enumerate(starts):
        v = f(th)
        if np.isfinite(v):
            scored.append((v, idx, np.asarray(th, dtype=float)))
    if not scored:
        raise NoConvergence("no start gave a finite diagonal objective")
    scored.sort(key=lambda t: (t[0], t[1]))
    res = optimize.minimize(f, scored[0][2], method="Nelder-Mead",
                            options={"xatol": xatol, "fatol": 1e-12,
                                     "maxiter": maxiter})
    return res.x


def many_transform_test(template, y, grid, H, alpha=0.05, epsilon=None,
                        refit=True):
    """End-to-end many-transformation specification test.

    Pipeline: diagonal GCov start -> orthonormalize the generators against
    the starting residuals -> identity-weighted portmanteau (re-minimized
    over theta by default) -> one-sided normal decision.
    """
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)
    theta_start = diagonal_gcov_start(template, y_vals, grid, H)
    u_start = residual_array(template.make(theta_start), y_vals).reshape(-1)
    basis = orthonormalize(u_start, grid, epsilon=epsilon)
    xi, theta = many_transform_statistic(template, y_vals, theta_start,
                                         basis, H, refit=refit)
    config = {"K_n": grid.K_n, "K_star": basis.K_star, "H": H,
              "refit": refit, "theta": [float(v) for v in np.atleast_1d(theta)]}
    return normal_report(xi, H, basis.K_star, alpha=alpha, config=config)

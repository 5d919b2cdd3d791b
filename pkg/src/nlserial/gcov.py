"""GCov estimation and specification testing, with local-power theory.

The GCov objective is L_T(theta) = sum_{h=1}^H Tr[R^2(h, theta)], the
portmanteau sum of multivariate R-squares of nonlinear transformations of
the model residuals.  T times the minimized objective is asymptotically
chi-square with K^2 H - dim(theta) degrees of freedom under correct
specification.  Local alternatives drifting at rate 1/sqrt(T) yield a
non-central limit whose noncentrality is a projected quadratic form.
"""

import numpy as np
from scipy import optimize

from .autocov import (autocov_arrays, _gamma0_inverse, portmanteau_stat_arrays,
                      r_squared_trace_mats)
from .distributions import chi2_quantile, marcum_q, make_rng
from .errors import (DfNonPositive, InvalidTheta, NlserialError, NoConvergence,
                     RankDeficientJacobian)
from .models import residual_array, simulate
from .nlsd import TestReport, chi2_report
from .series import apply_transforms_array


class GcovFit:
    """Result of a GCov minimization."""

    def __init__(self, theta_hat, objective_min, template, H, K, T_resid,
                 ts, trace=None):
        self.theta_hat = np.asarray(theta_hat, dtype=float)
        self.objective_min = float(objective_min)
        self.template = template
        self.H = H
        self.K = K
        self.T_resid = int(T_resid)
        self.ts = ts
        self.trace = trace or {}

    @property
    def spec(self):
        return self.template.make(self.theta_hat)

    def to_dict(self):
        return {
            "method": "gcov",
            "model": self.template.name,
            "theta": [float(v) for v in self.theta_hat],
            "objective_min": self.objective_min,
            "H": self.H,
            "K": self.K,
            "T_resid": self.T_resid,
            "transforms": self.ts.labels,
            "trace": self.trace,
        }

    def __repr__(self):
        return (f"GcovFit(theta={np.round(self.theta_hat, 4)}, "
                f"objective={self.objective_min:.6g})")


def transformed_residuals(template, theta, y_vals, ts):
    """Transformed residual matrix a[g(y; theta)], raising on bad theta."""
    spec = template.make(theta)
    u = residual_array(spec, y_vals)
    return apply_transforms_array(u, ts)


def gcov_objective(theta, template, y, ts, H):
    """L_T(theta) = sum_h Tr[R^2(h)] on transformed residuals.

    Evaluation failures (invalid theta, degenerate transforms) surface as
    +inf so derivative-free optimizers can skate over them.
    """
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)
    try:
        a = transformed_residuals(template, theta, y_vals, ts)
        stat, per_lag = portmanteau_stat_arrays(a, H)
    except (NlserialError, np.linalg.LinAlgError, FloatingPointError):
        return np.inf
    if not np.isfinite(stat):
        return np.inf
    return float(np.sum(per_lag))


def gcov_fit(template, y, ts, H, starts=None, grid_step=0.2, xatol=1e-5,
             fatol=1e-10, maxiter=2000, polish_rounds=2):
    """GCov estimator: argmin of L_T over the stationarity region.

    Multi-start: the objective is probed on a coarse deterministic grid,
    the best points seed Nelder-Mead searches, and the best polished point
    wins (ties broken by grid order).
    """
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)
    K = ts.K
    if template.dim > K * K * H:
        raise DfNonPositive(
            f"dim(theta)={template.dim} exceeds K^2 H = {K * K * H}")

    def f(theta):
        return gcov_objective(theta, template, y_vals, ts, H)

    if starts is None:
        starts = template.starts(step=grid_step)
    scored = []
    for idx, th in enumerate(starts):
        val = f(th)
        if np.isfinite(val):
            scored.append((val, idx, np.asarray(th, dtype=float)))
    if not scored:
        raise NoConvergence("no start point gave a finite GCov objective")
    scored.sort(key=lambda t: (t[0], t[1]))
    n_polish = min(polish_rounds, len(scored))
    best = None
    for val, idx, th in scored[:n_polish]:
        res = optimize.minimize(f, th, method="Nelder-Mead",
                                options={"xatol": xatol, "fatol": fatol,
                                         "maxiter": maxiter})
        cand = (res.fun, idx, res.x)
        if best is None or cand[:2] < best[:2]:
            best = cand
    obj_min, _, theta_hat = best
    spec = template.make(theta_hat)
    n_resid = len(residual_array(spec, y_vals))
    return GcovFit(theta_hat, obj_min, template, H, K, n_resid, ts,
                   trace={"n_starts": len(scored), "polished": n_polish})


def gcov_statistic(fit):
    """The specification-test statistic T * L_T(theta-hat), with T the
    residual-series length."""
    return fit.T_resid * fit.objective_min


def gcov_spec_test(fit, alpha=0.05):
    """Chi-square specification test of the fitted model.

    df = K^2 H - dim(theta); the correction applies to the GCov estimator
    only (plug-in residuals from other estimators go through the
    bootstrap).
    """
    df = fit.K ** 2 * fit.H - len(fit.theta_hat)
    if df < 1:
        raise DfNonPositive("K^2 H - dim(theta) must be at least 1")
    config = {
        "model": fit.template.name,
        "theta": [float(v) for v in fit.theta_hat],
        "H": fit.H,
        "K": fit.K,
        "T": fit.T_resid,
        "transforms": fit.ts.labels,
    }
    return chi2_report(gcov_statistic(fit), df, alpha, "gcov-spec", config)


def plug_in_spec_test(spec, y, ts, H, dim_theta, alpha=0.05,
                      method="gcov-plugin"):
    """Spec-test statistic computed at an externally fitted theta
    (e.g. AML residuals plugged into the GCov statistic)."""
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)
    u = residual_array(spec, y_vals)
    a = apply_transforms_array(u, ts)
    stat, _ = portmanteau_stat_arrays(a, H)
    df = ts.K ** 2 * H - dim_theta
    if df < 1:
        raise DfNonPositive("K^2 H - dim(theta) must be at least 1")
    return chi2_report(stat, df, alpha, method,
                       {"H": H, "K": ts.K, "T": len(u)})


# ---------------------------------------------------------------------------
# local-power theory

class LocalAlternative:
    """Drift directions and autocovariance Jacobians at the null.

    mu is the per-sqrt(T) drift of theta, nu the drift of the extra
    parameter gamma; dGamma_dtheta[h-1] is the K^2 x dim(theta) Jacobian of
    vec Gamma(h), dGamma_dgamma[h-1] the K^2 derivative vector, and gamma0
    the lag-0 autocovariance at the null.
    """

    def __init__(self, mu, nu, dGamma_dtheta, dGamma_dgamma, gamma0):
        self.mu = np.atleast_1d(np.asarray(mu, dtype=float))
        self.nu = np.atleast_1d(np.asarray(nu, dtype=float))
        self.dGamma_dtheta = [np.asarray(J, dtype=float)
                              for J in dGamma_dtheta] if dGamma_dtheta else None
        self.dGamma_dgamma = [np.asarray(d, dtype=float).reshape(-1)
                              for d in dGamma_dgamma]
        self.gamma0 = np.asarray(gamma0, dtype=float)
        K2 = self.gamma0.shape[0] ** 2
        for d in self.dGamma_dgamma:
            if d.shape[0] != K2:
                raise ValueError("dGamma/dgamma must have K^2 entries")
        if self.dGamma_dtheta is not None:
            for J in self.dGamma_dtheta:
                if J.shape[0] != K2 or J.shape[1] != len(self.mu):
                    raise ValueError("dGamma/dtheta shape mismatch")

    @property
    def H(self):
        return len(self.dGamma_dgamma)


def pi_projector(gamma0, dGamma_dtheta_h=None):
    """Pi = W - W J (J' W J)^-1 J' W with W = Gamma(0)^-1 kron Gamma(0)^-1.

    With no Jacobian (no estimated theta) Pi reduces to W; a Jacobian
    spanning all of R^(K^2) annihilates everything.
    """
    g0inv = _gamma0_inverse(np.asarray(gamma0, dtype=float))
    W = np.kron(g0inv, g0inv)
    if dGamma_dtheta_h is None or np.size(dGamma_dtheta_h) == 0:
        return W
    J = np.asarray(dGamma_dtheta_h, dtype=float)
    if np.linalg.matrix_rank(J) < J.shape[1]:
        raise RankDeficientJacobian("autocovariance Jacobian is rank deficient")
    M = J.T @ W @ J
    return W - W @ J @ np.linalg.solve(M, J.T @ W)


def noncentrality(la):
    """lambda = sum_h delta(h)' Pi(h) delta(h) with
    delta(h) = (dGamma/dtheta') mu + (dGamma/dgamma') nu."""
    lam = 0.0
    for h in range(la.H):
        delta = la.dGamma_dgamma[h] * la.nu[0] if la.nu.size == 1 else \
            la.dGamma_dgamma[h] @ la.nu
        if la.dGamma_dtheta is not None:
            J = la.dGamma_dtheta[h]
            delta = delta + J @ la.mu
            Pi = pi_projector(la.gamma0, J)
        else:
            Pi = pi_projector(la.gamma0)
        lam += float(delta @ Pi @ delta)
    return max(lam, 0.0)


def local_power(lam, df, alpha=0.05):
    """Asymptotic local power: Q_{df/2}(sqrt(lambda), sqrt(chi2 critical)).

    Equals alpha at lambda = 0 and increases in lambda (the Marcum-Q tail
    grows with its first argument)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    crit = chi2_quantile(df, 1.0 - alpha)
    return marcum_q(df / 2.0, np.sqrt(lam), np.sqrt(crit))


def jacobian_dGamma(template, theta0, ts, H, dist, T_large, seed,
                    step=1e-3, gamma_template=None):
    """Finite-difference Jacobians of vec Gamma(h) with respect to drifts
    of the data-generating parameters.

    Gamma(h; theta, gamma) is the long-run sample autocovariance of the
    transformed residuals g(y; theta0) -- the residual map stays frozen at
    the null point -- computed on data simulated under the drifted
    parameters (theta, gamma).  Common random numbers across the
    perturbed evaluations keep the Monte Carlo noise out of the central
    differences.  gamma_template(theta, gamma), when given, builds the
    alternative model; gamma = 0 must reproduce the null.

    Returns (dGamma_dtheta list over h or None, dGamma_dgamma list or
    None, gamma0 matrix at the null).
    """
    if step <= 0:
        raise ValueError("step must be positive")
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    base_seed = seed
    null_spec = template.make(theta0)

    def gammas_at(theta_sim, gamma=None):
        spec = template.make(theta_sim) if gamma is None \
            else gamma_template(theta_sim, gamma)
        rng = make_rng(base_seed, 0)
        y, _ = simulate(spec, dist, T_large, None, rng=rng)
        u = residual_array(null_spec, y.values)
        a = apply_transforms_array(u, ts)
        g = autocov_arrays(a, H)
        return [m.reshape(-1) for m in g[1:]], g[0]

    dG_dth = None
    if template.dim > 0:
        cols = []
        for i in range(theta0.size):
            hstep = step * max(1.0, abs(theta0[i]))
            up = theta0.copy(); up[i] += hstep
            dn = theta0.copy(); dn[i] -= hstep
            g_up, _ = gammas_at(up)
            g_dn, _ = gammas_at(dn)
            cols.append([(a - b) / (2.0 * hstep) for a, b in zip(g_up, g_dn)])
        dG_dth = [np.column_stack([cols[i][h] for i in range(theta0.size)])
                  for h in range(H)]
    _, gamma0 = gammas_at(theta0)

    dG_dg = None
    if gamma_template is not None:
        g_up, _ = gammas_at(theta0, step)
        g_dn, _ = gammas_at(theta0, -step)
        dG_dg = [(a - b) / (2.0 * step) for a, b in zip(g_up, g_dn)]
    return dG_dth, dG_dg, gamma0


# ---------------------------------------------------------------------------
# extended concentrated CUGMM

def cugmm_objective(theta, template, y_vals, ts):
    """Concentrated continuously-updated GMM objective at H=1.

    Moments: a_k(g_t) - beta_k and the K^2 products of centered transforms
    at adjacent dates; beta is concentrated out as the mean of the
    transformed residuals over the moment window t = 2..n, which zeroes
    the level moments exactly and makes the just-identified minimum
    attainable."""
    try:
        a = transformed_residuals(template, theta, y_vals, ts)
    except (NlserialError, np.linalg.LinAlgError):
        return np.inf
    n = a.shape[0]
    beta = a[1:].mean(axis=0)
    ac = a - beta
    # moment sample paths at t = 2..n (index pairs (t, t-1))
    m1 = ac[1:]
    m2 = (ac[1:, :, None] * ac[:-1, None, :]).reshape(n - 1, -1)
    m = np.column_stack([m1, m2])
    mbar = m.mean(axis=0)
    mc = m - mbar
    S = mc.T @ mc / m.shape[0]
    try:
        w = np.linalg.solve(S, mbar)
    except np.linalg.LinAlgError:
        return np.inf
    val = m.shape[0] * float(mbar @ w)
    return val if np.isfinite(val) else np.inf


def cugmm_extended_fit(template, y, ts, H=1, start=None, xatol=1e-7,
                       fatol=1e-12, maxiter=4000):
    """Extended CUGMM concentrated in beta, for H = 1.

    Under just-identification (dim theta = K^2) the minimizer coincides
    with the GCov estimator and the minimum is zero.
    """
    if H != 1:
        raise ValueError("the extended CUGMM is defined for H = 1")
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)

    def f(theta):
        return cugmm_objective(theta, template, y_vals, ts)

    if start is None:
        gfit = gcov_fit(template, y_vals, ts, H)
        start = gfit.theta_hat
    res = optimize.minimize(f, np.atleast_1d(start), method="Nelder-Mead",
                            options={"xatol": xatol, "fatol": fatol,
                                     "maxiter": maxiter})
    theta_hat = res.x
    a = transformed_residuals(template, theta_hat, y_vals, ts)
    beta_hat = a[1:].mean(axis=0)
    return theta_hat, beta_hat, float(res.fun)

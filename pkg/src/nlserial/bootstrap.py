"""Residual-resampling bootstrap for the GCov specification test.

Per replicate: resample the fitted residuals (with replacement by default,
permutation otherwise), rebuild a pseudo-series through the model's
inverse filter, re-estimate the model, and recompute the test statistic.
The empirical 95th percentile of the bootstrapped statistics is the
critical value; the original statistic is compared against it.
"""

import numpy as np

from .autocov import portmanteau_stat_arrays
from .distributions import make_rng
from .errors import NlserialError, TooManyRefitFailures
from .gcov import gcov_fit, gcov_statistic
from .models import aml_fit, rebuild, residual_array
from .series import apply_transforms_array


class BootstrapResult:
    """Bootstrapped statistics with their quantile accessor."""

    def __init__(self, statistics, with_replacement, seed, refit_estimates,
                 dropped):
        self.statistics = np.asarray(statistics, dtype=float)
        self.S = len(self.statistics)
        self.with_replacement = bool(with_replacement)
        self.seed = seed
        self.refit_estimates = np.asarray(refit_estimates, dtype=float)
        self.dropped = int(dropped)

    def quantile(self, level):
        """Nearest-rank empirical quantile: the ceil(level*S)-th order
        statistic."""
        if not 0.0 < level <= 1.0:
            raise ValueError("level must lie in (0,1]")
        srt = np.sort(self.statistics)
        rank = int(np.ceil(level * self.S))
        return float(srt[max(rank, 1) - 1])

    @property
    def q95(self):
        return self.quantile(0.95)

    def to_dict(self):
        return {
            "S": self.S,
            "with_replacement": self.with_replacement,
            "seed": self.seed,
            "dropped": self.dropped,
            "q95": self.q95,
            "statistics": [float(v) for v in self.statistics],
        }


def _plug_in_statistic(spec, y_vals, ts, H):
    """GCov statistic at an externally estimated parameter."""
    u = residual_array(spec, y_vals)
    a = apply_transforms_array(u, ts)
    stat, _ = portmanteau_stat_arrays(a, H)
    return stat


def fit_and_statistic(template, y, ts, H, estimator="gcov",
                      aml_grid_step=0.1):
    """Fit the model with the requested estimator and return
    (theta_hat, statistic).  AML applies to MAR templates only and plugs
    its residuals into the GCov statistic."""
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)
    if estimator == "gcov":
        fit = gcov_fit(template, y_vals, ts, H)
        return fit.theta_hat, gcov_statistic(fit)
    if estimator == "aml":
        # identical, deliberately light optimizer settings for the original
        # fit and every bootstrap refit, so the two statistics are compared
        # on the same footing
        afit = aml_fit(y_vals, template.r, template.s,
                       grid_step=aml_grid_step, n_starts=2, maxiter=150,
                       xatol=1e-4, fatol=1e-6)
        stat = _plug_in_statistic(afit.spec, y_vals, ts, H)
        return afit.theta, stat
    raise ValueError(f"unknown estimator {estimator!r}")


def resample_and_rebuild(spec, resid, T, rng, with_replacement, burn=None):
    """Bootstrap steps 1-2: resample residuals and rebuild a series.

    With replacement the draw is padded by the burn-in on both sides and
    the central T points kept, matching the simulator; a permutation keeps
    every residual exactly once and returns the full rebuilt path."""
    if burn is None:
        burn = spec.default_burn()
    n_u = len(resid)
    if with_replacement:
        idx = rng.integers(0, n_u, T + 2 * burn)
        u_star = resid[idx]
        y_star = rebuild(spec, u_star)[burn:burn + T]
    else:
        u_star = resid[rng.permutation(n_u)]
        y_star = rebuild(spec, u_star)
    return y_star


def bootstrap_null(template, theta_hat, y, ts, H, S, seed,
                   with_replacement=True, estimator="gcov",
                   aml_grid_step=0.1, max_drop_share=0.05):
    """Bootstrap the null distribution of the specification-test statistic.

    Per replicate: resample residuals at theta_hat, rebuild a pseudo-series
    of the original length, re-estimate theta with the same estimator as
    the original fit, and recompute the statistic.  Failed refits are
    dropped and counted; more than max_drop_share of them aborts the run.
    """
    if S < 1:
        raise ValueError("S must be at least 1")
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)
    T = y_vals.shape[0]
    spec = template.make(theta_hat)
    resid = residual_array(spec, y_vals).reshape(-1)
    burn = spec.default_burn()
    stats_out, thetas, dropped = [], [], 0
    for s in range(S):
        rng = make_rng(seed, s)
        y_star = resample_and_rebuild(spec, resid, T, rng, with_replacement,
                                      burn)
        try:
            th_s, stat_s = fit_and_statistic(
                template, y_star, ts, H, estimator=estimator,
                aml_grid_step=aml_grid_step)
        except NlserialError:
            dropped += 1
            if dropped > max_drop_share * S:
                raise TooManyRefitFailures(
                    f"{dropped} of {S} bootstrap refits failed")
            continue
        stats_out.append(stat_s)
        thetas.append(th_s)
    return BootstrapResult(stats_out, with_replacement, seed, thetas, dropped)


def bootstrap_test(template, y, ts, H, S, seed, alpha=0.05,
                   with_replacement=True, estimator="gcov",
                   aml_grid_step=0.1):
    """Full bootstrap decision: fit, bootstrap, reject iff the original
    statistic exceeds the bootstrapped (1-alpha) quantile.  Returns
    (reject, statistic, critical value, BootstrapResult, theta_hat)."""
    theta_hat, stat = fit_and_statistic(template, y, ts, H,
                                        estimator=estimator,
                                        aml_grid_step=aml_grid_step)
    boot = bootstrap_null(template, theta_hat, y, ts, H, S, seed,
                          with_replacement=with_replacement,
                          estimator=estimator, aml_grid_step=aml_grid_step)
    crit = boot.quantile(1.0 - alpha)
    return bool(stat > crit), stat, crit, boot, theta_hat


def bootstrap_size_power_study(null_template, null_theta, alt_spec, dist, T,
                               S, reps, seed, alpha=0.05, ts=None, H=3,
                               estimator="gcov", with_replacement=True,
                               aml_grid_step=0.1):
    """Empirical rejection rates of the bootstrap test.

    Size: data generated under null_template at null_theta.  Power: data
    generated under alt_spec, still fitted as the null model.  Returns a
    dict with the two rates and their Monte Carlo standard errors.
    """
    from .models import simulate  # local import to avoid cycle at import time
    from .series import default_transforms
    if ts is None:
        ts = default_transforms()
    null_spec = null_template.make(null_theta)
    out = {}
    for tag, gen_spec in (("size", null_spec), ("power", alt_spec)):
        if gen_spec is None:
            continue
        rejections = 0
        for rep in range(reps):
            rng = make_rng(seed, 0 if tag == "size" else 1, rep)
            y, _ = simulate(gen_spec, dist, T, None, rng=rng)
            reject, *_ = bootstrap_test(
                null_template, y, ts, H, S,
                derive_sub(seed, tag, rep), alpha=alpha,
                with_replacement=with_replacement, estimator=estimator,
                aml_grid_step=aml_grid_step)
            rejections += int(reject)
        rate = rejections / reps
        out[tag] = rate
        out[tag + "_se"] = float(np.sqrt(rate * (1.0 - rate) / reps))
    out.update({"reps": reps, "S": S, "T": T, "alpha": alpha,
                "estimator": estimator, "dist": dist.label})
    return out


def derive_sub(seed, tag, rep):
    """Deterministic sub-seed for nested bootstrap layers."""
    return int(np.random.SeedSequence(
        [int(seed), 0 if tag == "size" else 1, int(rep)]).generate_state(1)[0])


def bootstrap_local_power(null_template, alt_template, y, ts, H, S, seed,
                          alpha=0.05, with_replacement=True):
    """Bootstrapped local power of the specification test.

    Steps: fit the alternative model on the data; resample its residuals
    and rebuild pseudo-data under the fitted alternative; refit the null
    model on each pseudo-sample and collect the null-model statistics;
    the power estimate is the share of them above the bootstrapped null
    critical value (from a separate, independently seeded bootstrap of the
    null fit on the original data).
    """
    if S < 1:
        raise ValueError("S must be at least 1")
    y_vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)
    T = y_vals.shape[0]

    # null-model critical value on the original data
    null_theta, _ = fit_and_statistic(null_template, y_vals, ts, H)
    boot_null = bootstrap_null(null_template, null_theta, y_vals, ts, H, S,
                               derive_sub(seed, "size", 0),
                               with_replacement=with_replacement)
    q95 = boot_null.quantile(1.0 - alpha)

    # alternative fit and its residual pool
    alt_fit = gcov_fit(alt_template, y_vals, ts, H)
    alt_spec = alt_template.make(alt_fit.theta_hat)
    resid = residual_array(alt_spec, y_vals).reshape(-1)
    burn = alt_spec.default_burn()

    exceed, dropped = 0, 0
    n_ok = 0
    for s in range(S):
        rng = make_rng(seed, 7, s)
        y_star = resample_and_rebuild(alt_spec, resid, T, rng,
                                      with_replacement, burn)
        try:
            _, stat0 = fit_and_statistic(null_template, y_star, ts, H)
        except NlserialError:
            dropped += 1
            if dropped > 0.05 * S:
                raise TooManyRefitFailures(
                    f"{dropped} of {S} alternative-rebuild refits failed")
            continue
        n_ok += 1
        exceed += int(stat0 > q95)
    power = exceed / max(n_ok, 1)
    return {"power": power, "q95": q95, "S": S, "dropped": dropped,
            "null_theta": [float(v) for v in np.atleast_1d(null_theta)],
            "alt_theta": [float(v) for v in alt_fit.theta_hat]}

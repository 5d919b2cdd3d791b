"""Error-law samplers and chi-square / Marcum-Q distribution kernels.

The non-central chi-square CDF is evaluated through the Marcum Q-function
Q_delta(a, b).  For integer order delta the trigonometric-integral
representation is used whenever it is numerically trustworthy; otherwise
(and for half-integer orders) the Poisson-mixture series takes over.
"""

import numpy as np
from scipy import integrate, special, stats

from .errors import DegenerateSeries, NonConvergence


# ---------------------------------------------------------------------------
# seeding

def derive_seed(seed, *indices):
    """Documented seed-splitting rule: worker/replicate streams are
    derived as SeedSequence([seed, index...]) so parallel replications
    never share a stream."""
    return np.random.SeedSequence([int(seed)] + [int(i) for i in indices])


def make_rng(seed, *indices):
    """Generator seeded via the derive_seed splitting rule."""
    return np.random.default_rng(derive_seed(seed, *indices))


# ---------------------------------------------------------------------------
# error laws

class ErrorDistribution:
    """One of the error laws used in the simulation experiments.

    Kinds: "uniform" (on (-1,1)), "laplace" (mean 0, variance 1),
    "student-t" (nu d.o.f., variance nu/(nu-2) when nu > 2, heavy-tailed
    and never rescaled otherwise), "cauchy" (location 0, scale 1),
    "gaussian" (standard normal).
    """

    KINDS = ("uniform", "laplace", "student-t", "cauchy", "gaussian")

    def __init__(self, kind, nu=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown error distribution {kind!r}")
        if kind == "student-t":
            if nu is None or nu <= 0:
                raise ValueError("student-t requires nu > 0")
        elif nu is not None:
            raise ValueError("nu applies to student-t only")
        self.kind = kind
        self.nu = float(nu) if nu is not None else None

    def sample(self, n, seed, *indices):
        """Draw n i.i.d. values; deterministic for fixed (law, n, seed)."""
        if n < 1:
            raise ValueError("n must be at least 1")
        rng = make_rng(seed, *indices) if not isinstance(seed, np.random.Generator) else seed
        return self.sample_rng(rng, n)

    def sample_rng(self, rng, n):
        """Draw from an existing Generator (used by simulators)."""
        k = self.kind
        if k == "uniform":
            return rng.uniform(-1.0, 1.0, n)
        if k == "laplace":
            # scale 1/sqrt(2) gives unit variance
            return rng.laplace(0.0, 1.0 / np.sqrt(2.0), n)
        if k == "student-t":
            return rng.standard_t(self.nu, n)
        if k == "cauchy":
            return rng.standard_cauchy(n)
        return rng.standard_normal(n)

    @property
    def label(self):
        if self.kind == "student-t":
            return f"t({self.nu:g})"
        return self.kind

    def __repr__(self):
        return f"ErrorDistribution({self.label})"


# ---------------------------------------------------------------------------
# central chi-square kernels

def chi2_cdf(x, df):
    return stats.chi2.cdf(x, df)


def chi2_quantile(df, prob):
    if not 0.0 < prob < 1.0:
        raise ValueError("prob must lie in (0,1)")
    return float(stats.chi2.ppf(prob, df))


# ---------------------------------------------------------------------------
# Marcum Q-function

def _marcum_series(delta, a, b):
    """Poisson-mixture evaluation of Q_delta(a,b) = 1 - F(b^2; 2 delta, a^2).

    F is the non-central chi-square CDF written as a Poisson(lambda/2)
    mixture of central chi-squares; the tail is truncated at 1e-12.
    """
    lam = a * a
    x = b * b
    kappa = 2.0 * delta
    if lam == 0.0:
        return 1.0 - stats.chi2.cdf(x, kappa)
    half = 0.5 * lam
    j_max = int(half + 12.0 * np.sqrt(half) + 60)
    j = np.arange(j_max + 1)
    logw = -half + j * np.log(half) - special.gammaln(j + 1.0)
    w = np.exp(logw)
    keep = w > 1e-300
    cdf = float(np.sum(w[keep] * stats.chi2.cdf(x, kappa + 2.0 * j[keep])))
    return min(max(1.0 - cdf, 0.0), 1.0)


def _marcum_h_integral(delta, a, b, tol=1e-10):
    """H_delta(a,b): the trigonometric integral representation.

    H = zeta^{1-delta}/(2 pi) * int_0^{2 pi}
        [cos((delta-1)w) - zeta cos(delta w)] / (1 - 2 zeta cos w + zeta^2)
        * exp(a b cos w - (a^2+b^2)/2) dw,   zeta = a/b.

    The Gaussian factor exp(-(a^2+b^2)/2) is folded into the integrand to
    avoid overflow of exp(a b cos w).  Returns (value, error estimate).
    """
    zeta = a / b
    dm1 = delta - 1.0
    c = -0.5 * (a * a + b * b)

    def f(w):
        cw = np.cos(w)
        den = 1.0 - 2.0 * zeta * cw + zeta * zeta
        if den < 1e-14:
            # zeta -> 1, w -> 0 removable limit of the trigonometric ratio
            num_lim = (2.0 * delta - 1.0) / 2.0
            return num_lim * np.exp(a * b * cw + c)
        num = np.cos(dm1 * w) - zeta * np.cos(delta * w)
        return num / den * np.exp(a * b * cw + c)

    val, err = integrate.quad(f, 0.0, 2.0 * np.pi, epsabs=tol, epsrel=1e-11,
                              limit=400)
    pref = zeta ** (1.0 - delta) / (2.0 * np.pi)
    # cancellation guard: the oscillatory integral is of size ~ zeta^(delta-1)
    # so the product loses ~zeta^-(delta-1) digits to cancellation
    cancel = zeta ** -(dm1) if 0.0 < zeta < 1.0 else 1.0
    total_err = abs(pref) * err + 1e-15 * cancel
    return pref * val, total_err


def marcum_q(delta, a, b, tol=1e-8):
    """Marcum Q-function Q_delta(a, b) for positive integer or half-integer
    order delta and nonnegative arguments.

    Integer orders use the trigonometric-integral representation
    (three-branch form: H for a < b, 1/2 + H at a = b, 1 + H for a > b)
    with a fall-back to the Poisson-mixture series when the integral's
    cancellation error exceeds the tolerance.  Half-integer orders use the
    series directly.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if round(2.0 * delta) != 2.0 * delta:
        raise ValueError("delta must be an integer or half-integer")
    if a < 0 or b < 0:
        raise ValueError("a and b must be nonnegative")
    if b == 0.0:
        return 1.0
    if a == 0.0:
        return 1.0 - stats.chi2.cdf(b * b, 2.0 * delta)
    if round(delta) != delta:
        return _marcum_series(delta, a, b)

    if a == b:
        h, err = _marcum_h_integral(delta, a, a)
        q = 0.5 + h
    elif a < b:
        h, err = _marcum_h_integral(delta, a, b)
        q = h
    else:
        # a > b: integral taken with zeta = a/b > 1; the same H formula
        # applies with the +1 branch
        h, err = _marcum_h_integral(delta, a, b)
        q = 1.0 + h
    if err > tol or not np.isfinite(q):
        q = _marcum_series(delta, a, b)
        if not np.isfinite(q):
            raise NonConvergence(
                f"Marcum Q quadrature failed at delta={delta}, a={a}, b={b}")
    return min(max(q, 0.0), 1.0)


class NoncentralChiSquare:
    """Non-central chi-square law with df kappa > 0, noncentrality lam >= 0."""

    def __init__(self, kappa, lam):
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        self.kappa = float(kappa)
        self.lam = float(lam)

    def __repr__(self):
        return f"NoncentralChiSquare(kappa={self.kappa:g}, lam={self.lam:g})"


def noncentral_chi2_cdf(x, dist):
    """F(x; kappa, lambda) = 1 - Q_{kappa/2}(sqrt(lambda), sqrt(x))."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 0.0
    return 1.0 - marcum_q(dist.kappa / 2.0, np.sqrt(dist.lam), np.sqrt(x))


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov normality check

def ks_normality_statistic(series):
    """Sup-distance of the standardized empirical CDF from N(0,1).

    Returns (statistic, critical value 1.36/sqrt(T)); the statistic is
    invariant to location/scale shifts because the series is standardized
    by its own sample mean and standard deviation.
    """
    x = series.column(0) if hasattr(series, "column") else np.asarray(series, float)
    n = len(x)
    if n < 8:
        raise ValueError("need at least 8 observations")
    sd = x.std(ddof=0)
    if sd == 0.0:
        raise DegenerateSeries("sample standard deviation is zero")
    z = np.sort((x - x.mean()) / sd)
    cdf = stats.norm.cdf(z)
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    stat = float(max(np.max(hi - cdf), np.max(cdf - lo)))
    return stat, 1.36 / np.sqrt(n)

"""Causal-noncausal model zoo: residual functions, simulators, estimators.

Covers the mixed autoregression MAR(r,s) defined by
Phi(L) Psi(L^-1) y_t = u_t with all polynomial roots outside the unit
circle, the double autoregression DAR(1), causal VAR(p), and the purely
noncausal AR(1) as the MAR(0,1) special case.  Simulation runs the causal
filter forward and the noncausal filter backward over a padded error draw,
so that the residual map inverts the simulator exactly on the interior.
"""

import itertools

import numpy as np
from scipy import optimize, signal, special

from .errors import (BurnTooSmall, DegenerateSeries, InsufficientSample,
                     InvalidTheta, NoConvergence)
from .series import TimeSeries


def _poly_roots_ok(coefs, tol=1e-8):
    """Roots of 1 - c_1 z - ... - c_q z^q all strictly outside the unit
    circle; returns (ok, max reciprocal root modulus)."""
    coefs = np.atleast_1d(np.asarray(coefs, dtype=float))
    if coefs.size == 0 or np.all(coefs == 0.0):
        return True, 0.0
    poly = np.concatenate([[1.0], -coefs])        # ascending powers
    roots = np.roots(poly[::-1])
    if roots.size == 0:
        return True, 0.0
    moduli = np.abs(roots)
    return bool(np.all(moduli > 1.0 + tol)), float(np.max(1.0 / moduli))


def _default_burn(rho, tail=1e-10, cap=10_000):
    """Burn-in long enough that the truncated MA tail weight rho^burn
    falls below `tail`, capped so near-unit-root fits (e.g. a model
    estimated on misspecified data) cannot demand unbounded simulation
    lengths."""
    if rho <= 0.0:
        return 2
    return max(2, min(cap, int(np.ceil(np.log(tail) / np.log(rho)))))


class MarSpec:
    """MAR(r,s) specification Phi(L) Psi(L^-1) y_t = u_t.

    theta is the stacked vector (phi_1..phi_r, psi_1..psi_s).  Both
    polynomials must have roots strictly outside the unit circle.
    """

    kind = "MAR"

    def __init__(self, r, s, phi=(), psi=()):
        self.r = int(r)
        self.s = int(s)
        self.phi = np.atleast_1d(np.asarray(phi, dtype=float)) if self.r else np.zeros(0)
        self.psi = np.atleast_1d(np.asarray(psi, dtype=float)) if self.s else np.zeros(0)
        if len(self.phi) != self.r or len(self.psi) != self.s:
            raise InvalidTheta("coefficient counts must match (r, s)")
        ok_c, rho_c = _poly_roots_ok(self.phi)
        ok_n, rho_n = _poly_roots_ok(self.psi)
        if not (ok_c and ok_n):
            raise InvalidTheta(
                f"MAR({self.r},{self.s}) root inside the unit circle: "
                f"phi={self.phi}, psi={self.psi}")
        self.rho = max(rho_c, rho_n)

    @property
    def theta(self):
        return np.concatenate([self.phi, self.psi])

    @property
    def dim(self):
        return self.r + self.s

    @property
    def required_lags(self):
        return self.r

    @property
    def required_leads(self):
        return self.s

    def with_theta(self, theta):
        theta = np.asarray(theta, dtype=float)
        return MarSpec(self.r, self.s, theta[:self.r], theta[self.r:])

    def default_burn(self):
        return _default_burn(self.rho)

    def __repr__(self):
        return f"MarSpec(r={self.r}, s={self.s}, phi={self.phi}, psi={self.psi})"


class Dar1Spec:
    """DAR(1): y_t = phi y_{t-1} + u_t sqrt(w + alpha y_{t-1}^2)."""

    kind = "DAR1"

    def __init__(self, w, phi, alpha):
        if w <= 0:
            raise InvalidTheta("DAR(1) requires w > 0")
        if phi < 0 or alpha < 0:
            raise InvalidTheta("DAR(1) requires phi >= 0 and alpha >= 0")
        self.w = float(w)
        self.phi = float(phi)
        self.alpha = float(alpha)

    @property
    def theta(self):
        return np.array([self.w, self.phi, self.alpha])

    @property
    def dim(self):
        return 3

    @property
    def required_lags(self):
        return 1

    @property
    def required_leads(self):
        return 0

    def with_theta(self, theta):
        return Dar1Spec(*np.asarray(theta, dtype=float))

    def default_burn(self):
        return _default_burn(max(self.phi, 0.5))

    def __repr__(self):
        return f"Dar1Spec(w={self.w}, phi={self.phi}, alpha={self.alpha})"


class VarSpec:
    """Causal VAR(p) of dimension m: Y_t = sum_i Phi_i Y_{t-i} + u_t."""

    kind = "VAR"

    def __init__(self, Phi):
        Phi = np.asarray(Phi, dtype=float)
        if Phi.ndim == 2:
            Phi = Phi[None, :, :]
        self.Phi = Phi
        self.p, self.m = Phi.shape[0], Phi.shape[1]
        if Phi.shape[2] != self.m:
            raise InvalidTheta("VAR coefficient matrices must be square")
        comp = np.zeros((self.p * self.m, self.p * self.m))
        for i in range(self.p):
            comp[:self.m, i * self.m:(i + 1) * self.m] = Phi[i]
        if self.p > 1:
            comp[self.m:, :-self.m] = np.eye((self.p - 1) * self.m)
        lam = np.max(np.abs(np.linalg.eigvals(comp))) if comp.size else 0.0
        if lam >= 1.0 - 1e-8:
            raise InvalidTheta(f"VAR companion spectral radius {lam:.4f} >= 1")
        self.rho = float(lam)

    @property
    def theta(self):
        return self.Phi.reshape(-1)

    @property
    def dim(self):
        return self.p * self.m * self.m

    @property
    def required_lags(self):
        return self.p

    @property
    def required_leads(self):
        return 0

    def with_theta(self, theta):
        return VarSpec(np.asarray(theta, dtype=float).reshape(self.p, self.m, self.m))

    def default_burn(self):
        return _default_burn(max(self.rho, 0.1))

    def __repr__(self):
        return f"VarSpec(p={self.p}, m={self.m})"


def noncausal_ar1(psi):
    """The purely noncausal AR(1), a MAR(0,1) with coefficient psi."""
    return MarSpec(0, 1, psi=[psi])


# ---------------------------------------------------------------------------
# residual maps and their inverses

def _mar_residual_array(spec, y):
    """u_t = Phi(L) Psi(L^-1) y_t over the interior t = r .. T-1-s."""
    y = np.asarray(y, dtype=float).reshape(-1)
    n = len(y)
    if n <= spec.r + spec.s + 1:
        raise InsufficientSample("series too short for MAR residuals")
    w = y[:n - spec.s].copy()
    for j in range(1, spec.s + 1):
        w -= spec.psi[j - 1] * y[j:n - spec.s + j]
    u = w[spec.r:].copy()
    for i in range(1, spec.r + 1):
        u -= spec.phi[i - 1] * w[spec.r - i:len(w) - i]
    return u


def residuals(spec, y):
    """Model residuals u_t as a TimeSeries; the output is shorter than the
    input by the lags/leads the model consumes."""
    vals = y.values if hasattr(y, "values") else np.asarray(y, dtype=float)
    if spec.kind == "MAR":
        u = _mar_residual_array(spec, vals)
        return TimeSeries(u, origin=f"residuals[{spec!r}]")
    if spec.kind == "DAR1":
        v = vals.reshape(-1)
        if len(v) < 3:
            raise InsufficientSample("series too short for DAR residuals")
        u = (v[1:] - spec.phi * v[:-1]) / np.sqrt(spec.w + spec.alpha * v[:-1] ** 2)
        return TimeSeries(u, origin="residuals[DAR1]")
    if spec.kind == "VAR":
        if vals.ndim == 1:
            vals = vals[:, None]
        n = vals.shape[0]
        if n <= spec.p + 1:
            raise InsufficientSample("series too short for VAR residuals")
        u = vals[spec.p:].copy()
        for i in range(1, spec.p + 1):
            u -= vals[spec.p - i:n - i] @ spec.Phi[i - 1].T
        return TimeSeries(u, origin="residuals[VAR]")
    raise ValueError(f"unknown model kind {spec.kind}")


def residual_array(spec, y):
    """Array-in/array-out residual map for optimization hot loops."""
    if spec.kind == "MAR":
        return _mar_residual_array(spec, y)
    return residuals(spec, y).values


def rebuild(spec, u):
    """Deterministic inverse of the residual map with zero initial and
    terminal conditions: rebuilds a series of the same length as u.

    For MAR the causal filter runs forward and the noncausal filter
    backward; MAR(1,1) uses the closed-form combination of its causal and
    noncausal components, which agrees with the generic composed filter up
    to the geometric truncation tail."""
    u = np.asarray(u, dtype=float)
    if spec.kind == "MAR":
        v = u.reshape(-1)
        ar_c = np.concatenate([[1.0], -spec.phi])
        ar_n = np.concatenate([[1.0], -spec.psi])
        if spec.r == 1 and spec.s == 1:
            phi, psi = spec.phi[0], spec.psi[0]
            v2 = signal.lfilter([1.0], ar_c, v)
            v1 = signal.lfilter([1.0], ar_n, v[::-1])[::-1]
            y = v1.copy()
            y[1:] += phi * v2[:-1]
            return y / (1.0 - phi * psi)
        z = signal.lfilter([1.0], ar_c, v) if spec.r else v
        if spec.s:
            return signal.lfilter([1.0], ar_n, z[::-1])[::-1]
        return z
    if spec.kind == "DAR1":
        v = u.reshape(-1)
        y = np.empty(len(v))
        prev = 0.0
        for t in range(len(v)):
            prev = spec.phi * prev + v[t] * np.sqrt(spec.w + spec.alpha * prev * prev)
            y[t] = prev
        return y
    if spec.kind == "VAR":
        if u.ndim == 1:
            u = u[:, None]
        n = u.shape[0]
        y = u.copy()
        for t in range(n):
            for i in range(1, min(spec.p, t) + 1):
                y[t] += spec.Phi[i - 1] @ y[t - i]
        return y
    raise ValueError(f"unknown model kind {spec.kind}")


def simulate(spec, dist, T, seed, burn=None, rng=None):
    """Simulate a stationary trajectory of length T.

    An error draw of length T + 2*burn is pushed through the composed
    forward/backward filter; the central T points are returned together
    with the matched error trace, so that residuals(spec, y) reproduces
    the errors on the interior.
    """
    if burn is None:
        burn = spec.default_burn()
    rho = getattr(spec, "rho", 0.5)
    if rho > 0.0 and rho ** burn > 1e-8:
        raise BurnTooSmall(
            f"burn={burn} leaves truncation tail {rho ** burn:.2e} > 1e-8")
    n = T + 2 * burn
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(seed)) \
            if not isinstance(seed, (np.random.SeedSequence,)) \
            else np.random.default_rng(seed)
    m = getattr(spec, "m", 1)
    if m == 1:
        u = dist.sample_rng(rng, n)
    else:
        u = np.column_stack([dist.sample_rng(rng, n) for _ in range(m)])
    y = rebuild(spec, u)
    sl = slice(burn, burn + T)
    return TimeSeries(y[sl], origin=f"simulate[{spec!r}]"), u[sl]


def simulate_mar(spec, dist, T, seed, burn=None, rng=None):
    """simulate() restricted to MAR specifications."""
    if spec.kind != "MAR":
        raise ValueError("simulate_mar expects a MAR specification")
    return simulate(spec, dist, T, seed, burn=burn, rng=rng)


class MarComponents:
    """Causal and noncausal components of a MAR(1,1) trajectory.

    v1_t = (1 - phi L) y_t     (noncausal in the errors), defined t >= 1;
    v2_t = (1 - psi L^-1) y_t  (causal in the errors), defined t <= T-2.
    Arrays are stored trimmed, with start offsets v1_start=1, v2_start=0.
    """

    def __init__(self, v1, v2, phi, psi):
        self.v1 = np.asarray(v1, dtype=float)
        self.v2 = np.asarray(v2, dtype=float)
        self.phi = float(phi)
        self.psi = float(psi)
        self.v1_start = 1
        self.v2_start = 0

    def reconstruct_forward(self):
        """y_t = (phi v2_{t-1} + v1_t) / (1 - phi psi), t = 1..T-2."""
        den = 1.0 - self.phi * self.psi
        return (self.phi * self.v2[:-1] + self.v1[:len(self.v2) - 1]) / den

    def reconstruct_backward(self):
        """y_t = (v2_t + psi v1_{t+1}) / (1 - phi psi), t = 1..T-2."""
        den = 1.0 - self.phi * self.psi
        return (self.v2[1:] + self.psi * self.v1[1:]) / den


def mar_components(y, phi, psi):
    """Split a series into its causal/noncausal MAR(1,1) components."""
    if not (abs(phi) < 1 and abs(psi) < 1):
        raise InvalidTheta("components require |phi| < 1 and |psi| < 1")
    v = y.values.reshape(-1) if hasattr(y, "values") else np.asarray(y, float)
    if len(v) < 3:
        raise InsufficientSample("need at least 3 observations")
    v1 = v[1:] - phi * v[:-1]
    v2 = v[:-1] - psi * v[1:]
    return MarComponents(v1, v2, phi, psi)


# ---------------------------------------------------------------------------
# parametric estimation

class FitResult:
    """Estimation outcome: parameter vector, criterion value, diagnostics."""

    def __init__(self, theta, objective, method, spec=None, nu=None,
                 converged=True, trace=None):
        self.theta = np.asarray(theta, dtype=float)
        self.objective = float(objective)
        self.method = method
        self.spec = spec
        self.nu = nu
        self.converged = bool(converged)
        self.trace = trace or {}

    def to_dict(self):
        d = {
            "method": self.method,
            "theta": [float(v) for v in self.theta],
            "objective": self.objective,
            "converged": self.converged,
            "trace": self.trace,
        }
        if self.nu is not None:
            d["nu"] = float(self.nu)
        return d

    def __repr__(self):
        return (f"FitResult({self.method}: theta={np.round(self.theta, 4)}, "
                f"objective={self.objective:.6g})")


def _t_loglik(u, nu):
    """Sum of log densities of a standard Student-t(nu) sample."""
    const = (special.gammaln(0.5 * (nu + 1.0)) - special.gammaln(0.5 * nu)
             - 0.5 * np.log(nu * np.pi))
    return len(u) * const - 0.5 * (nu + 1.0) * np.sum(np.log1p(u * u / nu))


def _logit(x):
    return np.log(x) - np.log1p(-x)


def _expit(z):
    return 1.0 / (1.0 + np.exp(-z))


def aml_fit(y, r, s, grid_step=0.01, nu_start=5.0, n_starts=3,
            maxiter=400, xatol=1e-6, fatol=1e-8):
    """Approximate maximum likelihood for MAR(r,s) under Student-t errors.

    Maximizes sum_t ln f[Psi(L^-1) Phi(L) y_t; nu] over autoregressive
    coefficients in (0,1) and nu > 2 (free).  The criterion is bimodal in
    general, so it is first evaluated on a coefficient grid of the given
    step (with nu fixed at nu_start) and then polished by Nelder-Mead from
    the best grid points, in logit/log reparameterization.
    """
    vals = y.values.reshape(-1) if hasattr(y, "values") else np.asarray(y, float)
    dim = r + s
    if dim < 1:
        raise ValueError("aml_fit needs at least one autoregressive lag/lead")
    if len(vals) <= r + s + 10:
        raise InsufficientSample("series too short for AML")
    if vals.max() == vals.min():
        raise DegenerateSeries("constant series")
    template = MarSpec(r, s, np.zeros(r), np.zeros(s))

    def loglik(theta, nu):
        try:
            spec = template.with_theta(theta)
        except InvalidTheta:
            return -np.inf
        u = _mar_residual_array(spec, vals)
        return _t_loglik(u, nu)

    axis = np.arange(grid_step, 1.0, grid_step)
    best = []
    for idx, combo in enumerate(itertools.product(axis, repeat=dim)):
        ll = loglik(np.array(combo), nu_start)
        if np.isfinite(ll):
            best.append((-ll, idx, np.array(combo)))
    if not best:
        raise NoConvergence("no grid point produced a finite likelihood")
    best.sort(key=lambda t: (t[0], t[1]))
    starts = [b[2] for b in best[:n_starts]]

    def neg(z):
        theta = _expit(z[:dim])
        nu = 2.0 + np.exp(z[dim])
        ll = loglik(theta, nu)
        return -ll if np.isfinite(ll) else 1e12

    results = []
    for start in starts:
        z0 = np.concatenate([_logit(start), [np.log(nu_start - 2.0)]])
        res = optimize.minimize(neg, z0, method="Nelder-Mead",
                                options={"xatol": xatol, "fatol": fatol,
                                         "maxiter": maxiter * (dim + 1)})
        results.append(res)
    results.sort(key=lambda rr: rr.fun)
    top = results[0]
    if not any(rr.success for rr in results):
        raise NoConvergence("all Nelder-Mead starts failed to converge")
    theta = _expit(top.x[:dim])
    nu = 2.0 + np.exp(top.x[dim])
    spec = template.with_theta(theta)
    return FitResult(theta, -top.fun, "aml", spec=spec, nu=nu,
                     converged=bool(top.success),
                     trace={"n_grid": len(best), "n_starts": len(starts),
                            "nelder_mead_iters": int(top.nit)})


def ols_noncausal_ar1(y):
    """Least-squares coefficient of y_t on y_{t+1} (with intercept)."""
    v = y.values.reshape(-1) if hasattr(y, "values") else np.asarray(y, float)
    if len(v) < 3:
        raise InsufficientSample("need at least 3 observations")
    x = v[1:]
    resp = v[:-1]
    xc = x - x.mean()
    den = np.sum(xc * xc)
    if den == 0.0:
        raise DegenerateSeries("regressor has zero variance")
    return float(np.sum(xc * (resp - resp.mean())) / den)


# ---------------------------------------------------------------------------
# model templates for semi-parametric fitting

class MarTemplate:
    """MAR(r,s) shape with free theta, for GCov-style optimizers."""

    def __init__(self, r, s):
        self.r = int(r)
        self.s = int(s)
        self.name = f"MAR({r},{s})"

    @property
    def dim(self):
        return self.r + self.s

    def make(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return MarSpec(self.r, self.s, theta[:self.r], theta[self.r:])

    def starts(self, step=0.2, lo=-0.8, hi=0.8):
        axis = np.arange(lo, hi + step / 2, step)
        out = []
        for combo in itertools.product(axis, repeat=self.dim):
            try:
                self.make(np.array(combo))
            except InvalidTheta:
                continue
            out.append(np.array(combo))
        return out


class VarTemplate:
    """VAR(p) of dimension m with free vec(Phi_1..Phi_p)."""

    def __init__(self, p, m):
        self.p = int(p)
        self.m = int(m)
        self.name = f"VAR({p}) dim {m}"

    @property
    def dim(self):
        return self.p * self.m * self.m

    def make(self, theta):
        return VarSpec(np.asarray(theta, dtype=float)
                       .reshape(self.p, self.m, self.m))

    def starts(self, step=0.4, lo=-0.4, hi=0.4):
        # full cartesian products explode for matrices; use scaled identity
        # multiples plus the origin as deterministic starts
        out = [np.zeros(self.dim)]
        for c in np.arange(lo, hi + step / 2, step):
            if c == 0.0:
                continue
            Phi = np.array([np.eye(self.m) * c / (i + 1.0)
                            for i in range(self.p)])
            try:
                VarSpec(Phi)
            except InvalidTheta:
                continue
            out.append(Phi.reshape(-1))
        return out


class Dar1Template:
    """DAR(1) with free (w, phi, alpha)."""

    name = "DAR(1)"
    dim = 3

    def make(self, theta):
        return Dar1Spec(*np.asarray(theta, dtype=float))

    def starts(self, step=None, lo=None, hi=None):
        out = []
        for w in (0.5, 1.0, 2.0):
            for phi in (0.0, 0.3, 0.6):
                for alpha in (0.0, 0.3, 0.6):
                    out.append(np.array([w, phi, alpha]))
        return out

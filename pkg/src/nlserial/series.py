"""Time-series containers, nonlinear transform registry, and preprocessing.

A TimeSeries is an immutable T x m matrix of observations (time-major, row 0
is the earliest observation).  A TransformSet maps such a series into a
K-variate series of nonlinear transformations, the basic building block of
the nonlinear-autocovariance portmanteau tests.
"""

import csv
import io

import numpy as np

from .errors import DomainViolation, RankDeficient


class TimeSeries:
    """Immutable T x m matrix of real observations.

    Parameters:
        values: array-like of shape (T,) or (T, m); all entries finite.
        labels: optional list of m column names.
        origin: free-form provenance string.
    """

    def __init__(self, values, labels=None, origin=""):
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError("values must be 1- or 2-dimensional")
        if values.shape[0] < 2:
            raise ValueError("a series needs at least two observations")
        if not np.all(np.isfinite(values)):
            raise ValueError("series entries must all be finite")
        self._values = values.copy()
        self._values.setflags(write=False)
        if labels is not None:
            labels = [str(c) for c in labels]
            if len(labels) != values.shape[1]:
                raise ValueError("labels must match the number of columns")
        self.labels = labels
        self.origin = origin

    @property
    def values(self):
        return self._values

    @property
    def T(self):
        return self._values.shape[0]

    @property
    def m(self):
        return self._values.shape[1]

    def column(self, k=0):
        """Return column k as a flat array."""
        return np.asarray(self._values[:, k])

    def __len__(self):
        return self.T

    def __repr__(self):
        return f"TimeSeries(T={self.T}, m={self.m}, origin={self.origin!r})"


def _check_domain(u, ok, label):
    """Raise DomainViolation at the first row where ok is False."""
    if not np.all(ok):
        row = int(np.argmin(ok))
        raise DomainViolation(row, label)


class Transform:
    """A named scalar map a_k applied to one input column of a series.

    Supported kinds:
        identity            u
        power               u**p              (p positive real)
        signed-power        sign(u)|u|**p
        abs-power           |u|**p
        log-abs             ln|u|             (u must be nonzero)
        log-square          ln(u**2)          (u must be nonzero)
        exp-weighted-power  u**p * exp(-t*u)  (p nonneg integer, t in [0,1])
        abs-exp-weighted-power  |u|**p * exp(-t*|u|)
        custom              an arbitrary vectorized scalar map

    Each entry reads one input column (default 0), so multivariate inputs
    can be expanded column by column.
    """

    KINDS = (
        "identity", "power", "signed-power", "abs-power", "log-abs",
        "log-square", "exp-weighted-power", "abs-exp-weighted-power",
        "custom",
    )

    def __init__(self, kind, p=None, t=None, func=None, column=0, label=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown transform kind {kind!r}")
        if kind in ("power", "signed-power", "abs-power"):
            if p is None or p <= 0:
                raise ValueError(f"{kind} requires a positive exponent p")
        if kind in ("exp-weighted-power", "abs-exp-weighted-power"):
            if p is None or p < 0 or int(p) != p:
                raise ValueError(f"{kind} requires a nonnegative integer p")
            if t is None or not 0.0 <= t <= 1.0:
                raise ValueError(f"{kind} requires a weight t in [0,1]")
        if kind == "custom" and func is None:
            raise ValueError("custom transform requires a callable")
        self.kind = kind
        self.p = p
        self.t = t
        self.func = func
        self.column = int(column)
        if label is None:
            bits = [kind]
            if p is not None:
                bits.append(f"p={p:g}")
            if t is not None:
                bits.append(f"t={t:g}")
            if column != 0:
                bits.append(f"col={column}")
            label = "(".join([bits[0], ",".join(bits[1:])]) + ")" if len(bits) > 1 else kind
        self.label = label

    def __call__(self, u):
        """Evaluate the transform on a vector of inputs."""
        u = np.asarray(u, dtype=float)
        k = self.kind
        if k == "identity":
            return u
        if k == "power":
            with np.errstate(invalid="ignore"):
                out = np.power(u, self.p)
            _check_domain(u, np.isfinite(out), self.label)
            return out
        if k == "signed-power":
            return np.sign(u) * np.abs(u) ** self.p
        if k == "abs-power":
            return np.abs(u) ** self.p
        if k == "log-abs":
            _check_domain(u, u != 0.0, self.label)
            return np.log(np.abs(u))
        if k == "log-square":
            _check_domain(u, u != 0.0, self.label)
            return np.log(u * u)
        if k == "exp-weighted-power":
            return u ** self.p * np.exp(-self.t * u)
        if k == "abs-exp-weighted-power":
            a = np.abs(u)
            return a ** self.p * np.exp(-self.t * a)
        out = np.asarray(self.func(u), dtype=float)
        _check_domain(u, np.isfinite(out), self.label)
        return out

    def __repr__(self):
        return f"Transform({self.label!r})"


class TransformSet:
    """Ordered list of K transforms with unique labels."""

    def __init__(self, transforms):
        transforms = list(transforms)
        if len(transforms) < 1:
            raise ValueError("a transform set needs at least one entry")
        labels = [tr.label for tr in transforms]
        if len(set(labels)) != len(labels):
            raise ValueError("transform labels must be unique")
        self.transforms = transforms

    @property
    def K(self):
        return len(self.transforms)

    @property
    def labels(self):
        return [tr.label for tr in self.transforms]

    def __iter__(self):
        return iter(self.transforms)

    def __repr__(self):
        return f"TransformSet({self.labels})"


def default_transforms():
    """The default univariate expansion {y, y^2}."""
    return TransformSet([
        Transform("identity", label="u"),
        Transform("power", p=2, label="u^2"),
    ])


def apply_transforms(series, ts):
    """Apply a TransformSet to a series, producing a K-variate series.

    Column k of the output is transform k applied to its declared input
    column.  Domain violations surface as DomainViolation.
    """
    x = series.values
    cols = []
    for tr in ts:
        if tr.column >= x.shape[1]:
            raise ValueError(
                f"transform {tr.label!r} reads column {tr.column} "
                f"but the series has {x.shape[1]} columns")
        cols.append(tr(x[:, tr.column]))
    out = np.column_stack(cols)
    return TimeSeries(out, labels=ts.labels, origin=series.origin)


def apply_transforms_array(values, ts):
    """Array-in/array-out version of apply_transforms for hot loops."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return np.column_stack([tr(values[:, tr.column]) for tr in ts])


def detrend_polynomial(series, degree):
    """Residuals of an OLS regression of a univariate series on time powers.

    Regressors are {1, t, ..., t^degree} with t = 0..T-1.  The residuals
    have zero mean and are orthogonal to every regressor.
    """
    if series.m != 1:
        raise ValueError("detrending expects a univariate series")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    y = series.column(0)
    n = len(y)
    if n <= degree + 1:
        raise RankDeficient(
            f"need T > degree+1 ({n} observations, degree {degree})")
    t = np.arange(n, dtype=float)
    X = np.vander(t, degree + 1, increasing=True)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    return TimeSeries(resid, labels=series.labels,
                      origin=f"detrend(deg={degree})")


def read_csv(path_or_buffer, header="auto"):
    """Read a series from CSV: one column per component, optional header.

    header can be True, False, or "auto" (sniff: non-numeric first row).
    """
    if hasattr(path_or_buffer, "read"):
        text = path_or_buffer.read()
    else:
        with open(path_or_buffer, "r", encoding="utf-8") as fh:
            text = fh.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ValueError("empty CSV input")
    labels = None
    first = rows[0]
    has_header = header
    if header == "auto":
        try:
            [float(v) for v in first]
            has_header = False
        except ValueError:
            has_header = True
    if has_header:
        labels = [v.strip() for v in first]
        rows = rows[1:]
    data = np.array([[float(v) for v in r] for r in rows])
    return TimeSeries(data, labels=labels, origin="csv")


def write_csv(series, path_or_buffer):
    """Serialize a series back to CSV (header row when labels exist)."""
    own = not hasattr(path_or_buffer, "write")
    fh = open(path_or_buffer, "w", newline="", encoding="utf-8") if own \
        else path_or_buffer
    try:
        w = csv.writer(fh)
        if series.labels is not None:
            w.writerow(series.labels)
        for row in series.values:
            w.writerow([repr(float(v)) for v in row])
    finally:
        if own:
            fh.close()

"""The NLSD portmanteau test for nonlinear serial dependence.

The statistic is the portmanteau sum of squared canonical correlations of a
K-variate nonlinear expansion of the series, compared against a chi-square
law with K^2 H degrees of freedom.
"""

import json

from .autocov import portmanteau
from .distributions import chi2_cdf, chi2_quantile
from .series import apply_transforms, default_transforms


class TestReport:
    """Outcome of a chi-square (or normal-standardized) test.

    Fields: statistic, df (or None for normal standardization; see the
    'normal' record), critical_value, p_value, alpha, reject, method tag,
    and a config echo for provenance.
    """

    def __init__(self, statistic, df, critical_value, p_value, alpha,
                 method, config=None, normal=None):
        self.statistic = float(statistic)
        self.df = df
        self.critical_value = float(critical_value)
        self.p_value = float(p_value)
        self.alpha = float(alpha)
        self.reject = bool(self.statistic > self.critical_value)
        self.method = method
        self.config = dict(config or {})
        self.normal = normal  # optional standardization record

    def to_dict(self):
        d = {
            "method": self.method,
            "statistic": self.statistic,
            "df": self.df,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "config": self.config,
        }
        if self.normal is not None:
            d["normal"] = self.normal
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    def __repr__(self):
        verdict = "reject" if self.reject else "no reject"
        return (f"TestReport({self.method}: stat={self.statistic:.4g}, "
                f"df={self.df}, crit={self.critical_value:.4g}, {verdict})")


def chi2_report(statistic, df, alpha, method, config=None):
    """Assemble a TestReport from a chi-square reference law."""
    if df < 1:
        raise ValueError("degrees of freedom must be at least 1")
    crit = chi2_quantile(df, 1.0 - alpha)
    pval = 1.0 - chi2_cdf(statistic, df)
    return TestReport(statistic, df, crit, pval, alpha, method, config)


def nlsd_test(series, ts=None, H=1, alpha=0.05):
    """Run the NLSD test on a series.

    The series is expanded by the transform set (default {y, y^2} for
    univariate input), the portmanteau statistic computed up to lag H, and
    compared with the chi-square(K^2 H) critical value.  No parameter-count
    correction applies because the test runs on raw data, not residuals.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    if ts is None:
        ts = default_transforms()
    xa = apply_transforms(series, ts)
    pm = portmanteau(xa, H)
    df = ts.K ** 2 * H
    config = {
        "transforms": ts.labels,
        "H": H,
        "K": ts.K,
        "T": series.T,
    }
    return chi2_report(pm.statistic, df, alpha, "nlsd", config)

"""Command-line front end: tests, Monte Carlo tables, and model fits.

Subcommands:
    test  -- run the NLSD, GCov specification, or bootstrap test on a CSV
    mc    -- reproduce a size/power experiment preset
    fit   -- estimate a causal-noncausal model (GCov, AML, or OLS)

Exit codes for `test`: 0 no rejection, 1 rejection, 2 usage/data error.
All output is written as a ReportBundle: results.json, results.csv for
tables, and a manifest echoing the configuration and seeds.
"""

import argparse
import csv
import hashlib
import json
import os
import re
import sys

import numpy as np
import scipy

from . import __version__
from .bootstrap import bootstrap_test
from .distributions import ks_normality_statistic
from .errors import NlserialError
from .gcov import gcov_fit, gcov_spec_test
from .mc import SCENARIOS, run_scenario
from .models import (MarTemplate, aml_fit, mar_components, ols_noncausal_ar1,
                     residuals)
from .nlsd import nlsd_test
from .series import (Transform, TransformSet, default_transforms,
                     detrend_polynomial, read_csv, write_csv)


def parse_transforms(spec_text):
    """Parse a comma-separated transform list, e.g. 'u,u^2' or
    'u,|u|^0.5,log|u|'."""
    if not spec_text:
        return default_transforms()
    out = []
    for token in spec_text.split(","):
        tok = token.strip()
        low = tok.lower()
        if low in ("u", "y", "identity"):
            out.append(Transform("identity", label=tok))
        elif low in ("logabs", "log|u|", "log-abs"):
            out.append(Transform("log-abs", label=tok))
        elif low in ("logsq", "log(u^2)", "log-square"):
            out.append(Transform("log-square", label=tok))
        elif re.fullmatch(r"\|u\|\^([0-9.]+)|abs([0-9.]+)", low):
            m = re.fullmatch(r"\|u\|\^([0-9.]+)|abs([0-9.]+)", low)
            p = float(m.group(1) or m.group(2))
            out.append(Transform("abs-power", p=p, label=tok))
        elif re.fullmatch(r"u\^?([0-9.]+)", low):
            p = float(re.fullmatch(r"u\^?([0-9.]+)", low).group(1))
            out.append(Transform("power", p=p, label=tok))
        else:
            raise ValueError(f"cannot parse transform token {tok!r}")
    return TransformSet(out)


def parse_model(text):
    """Parse 'MAR(r,s)' into a MarTemplate."""
    m = re.fullmatch(r"(?i)mar\((\d+),(\d+)\)", text.strip())
    if not m:
        raise ValueError(f"cannot parse model {text!r}; expected MAR(r,s)")
    return MarTemplate(int(m.group(1)), int(m.group(2)))


def _coerce(value):
    """Best-effort typing of config values: int, float, tuple, or string."""
    value = value.strip()
    if "," in value:
        return tuple(_coerce(v) for v in value.split(","))
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def read_config(path):
    """Line-oriented key=value configuration with # comments."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = _coerce(value)
    return out


class ReportBundle:
    """Writes results.json, optional results.csv, and a manifest."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)

    def write(self, results, config, rows=None):
        res_path = os.path.join(self.out_dir, "results.json")
        payload = json.dumps(results, sort_keys=True, indent=2)
        with open(res_path, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
        if rows:
            csv_path = os.path.join(self.out_dir, "results.csv")
            keys = sorted({k for r in rows for k in r})
            with open(csv_path, "w", newline="", encoding="utf-8") as fh:
                w = csv.DictWriter(fh, fieldnames=keys)
                w.writeheader()
                w.writerows(rows)
        manifest = {
            "config": config,
            "versions": {"nlserial": __version__,
                         "numpy": np.__version__,
                         "scipy": scipy.__version__},
            "results_sha256": hashlib.sha256(payload.encode()).hexdigest(),
        }
        with open(os.path.join(self.out_dir, "manifest.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")


def cmd_test(args):
    series = read_csv(args.data)
    if args.detrend is not None:
        series = detrend_polynomial(series, args.detrend)
    ts = parse_transforms(args.transforms)
    config = vars(args).copy()
    config.pop("func", None)
    if args.mode == "nlsd":
        report = nlsd_test(series, ts, H=args.H, alpha=args.alpha)
        results = report.to_dict()
    elif args.mode == "gcov-spec":
        template = parse_model(args.model)
        fit = gcov_fit(template, series.values, ts, args.H)
        report = gcov_spec_test(fit, alpha=args.alpha)
        results = {"fit": fit.to_dict(), **report.to_dict()}
    elif args.mode == "bootstrap":
        template = parse_model(args.model)
        reject, stat, crit, boot, theta = bootstrap_test(
            template, series.values, ts, args.H, args.S, args.seed,
            alpha=args.alpha, estimator=args.estimator)
        results = {"method": "gcov-bootstrap", "statistic": stat,
                   "critical_value": crit, "reject": reject,
                   "theta": [float(v) for v in np.atleast_1d(theta)],
                   "bootstrap": {"S": boot.S, "dropped": boot.dropped,
                                 "q95": boot.q95}}
        report = argparse.Namespace(reject=reject)
    else:
        raise ValueError(f"unknown mode {args.mode!r}")
    if args.ks:
        stat, crit = ks_normality_statistic(series)
        results["ks_normality"] = {"statistic": stat, "critical": crit}
    ReportBundle(args.out).write(results, config)
    print(json.dumps(results, sort_keys=True, indent=2))
    return 1 if report.reject else 0


def cmd_mc(args):
    overrides = {}
    if args.config:
        overrides.update(read_config(args.config))
    for item in args.set or []:
        key, value = item.split("=", 1)
        overrides[key.strip()] = _coerce(value)
    scenario = overrides.pop("scenario", args.scenario)
    if scenario is None:
        raise ValueError("a scenario is required (flag or config file)")
    result = run_scenario(scenario, **overrides)
    config = {"scenario": scenario, "overrides": overrides}
    rows = result["rows"]
    for row in rows:
        row.setdefault("mc_se", row.get("se"))
    ReportBundle(args.out).write(result, config, rows=rows)
    print(json.dumps(result["meta"], sort_keys=True))
    for row in rows:
        print(row)
    return 0


def cmd_fit(args):
    series = read_csv(args.data)
    if args.detrend is not None:
        series = detrend_polynomial(series, args.detrend)
    template = parse_model(args.model)
    ts = parse_transforms(args.transforms)
    config = vars(args).copy()
    config.pop("func", None)
    results = {"model": template.name, "estimator": args.estimator}
    if args.estimator == "gcov":
        fit = gcov_fit(template, series.values, ts, args.H)
        theta = fit.theta_hat
        results["fit"] = fit.to_dict()
        if template.dim < ts.K ** 2 * args.H:
            results["spec_test"] = gcov_spec_test(fit, args.alpha).to_dict()
    elif args.estimator == "aml":
        fit = aml_fit(series.values.reshape(-1), template.r, template.s,
                      grid_step=args.grid_step)
        theta = fit.theta
        results["fit"] = fit.to_dict()
    elif args.estimator == "ols":
        if (template.r, template.s) != (0, 1):
            raise ValueError("the OLS estimator applies to MAR(0,1) only")
        psi = ols_noncausal_ar1(series)
        theta = np.array([psi])
        results["fit"] = {"method": "ols", "theta": [psi]}
    else:
        raise ValueError(f"unknown estimator {args.estimator!r}")

    spec = template.make(theta)
    phi_part = theta[:template.r]
    psi_part = theta[template.r:]
    results["roots"] = {
        "phi": _poly_root_list(phi_part),
        "psi": _poly_root_list(psi_part),
    }
    resid = residuals(spec, series)
    if (template.r, template.s) == (1, 1):
        comps = mar_components(series, float(phi_part[0]), float(psi_part[0]))
        results["components"] = {"v1_start": comps.v1_start,
                                 "v2_start": comps.v2_start,
                                 "v1": comps.v1.tolist(),
                                 "v2": comps.v2.tolist()}
    ReportBundle(args.out).write(results, config)
    write_csv(resid, os.path.join(args.out, "residuals.csv"))
    print(json.dumps({k: v for k, v in results.items()
                      if k in ("model", "estimator", "fit", "roots",
                               "spec_test")},
                     sort_keys=True, indent=2))
    return 0


def _poly_root_list(coefs):
    """Roots of 1 - c_1 z - ... - c_q z^q, reported as reals when real."""
    coefs = np.atleast_1d(np.asarray(coefs, dtype=float))
    if coefs.size == 0 or np.all(coefs == 0.0):
        return []
    poly = np.concatenate([[1.0], -coefs])
    roots = np.roots(poly[::-1])
    out = []
    for rt in roots:
        if abs(rt.imag) < 1e-12:
            out.append(float(rt.real))
        else:
            out.append({"re": float(rt.real), "im": float(rt.imag)})
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nlserial",
        description="Portmanteau tests for nonlinear serial dependence")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run a dependence/specification test")
    p_test.add_argument("data", help="CSV file, one column per component")
    p_test.add_argument("--mode", choices=("nlsd", "gcov-spec", "bootstrap"),
                        default="nlsd")
    p_test.add_argument("--transforms", default="",
                        help="comma list, e.g. u,u^2 or u,|u|^0.5,log|u|")
    p_test.add_argument("--H", type=int, default=1)
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--model", default="MAR(0,1)")
    p_test.add_argument("--estimator", choices=("gcov", "aml"),
                        default="gcov")
    p_test.add_argument("--S", type=int, default=100,
                        help="bootstrap replicates (bootstrap mode)")
    p_test.add_argument("--detrend", type=int, default=None,
                        help="polynomial detrending degree")
    p_test.add_argument("--ks", action="store_true",
                        help="also report the KS normality statistic")
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--out", default="nlserial-report")
    p_test.set_defaults(func=cmd_test)

    p_mc = sub.add_parser("mc", help="run a Monte Carlo experiment preset")
    p_mc.add_argument("--scenario", choices=sorted(SCENARIOS), default=None)
    p_mc.add_argument("--config", default=None,
                      help="key=value config file")
    p_mc.add_argument("--set", action="append", metavar="KEY=VALUE",
                      help="override a preset parameter")
    p_mc.add_argument("--out", default="nlserial-mc")
    p_mc.set_defaults(func=cmd_mc)

    p_fit = sub.add_parser("fit", help="estimate a causal-noncausal model")
    p_fit.add_argument("data")
    p_fit.add_argument("--model", default="MAR(1,1)")
    p_fit.add_argument("--estimator", choices=("gcov", "aml", "ols"),
                       default="gcov")
    p_fit.add_argument("--transforms", default="")
    p_fit.add_argument("--H", type=int, default=3)
    p_fit.add_argument("--alpha", type=float, default=0.05)
    p_fit.add_argument("--grid-step", type=float, default=0.01, dest="grid_step")
    p_fit.add_argument("--detrend", type=int, default=None)
    p_fit.add_argument("--out", default="nlserial-fit")
    p_fit.set_defaults(func=cmd_fit)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "alpha", 0.05) <= 0.0 or getattr(args, "alpha", 0.05) >= 1.0:
        parser.exit(2, "error: --alpha must lie strictly between 0 and 1\n")
    try:
        return args.func(args)
    except (NlserialError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

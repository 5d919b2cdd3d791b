"""Tests for the command-line front end."""

import json
import os

import numpy as np
import pytest

from nlserial.cli import (_coerce, main, parse_model, parse_transforms,
                          read_config)
from nlserial.distributions import ErrorDistribution, make_rng
from nlserial.models import MarSpec, simulate
from nlserial.series import TimeSeries, write_csv

T5 = ErrorDistribution("student-t", nu=5)


@pytest.fixture
def iid_csv(tmp_path):
    path = tmp_path / "iid.csv"
    write_csv(TimeSeries(make_rng(100).uniform(-1, 1, 300), labels=["y"]),
              str(path))
    return str(path)


@pytest.fixture
def mar_csv(tmp_path):
    y, _ = simulate(MarSpec(0, 1, psi=[0.7]), T5, 400, None,
                    rng=make_rng(101))
    path = tmp_path / "mar.csv"
    write_csv(y, str(path))
    return str(path)


class TestParsing:
    def test_parse_transforms_default(self):
        assert parse_transforms("").labels == ["u", "u^2"]

    def test_parse_transforms_tokens(self):
        ts = parse_transforms("u,u^2,|u|^0.5,log|u|,logsq")
        kinds = [tr.kind for tr in ts]
        assert kinds == ["identity", "power", "abs-power", "log-abs",
                        "log-square"]

    def test_parse_transforms_bad_token(self):
        with pytest.raises(ValueError):
            parse_transforms("u,sin(u)")

    def test_parse_model(self):
        tpl = parse_model("MAR(1,2)")
        assert (tpl.r, tpl.s) == (1, 2)
        with pytest.raises(ValueError):
            parse_model("ARMA(1,1)")

    def test_coerce(self):
        assert _coerce("3") == 3
        assert _coerce("0.5") == 0.5
        assert _coerce("true") is True
        assert _coerce("100,200") == (100, 200)
        assert _coerce("uniform") == "uniform"

    def test_read_config(self, tmp_path):
        path = tmp_path / "cfg"
        path.write_text("reps=50  # comment\nTs=100,200\n\ndist=uniform\n")
        cfg = read_config(str(path))
        assert cfg == {"reps": 50, "Ts": (100, 200), "dist": "uniform"}

    def test_read_config_bad_line(self, tmp_path):
        path = tmp_path / "cfg"
        path.write_text("no equals sign\n")
        with pytest.raises(ValueError):
            read_config(str(path))


class TestCmdTest:
    def test_nlsd_no_reject_exit_zero(self, iid_csv, tmp_path):
        out = str(tmp_path / "rep")
        rc = main(["test", iid_csv, "--mode", "nlsd", "--out", out])
        assert rc == 0
        results = json.load(open(os.path.join(out, "results.json")))
        assert results["method"] == "nlsd" and not results["reject"]
        assert os.path.exists(os.path.join(out, "manifest.json"))

    def test_nlsd_reject_exit_one(self, mar_csv, tmp_path):
        rc = main(["test", mar_csv, "--mode", "nlsd",
                   "--out", str(tmp_path / "rep")])
        assert rc == 1

    def test_gcov_spec_mode(self, mar_csv, tmp_path):
        out = str(tmp_path / "rep")
        rc = main(["test", mar_csv, "--mode", "gcov-spec", "--model",
                   "MAR(0,1)", "--H", "3", "--out", out])
        results = json.load(open(os.path.join(out, "results.json")))
        assert results["df"] == 11
        assert rc in (0, 1)
        assert abs(results["fit"]["theta"][0] - 0.7) < 0.15

    def test_detrend_and_ks_flags(self, tmp_path):
        y = make_rng(102).standard_normal(200) + 0.05 * np.arange(200)
        path = tmp_path / "trend.csv"
        write_csv(TimeSeries(y, labels=["y"]), str(path))
        out = str(tmp_path / "rep")
        rc = main(["test", str(path), "--detrend", "1", "--ks",
                   "--out", out])
        results = json.load(open(os.path.join(out, "results.json")))
        assert "ks_normality" in results
        assert rc in (0, 1)

    def test_determinism_byte_identical(self, iid_csv, tmp_path):
        outs = []
        for tag in ("a", "b"):
            out = str(tmp_path / tag)
            main(["test", iid_csv, "--out", out])
            outs.append(open(os.path.join(out, "results.json")).read())
        assert outs[0] == outs[1]

    def test_alpha_out_of_range_exits_two(self, iid_csv, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["test", iid_csv, "--alpha", "1.5",
                  "--out", str(tmp_path / "rep")])
        assert exc.value.code == 2

    def test_missing_file_exits_two(self, tmp_path):
        rc = main(["test", str(tmp_path / "nope.csv"),
                   "--out", str(tmp_path / "rep")])
        assert rc == 2


class TestCmdMc:
    def test_preset_with_overrides(self, tmp_path):
        out = str(tmp_path / "mc")
        rc = main(["mc", "--scenario", "nlsd-size",
                   "--set", "reps=200", "--set", "Ts=100,200",
                   "--set", "dists=uniform,laplace", "--out", out])
        assert rc == 0
        results = json.load(open(os.path.join(out, "results.json")))
        assert len(results["rows"]) == 4  # 2 T's x 2 distributions
        for row in results["rows"]:
            assert 0.0 <= row["rate"] <= 1.0
        assert os.path.exists(os.path.join(out, "results.csv"))
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        assert manifest["config"]["scenario"] == "nlsd-size"

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("scenario=nlsd-size\nreps=100\nTs=100\n"
                       "dists=uniform\n")
        out = str(tmp_path / "mc")
        rc = main(["mc", "--config", str(cfg), "--out", out])
        assert rc == 0

    def test_unknown_scenario_exits_two(self, tmp_path):
        rc = main(["mc", "--set", "scenario=not-a-thing",
                   "--out", str(tmp_path / "mc")])
        assert rc == 2

    def test_scenario_required(self, tmp_path):
        rc = main(["mc", "--out", str(tmp_path / "mc")])
        assert rc == 2


class TestCmdFit:
    def test_gcov_fit_writes_reports(self, mar_csv, tmp_path):
        out = str(tmp_path / "fit")
        rc = main(["fit", mar_csv, "--model", "MAR(0,1)", "--H", "3",
                   "--out", out])
        assert rc == 0
        results = json.load(open(os.path.join(out, "results.json")))
        assert abs(results["fit"]["theta"][0] - 0.7) < 0.15
        assert "spec_test" in results
        # psi=0.7 implies a noncausal root at 1/0.7
        assert abs(results["roots"]["psi"][0] - 1.0 / results["fit"]["theta"][0]) < 1e-6
        assert os.path.exists(os.path.join(out, "residuals.csv"))

    def test_ols_estimator(self, mar_csv, tmp_path):
        out = str(tmp_path / "fit")
        rc = main(["fit", mar_csv, "--model", "MAR(0,1)",
                   "--estimator", "ols", "--out", out])
        assert rc == 0
        results = json.load(open(os.path.join(out, "results.json")))
        assert abs(results["fit"]["theta"][0] - 0.7) < 0.2

    def test_ols_requires_mar01(self, mar_csv, tmp_path):
        rc = main(["fit", mar_csv, "--model", "MAR(1,1)",
                   "--estimator", "ols", "--out", str(tmp_path / "fit")])
        assert rc == 2

    def test_mar11_reports_components(self, tmp_path):
        y, _ = simulate(MarSpec(1, 1, phi=[0.4], psi=[0.6]), T5, 400,
                        None, rng=make_rng(103))
        path = tmp_path / "mar11.csv"
        write_csv(y, str(path))
        out = str(tmp_path / "fit")
        rc = main(["fit", str(path), "--model", "MAR(1,1)", "--H", "3",
                   "--out", out])
        assert rc == 0
        results = json.load(open(os.path.join(out, "results.json")))
        assert "components" in results
        assert results["components"]["v1_start"] == 1

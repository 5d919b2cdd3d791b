"""Tests for the NLSD portmanteau test and its report container."""

import json

import numpy as np
import pytest

from nlserial.distributions import make_rng
from nlserial.models import MarSpec, simulate
from nlserial.distributions import ErrorDistribution
from nlserial.nlsd import TestReport as ReportCls
from nlserial.nlsd import chi2_report, nlsd_test
from nlserial.series import TimeSeries, Transform, TransformSet


class TestReportContainer:
    def test_reject_logic(self):
        r = ReportCls(10.0, 4, 9.487, 0.04, 0.05, "nlsd")
        assert r.reject
        r2 = ReportCls(5.0, 4, 9.487, 0.3, 0.05, "nlsd")
        assert not r2.reject

    def test_json_round_trip(self):
        r = chi2_report(3.2, 4, 0.05, "nlsd", {"T": 100})
        d = json.loads(r.to_json())
        assert d["method"] == "nlsd" and d["config"]["T"] == 100

    def test_df_validation(self):
        with pytest.raises(ValueError):
            chi2_report(1.0, 0, 0.05, "nlsd")


class TestNlsdTest:
    def test_default_design_df_and_critical(self):
        y = TimeSeries(make_rng(0).uniform(-1, 1, 200))
        report = nlsd_test(y)
        assert report.df == 4  # K=2 transforms, H=1
        assert abs(report.critical_value - 9.487729) < 1e-4
        assert report.config["K"] == 2 and report.config["H"] == 1

    def test_df_scales_with_k_and_h(self):
        y = TimeSeries(make_rng(1).standard_normal(300))
        ts = TransformSet([Transform("identity", label="u"),
                           Transform("power", p=2, label="u^2"),
                           Transform("abs-power", p=3, label="|u|^3")])
        report = nlsd_test(y, ts, H=2)
        assert report.df == 3 * 3 * 2

    def test_detects_noncausal_dependence(self):
        spec = MarSpec(0, 1, psi=[0.7])
        y, _ = simulate(spec, ErrorDistribution("student-t", nu=5), 500,
                        None, rng=make_rng(2))
        assert nlsd_test(y).reject

    def test_iid_not_rejected_for_typical_draw(self):
        y = TimeSeries(make_rng(6).uniform(-1, 1, 500))
        assert not nlsd_test(y).reject

    def test_deterministic(self):
        y = TimeSeries(make_rng(4).standard_normal(200))
        assert nlsd_test(y).to_json() == nlsd_test(y).to_json()

    def test_alpha_validation(self):
        y = TimeSeries(make_rng(5).standard_normal(100))
        with pytest.raises(ValueError):
            nlsd_test(y, alpha=1.5)

"""Tests for the series containers, transforms, and preprocessing."""

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlserial.errors import DomainViolation, RankDeficient
from nlserial.series import (TimeSeries, Transform, TransformSet,
                             apply_transforms, apply_transforms_array,
                             default_transforms, detrend_polynomial,
                             read_csv, write_csv)


class TestTimeSeries:
    def test_shapes_and_accessors(self):
        s = TimeSeries([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]],
                       labels=["a", "b"])
        assert s.T == 3 and s.m == 2 and len(s) == 3
        assert np.array_equal(s.column(1), [2.0, 4.0, 6.0])

    def test_univariate_promoted_to_matrix(self):
        s = TimeSeries([1.0, 2.0, 3.0])
        assert s.values.shape == (3, 1)

    def test_immutable(self):
        s = TimeSeries([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            s.values[0, 0] = 99.0

    def test_rejects_short_and_nonfinite(self):
        with pytest.raises(ValueError):
            TimeSeries([1.0])
        with pytest.raises(ValueError):
            TimeSeries([1.0, np.nan])

    def test_label_count_checked(self):
        with pytest.raises(ValueError):
            TimeSeries([[1.0, 2.0], [3.0, 4.0]], labels=["only-one"])


class TestTransform:
    def test_identity_and_power(self):
        u = np.array([-2.0, 0.5, 3.0])
        assert np.array_equal(Transform("identity")(u), u)
        assert np.allclose(Transform("power", p=2)(u), u * u)

    def test_signed_and_abs_power(self):
        u = np.array([-4.0, 9.0])
        assert np.allclose(Transform("signed-power", p=0.5)(u), [-2.0, 3.0])
        assert np.allclose(Transform("abs-power", p=0.5)(u), [2.0, 3.0])

    def test_log_transforms(self):
        u = np.array([-np.e, np.e])
        assert np.allclose(Transform("log-abs")(u), [1.0, 1.0])
        assert np.allclose(Transform("log-square")(u), [2.0, 2.0])

    def test_log_at_zero_raises_domain_violation(self):
        with pytest.raises(DomainViolation):
            Transform("log-abs")(np.array([1.0, 0.0, 2.0]))
        with pytest.raises(DomainViolation):
            Transform("log-square")(np.array([0.0]))

    def test_fractional_power_of_negative_raises(self):
        with pytest.raises(DomainViolation):
            Transform("power", p=0.5)(np.array([-1.0]))

    def test_exp_weighted_power(self):
        u = np.array([-1.0, 2.0])
        got = Transform("exp-weighted-power", p=2, t=0.1)(u)
        assert np.allclose(got, u ** 2 * np.exp(-0.1 * u))
        got = Transform("abs-exp-weighted-power", p=3, t=0.01)(u)
        assert np.allclose(got, np.abs(u) ** 3 * np.exp(-0.01 * np.abs(u)))

    def test_custom_transform(self):
        tr = Transform("custom", func=np.tanh, label="tanh")
        assert np.allclose(tr(np.array([0.0, 1.0])), np.tanh([0.0, 1.0]))

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            Transform("power")               # missing p
        with pytest.raises(ValueError):
            Transform("abs-power", p=-1)
        with pytest.raises(ValueError):
            Transform("exp-weighted-power", p=1.5, t=0.1)
        with pytest.raises(ValueError):
            Transform("exp-weighted-power", p=1, t=2.0)
        with pytest.raises(ValueError):
            Transform("custom")              # missing func
        with pytest.raises(ValueError):
            Transform("no-such-kind")

    @given(st.lists(st.floats(-50, 50), min_size=2, max_size=40))
    @settings(max_examples=50, deadline=None)
    def test_abs_power_nonnegative(self, xs):
        out = Transform("abs-power", p=1.5)(np.array(xs))
        assert np.all(out >= 0.0)


class TestTransformSet:
    def test_default_is_u_and_u_squared(self):
        ts = default_transforms()
        assert ts.K == 2
        assert ts.labels == ["u", "u^2"]

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            TransformSet([Transform("identity", label="x"),
                          Transform("power", p=2, label="x")])

    def test_apply_matches_manual(self):
        s = TimeSeries([-1.0, 2.0, -3.0])
        out = apply_transforms(s, default_transforms())
        v = s.column(0)
        assert np.allclose(out.values, np.column_stack([v, v * v]))
        assert out.labels == ["u", "u^2"]

    def test_array_and_series_paths_agree(self):
        s = TimeSeries([[1.0, -2.0], [0.5, 3.0], [2.0, 1.0]])
        ts = TransformSet([Transform("identity", column=1, label="b"),
                           Transform("power", p=2, column=0, label="a2")])
        via_series = apply_transforms(s, ts).values
        via_array = apply_transforms_array(s.values, ts)
        assert np.allclose(via_series, via_array)

    def test_missing_column_raises(self):
        s = TimeSeries([1.0, 2.0, 3.0])
        ts = TransformSet([Transform("identity", column=3, label="c3")])
        with pytest.raises(ValueError):
            apply_transforms(s, ts)


class TestDetrend:
    def test_exact_removal_of_linear_trend(self):
        t = np.arange(50, dtype=float)
        s = TimeSeries(3.0 + 0.5 * t)
        out = detrend_polynomial(s, 1)
        assert np.allclose(out.values, 0.0, atol=1e-10)

    def test_residuals_orthogonal_to_regressors(self):
        rng = np.random.default_rng(7)
        s = TimeSeries(rng.normal(size=80) + 0.3 * np.arange(80))
        out = detrend_polynomial(s, 2)
        r = out.column(0)
        t = np.arange(80, dtype=float)
        for reg in (np.ones(80), t, t * t):
            assert abs(r @ reg) < 1e-6 * np.linalg.norm(reg) * np.linalg.norm(r) + 1e-8

    def test_too_short_raises(self):
        with pytest.raises(RankDeficient):
            detrend_polynomial(TimeSeries([1.0, 2.0]), 2)

    def test_multivariate_rejected(self):
        with pytest.raises(ValueError):
            detrend_polynomial(TimeSeries([[1.0, 2.0], [3.0, 4.0]]), 1)


class TestCsv:
    def test_round_trip_with_header(self):
        s = TimeSeries([[1.0, 2.5], [3.25, -4.0]], labels=["p", "q"])
        buf = io.StringIO()
        write_csv(s, buf)
        back = read_csv(io.StringIO(buf.getvalue()))
        assert back.labels == ["p", "q"]
        assert np.array_equal(back.values, s.values)

    def test_headerless_auto_sniff(self):
        back = read_csv(io.StringIO("1.0,2.0\n3.0,4.0\n"))
        assert back.labels is None
        assert back.values.shape == (2, 2)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            read_csv(io.StringIO(""))

    def test_file_path_round_trip(self, tmp_path):
        s = TimeSeries([0.5, 1.5, -2.5], labels=["y"])
        path = tmp_path / "series.csv"
        write_csv(s, str(path))
        back = read_csv(str(path))
        assert np.array_equal(back.values, s.values)

import math
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wheatyield.domain import CropRecord, SoilRecord, WeatherDaily
from wheatyield.evalstat import (
    ExperimentConfig,
    incomplete_beta,
    mae,
    normal_cdf,
    paired_t_one_tailed,
    run_experiment,
    student_t_sf,
    temporal_split,
    zscore_panel,
)
from wheatyield.features import build_instance, build_instances, MODE_SOIL_WEATHER
from wheatyield.learners import ModelParams


class TestNormalCdf:
    def test_reference_points(self):
        assert normal_cdf(0.0) == pytest.approx(0.5)
        assert 1 - normal_cdf(2.10) == pytest.approx(0.0179, abs=5e-4)
        assert 1 - normal_cdf(-0.96) == pytest.approx(0.831, abs=5e-4)

    def test_against_scipy(self):
        from scipy import stats

        for z in np.linspace(-8, 8, 81):
            assert normal_cdf(float(z)) == pytest.approx(stats.norm.cdf(z), abs=1e-12)


class TestStudentT:
    def test_reference_table_df9(self):
        # one-sample reference: t = sqrt(10) with 9 degrees of freedom
        assert student_t_sf(math.sqrt(10.0), 9) == pytest.approx(0.00575, abs=1e-4)

    def test_symmetry_at_zero(self):
        for df in (1, 5, 30):
            assert student_t_sf(0.0, df) == pytest.approx(0.5)

    def test_against_scipy_grid(self):
        from scipy import stats

        for df in (1, 2, 5, 9, 30, 100, 263):
            for t in np.linspace(-10, 10, 41):
                assert student_t_sf(float(t), df) == pytest.approx(
                    stats.t.sf(t, df), abs=1e-9
                )

    def test_incomplete_beta_edges(self):
        assert incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_infinite_t(self):
        assert student_t_sf(math.inf, 5) == 0.0
        assert student_t_sf(-math.inf, 5) == 1.0


class TestZscorePanel:
    def test_soil_weather_panel_reproduction(self):
        maes = {"dt": 3.41, "svr": 1.65, "rf": 1.56, "et": 1.54, "lgb": 1.58, "gb": 1.48}
        panel = zscore_panel(maes)
        z, p = panel["dt"]
        assert z == pytest.approx(2.26, abs=0.10)
        assert p == pytest.approx(0.012, abs=0.03)

    def test_soil_panel_reproduction(self):
        maes = {"dt": 2.25, "svr": 1.76, "rf": 1.76, "et": 1.89, "lgb": 1.74, "gb": 1.63}
        panel = zscore_panel(maes)
        z, p = panel["dt"]
        assert z == pytest.approx(2.10, abs=0.10)
        assert p == pytest.approx(0.017, abs=0.03)

    def test_equal_maes_convention(self):
        panel = zscore_panel({"a": 1.5, "b": 1.5, "c": 1.5})
        for z, p in panel.values():
            assert z == 0.0 and p == 0.5

    def test_needs_two_models(self):
        with pytest.raises(ValueError):
            zscore_panel({"only": 1.0})

    @given(
        st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=2, max_size=8),
        st.floats(min_value=-5.0, max_value=5.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_z_sums_to_zero_and_shift_invariance(self, values, shift):
        maes = {f"m{i}": v for i, v in enumerate(values)}
        panel = zscore_panel(maes)
        assert sum(z for z, _ in panel.values()) == pytest.approx(0.0, abs=1e-9)
        # shift invariance is exact in real arithmetic; keep the panel
        # spread away from cancellation territory for the float check
        assume(max(values) - min(values) >= 1e-3 or max(values) == min(values))
        shifted = zscore_panel({k: v + shift for k, v in maes.items()})
        for k in maes:
            assert shifted[k][0] == pytest.approx(panel[k][0], abs=1e-7)


class TestPairedT:
    def test_symmetric_difference(self):
        t, p = paired_t_one_tailed(np.array([2.0, 0.0]), np.array([1.0, 1.0]))
        assert t == 0.0 and p == 0.5

    def test_identical_errors_convention(self):
        e = np.array([0.3, 0.5, 0.7])
        t, p = paired_t_one_tailed(e, e)
        assert t == 0.0 and p == 0.5

    def test_zero_variance_nonzero_mean(self):
        a = np.array([2.0, 2.0, 2.0])
        b = np.array([1.0, 1.0, 1.0])
        t, p = paired_t_one_tailed(a, b)
        assert math.isinf(t) and t > 0 and p == 0.0
        t, p = paired_t_one_tailed(b, a)
        assert math.isinf(t) and t < 0 and p == 1.0

    def test_reference_value_df9(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=10)
        z = (z - z.mean()) / z.std(ddof=1)
        d = 0.5 + 0.5 * z  # mean exactly 0.5, sample std exactly 0.5
        t, p = paired_t_one_tailed(d, np.zeros(10))
        assert t == pytest.approx(math.sqrt(10.0), rel=1e-12)
        assert p == pytest.approx(0.0058, abs=1e-4)

    def test_alternative_direction_flips(self):
        rng = np.random.default_rng(1)
        a = np.abs(rng.normal(size=30)) + 0.5
        b = a - 0.3
        t_fwd, p_fwd = paired_t_one_tailed(a, b, "b_less_than_a")
        t_rev, p_rev = paired_t_one_tailed(a, b, "a_less_than_b")
        assert t_fwd > 0 and p_fwd < 0.05
        assert t_rev == pytest.approx(-t_fwd)
        assert p_rev == pytest.approx(1.0 - p_fwd, abs=1e-9)

    def test_antisymmetry_on_random_pairs(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(2, 40))
            a = rng.normal(size=n)
            b = rng.normal(size=n)
            if np.std(a - b, ddof=1) == 0.0:
                continue
            t_ab, p_ab = paired_t_one_tailed(a, b)
            t_ba, p_ba = paired_t_one_tailed(b, a)
            assert t_ab == pytest.approx(-t_ba, rel=1e-12)
            assert p_ab + p_ba == pytest.approx(1.0, abs=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            paired_t_one_tailed(np.zeros(3), np.zeros(4))

    def test_needs_two_pairs(self):
        with pytest.raises(ValueError):
            paired_t_one_tailed(np.zeros(1), np.zeros(1))


class TestMae:
    def test_perfect_prediction(self):
        assert mae(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0

    def test_hand_value(self):
        assert mae(np.array([10.0, 10.0]), np.array([9.0, 12.0])) == pytest.approx(1.5)

    def test_paired_shuffle_invariance(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=50)
        b = rng.normal(size=50)
        perm = rng.permutation(50)
        assert mae(a, b) == pytest.approx(mae(a[perm], b[perm]), rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mae(np.zeros(3), np.zeros(2))


def _instance(zone, year, yield_value=9.0, wiggle=0.0):
    soil = SoilRecord(zone, year - 1, 25.0 + wiggle, 180.0, 60.0, 6.8,
                      "medium", "low", "moderate", "calc")
    from wheatyield.domain import WeeklyWeather

    weeks = {
        w: WeeklyWeather(w, 8.0 + wiggle, 56.0, 6, 10.0, 40.0, 78.0)
        for w in range(17, 41)
    }
    crop = CropRecord(zone, year, date(year - 1, 10, 1), date(year, 8, 1), yield_value)
    return build_instance(crop, soil, weeks, MODE_SOIL_WEATHER)


class TestTemporalSplit:
    def make(self):
        out = []
        for year in range(2013, 2019):
            for i in range(4):
                out.append(_instance(f"Z{i}", year, 8.0 + i * 0.5, wiggle=i))
        return out

    def test_standard_split(self):
        train, test = temporal_split(self.make(), 2018, 2013, 2017)
        assert {i.year for i in train} == set(range(2013, 2018))
        assert {i.year for i in test} == {2018}
        assert len(train) + len(test) == len(self.make())

    def test_training_range_clamps(self):
        train, _ = temporal_split(self.make(), 2018, 2015, 2016)
        assert {i.year for i in train} == {2015, 2016}

    def test_empty_train_is_error(self):
        data = [i for i in self.make() if i.year == 2018]
        with pytest.raises(ValueError, match="training"):
            temporal_split(data, 2018)

    def test_empty_test_is_error(self):
        data = [i for i in self.make() if i.year < 2018]
        with pytest.raises(ValueError, match="test year"):
            temporal_split(data, 2018)


class TestRunExperiment:
    def small_instances(self):
        rng = np.random.default_rng(7)
        from wheatyield.domain import WeeklyWeather

        out = []
        for year in range(2016, 2019):
            for i in range(30):
                dd = float(rng.uniform(40, 70))
                weeks = {
                    w: WeeklyWeather(w, 8.0, dd, 6, float(rng.uniform(5, 15)), 40.0, 78.0)
                    for w in range(17, 41)
                }
                soil = SoilRecord(f"Z{i}", year - 1, float(rng.uniform(10, 50)), 180.0,
                                  60.0, 6.8, "medium", "low", "moderate", "calc")
                y = 6.0 + 0.05 * dd + float(rng.normal()) * 0.3
                crop = CropRecord(f"Z{i}", year, date(year - 1, 10, 1),
                                  date(year, 8, 1), y)
                out.append(build_instance(crop, soil, weeks, MODE_SOIL_WEATHER))
        return out

    def config(self, **kwargs):
        models = ["decision_tree", "random_forest"]
        params = {
            "decision_tree": ModelParams(max_depth=3, min_samples_leaf=2, seed=5),
            "random_forest": ModelParams(n_estimators=10, max_depth=4,
                                         min_samples_leaf=2, seed=5),
        }
        defaults = dict(models=models, model_params=params, test_year=2018,
                        train_start=2016, train_end=2017, seed=5)
        defaults.update(kwargs)
        return ExperimentConfig(**defaults)

    def test_report_shape_and_bounds(self):
        report = run_experiment(self.small_instances(), self.config())
        assert [r.model for r in report.rows] == ["decision_tree", "random_forest"]
        for r in report.rows:
            assert r.mae_soil >= 0 and r.mae_sw >= 0
            for p in (r.p_soil, r.p_sw, r.p_paired):
                assert 0.0 <= p <= 1.0
        assert report.train_years == (2016, 2017)
        assert report.n_test == 30

    def test_weather_dependent_target_favors_weather_mode(self):
        report = run_experiment(self.small_instances(), self.config())
        rf = report.row("random_forest")
        assert rf.mae_sw < rf.mae_soil
        assert rf.p_paired < 0.05

    def test_deterministic_report(self):
        a = run_experiment(self.small_instances(), self.config())
        b = run_experiment(self.small_instances(), self.config())
        assert a == b

    def test_soil_only_mode_skips_paired(self):
        report = run_experiment(self.small_instances(), self.config(mode="soil_only"))
        row = report.rows[0]
        assert row.mae_soil is not None
        assert row.mae_sw is None and row.p_paired is None

    def test_unknown_mode_is_error(self):
        with pytest.raises(ValueError, match="mode"):
            run_experiment(self.small_instances(), self.config(mode="bogus"))

    def test_empty_model_list_is_error(self):
        with pytest.raises(ValueError, match="models"):
            run_experiment(self.small_instances(), self.config(models=[]))

    def test_mae_equals_mean_abs_error_of_paired_path(self):
        # both code paths share one absolute-error vector, so the report
        # MAE must equal the mean of the errors the t-test consumed
        report = run_experiment(self.small_instances(), self.config())
        instances = self.small_instances()
        _, test = temporal_split(instances, 2018, 2016, 2017)
        from wheatyield.features import build_matrix
        from wheatyield.learners import predict as predict_model
        from wheatyield.learners import train_on_matrix

        train, _ = temporal_split(instances, 2018, 2016, 2017)
        train_dm = build_matrix(train, MODE_SOIL_WEATHER)
        test_dm = build_matrix(test, MODE_SOIL_WEATHER)
        model = train_on_matrix("decision_tree",
                                train_dm, ModelParams(max_depth=3, min_samples_leaf=2, seed=5))
        err = np.abs(test_dm.target - predict_model(model, test_dm))
        assert report.row("decision_tree").mae_sw == pytest.approx(float(err.mean()), abs=1e-12)

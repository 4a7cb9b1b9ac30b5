"""Harness-level tests: weather classing, case plumbing, determinism.

The forecasting fixtures use deliberately tiny networks (3 hidden units,
60 epochs): these tests pin orchestration behavior, not forecast skill.
"""

from dataclasses import replace
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import pvlevels as pv
from pvlevels.core import MeasurementLevel, Weather, utc_datetime
from pvlevels.errors import (
    EmptyDay,
    EmptyList,
    InsufficientHistory,
    MisalignedRange,
)
from pvlevels.pipeline import CASE_LEVELS, CaseStudy
from pvlevels.preprocess import normalize_and_mask

C, F, S = (
    MeasurementLevel.CUSTOMER,
    MeasurementLevel.FEEDER,
    MeasurementLevel.SUBSTATION,
)

TINY_NET = pv.NetworkConfig(
    delay_d=3, hidden_width=3, max_epochs=60, step_size=0.01, early_stop_patience=15
)

# 44 local days (the per-level fitting nets need 360 day hours of
# history); the last six are scripted so every weather class has a
# candidate and the cloudy class has two days with a cloudy predecessor
_SCHEDULE = (
    (Weather.SUNNY,) * 39
    + (Weather.CLOUDY, Weather.CLOUDY, Weather.CLOUDY)
    + (Weather.PARTLY_CLOUDY, Weather.CLOUDY)
)


def local_day(k: int) -> date:
    return date(2023, 3, 1) + timedelta(days=k)


@pytest.fixture(scope="module")
def scfg():
    return pv.SynthConfig(
        days=44,
        n_customers=6,
        n_feeders=2,
        seed=11,
        meter_noise_sd=0.02,
        ar_rho=0.3,
        sigma_sunny=0.03,
        sigma_cloudy=0.05,
        sigma_partly=0.08,
        regime_schedule=_SCHEDULE,
    )


@pytest.fixture(scope="module")
def data(scfg):
    return pv.gen_dataset(scfg, pv.DEFAULT_SITE)


@pytest.fixture(scope="module")
def fast(scfg):
    return pv.PipelineConfig(
        seed=5,
        capacity_fractions=pv.capacity_fractions(scfg),
        max_retries=1,
        narx_committee=1,
        fit_net=TINY_NET,
        narx_net=TINY_NET,
        baseline_net=TINY_NET,
    )


def tiny_fitting(level, fit_r2, fit_mape):
    net = pv.init_network(pv.NetworkConfig(delay_d=2, hidden_width=2))
    return pv.FittingModel(level=level, net=net, fit_r2=fit_r2, fit_mape=fit_mape)


class TestClassifyWeatherDay:
    def test_thresholds_inclusive(self):
        assert pv.classify_weather_day([0.8] * 5) is Weather.SUNNY
        assert pv.classify_weather_day([0.4] * 5) is Weather.CLOUDY
        assert pv.classify_weather_day([0.6] * 5) is Weather.PARTLY_CLOUDY

    def test_mean_not_pointwise(self):
        # individual hours straddle both thresholds; only the mean counts
        values = [0.1, 0.9, 0.95, 0.9, 0.95]
        assert pv.classify_weather_day(values) is Weather.PARTLY_CLOUDY

    def test_custom_thresholds(self):
        assert (
            pv.classify_weather_day([0.5] * 4, sunny_threshold=0.45)
            is Weather.SUNNY
        )
        assert (
            pv.classify_weather_day([0.5] * 4, cloudy_threshold=0.55)
            is Weather.CLOUDY
        )

    def test_empty_day(self):
        with pytest.raises(EmptyDay):
            pv.classify_weather_day([])

    @given(
        st.lists(st.floats(0.0, 1.2), min_size=1, max_size=14),
        st.floats(0.5, 0.9),
        st.floats(0.1, 0.45),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_mean_rule(self, values, hi, lo):
        w = pv.classify_weather_day(values, hi, lo)
        mean = float(np.mean(values))
        if mean >= hi:
            assert w is Weather.SUNNY
        elif mean <= lo:
            assert w is Weather.CLOUDY
        else:
            assert w is Weather.PARTLY_CLOUDY


class TestSelectBestFitting:
    def test_highest_r2_wins(self):
        models = [
            tiny_fitting(C, 0.90, 0.05),
            tiny_fitting(F, 0.95, 0.20),
            tiny_fitting(S, 0.80, 0.01),
        ]
        assert pv.select_best_fitting(models).level is F

    def test_r2_tie_broken_by_mape(self):
        models = [tiny_fitting(C, 0.9, 0.10), tiny_fitting(F, 0.9, 0.05)]
        assert pv.select_best_fitting(models).level is F

    def test_full_tie_broken_by_level_order(self):
        models = [tiny_fitting(S, 0.9, 0.1), tiny_fitting(C, 0.9, 0.1)]
        assert pv.select_best_fitting(models).level is C

    def test_empty(self):
        with pytest.raises(EmptyList):
            pv.select_best_fitting([])


class TestPipelineConfigValidation:
    def test_defaults_valid(self):
        pv.PipelineConfig()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"capacity_fractions": (1.0, 1.0)},
            {"capacity_fractions": (1.0, 0.0, 1.0)},
            {"kappa_max": 0.0},
            {"epsilon_fraction": -0.01},
            {"day_threshold_fraction": 0.0},
            {"day_threshold_fraction": 1.0},
            {"max_retries": 0},
            {"narx_committee": 0},
            {"train_window_days": 1},
            {"sunny_threshold": 0.3, "cloudy_threshold": 0.4},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            pv.PipelineConfig(**kwargs)

    def test_fraction_maps_levels(self):
        cfg = pv.PipelineConfig(capacity_fractions=(0.1, 0.4, 0.9))
        assert cfg.fraction(C) == 0.1
        assert cfg.fraction(F) == 0.4
        assert cfg.fraction(S) == 0.9


class TestLevelErrors:
    def test_met(self):
        e = pv.LevelErrors(e_c=0.3, e_f=0.2, e_s=0.25, e_n=0.1, target_met=True)
        assert e.target_met

    def test_not_met(self):
        e = pv.LevelErrors(e_c=0.3, e_f=0.2, e_s=0.25, e_n=0.2, target_met=False)
        assert not e.target_met  # ties do not count as beating the floor

    def test_inconsistent_flag_rejected(self):
        with pytest.raises(ValueError):
            pv.LevelErrors(e_c=0.3, e_f=0.2, e_s=0.25, e_n=0.1, target_met=False)
        with pytest.raises(ValueError):
            pv.LevelErrors(e_c=0.3, e_f=0.2, e_s=0.25, e_n=0.5, target_met=True)

    def test_missing_e_n_never_met(self):
        e = pv.LevelErrors(e_c=0.3, e_f=0.2, e_s=0.25, e_n=None, target_met=False)
        assert e.e_n is None
        with pytest.raises(ValueError):
            pv.LevelErrors(e_c=0.3, e_f=0.2, e_s=0.25, e_n=None, target_met=True)


def dummy_forecast():
    return pv.HourlyPowerSeries(
        site_id="t", level=C, start=utc_datetime(2023, 4, 1), values=np.zeros(24)
    )


def dummy_report(mape_target):
    actual = np.array([10.0, 20.0, 30.0])
    return pv.report(actual, actual * (1.0 + mape_target))


class TestCaseResultValidation:
    def test_case1_shape(self):
        reports = {lv: dummy_report(0.1 * (i + 1)) for i, lv in enumerate((C, F, S))}
        r = pv.CaseResult(
            case_id=CaseStudy.CASE1,
            weather=Weather.SUNNY,
            levels_used=frozenset((C, F, S)),
            forecast=dummy_forecast(),
            seed=0,
            per_level_reports=reports,
        )
        assert r.mape == pytest.approx(0.1)  # the per-level minimum

    def test_case1_requires_every_level(self):
        with pytest.raises(ValueError):
            pv.CaseResult(
                case_id=CaseStudy.CASE1,
                weather=Weather.SUNNY,
                levels_used=frozenset((C, F, S)),
                forecast=dummy_forecast(),
                seed=0,
                per_level_reports={C: dummy_report(0.1)},
            )

    def test_case1_rejects_single_report(self):
        reports = {lv: dummy_report(0.1) for lv in (C, F, S)}
        with pytest.raises(ValueError):
            pv.CaseResult(
                case_id=CaseStudy.CASE1,
                weather=Weather.SUNNY,
                levels_used=frozenset((C, F, S)),
                forecast=dummy_forecast(),
                seed=0,
                per_level_reports=reports,
                report=dummy_report(0.1),
            )

    def test_case2_shape(self):
        r = pv.CaseResult(
            case_id=CaseStudy.CASE2,
            weather=Weather.CLOUDY,
            levels_used=CASE_LEVELS[CaseStudy.CASE2],
            forecast=dummy_forecast(),
            seed=3,
            report=dummy_report(0.07),
        )
        assert r.mape == pytest.approx(0.07)

    def test_case2_rejects_per_level_reports(self):
        with pytest.raises(ValueError):
            pv.CaseResult(
                case_id=CaseStudy.CASE2,
                weather=Weather.CLOUDY,
                levels_used=CASE_LEVELS[CaseStudy.CASE2],
                forecast=dummy_forecast(),
                seed=3,
                report=dummy_report(0.07),
                per_level_reports={lv: dummy_report(0.1) for lv in (C, F, S)},
            )

    def test_levels_must_match_case(self):
        with pytest.raises(ValueError):
            pv.CaseResult(
                case_id=CaseStudy.CASE4,
                weather=Weather.CLOUDY,
                levels_used=frozenset((C, F)),  # that's case 3's set
                forecast=dummy_forecast(),
                seed=3,
                report=dummy_report(0.07),
            )


class TestCaseLevels:
    def test_sets(self):
        assert CASE_LEVELS[CaseStudy.CASE2] == frozenset((C, F, S))
        assert CASE_LEVELS[CaseStudy.CASE3] == frozenset((C, F))
        assert CASE_LEVELS[CaseStudy.CASE4] == frozenset((C,))
        assert CaseStudy.CASE1 not in CASE_LEVELS


class TestForecastWindowErrors:
    def test_too_little_history(self, data, fast):
        dataset, profile = data
        with pytest.raises(InsufficientHistory):
            pv.forecast_day_ahead(
                dataset, profile, CASE_LEVELS[CaseStudy.CASE4], C,
                local_day(5), fast,
            )

    def test_day_past_dataset_end(self, data, fast):
        dataset, profile = data
        with pytest.raises(InsufficientHistory):
            pv.forecast_day_ahead(
                dataset, profile, CASE_LEVELS[CaseStudy.CASE4], C,
                local_day(43), fast,
            )

    def test_profile_misaligned(self, data, fast):
        dataset, profile = data
        with pytest.raises(MisalignedRange):
            pv.forecast_day_ahead(
                dataset, profile.sliced(0, profile.n - 24),
                CASE_LEVELS[CaseStudy.CASE4], C, local_day(39), fast,
            )

    def test_fractional_tz_rejected(self, data, fast):
        dataset, profile = data
        skewed = replace(dataset, site=replace(dataset.site, tz_offset=-6.5))
        with pytest.raises(MisalignedRange):
            pv.forecast_day_ahead(
                skewed, profile, CASE_LEVELS[CaseStudy.CASE4], C,
                local_day(39), fast,
            )

    def test_unknown_level_set(self, data, fast):
        dataset, profile = data
        with pytest.raises(ValueError):
            pv.forecast_day_ahead(
                dataset, profile, frozenset((F,)), C, local_day(39), fast
            )


@pytest.fixture(scope="module")
def run(data, fast):
    dataset, profile = data
    return pv.forecast_day_ahead(
        dataset, profile, CASE_LEVELS[CaseStudy.CASE2], C, local_day(39), fast
    )


@pytest.fixture(scope="module")
def comparison(data, fast):
    dataset, profile = data
    days = [local_day(k) for k in range(38, 43)]
    return pv.compare_cases(dataset, profile, days, fast)


class TestForecastDayAhead:
    def test_forecast_shape(self, run, data, fast):
        dataset, profile = data
        forecast, _, _ = run
        assert forecast.n == 24
        assert forecast.level is C
        # local midnight at UTC-7 is 07:00 UTC
        assert forecast.start == utc_datetime(2023, 4, 9, 7)

    def test_night_hours_exactly_zero(self, run, data, fast):
        dataset, profile = data
        forecast, _, _ = run
        i0 = dataset.customer.hour_index(forecast.start)
        threshold = fast.day_threshold_fraction * float(profile.power_kw.max())
        mask_day = profile.power_kw[i0 : i0 + 24] >= threshold
        assert np.all(forecast.values[~mask_day] == 0.0)
        assert np.any(forecast.values[mask_day] > 0.0)

    def test_errors_wired_through(self, run):
        _, errors, result = run
        assert result.level_errors is errors
        assert errors.e_n == result.report.mape
        assert errors.target_met == (
            errors.e_n < min(errors.e_c, errors.e_f, errors.e_s)
        )
        assert result.case_id is CaseStudy.CASE2
        assert result.levels_used == CASE_LEVELS[CaseStudy.CASE2]

    def test_deterministic(self, run, data, fast):
        dataset, profile = data
        again, errors, _ = pv.forecast_day_ahead(
            dataset, profile, CASE_LEVELS[CaseStudy.CASE2], C, local_day(39), fast
        )
        assert np.array_equal(run[0].values, again.values)
        assert run[1] == errors

    def test_committee_deterministic(self, data, fast):
        dataset, profile = data
        cfg = replace(fast, narx_committee=2)
        a = pv.forecast_day_ahead(
            dataset, profile, CASE_LEVELS[CaseStudy.CASE4], C, local_day(39), cfg
        )
        b = pv.forecast_day_ahead(
            dataset, profile, CASE_LEVELS[CaseStudy.CASE4], C, local_day(39), cfg
        )
        assert np.array_equal(a[0].values, b[0].values)

    def test_train_window_wider_than_history_is_noop(self, run, data, fast):
        dataset, profile = data
        cfg = replace(fast, train_window_days=1000)
        forecast, _, _ = pv.forecast_day_ahead(
            dataset, profile, CASE_LEVELS[CaseStudy.CASE2], C, local_day(39), cfg
        )
        assert np.array_equal(forecast.values, run[0].values)

    def test_train_window_changes_training(self, run, data, fast):
        dataset, profile = data
        cfg = replace(fast, train_window_days=5)
        forecast, errors, _ = pv.forecast_day_ahead(
            dataset, profile, CASE_LEVELS[CaseStudy.CASE2], C, local_day(39), cfg
        )
        # same baselines (they ignore the window), different net
        assert errors.e_c == run[1].e_c
        assert errors.e_f == run[1].e_f
        assert errors.e_s == run[1].e_s
        assert not np.array_equal(forecast.values, run[0].values)


class TestRunCase:
    def test_case1_structure(self, data, fast):
        dataset, profile = data
        r = pv.run_case(CaseStudy.CASE1, dataset, profile, local_day(39), fast)
        assert r.case_id is CaseStudy.CASE1
        assert set(r.per_level_reports) == {C, F, S}
        assert r.report is None
        assert r.mape == min(rep.mape for rep in r.per_level_reports.values())
        assert r.forecast.level is C  # the target level's baseline forecast
        assert r.weather is Weather.CLOUDY

    def test_case_delegates_to_forecast(self, data, fast):
        dataset, profile = data
        r = pv.run_case(CaseStudy.CASE3, dataset, profile, local_day(39), fast)
        forecast, errors, _ = pv.forecast_day_ahead(
            dataset, profile, CASE_LEVELS[CaseStudy.CASE3], C, local_day(39), fast
        )
        assert np.array_equal(r.forecast.values, forecast.values)
        assert r.level_errors == errors

    def test_shared_cache_does_not_change_results(self, data, fast):
        dataset, profile = data
        cache: dict = {}
        pv.run_case(
            CaseStudy.CASE1, dataset, profile, local_day(39), fast,
            _baseline_cache=cache,
        )
        warm = pv.run_case(
            CaseStudy.CASE2, dataset, profile, local_day(39), fast,
            _baseline_cache=cache,
        )
        cold = pv.run_case(CaseStudy.CASE2, dataset, profile, local_day(39), fast)
        assert np.array_equal(warm.forecast.values, cold.forecast.values)
        assert warm.level_errors == cold.level_errors


class TestCompareCases:
    def day_mean(self, data, fast, day):
        """Mean measured customer index of one local day (test-side copy)."""
        dataset, profile = data
        i0 = dataset.customer.hour_index(
            utc_datetime(day.year, day.month, day.day, 7)
        )
        scaled = profile.scaled(fast.fraction(C))
        threshold = fast.day_threshold_fraction * float(profile.power_kw.max())
        pre = normalize_and_mask(
            dataset.customer.sliced(i0, i0 + 24),
            scaled.sliced(i0, i0 + 24),
            kappa_max=fast.kappa_max,
            day_mask=(profile.power_kw >= threshold)[i0 : i0 + 24],
        )
        return float(pre.index_values.mean())

    def test_all_classes_present(self, comparison):
        assert comparison.missing_classes == ()
        assert [row.weather for row in comparison.rows] == [
            Weather.SUNNY, Weather.CLOUDY, Weather.PARTLY_CLOUDY,
        ]

    def test_sunny_pick_prefers_stable_predecessor(self, comparison):
        # day 38 is the only candidate whose previous day is also sunny
        (sunny,) = [r for r in comparison.rows if r.weather is Weather.SUNNY]
        assert sunny.forecast_day == local_day(38)

    def test_partly_pick_falls_back_when_no_stable_day(self, comparison):
        (partly,) = [
            r for r in comparison.rows if r.weather is Weather.PARTLY_CLOUDY
        ]
        assert partly.forecast_day == local_day(42)

    def test_cloudy_pick_is_steadiest(self, comparison, data, fast):
        (cloudy,) = [r for r in comparison.rows if r.weather is Weather.CLOUDY]
        assert cloudy.forecast_day in (local_day(40), local_day(41))
        deltas = {
            k: abs(
                self.day_mean(data, fast, local_day(k))
                - self.day_mean(data, fast, local_day(k - 1))
            )
            for k in (40, 41)
        }
        expected = min(deltas, key=lambda k: (deltas[k], k))
        assert cloudy.forecast_day == local_day(expected)

    def test_row_consistency(self, comparison):
        for row in comparison.rows:
            assert set(row.results) == set(CaseStudy)
            assert row.case1_min_mape == row.results[CaseStudy.CASE1].mape
            assert row.case2_mape == row.results[CaseStudy.CASE2].mape
            assert row.case3_mape == row.results[CaseStudy.CASE3].mape
            assert row.case4_mape == row.results[CaseStudy.CASE4].mape
            assert row.reduction_vs_case1 == pytest.approx(
                (row.case1_min_mape - row.case2_mape) / row.case1_min_mape
            )
            for cid in (CaseStudy.CASE2, CaseStudy.CASE3, CaseStudy.CASE4):
                assert row.results[cid].level_errors is not None

    def test_single_candidate_reports_missing_classes(self, data, fast):
        dataset, profile = data
        cmp = pv.compare_cases(dataset, profile, [local_day(39)], fast)
        assert len(cmp.rows) == 1
        assert cmp.rows[0].weather is Weather.CLOUDY
        assert cmp.rows[0].forecast_day == local_day(39)  # fallback: no stable day
        assert cmp.missing_classes == (Weather.SUNNY, Weather.PARTLY_CLOUDY)

    def test_row_independent_of_candidate_set(self, comparison, data, fast):
        """The chosen day fixes the computation; other candidates don't leak in."""
        dataset, profile = data
        (cloudy,) = [r for r in comparison.rows if r.weather is Weather.CLOUDY]
        solo = pv.compare_cases(dataset, profile, [cloudy.forecast_day], fast)
        row = solo.rows[0]
        assert row.case1_min_mape == cloudy.case1_min_mape
        assert row.case2_mape == cloudy.case2_mape
        assert row.case3_mape == cloudy.case3_mape
        assert row.case4_mape == cloudy.case4_mape

    def test_empty_days(self, data, fast):
        dataset, profile = data
        with pytest.raises(EmptyList):
            pv.compare_cases(dataset, profile, [], fast)

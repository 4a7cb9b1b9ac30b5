"""Day-ahead forecasting orchestration and the case-study harness.

The forecasting recipe, end to end:

1. preprocess each measurement level's history into clear-sky-index
   series (one shared day mask so all levels line up sample-for-sample),
2. train a NAR fitting model per level in use and keep the one with the
   best in-sample R^2,
3. train a NARX whose target is the configured level's index and whose
   exogenous channels are the levels in use plus the best fitting
   model's open-loop output,
4. run the NARX closed-loop over the forecast day's daylight hours,
   feeding it each level's own NAR closed-loop prediction as the
   exogenous future,
5. denormalize to kW (nights exactly zero) and score MAPE / RMSE / R^2
   against the measured day.

A per-level raw-kW NAR baseline (no preprocessing) provides the three
reference errors; the multi-level forecast is accepted when its error
beats the smallest of them, retraining with fresh seeds a bounded number
of times otherwise and keeping the best attempt.

The case studies wrap this: Case 1 is the raw baseline at every level,
Cases 2/3/4 run the recipe with all three levels, customer+feeder, and
customer only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from datetime import date, datetime, timedelta, timezone

import numpy as np

from .clearsky import ClearSkyProfile
from .core import (
    HOUR,
    HourlyPowerSeries,
    MeasurementLevel,
    MultiLevelDataset,
    Weather,
    derive_seed,
)
from .errors import (
    EmptyDay,
    EmptyList,
    InsufficientHistory,
    MisalignedRange,
)
from .metrics import MetricReport, report
from .narnet import (
    FittingModel,
    NetworkConfig,
    fit_nar,
    init_network,
    make_training_set,
    predict_closed_loop,
    predict_open_loop,
    train,
)
from .preprocess import (
    KAPPA_MAX,
    PreprocessedSeries,
    day_run_lengths,
    normalize_and_mask,
    preprocess,
    postprocess,
)

# substream tags under the pipeline seed
_TAG_FIT = 101
_TAG_NARX = 102
_TAG_BASELINE = 103

#: Minimum history ahead of a forecast day, in days.
MIN_HISTORY_DAYS = 30

_LEVELS = (
    MeasurementLevel.CUSTOMER,
    MeasurementLevel.FEEDER,
    MeasurementLevel.SUBSTATION,
)


class CaseStudy(enum.Enum):
    """The four benchmark configurations."""

    CASE1 = "case1"
    CASE2 = "case2"
    CASE3 = "case3"
    CASE4 = "case4"

    @property
    def label(self) -> str:
        return self.value


#: Measurement levels each NARX case feeds on.
CASE_LEVELS = {
    CaseStudy.CASE2: frozenset(_LEVELS),
    CaseStudy.CASE3: frozenset(
        {MeasurementLevel.CUSTOMER, MeasurementLevel.FEEDER}
    ),
    CaseStudy.CASE4: frozenset({MeasurementLevel.CUSTOMER}),
}


#: Network shape shared by the fitting, forecasting, and baseline nets.
#: Small on purpose: the NARX input grows with every exogenous channel,
#: and a month of daylight hours is only a few hundred training rows.
DEFAULT_NET = NetworkConfig(
    delay_d=6, hidden_width=6, step_size=0.005, early_stop_patience=200
)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a forecasting run needs beyond the data itself.

    capacity_fractions scale the site clear-sky profile down to the
    share actually behind each level's meter (customer, feeder,
    substation order). epsilon_fraction sets the MAPE exclusion
    threshold as a fraction of each level's scaled AC rating.
    day_threshold_fraction decides which hours count as day: clear-sky
    power at least that fraction of the profile peak. Its default is
    deliberately not "just above zero": at dawn and dusk a small
    customer's clear-sky power sinks below the meter's absolute noise,
    and the measured index there is garbage (often an exact 0 after
    offset removal and clamping) that poisons the tapped-delay lags.
    train_window_days, when set, restricts the day-ahead net's
    regression rows to the trailing N days of index history (a rolling
    window); None trains on everything available.
    """

    seed: int = 0
    target_level: MeasurementLevel = MeasurementLevel.CUSTOMER
    capacity_fractions: tuple[float, float, float] = (1.0, 1.0, 1.0)
    kappa_max: float = KAPPA_MAX
    epsilon_fraction: float = 0.05
    day_threshold_fraction: float = 0.10
    max_retries: int = 5
    narx_committee: int = 3
    train_window_days: int | None = None
    sunny_threshold: float = 0.8
    cloudy_threshold: float = 0.4
    fit_net: NetworkConfig = DEFAULT_NET
    narx_net: NetworkConfig = DEFAULT_NET
    baseline_net: NetworkConfig = DEFAULT_NET

    def __post_init__(self) -> None:
        if len(self.capacity_fractions) != 3 or any(
            not f > 0.0 for f in self.capacity_fractions
        ):
            raise ValueError("capacity_fractions must be three positive numbers")
        if not self.kappa_max > 0.0:
            raise ValueError("kappa_max must be > 0")
        if self.epsilon_fraction < 0.0:
            raise ValueError("epsilon_fraction must be >= 0")
        if not 0.0 < self.day_threshold_fraction < 1.0:
            raise ValueError("day_threshold_fraction must be in (0, 1)")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1 (it counts attempts)")
        if self.narx_committee < 1:
            raise ValueError("narx_committee must be >= 1")
        if self.train_window_days is not None and self.train_window_days < 2:
            raise ValueError("train_window_days must be >= 2 when set")
        if not 0.0 < self.cloudy_threshold < self.sunny_threshold < 2.0:
            raise ValueError("need 0 < cloudy_threshold < sunny_threshold")

    def fraction(self, level: MeasurementLevel) -> float:
        return self.capacity_fractions[int(level)]


@dataclass(frozen=True)
class LevelErrors:
    """The per-level baseline errors and the multi-level error beside them.

    target_met states that e_n beat the smallest baseline; consistency
    with the stored numbers is enforced at construction.
    """

    e_c: float
    e_f: float
    e_s: float
    e_n: float | None
    target_met: bool

    def __post_init__(self) -> None:
        expected = self.e_n is not None and self.e_n < min(
            self.e_c, self.e_f, self.e_s
        )
        if self.target_met != expected:
            raise ValueError(
                f"target_met={self.target_met} inconsistent with errors "
                f"({self.e_c}, {self.e_f}, {self.e_s}, {self.e_n})"
            )


@dataclass(frozen=True, eq=False)
class CaseResult:
    """Outcome of one case study on one forecast day.

    Case 1 fills per_level_reports (one per level); cases 2-4 fill
    report and level_errors. forecast is the 24-hour kW series for the
    target level's meter; seed is the network seed of the kept attempt.
    """

    case_id: CaseStudy
    weather: Weather
    levels_used: frozenset[MeasurementLevel]
    forecast: HourlyPowerSeries
    seed: int
    per_level_reports: dict[MeasurementLevel, MetricReport] | None = None
    report: MetricReport | None = None
    level_errors: LevelErrors | None = None

    def __post_init__(self) -> None:
        if self.case_id is CaseStudy.CASE1:
            if self.per_level_reports is None or self.report is not None:
                raise ValueError("case 1 carries per-level reports only")
            if set(self.per_level_reports) != set(_LEVELS):
                raise ValueError("case 1 needs a report for every level")
        else:
            if self.report is None or self.per_level_reports is not None:
                raise ValueError("cases 2-4 carry a single report")
            if self.levels_used != CASE_LEVELS[self.case_id]:
                raise ValueError(
                    f"{self.case_id.label} must use levels "
                    f"{sorted(l.label for l in CASE_LEVELS[self.case_id])}"
                )

    @property
    def mape(self) -> float:
        """The headline MAPE: the single report's, or the per-level minimum."""
        if self.report is not None:
            return self.report.mape
        return min(r.mape for r in self.per_level_reports.values())


def classify_weather_day(
    day_index_values,
    sunny_threshold: float = 0.8,
    cloudy_threshold: float = 0.4,
) -> Weather:
    """Weather class of one day from its mean clear-sky index."""
    values = np.asarray(day_index_values, dtype=np.float64)
    if values.size == 0:
        raise EmptyDay("no day-hour index values to classify")
    mean = float(values.mean())
    if mean >= sunny_threshold:
        return Weather.SUNNY
    if mean <= cloudy_threshold:
        return Weather.CLOUDY
    return Weather.PARTLY_CLOUDY


def select_best_fitting(models: list[FittingModel]) -> FittingModel:
    """Highest fit_r2 wins; ties fall to lower fit_mape, then level order."""
    if not models:
        raise EmptyList("no fitting models to select from")
    return min(models, key=lambda m: (-m.fit_r2, m.fit_mape, int(m.level)))


def _day_window(
    dataset: MultiLevelDataset, forecast_day: date
) -> tuple[int, datetime]:
    """Start index and UTC start instant of the site-local forecast day."""
    tz = dataset.site.tz_offset
    if (tz * 60.0) % 60.0 != 0.0:
        raise MisalignedRange(
            f"tz_offset {tz} does not put local midnight on the hour grid"
        )
    w0 = datetime(
        forecast_day.year, forecast_day.month, forecast_day.day, tzinfo=timezone.utc
    ) - timedelta(hours=tz)
    i0 = dataset.customer.hour_index(w0)
    if i0 < MIN_HISTORY_DAYS * 24:
        raise InsufficientHistory(
            f"{i0} hours of history before {forecast_day}, "
            f"need {MIN_HISTORY_DAYS * 24}"
        )
    if i0 + 24 > dataset.n:
        raise InsufficientHistory(
            f"forecast day {forecast_day} is not fully inside the dataset"
        )
    return i0, w0


def _shared_day_mask(profile: ClearSkyProfile, threshold_kw: float) -> np.ndarray:
    return profile.power_kw >= threshold_kw


def _preprocess_level(
    dataset: MultiLevelDataset,
    profile: ClearSkyProfile,
    level: MeasurementLevel,
    mask: np.ndarray,
    a: int,
    b: int,
    config: PipelineConfig,
) -> PreprocessedSeries:
    scaled = profile.scaled(config.fraction(level)).sliced(a, b)
    return preprocess(
        dataset.series(level).sliced(a, b),
        scaled,
        kappa_max=config.kappa_max,
        day_mask=mask[a:b],
    )


def build_fitting_models(
    dataset: MultiLevelDataset,
    profile: ClearSkyProfile,
    config: PipelineConfig,
    levels: tuple[MeasurementLevel, ...] = _LEVELS,
    day_mask: np.ndarray | None = None,
    _cache: dict | None = None,
) -> list[FittingModel]:
    """One NAR fitting model per requested level, fixed (C, F, S) order.

    All levels share one day mask (computed from the profile unless
    supplied) so their index series stay sample-aligned. ``_cache``
    (keyed by level and history length) skips retraining a fit model
    that an earlier case of the same comparison already built; it never
    changes results because the training is seed-deterministic.
    """
    if dataset.n != profile.n or dataset.start != profile.start:
        raise MisalignedRange("dataset and clear-sky profile are not aligned")
    if day_mask is None:
        threshold = config.day_threshold_fraction * float(profile.power_kw.max())
        mask = _shared_day_mask(profile, threshold)
    else:
        mask = np.asarray(day_mask, dtype=bool)
    models = []
    for level in sorted(levels, key=int):
        key = ("fit", int(level), dataset.n)
        if _cache is not None and key in _cache:
            models.append(_cache[key])
            continue
        pre = _preprocess_level(dataset, profile, level, mask, 0, dataset.n, config)
        cfg = replace(config.fit_net, seed=derive_seed(config.seed, _TAG_FIT, int(level)))
        model = fit_nar(pre, cfg)
        if _cache is not None:
            _cache[key] = model
        models.append(model)
    return models


def _fit_channel(model: FittingModel, own_index: np.ndarray) -> np.ndarray:
    """The fitting model's open-loop output as a full-length input channel.

    The first d hours have no prediction, so the measured values stand in
    for them; everything after is the model's one-step-ahead output.
    """
    d = model.net.config.delay_d
    preds = predict_open_loop(model.net, own_index)
    return np.concatenate([own_index[:d], preds])


def _baseline_report(
    dataset: MultiLevelDataset,
    profile: ClearSkyProfile,
    level: MeasurementLevel,
    i0: int,
    mask_day: np.ndarray,
    config: PipelineConfig,
    cache: dict | None = None,
) -> tuple[MetricReport, HourlyPowerSeries]:
    """Raw-kW NAR baseline for one level on one forecast day.

    No preprocessing: the net sees the measured series scaled by the
    level's full index-domain range (kappa_max times its share of the AC
    rating) purely to keep tanh inputs in a sane band. The architecture
    is deliberately the same as the forecasting nets so the comparison
    isolates what actually differs between the cases: normalization and
    the extra measurement channels, not network capacity.

    ``cache`` (keyed by level and day) only avoids retraining the same
    baseline within one comparison run; it never changes results.
    """
    key = (int(level), i0)
    if cache is not None and key in cache:
        return cache[key]
    site = dataset.site
    scale = config.kappa_max * site.ac_rating_kw * config.fraction(level)
    series = dataset.series(level)
    u = series.values[:i0] / scale
    cfg = replace(
        config.baseline_net,
        n_exo_channels=0,
        seed=derive_seed(config.seed, _TAG_BASELINE, int(level), i0),
    )
    inputs, targets = make_training_set(u, (), cfg.delay_d)
    net = train(init_network(cfg), inputs, targets)
    pred_u = predict_closed_loop(
        net, u[-cfg.delay_d :], horizon=24, clamp=(0.0, 1.0)
    )
    forecast = HourlyPowerSeries(
        site_id=f"baseline-{level.label}",
        level=level,
        start=series.timestamp(i0),
        values=pred_u * scale,
    )
    actual = series.values[i0 : i0 + 24]
    eps = config.epsilon_fraction * site.ac_rating_kw * config.fraction(level)
    rep = report(
        actual[mask_day], forecast.values[mask_day], epsilon_kw=eps, partial=True
    )
    if cache is not None:
        cache[key] = (rep, forecast)
    return rep, forecast


def forecast_day_ahead(
    dataset: MultiLevelDataset,
    profile: ClearSkyProfile,
    levels_used: frozenset[MeasurementLevel] | set[MeasurementLevel],
    target_level: MeasurementLevel,
    forecast_day: date,
    config: PipelineConfig,
    _baseline_cache: dict | None = None,
) -> tuple[HourlyPowerSeries, LevelErrors, CaseResult]:
    """The full multi-level recipe for one day. See the module docstring.

    Each attempt trains narx_committee identically configured nets from
    different derived seeds and takes the pointwise median of their
    closed-loop index paths. Attempts repeat with fresh seeds (up to
    max_retries total) while the error is not below the smallest
    per-level baseline error, and the best attempt is kept either way.
    """
    levels_used = frozenset(levels_used)
    if dataset.n != profile.n or dataset.start != profile.start:
        raise MisalignedRange("dataset and clear-sky profile are not aligned")
    i0, w0 = _day_window(dataset, forecast_day)
    threshold = config.day_threshold_fraction * float(profile.power_kw.max())
    mask = _shared_day_mask(profile, threshold)
    mask_day = mask[i0 : i0 + 24]

    involved = sorted(levels_used | {target_level}, key=int)
    pre = {
        lv: _preprocess_level(dataset, profile, lv, mask, 0, i0, config)
        for lv in involved
    }

    fit_models = build_fitting_models(
        dataset.sliced(0, i0),
        profile.sliced(0, i0),
        config,
        levels=tuple(sorted(levels_used, key=int)),
        day_mask=mask[:i0],
        _cache=_baseline_cache,
    )
    by_level = {m.level: m for m in fit_models}
    best = select_best_fitting(fit_models)

    # channel layout: levels in (C, F, S) order, then the fit channel
    exo_levels = sorted(levels_used, key=int)
    y = pre[target_level].index_values
    exo_hist = [pre[lv].index_values for lv in exo_levels]
    exo_hist.append(_fit_channel(best, pre[best.level].index_values))

    horizon = int(np.count_nonzero(mask_day))
    futures = {}
    for lv in exo_levels:
        fm = by_level[lv]
        d_fit = fm.net.config.delay_d
        futures[lv] = predict_closed_loop(
            fm.net,
            pre[lv].index_values[-d_fit:],
            horizon=horizon,
            clamp=(0.0, config.kappa_max),
        )
    exo_future = [futures[lv] for lv in exo_levels]
    exo_future.append(futures[best.level])

    d = config.narx_net.delay_d
    narx_cfg_base = replace(
        config.narx_net, n_exo_channels=len(exo_hist)
    )
    # per-day stretches only: a sample must never regress across the
    # overnight gap, where the weather regime can silently turn over
    segs = day_run_lengths(mask[:i0])
    if config.train_window_days is not None:
        segs = segs[-config.train_window_days :]
    tail = sum(segs)
    inputs, targets = make_training_set(
        y[-tail:], [ch[-tail:] for ch in exo_hist], d, segments=segs
    )
    y_seed = y[-d:]
    exo_seed = [ch[-d:] for ch in exo_hist]

    day_profile = profile.scaled(config.fraction(target_level)).sliced(i0, i0 + 24)
    actual_day = dataset.series(target_level).values[i0 : i0 + 24]
    eps = (
        config.epsilon_fraction
        * dataset.site.ac_rating_kw
        * config.fraction(target_level)
    )

    reports = {
        lv: _baseline_report(
            dataset, profile, lv, i0, mask_day, config, cache=_baseline_cache
        )[0]
        for lv in _LEVELS
    }
    e_c = reports[MeasurementLevel.CUSTOMER].mape
    e_f = reports[MeasurementLevel.FEEDER].mape
    e_s = reports[MeasurementLevel.SUBSTATION].mape
    floor = min(e_c, e_f, e_s)

    best_attempt: tuple[float, MetricReport, HourlyPowerSeries, int] | None = None
    for attempt in range(config.max_retries):
        seed = derive_seed(config.seed, _TAG_NARX, i0, attempt)
        # a small committee: tanh nets this size occasionally land in a
        # bad minimum whose closed loop wanders, so take the pointwise
        # median of the members' paths; unlike the mean it is unmoved
        # by one deviant member
        member_preds = []
        for member in range(config.narx_committee):
            member_seed = derive_seed(config.seed, _TAG_NARX, i0, attempt, member)
            net = train(
                init_network(replace(narx_cfg_base, seed=member_seed)),
                inputs,
                targets,
            )
            member_preds.append(
                predict_closed_loop(
                    net,
                    y_seed,
                    exo_future,
                    horizon=horizon,
                    exo_seed=exo_seed,
                    clamp=(0.0, config.kappa_max),
                )
            )
        pred_index = np.median(member_preds, axis=0)
        forecast = postprocess(
            pred_index,
            mask_day,
            day_profile,
            site_id=f"forecast-{target_level.label}",
            level=target_level,
        )
        rep = report(
            actual_day[mask_day],
            forecast.values[mask_day],
            epsilon_kw=eps,
            partial=True,
        )
        if best_attempt is None or rep.mape < best_attempt[0]:
            best_attempt = (rep.mape, rep, forecast, seed)
        if rep.mape < floor:
            break

    e_n, final_report, final_forecast, final_seed = best_attempt
    errors = LevelErrors(
        e_c=e_c, e_f=e_f, e_s=e_s, e_n=e_n, target_met=e_n < floor
    )
    case_id = next(
        (cid for cid, lvls in CASE_LEVELS.items() if lvls == levels_used), None
    )
    if case_id is None:
        raise ValueError(
            f"level set {sorted(l.label for l in levels_used)} "
            "matches no case study"
        )
    measured_index = normalize_and_mask(
        dataset.series(target_level).sliced(i0, i0 + 24),
        day_profile,
        kappa_max=config.kappa_max,
        day_mask=mask_day,
    )
    weather = classify_weather_day(
        measured_index.index_values, config.sunny_threshold, config.cloudy_threshold
    )
    result = CaseResult(
        case_id=case_id,
        weather=weather,
        levels_used=levels_used,
        forecast=final_forecast,
        seed=final_seed,
        report=final_report,
        level_errors=errors,
    )
    return final_forecast, errors, result


def run_case(
    case_id: CaseStudy,
    dataset: MultiLevelDataset,
    profile: ClearSkyProfile,
    forecast_day: date,
    config: PipelineConfig,
    _baseline_cache: dict | None = None,
) -> CaseResult:
    """One benchmark case on one day.

    Case 1 runs the raw-kW baseline at every level and reports each;
    cases 2-4 delegate to the multi-level recipe with their level sets.
    """
    if case_id is not CaseStudy.CASE1:
        _, _, result = forecast_day_ahead(
            dataset,
            profile,
            CASE_LEVELS[case_id],
            config.target_level,
            forecast_day,
            config,
            _baseline_cache=_baseline_cache,
        )
        return result
    i0, _ = _day_window(dataset, forecast_day)
    threshold = config.day_threshold_fraction * float(profile.power_kw.max())
    mask = _shared_day_mask(profile, threshold)
    mask_day = mask[i0 : i0 + 24]
    reports = {}
    target_forecast = None
    for level in _LEVELS:
        rep, forecast = _baseline_report(
            dataset, profile, level, i0, mask_day, config, cache=_baseline_cache
        )
        reports[level] = rep
        if level is config.target_level:
            target_forecast = forecast
    day_profile = profile.scaled(config.fraction(config.target_level)).sliced(
        i0, i0 + 24
    )
    measured_index = normalize_and_mask(
        dataset.series(config.target_level).sliced(i0, i0 + 24),
        day_profile,
        kappa_max=config.kappa_max,
        day_mask=mask_day,
    )
    weather = classify_weather_day(
        measured_index.index_values, config.sunny_threshold, config.cloudy_threshold
    )
    return CaseResult(
        case_id=CaseStudy.CASE1,
        weather=weather,
        levels_used=frozenset(_LEVELS),
        forecast=target_forecast,
        seed=config.seed,
        per_level_reports=reports,
    )


@dataclass(frozen=True, eq=False)
class CaseRow:
    """One weather class's line of the case comparison."""

    weather: Weather
    forecast_day: date
    case1_min_mape: float
    case2_mape: float
    case3_mape: float
    case4_mape: float
    results: dict[CaseStudy, CaseResult]

    @property
    def reduction_vs_case1(self) -> float:
        """Fractional error reduction of the three-level case over the baseline."""
        return (self.case1_min_mape - self.case2_mape) / self.case1_min_mape

    @property
    def reduction_vs_case3(self) -> float:
        return (self.case3_mape - self.case2_mape) / self.case3_mape

    @property
    def reduction_vs_case4(self) -> float:
        return (self.case4_mape - self.case2_mape) / self.case4_mape


@dataclass(frozen=True, eq=False)
class CaseComparison:
    """All weather rows plus the classes with no candidate day."""

    rows: tuple[CaseRow, ...]
    missing_classes: tuple[Weather, ...]


def compare_cases(
    dataset: MultiLevelDataset,
    profile: ClearSkyProfile,
    days: list[date],
    config: PipelineConfig,
) -> CaseComparison:
    """Run all four cases on one representative day per weather class.

    Candidates are classified by the target level's measured mean index.
    Within each class, days whose previous day shares the class are
    preferred: a representative cloudy day is one where cloudy weather
    prevails, not the morning it arrives, and a forecast issued the
    evening before only characterizes the condition when yesterday
    already exhibited it. (Hand-picked exemplar days get chosen from a
    stretch of the condition for the same reason.) Among the preferred
    days the steadiest one wins: mean index nearest the previous day's
    mean index, ties to the earliest day. A day the weather happened to
    jump overnight measures that jump, not the condition. Classes with
    no candidate are reported, not raised.
    """
    if not days:
        raise EmptyList("no candidate forecast days")
    threshold = config.day_threshold_fraction * float(profile.power_kw.max())
    mask = _shared_day_mask(profile, threshold)
    day_profile_full = profile.scaled(config.fraction(config.target_level))

    def day_weather(a: int, b: int) -> tuple[Weather, float]:
        measured = normalize_and_mask(
            dataset.series(config.target_level).sliced(a, b),
            day_profile_full.sliced(a, b),
            kappa_max=config.kappa_max,
            day_mask=mask[a:b],
        )
        mean_index = float(measured.index_values.mean())
        weather = classify_weather_day(
            measured.index_values, config.sunny_threshold, config.cloudy_threshold
        )
        return weather, mean_index

    candidates = []
    for day in days:
        i0, _ = _day_window(dataset, day)
        weather, mean_index = day_weather(i0, i0 + 24)
        prev_weather, prev_mean = day_weather(i0 - 24, i0)
        candidates.append((day, mean_index, weather, prev_weather, prev_mean))

    rows = []
    missing = []
    for weather in Weather:
        matching = [c for c in candidates if c[2] is weather]
        if not matching:
            missing.append(weather)
            continue
        stable = [c for c in matching if c[3] is weather]
        pool = stable if stable else matching
        chosen = min(pool, key=lambda c: (abs(c[1] - c[4]), c[0]))[0]
        cache: dict = {}
        results = {
            cid: run_case(cid, dataset, profile, chosen, config, _baseline_cache=cache)
            for cid in CaseStudy
        }
        rows.append(
            CaseRow(
                weather=weather,
                forecast_day=chosen,
                case1_min_mape=results[CaseStudy.CASE1].mape,
                case2_mape=results[CaseStudy.CASE2].mape,
                case3_mape=results[CaseStudy.CASE3].mape,
                case4_mape=results[CaseStudy.CASE4].mape,
                results=results,
            )
        )
    return CaseComparison(rows=tuple(rows), missing_classes=tuple(missing))

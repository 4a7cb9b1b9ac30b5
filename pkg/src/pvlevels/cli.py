"""Command-line surface: data files in, forecasts and metric tables out.

Subcommands:

    clearsky    simulated clear-sky profile as CSV
    synth       generate a synthetic multi-level dataset
    preprocess  clear-sky-index series for each level
    fit         per-level fitting-model quality table
    forecast    one day, one or all case studies
    cases       weather-by-case MAPE comparison table
    plotdata    actual-vs-forecast series for one day

Global flags: --config PATH (key = value file, all keys optional),
--seed U64 (overrides the configured seed), --out DIR (output directory;
single-file commands print to stdout without it), --trim-to-overlap
(clip loaded series to their common time range instead of failing).

Exit codes: 0 success, 1 runtime/data error, 2 usage or configuration
error. Diagnostics go to stderr; data goes to files or stdout only.

All CSV output is deterministic byte-for-byte for a given (config,
seed): fixed header order, fixed row order, floats at 17 significant
digits (lossless for doubles). Human-facing tables render MAPE as
percent with 2 decimals and always have a full-precision `_full` mirror.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .clearsky import ClearSkyProfile, clearsky_profile
from .core import (
    HOUR,
    HourlyPowerSeries,
    MeasurementLevel,
    MultiLevelDataset,
    SiteConfig,
    align_levels,
    utc_datetime,
)
from .errors import (
    DuplicateRow,
    GapError,
    MisalignedRange,
    ParseError,
    PvlevelsError,
)
from .narnet import NetworkConfig
from .pipeline import (
    CaseStudy,
    PipelineConfig,
    build_fitting_models,
    compare_cases,
    run_case,
)
from .preprocess import preprocess
from .synth import DEFAULT_SITE, SynthConfig, capacity_fractions, gen_dataset

CSV_HEADER = "timestamp_utc,level,series_id,power_kw"

_LEVELS = (
    MeasurementLevel.CUSTOMER,
    MeasurementLevel.FEEDER,
    MeasurementLevel.SUBSTATION,
)


class ConfigError(PvlevelsError):
    """Bad key, value, or missing required setting in the run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Everything the CLI can be told, resolved to concrete configs."""

    site: SiteConfig
    pipeline: PipelineConfig
    synth: SynthConfig
    input_path: str | None
    out_dir: str | None


_CONFIG_DEFAULTS = {
    "site.latitude": "39.74",
    "site.longitude": "-105.0",
    "site.tz_offset": "-7",
    "site.dc_rating_kw": "100",
    "site.ac_rating_kw": "100",
    "site.system_efficiency": "0.96",
    "net.delay_d": "6",
    "net.hidden_width": "6",
    "net.max_epochs": "2000",
    "net.step_size": "0.005",
    "net.patience": "200",
    "net.delta": "1e-9",
    "baseline.delay_d": "",
    "baseline.max_epochs": "",
    "pipeline.target_level": "customer",
    "pipeline.kappa_max": "1.5",
    "pipeline.epsilon_fraction": "0.05",
    "pipeline.day_threshold_fraction": "0.1",
    "pipeline.max_retries": "5",
    "pipeline.sunny_threshold": "0.8",
    "pipeline.cloudy_threshold": "0.4",
    "pipeline.fractions": "",
    "synth.n_customers": "24",
    "synth.n_feeders": "3",
    "synth.days": "90",
    "synth.ar_rho": "0.3",
    "synth.loss_fraction": "0.04",
    "synth.meter_noise_sd": "0.1",
    "synth.shared_fraction": "0.0",
    "synth.drift_sd": "0.0",
    "synth.drift_rho": "0.995",
    "synth.stay_prob": "0.7",
    "synth.start": "2023-03-01",
    "paths.input": "",
    "paths.out": "",
    "seed": "0",
}


def parse_config_text(text: str, where: str = "<config>") -> dict[str, str]:
    """`key = value` lines; '#' comments; every key optional."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{where}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_DEFAULTS:
            raise ConfigError(f"{where}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{where}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _parse_date(text: str, what: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise ConfigError(f"{what} must be YYYY-MM-DD, got {text!r}") from exc


def build_run_config(
    file_values: dict[str, str],
    seed_override: int | None = None,
    out_override: str | None = None,
) -> RunConfig:
    raw = dict(_CONFIG_DEFAULTS)
    raw.update(file_values)

    def fval(key: str) -> float:
        try:
            return float(raw[key])
        except ValueError as exc:
            raise ConfigError(f"{key} must be a number, got {raw[key]!r}") from exc

    def ival(key: str) -> int:
        try:
            return int(raw[key])
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {raw[key]!r}") from exc

    seed = ival("seed") if seed_override is None else seed_override
    try:
        site = SiteConfig(
            latitude=fval("site.latitude"),
            longitude=fval("site.longitude"),
            tz_offset=fval("site.tz_offset"),
            dc_rating_kw=fval("site.dc_rating_kw"),
            ac_rating_kw=fval("site.ac_rating_kw"),
            system_efficiency=fval("site.system_efficiency"),
        )
        net = NetworkConfig(
            delay_d=ival("net.delay_d"),
            hidden_width=ival("net.hidden_width"),
            max_epochs=ival("net.max_epochs"),
            step_size=fval("net.step_size"),
            early_stop_patience=ival("net.patience"),
            early_stop_delta=fval("net.delta"),
        )
        baseline = replace(
            net,
            delay_d=(
                ival("baseline.delay_d") if raw["baseline.delay_d"] else net.delay_d
            ),
            max_epochs=(
                ival("baseline.max_epochs") if raw["baseline.max_epochs"] else net.max_epochs
            ),
        )
        start = _parse_date(raw["synth.start"], "synth.start")
        synth = SynthConfig(
            n_customers=ival("synth.n_customers"),
            n_feeders=ival("synth.n_feeders"),
            days=ival("synth.days"),
            ar_rho=fval("synth.ar_rho"),
            loss_fraction=fval("synth.loss_fraction"),
            meter_noise_sd=fval("synth.meter_noise_sd"),
            shared_fraction=fval("synth.shared_fraction"),
            shared_drift_sd=fval("synth.drift_sd"),
            shared_drift_rho=fval("synth.drift_rho"),
            regime_stay_prob=fval("synth.stay_prob"),
            seed=seed,
            start_utc=utc_datetime(start.year, start.month, start.day),
        )
        if raw["pipeline.fractions"]:
            parts = [p.strip() for p in raw["pipeline.fractions"].split(",")]
            if len(parts) != 3:
                raise ConfigError(
                    "pipeline.fractions must be three comma-separated numbers"
                )
            fractions = tuple(float(p) for p in parts)
        else:
            fractions = (1.0, 1.0, 1.0)
        pipeline = PipelineConfig(
            seed=seed,
            target_level=MeasurementLevel.from_label(raw["pipeline.target_level"]),
            capacity_fractions=fractions,
            kappa_max=fval("pipeline.kappa_max"),
            epsilon_fraction=fval("pipeline.epsilon_fraction"),
            day_threshold_fraction=fval("pipeline.day_threshold_fraction"),
            max_retries=ival("pipeline.max_retries"),
            sunny_threshold=fval("pipeline.sunny_threshold"),
            cloudy_threshold=fval("pipeline.cloudy_threshold"),
            fit_net=net,
            narx_net=net,
            baseline_net=baseline,
        )
    except (ValueError, ConfigError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        site=site,
        pipeline=pipeline,
        synth=synth,
        input_path=raw["paths.input"] or None,
        out_dir=out_override or raw["paths.out"] or None,
    )


# ---------------------------------------------------------------- CSV I/O

_TS_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


def _format_ts(ts: datetime) -> str:
    return ts.strftime(_TS_FORMAT)


def _parse_ts(text: str, lineno: int) -> datetime:
    try:
        ts = datetime.strptime(text, _TS_FORMAT).replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise ParseError(f"line {lineno}: bad timestamp {text!r}") from exc
    if ts.minute or ts.second:
        raise ParseError(f"line {lineno}: timestamp {text!r} is not hour-aligned")
    return ts


def load_csv(path) -> list[HourlyPowerSeries]:
    """Read the flat measurement CSV into per-(level, series_id) series.

    Rows may arrive in any order; each group must form a gap-free hourly
    range with no duplicate timestamps.
    """
    try:
        text = Path(path).read_text(encoding="ascii")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ParseError(f"line 1: expected header {CSV_HEADER!r}")
    groups: dict[tuple[MeasurementLevel, str], dict[datetime, float]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        ts = _parse_ts(parts[0], lineno)
        try:
            level = MeasurementLevel.from_label(parts[1])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        series_id = parts[2]
        if not series_id:
            raise ParseError(f"line {lineno}: empty series_id")
        try:
            power = float(parts[3])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad power value {parts[3]!r}") from exc
        rows = groups.setdefault((level, series_id), {})
        if ts in rows:
            raise DuplicateRow(
                f"line {lineno}: duplicate ({parts[0]}, {level.label}, {series_id})"
            )
        rows[ts] = power
    if not groups:
        raise ParseError("no data rows")
    out = []
    for (level, series_id) in sorted(groups, key=lambda k: (int(k[0]), k[1])):
        rows = groups[(level, series_id)]
        stamps = sorted(rows)
        expected = stamps[0]
        for ts in stamps:
            if ts != expected:
                missing = _format_ts(expected)
                raise GapError(
                    f"series ({level.label}, {series_id}) is missing hour {missing}"
                )
            expected = expected + HOUR
        out.append(
            HourlyPowerSeries(
                site_id=series_id,
                level=level,
                start=stamps[0],
                values=np.array([rows[ts] for ts in stamps]),
            )
        )
    return out


def write_csv(path, series_list: list[HourlyPowerSeries]) -> None:
    """Write series to the flat CSV schema, deterministically ordered."""
    lines = [CSV_HEADER]
    for s in sorted(series_list, key=lambda s: (int(s.level), s.site_id)):
        for i in range(s.n):
            lines.append(
                f"{_format_ts(s.timestamp(i))},{s.level.label},"
                f"{s.site_id},{s.values[i]:.17g}"
            )
    _write_text(path, "\n".join(lines) + "\n")


def trim_to_overlap(series_list: list[HourlyPowerSeries]) -> list[HourlyPowerSeries]:
    """Clip every series to the time range they all share."""
    start = max(s.start for s in series_list)
    end = min(s.end for s in series_list)
    if start >= end:
        raise MisalignedRange("series have no overlapping hours")
    return [s.sliced(s.hour_index(start), s.hour_index(end)) for s in series_list]


def _dataset_from_csv(run: RunConfig, trim: bool) -> MultiLevelDataset:
    if run.input_path is None:
        raise ConfigError("paths.input is required for this command")
    series = load_csv(run.input_path)
    if trim:
        series = trim_to_overlap(series)
    per_level: dict[MeasurementLevel, HourlyPowerSeries] = {}
    for s in series:
        if s.level in per_level:
            raise ParseError(
                f"need exactly one series per level; several at {s.level.label}"
            )
        per_level[s.level] = s
    for level in _LEVELS:
        if level not in per_level:
            raise ParseError(f"no series at the {level.label} level")
    return align_levels(
        per_level[MeasurementLevel.CUSTOMER],
        per_level[MeasurementLevel.FEEDER],
        per_level[MeasurementLevel.SUBSTATION],
        run.site,
    )


def _profile_for(run: RunConfig, dataset: MultiLevelDataset) -> ClearSkyProfile:
    return clearsky_profile(run.site, dataset.start, dataset.n)


# ------------------------------------------------------------- reporting


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(text)


def _pct(fraction: float) -> str:
    return f"{100.0 * fraction:.2f}"


def _g(x: float | None) -> str:
    return "" if x is None else f"{x:.17g}"


def _out_dir(run: RunConfig) -> Path:
    if run.out_dir is None:
        raise ConfigError("--out (or paths.out) is required for this command")
    path = Path(run.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(run: RunConfig, name: str, text: str) -> None:
    """Write a file under --out, or print it when no directory is set."""
    if run.out_dir is None:
        sys.stdout.write(text)
    else:
        _write_text(_out_dir(run) / name, text)


def _series_csv(profile_rows: list[tuple[str, ...]], header: str) -> str:
    return "\n".join([header, *(",".join(row) for row in profile_rows)]) + "\n"


def _day_series_file(result, dataset: MultiLevelDataset, target: MeasurementLevel) -> str:
    forecast = result.forecast
    i0 = dataset.customer.hour_index(forecast.start)
    actual = dataset.series(target).values[i0 : i0 + forecast.n]
    rows = [
        (
            _format_ts(forecast.timestamp(i)),
            f"{actual[i]:.17g}",
            f"{forecast.values[i]:.17g}",
        )
        for i in range(forecast.n)
    ]
    return _series_csv(rows, "timestamp_utc,actual_kw,forecast_kw")


# ------------------------------------------------------------- commands


def cmd_clearsky(run: RunConfig, args) -> int:
    start = _parse_date(args.start, "--start") if args.start else None
    if start is not None:
        begin = utc_datetime(start.year, start.month, start.day)
    else:
        begin = run.synth.start_utc
    days = args.days if args.days is not None else run.synth.days
    if days < 1:
        raise ConfigError("--days must be >= 1")
    profile = clearsky_profile(run.site, begin, days * 24)
    rows = [
        (
            _format_ts(profile.timestamp(i)),
            f"{profile.power_kw[i]:.17g}",
            f"{profile.ghi_wm2[i]:.17g}",
        )
        for i in range(profile.n)
    ]
    _emit(run, "clearsky.csv", _series_csv(rows, "timestamp_utc,power_kw,ghi_wm2"))
    return 0


def cmd_synth(run: RunConfig, args) -> int:
    dataset, _profile = gen_dataset(run.synth, run.site)
    out = _out_dir(run)
    write_csv(
        out / "dataset.csv", [dataset.customer, dataset.feeder, dataset.substation]
    )
    fr = capacity_fractions(run.synth)
    s = run.site
    config_lines = [
        "# generated alongside dataset.csv; pass via --config to later commands",
        f"site.latitude = {s.latitude:.17g}",
        f"site.longitude = {s.longitude:.17g}",
        f"site.tz_offset = {s.tz_offset:.17g}",
        f"site.dc_rating_kw = {s.dc_rating_kw:.17g}",
        f"site.ac_rating_kw = {s.ac_rating_kw:.17g}",
        f"site.system_efficiency = {s.system_efficiency:.17g}",
        f"pipeline.fractions = {fr[0]:.17g}, {fr[1]:.17g}, {fr[2]:.17g}",
        f"seed = {run.synth.seed}",
        # bare filename: resolved against this file's directory at load time,
        # so the whole output directory is relocatable and byte-reproducible
        "paths.input = dataset.csv",
    ]
    _write_text(out / "dataset_config.txt", "\n".join(config_lines) + "\n")
    return 0


def cmd_preprocess(run: RunConfig, args) -> int:
    dataset = _dataset_from_csv(run, args.trim_to_overlap)
    profile = _profile_for(run, dataset)
    cfg = run.pipeline
    threshold = 0.01 * float(profile.power_kw.max())
    mask = profile.power_kw >= threshold
    index_rows = []
    summary_rows = []
    for level in _LEVELS:
        scaled = profile.scaled(cfg.fraction(level))
        pre = preprocess(
            dataset.series(level), scaled, kappa_max=cfg.kappa_max, day_mask=mask
        )
        hours = pre.day_hour_indices()
        for k, i in enumerate(hours):
            index_rows.append(
                (
                    _format_ts(dataset.start + int(i) * HOUR),
                    level.label,
                    f"{pre.index_values[k]:.17g}",
                )
            )
        summary_rows.append(
            (
                level.label,
                f"{pre.offset_kw:.17g}",
                str(pre.clip_count),
                str(pre.n_day),
            )
        )
    out = _out_dir(run)
    _write_text(
        out / "preprocessed.csv",
        _series_csv(index_rows, "timestamp_utc,level,index"),
    )
    _write_text(
        out / "preprocess_summary.csv",
        _series_csv(summary_rows, "level,offset_kw,clip_count,n_day_hours"),
    )
    return 0


def cmd_fit(run: RunConfig, args) -> int:
    dataset = _dataset_from_csv(run, args.trim_to_overlap)
    profile = _profile_for(run, dataset)
    models = build_fitting_models(dataset, profile, run.pipeline)
    human = [
        (m.level.label, _pct(m.fit_mape), f"{m.fit_r2:.4f}") for m in models
    ]
    full = [
        (m.level.label, f"{m.fit_mape:.17g}", f"{m.fit_r2:.17g}") for m in models
    ]
    out = _out_dir(run)
    _write_text(out / "fit.csv", _series_csv(human, "level,mape_pct,r_squared"))
    _write_text(out / "fit_full.csv", _series_csv(full, "level,mape,r_squared"))
    return 0


def _case_ids(case_arg: str | None) -> list[CaseStudy]:
    if case_arg is None:
        return list(CaseStudy)
    for cid in CaseStudy:
        if cid.label == case_arg:
            return [cid]
    raise ConfigError(f"unknown case {case_arg!r}; use case1..case4")


def cmd_forecast(run: RunConfig, args) -> int:
    dataset = _dataset_from_csv(run, args.trim_to_overlap)
    profile = _profile_for(run, dataset)
    day = _parse_date(args.day, "--day")
    out = _out_dir(run)
    human = []
    full = []
    for cid in _case_ids(args.case):
        result = run_case(cid, dataset, profile, day, run.pipeline)
        forecast = result.forecast
        rows = [
            (_format_ts(forecast.timestamp(i)), f"{forecast.values[i]:.17g}")
            for i in range(forecast.n)
        ]
        _write_text(
            out / f"forecast_{cid.label}.csv",
            _series_csv(rows, "timestamp_utc,forecast_kw"),
        )
        rep = result.report
        if rep is None:
            rep = result.per_level_reports[run.pipeline.target_level]
        met = (
            ""
            if result.level_errors is None
            else str(int(result.level_errors.target_met))
        )
        human.append(
            (
                cid.label,
                result.weather.label,
                _pct(rep.mape),
                f"{rep.rmse:.2f}",
                "" if rep.r_squared is None else f"{rep.r_squared:.4f}",
                met,
            )
        )
        full.append(
            (
                cid.label,
                result.weather.label,
                _g(rep.mape),
                _g(rep.rmse),
                _g(rep.r_squared),
                met,
            )
        )
    header = "case,weather,mape_pct,rmse_kw,r_squared,target_met"
    _write_text(out / "forecast_summary.csv", _series_csv(human, header))
    _write_text(
        out / "forecast_summary_full.csv",
        _series_csv(full, "case,weather,mape,rmse_kw,r_squared,target_met"),
    )
    return 0


def cmd_cases(run: RunConfig, args) -> int:
    dataset = _dataset_from_csv(run, args.trim_to_overlap)
    profile = _profile_for(run, dataset)
    # A forecast day is valid when its local-midnight window [w0, w0 + 24h)
    # starts with at least 30 days of history and ends inside the dataset.
    first_local = (dataset.start + timedelta(hours=run.site.tz_offset)).date()
    valid = []
    for k in range(dataset.n // 24 + 2):
        day = first_local + timedelta(days=k)
        w0 = utc_datetime(day.year, day.month, day.day) - timedelta(
            hours=run.site.tz_offset
        )
        i0, rem = divmod(int((w0 - dataset.start).total_seconds()), 3600)
        if rem == 0 and 30 * 24 <= i0 and i0 + 24 <= dataset.n:
            valid.append(day)
    if args.days is not None:
        valid = valid[-args.days :]
    if not valid:
        raise MisalignedRange("no forecast day has 30 days of history")
    comparison = compare_cases(dataset, profile, valid, run.pipeline)
    out = _out_dir(run)
    human = [
        (
            row.weather.label,
            _pct(row.case1_min_mape),
            _pct(row.case2_mape),
            _pct(row.case3_mape),
            _pct(row.case4_mape),
            _pct(row.reduction_vs_case1),
        )
        for row in comparison.rows
    ]
    full = [
        (
            row.weather.label,
            row.forecast_day.isoformat(),
            _g(row.case1_min_mape),
            _g(row.case2_mape),
            _g(row.case3_mape),
            _g(row.case4_mape),
            _g(row.reduction_vs_case1),
            _g(row.reduction_vs_case3),
            _g(row.reduction_vs_case4),
            str(int(row.results[CaseStudy.CASE2].level_errors.target_met)),
        )
        for row in comparison.rows
    ]
    _write_text(
        out / "cases.csv",
        _series_csv(
            human,
            "weather,case1_min_mape,case2_mape,case3_mape,case4_mape,"
            "reduction_vs_case1_pct",
        ),
    )
    _write_text(
        out / "cases_full.csv",
        _series_csv(
            full,
            "weather,forecast_day,case1_min_mape,case2_mape,case3_mape,case4_mape,"
            "reduction_vs_case1,reduction_vs_case3,reduction_vs_case4,"
            "case2_target_met",
        ),
    )
    for row in comparison.rows:
        for cid, result in row.results.items():
            _write_text(
                out / f"{cid.label}_{row.weather.label}.csv",
                _day_series_file(result, dataset, run.pipeline.target_level),
            )
    for weather in comparison.missing_classes:
        print(f"note: no candidate day classified {weather.label}", file=sys.stderr)
    if not comparison.rows:
        print("error: no weather class had a candidate day", file=sys.stderr)
        return 1
    return 0


def cmd_plotdata(run: RunConfig, args) -> int:
    dataset = _dataset_from_csv(run, args.trim_to_overlap)
    profile = _profile_for(run, dataset)
    day = _parse_date(args.day, "--day")
    (cid,) = _case_ids(args.case or "case2")
    result = run_case(cid, dataset, profile, day, run.pipeline)
    text = _day_series_file(result, dataset, run.pipeline.target_level)
    _emit(run, f"plot_{cid.label}_{day.isoformat()}.csv", text)
    return 0


# ------------------------------------------------------------- dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pvlevels",
        description="Day-ahead PV forecasting from multi-level measurements.",
    )
    parser.add_argument("--config", metavar="PATH", help="key = value settings file")
    parser.add_argument("--seed", type=int, metavar="U64", help="override the seed")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument(
        "--trim-to-overlap",
        action="store_true",
        help="clip input series to their common time range",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clearsky", help="emit the simulated clear-sky profile")
    p.add_argument("--start", metavar="YYYY-MM-DD")
    p.add_argument("--days", type=int)
    p.set_defaults(func=cmd_clearsky)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="emit clear-sky-index series")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("fit", help="per-level fitting-model quality")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("forecast", help="forecast one day")
    p.add_argument("--day", required=True, metavar="YYYY-MM-DD")
    p.add_argument("--case", metavar="caseN", help="one of case1..case4 (default all)")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("cases", help="weather-by-case comparison table")
    p.add_argument(
        "--days", type=int, metavar="K", help="consider only the last K valid days"
    )
    p.set_defaults(func=cmd_cases)

    p = sub.add_parser("plotdata", help="actual-vs-forecast series for one day")
    p.add_argument("--day", required=True, metavar="YYYY-MM-DD")
    p.add_argument("--case", metavar="caseN", help="one of case1..case4 (default case2)")
    p.set_defaults(func=cmd_plotdata)
    return parser


def cmd_dispatch(argv: list[str]) -> int:
    """Parse and run; never raises, returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        file_values: dict[str, str] = {}
        if args.config is not None:
            try:
                text = Path(args.config).read_text(encoding="ascii")
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
            file_values = parse_config_text(text, where=args.config)
            rel = file_values.get("paths.input", "")
            if rel and not Path(rel).is_absolute():
                file_values["paths.input"] = str(
                    Path(args.config).resolve().parent / rel
                )
        run = build_run_config(
            file_values, seed_override=args.seed, out_override=args.out
        )
        return args.func(run, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PvlevelsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cmd_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

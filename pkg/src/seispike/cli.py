"""Command-line frontend: analyze, evaluate, synth, rates, report.

Configuration comes from an INI file (sections [analysis], [surrogate],
[evaluation]) mirrored one-to-one by flags; flags win.  The default
config path can be set through the SEISPIKE_CONFIG environment variable.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .catalog import (
    Catalog,
    CatalogError,
    MicroEvent,
    MicroLog,
    filter_micro_events,
    group_events,
    parse_catalog,
    parse_micro_events,
    serialize_micro_events,
    to_spike_train,
)
from .evaluation import (
    DEFAULT_HORIZON_HOURS,
    confusion,
    match_warnings,
)
from .measures import CSParams, VPParams
from .pipeline import Anomaly, DetectionResult, detect
from .rates import estimate_rate, optimize_bandwidth
from .spiketrain import SpikeTrain
from .surrogate import SurrogateParams
from .synth import Episode, gen_coupled_pair
from .timebase import DAY, HOUR, format_iso, parse_iso_utc, to_seconds

CONFIG_ENV = "SEISPIKE_CONFIG"


class ConfigError(Exception):
    """Bad configuration: unknown key, unparsable value, invalid combo."""


class DataError(Exception):
    """Bad input data: missing file, malformed row, schema mismatch."""


_CONFIG_SCHEMA = {
    "analysis": {
        "measure": str,
        "q_per_day": float,
        "tau_hours": float,
        "window_days": float,
        "step_hours": float,
        "max_magnitude": float,
        "start": str,
        "end": str,
    },
    "surrogate": {
        "count": int,
        "dither_window_days": str,  # "auto" or a number
        "seed": int,
        "confidence": float,
        "cc_bin_days": float,
        "cc_max_lag_days": float,
    },
    "evaluation": {
        "horizon_hours": float,
        "folds": int,
    },
}

_DEFAULTS = {
    "measure": "vp",
    "q_per_day": 100.0,
    "tau_hours": 2.5,
    "window_days": 2.0,
    "step_hours": 1.0,
    "max_magnitude": 2.0,
    "start": "",
    "end": "",
    "count": 1000,
    "dither_window_days": "auto",
    "seed": 0,
    "confidence": 0.9,
    "cc_bin_days": 2.0,
    "cc_max_lag_days": 30.0,
    "horizon_hours": DEFAULT_HORIZON_HOURS,
    "folds": 5,
}


def load_config(path: Optional[str]) -> dict:
    """Defaults, overlaid with the INI file when one is given."""
    merged = dict(_DEFAULTS)
    if not path:
        path = os.environ.get(CONFIG_ENV) or None
    if not path:
        return merged
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    for section in parser.sections():
        if section not in _CONFIG_SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _CONFIG_SCHEMA[section]:
                raise ConfigError(f"unknown config key [{section}] {key}")
            caster = _CONFIG_SCHEMA[section][key]
            try:
                merged[key] = caster(raw)
            except ValueError:
                raise ConfigError(
                    f"bad value for [{section}] {key}: {raw!r}") from None
    return merged


def _apply_flag_overrides(config: dict, args: argparse.Namespace) -> dict:
    mapping = {
        "measure": "measure",
        "q_per_day": "q_per_day",
        "tau_hours": "tau_hours",
        "window_days": "window_days",
        "step_hours": "step_hours",
        "max_magnitude": "max_magnitude",
        "start": "start",
        "end": "end",
        "surrogates": "count",
        "dither_window": "dither_window_days",
        "seed": "seed",
        "confidence": "confidence",
        "cc_bin_days": "cc_bin_days",
        "cc_max_lag_days": "cc_max_lag_days",
        "horizon_hours": "horizon_hours",
        "folds": "folds",
    }
    out = dict(config)
    for flag, key in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            out[key] = value
    return out


def _validated_params(config: dict):
    measure = config["measure"]
    if measure not in ("vp", "cs"):
        raise ConfigError(f"unknown measure {config['measure']!r}")
    try:
        if measure == "vp":
            return VPParams(float(config["q_per_day"]))
        return CSParams(float(config["tau_hours"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _dither_window_seconds(config: dict):
    raw = config["dither_window_days"]
    if isinstance(raw, str):
        text = raw.strip().lower()
        if text == "auto":
            return "auto"
        try:
            raw = float(text)
        except ValueError:
            raise ConfigError(
                f"bad value for dither_window_days: {raw!r}") from None
    if raw < 0:
        raise ConfigError("dither_window_days must be non-negative")
    return float(raw) * DAY


def _fmt(x) -> str:
    """Full-precision, round-trippable float text; empty for missing."""
    if x is None:
        return ""
    x = float(x)
    if np.isnan(x):
        return ""
    return repr(x)


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_de_nan(payload), indent=2, sort_keys=True)
                    + "\n", encoding="utf-8")


def _de_nan(obj):
    if isinstance(obj, dict):
        return {k: _de_nan(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_de_nan(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if np.isnan(x) else x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _file_sha256(path: str) -> str:
    return _sha256(Path(path).read_bytes())


def _require_file(path: Optional[str], what: str) -> str:
    if not path:
        raise ConfigError(f"missing required {what}")
    if not os.path.exists(path):
        raise DataError(f"{what} not found: {path}")
    return path


def _load_micro(path: str, epoch=None) -> MicroLog:
    try:
        return parse_micro_events(Path(path).read_text(encoding="utf-8"),
                                  epoch=epoch)
    except CatalogError as exc:
        raise DataError(f"{path}: {exc}") from None


def _station_train(log: MicroLog, station: Optional[str], path: str,
                   max_magnitude: float,
                   interval: tuple[float, float]) -> SpikeTrain:
    events = filter_micro_events(log.events, max_magnitude)
    stations = sorted({e.station_id for e in events})
    if station is None:
        if len(stations) != 1:
            raise ConfigError(
                f"{path} holds stations {stations}; pick one with "
                "--station-a/--station-b")
        station = stations[0]
    elif station not in stations:
        raise DataError(f"station {station!r} not present in {path}")
    return to_spike_train(events, station, interval)


# --------------------------------------------------------------------------
# analyze


def cmd_analyze(args: argparse.Namespace) -> int:
    config = _apply_flag_overrides(load_config(args.config), args)
    params = _validated_params(config)
    dither_window = _dither_window_seconds(config)
    if not 0.0 < float(config["confidence"]) < 1.0:
        raise ConfigError("confidence must be in (0, 1)")
    if int(config["count"]) < 10:
        raise ConfigError("need at least 10 surrogates")
    threads = args.threads or 1

    path_a = _require_file(args.events_a, "station file")
    path_b = _require_file(args.events_b, "station file")

    log_a = _load_micro(path_a)
    log_b = _load_micro(path_b)
    if not log_a.events or not log_b.events:
        raise DataError("station file holds no events")
    epoch = min(log_a.epoch, log_b.epoch)
    log_a = _load_micro(path_a, epoch=epoch)
    log_b = _load_micro(path_b, epoch=epoch)

    def span(log: MicroLog, station: Optional[str]) -> tuple[float, float]:
        times = [e.event_time for e in log.events
                 if station is None or e.station_id == station]
        if not times:
            raise DataError("station file holds no events")
        return min(times), max(times)

    lo_a, hi_a = span(log_a, args.station_a)
    lo_b, hi_b = span(log_b, args.station_b)
    start = max(lo_a, lo_b)
    end = min(hi_a, hi_b)
    if config["start"]:
        start = to_seconds(parse_iso_utc(config["start"]), epoch)
    if config["end"]:
        end = to_seconds(parse_iso_utc(config["end"]), epoch)
    if end <= start:
        raise DataError("empty common analysis interval")

    max_mag = float(config["max_magnitude"])
    train_a = _station_train(log_a, args.station_a, path_a, max_mag,
                             (start, end))
    train_b = _station_train(log_b, args.station_b, path_b, max_mag,
                             (start, end))
    if len(train_a) == 0 or len(train_b) == 0:
        raise DataError("a station has no events in the analysis interval")

    sp = SurrogateParams(count=int(config["count"]),
                         dither_window=dither_window,
                         seed=int(config["seed"]))
    result = detect(
        train_a, train_b, config["measure"], params,
        window_length=float(config["window_days"]) * DAY,
        step=float(config["step_hours"]) * HOUR,
        sp=sp,
        confidence=float(config["confidence"]),
        cc_bin_width=float(config["cc_bin_days"]) * DAY,
        cc_max_lag=float(config["cc_max_lag_days"]) * DAY,
        threads=threads,
    )

    events_for_plot = []
    if args.targets:
        targets = _load_targets(args.targets, epoch)
        groups = _load_groups(targets, args.grouping)
        for group in groups:
            for i, rec in enumerate(group.members):
                events_for_plot.append(
                    (rec.origin_time, rec.id, i == group.main_shock_index))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_profile_csv(out / "profile.csv", result, epoch)
    _write_band_csv(out / "band.csv", result, epoch)
    _write_anomalies_json(out / "anomalies.json", result, config, epoch)
    if result.correlogram is not None:
        _write_correlogram_csv(out / "correlogram.csv", result)

    from . import plots
    plots.save_profile_plot(out / "profile.svg", result.profile, result.band,
                            result.anomalies, events_for_plot, epoch)
    plots.save_monthly_plot(out / "monthly.svg", result.profile, result.band,
                            result.anomalies, events_for_plot, epoch)
    if result.correlogram is not None:
        plots.save_correlogram_plot(out / "correlogram.svg",
                                    result.correlogram)

    inputs = {"events_a": {"path": path_a, "sha256": _file_sha256(path_a)},
              "events_b": {"path": path_b, "sha256": _file_sha256(path_b)}}
    if args.targets:
        inputs["targets"] = {"path": args.targets,
                             "sha256": _file_sha256(args.targets)}
    _write_manifest(out / "manifest.json", "analyze", config, inputs)
    print(f"analyze: {len(result.anomalies)} anomalies over "
          f"{result.profile.positions.size} positions -> {out}")
    return 0


def _load_targets(path: str, epoch) -> Catalog:
    _require_file(path, "target catalog")
    try:
        fmt = "json" if path.endswith(".json") else "generic_csv"
        return parse_catalog(Path(path).read_text(encoding="utf-8"), fmt,
                             epoch=epoch)
    except CatalogError as exc:
        raise DataError(f"{path}: {exc}") from None


def _load_groups(targets: Catalog, grouping_path: Optional[str],
                 max_gap_hours: float = 36.0, max_distance_km: float = 150.0):
    overrides = None
    if grouping_path:
        _require_file(grouping_path, "grouping file")
        try:
            payload = json.loads(Path(grouping_path).read_text("utf-8"))
            overrides = payload["groups"] if isinstance(payload, dict) else payload
        except (json.JSONDecodeError, KeyError) as exc:
            raise DataError(f"{grouping_path}: bad grouping file ({exc})") from None
    try:
        return group_events(targets.records, max_gap=max_gap_hours * HOUR,
                            max_distance=max_distance_km, overrides=overrides)
    except CatalogError as exc:
        raise DataError(str(exc)) from None


def _write_profile_csv(path: Path, result: DetectionResult, epoch) -> None:
    profile, band = result.profile, result.band
    labels = [""] * profile.positions.size
    flags = ["false"] * profile.positions.size
    for anomaly in result.anomalies:
        covered = ((profile.positions >= anomaly.onset)
                   & (profile.positions <= anomaly.offset))
        for idx in np.nonzero(covered)[0]:
            labels[idx] = anomaly.label
            flags[idx] = "true"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["position_iso8601", "value", "lower", "upper",
                         "is_anomaly", "anomaly_label"])
        for k in range(profile.positions.size):
            writer.writerow([
                format_iso(profile.positions[k], epoch),
                _fmt(profile.values[k]),
                _fmt(band.lower[k]),
                _fmt(band.upper[k]),
                flags[k],
                labels[k],
            ])


def _write_band_csv(path: Path, result: DetectionResult, epoch) -> None:
    band = result.band
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["position_iso8601", "lower", "upper"])
        for k in range(band.positions.size):
            writer.writerow([format_iso(band.positions[k], epoch),
                             _fmt(band.lower[k]), _fmt(band.upper[k])])


def _write_correlogram_csv(path: Path, result: DetectionResult) -> None:
    cc = result.correlogram
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lag_days", "cc"])
        for lag, value in zip(cc.lags, cc.values):
            writer.writerow([_fmt(lag / DAY), _fmt(value)])


def _params_payload(config: dict) -> dict:
    if config["measure"] == "vp":
        return {"q_per_day": float(config["q_per_day"])}
    return {"tau_hours": float(config["tau_hours"])}


def _write_anomalies_json(path: Path, result: DetectionResult, config: dict,
                          epoch) -> None:
    payload = {
        "schema_version": 1,
        "epoch": format_iso(0.0, epoch),
        "measure": config["measure"],
        "params": _params_payload(config),
        "window_hours": float(config["window_days"]) * 24.0,
        "step_hours": float(config["step_hours"]),
        "confidence": float(config["confidence"]),
        "surrogates": int(config["count"]),
        "seed": int(config["seed"]),
        "dither_window_days": result.dither_window / DAY,
        "anomalies": [
            {
                "label": a.label,
                "onset": format_iso(a.onset, epoch),
                "offset": format_iso(a.offset, epoch),
                "peak_value": a.peak_value,
                "peak_excess": a.peak_excess,
            }
            for a in result.anomalies
        ],
    }
    _write_json(path, payload)


def _write_manifest(path: Path, command: str, config: dict,
                    inputs: dict) -> None:
    resolved = {k: config[k] for k in sorted(_DEFAULTS)}
    blob = json.dumps(resolved, sort_keys=True).encode()
    import numba
    payload = {
        "schema_version": 1,
        "command": command,
        "config": resolved,
        "config_sha256": _sha256(blob),
        "inputs": inputs,
        "versions": {
            "seispike": __version__,
            "numpy": np.__version__,
            "numba": numba.__version__,
        },
    }
    _write_json(path, payload)


# --------------------------------------------------------------------------
# evaluate


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _apply_flag_overrides(load_config(args.config), args)
    horizon = float(config["horizon_hours"])
    if horizon <= 0:
        raise ConfigError("horizon must be positive")

    anomalies_path = _require_file(args.anomalies, "anomaly file")
    try:
        payload = json.loads(Path(anomalies_path).read_text("utf-8"))
        epoch = parse_iso_utc(payload["epoch"])
        window_hours = float(payload.get("window_hours", 0.0))
        anomalies = [
            Anomaly(label=item["label"],
                    onset=to_seconds(parse_iso_utc(item["onset"]), epoch),
                    offset=to_seconds(parse_iso_utc(item["offset"]), epoch),
                    peak_value=float(item.get("peak_value", 0.0)),
                    peak_excess=float(item.get("peak_excess", 0.0)))
            for item in payload["anomalies"]
        ]
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{anomalies_path}: bad anomaly file ({exc})") from None

    targets = _load_targets(_require_file(args.targets, "target catalog"),
                            epoch)
    groups = _load_groups(targets, args.grouping)

    delay = window_hours * HOUR
    matches = match_warnings(anomalies, groups, horizon=horizon,
                             warning_delay=delay)
    report = confusion(matches, anomalies, horizon=horizon,
                       warning_delay=delay)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_payload = {
        "schema_version": 1,
        "horizon_hours": horizon,
        "warning_delay_hours": window_hours,
        "groups": len(groups),
        "true_positives": [m.group.main_shock.id for m in report.true_positives],
        "false_negatives": [g.main_shock.id for g in report.false_negatives],
        "false_positive_anomalies": [a.label for a in report.false_positives],
        "absorbed_anomalies": [a.label for a in report.absorbed],
        "ppv": report.ppv,
        "precursory_hours": None if report.stats is None else {
            "mean": report.stats.precursory_mean,
            "std": report.stats.precursory_std,
        },
        "duration_hours": None if report.stats is None else {
            "mean": report.stats.duration_mean,
            "std": report.stats.duration_std,
        },
        "matches": [_match_payload(m, epoch) for m in report.matches],
    }
    _write_json(out / "report.json", report_payload)
    _write_warnings_csv(out / "warnings.csv", report, epoch)
    text = render_report_text(report_payload)
    (out / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def _match_payload(match, epoch) -> dict:
    body = {
        "main_shock": match.group.main_shock.id,
        "events": [m.id for m in match.group.members],
        "anomaly": None,
        "precursory_hours": None,
        "duration_hours": None,
        "active_at_event": False,
    }
    if match.anomaly is not None:
        body.update({
            "anomaly": match.anomaly.label,
            "precursory_hours": match.precursory_time,
            "duration_hours": None if match.active_at_event else match.duration,
            "active_at_event": match.active_at_event,
        })
    return body


def _write_warnings_csv(path: Path, report, epoch) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["main_shock", "events", "anomaly",
                         "precursory_hours", "duration"])
        for m in report.matches:
            if m.anomaly is None:
                writer.writerow([m.group.main_shock.id,
                                 " ".join(r.id for r in m.group.members),
                                 "", "", ""])
            else:
                duration = ("up to event time" if m.active_at_event
                            else _fmt(m.duration))
                writer.writerow([m.group.main_shock.id,
                                 " ".join(r.id for r in m.group.members),
                                 m.anomaly.label,
                                 _fmt(m.precursory_time), duration])


def render_report_text(payload: dict) -> str:
    lines = []
    lines.append("warning evaluation")
    lines.append(f"  groups:           {payload['groups']}")
    lines.append(f"  true positives:   {len(payload['true_positives'])} "
                 f"({', '.join(payload['true_positives'])})")
    lines.append(f"  false negatives:  {len(payload['false_negatives'])} "
                 f"({', '.join(payload['false_negatives'])})")
    lines.append(f"  false positives:  {len(payload['false_positive_anomalies'])} "
                 f"({', '.join(payload['false_positive_anomalies'])})")
    if payload["absorbed_anomalies"]:
        lines.append(f"  absorbed:         {len(payload['absorbed_anomalies'])} "
                     f"({', '.join(payload['absorbed_anomalies'])})")
    ppv = payload["ppv"]
    lines.append("  ppv:              "
                 + ("undefined" if ppv is None else f"{ppv:.4f}"))
    for key, title in (("precursory_hours", "precursory time"),
                       ("duration_hours", "duration")):
        stats = payload[key]
        if stats is None:
            lines.append(f"  {title}: n/a")
        else:
            std = stats["std"]
            std_text = "n/a" if std is None else f"{std:.2f}"
            lines.append(f"  {title}: mean {stats['mean']:.2f} h "
                         f"(std {std_text})")
    lines.append("")
    lines.append(f"{'main shock':<12}{'events':<28}{'anomaly':<9}"
                 f"{'precursory':<12}duration")
    for m in payload["matches"]:
        events = " ".join(m["events"])
        if m["anomaly"] is None:
            lines.append(f"{m['main_shock']:<12}{events:<28}"
                         f"{'-':<9}{'-':<12}-")
        else:
            duration = ("up to event time" if m["active_at_event"]
                        else f"{m['duration_hours']:.0f} h")
            lines.append(f"{m['main_shock']:<12}{events:<28}"
                         f"{m['anomaly']:<9}"
                         f"{m['precursory_hours']:<12.1f}{duration}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# synth


def _parse_episode(text: str) -> Episode:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(
            f"bad --episode {text!r}; expected start_day:end_day:mode[:scale]")
    try:
        start, end = float(parts[0]) * DAY, float(parts[1]) * DAY
        scale = float(parts[3]) if len(parts) == 4 else 1.0
        return Episode(start=start, end=end, mode=parts[2], rate_scale=scale)
    except ValueError as exc:
        raise ConfigError(f"bad --episode {text!r}: {exc}") from None


def cmd_synth(args: argparse.Namespace) -> int:
    episodes = [_parse_episode(text) for text in (args.episode or [])]
    try:
        pair = gen_coupled_pair(
            base_rate=args.rate,
            coincidence_fraction=args.coincidence,
            jitter=args.jitter_minutes * 60.0,
            episodes=episodes,
            interval=(0.0, args.days * DAY),
            seed=args.seed,
            station_ids=(args.station_a or "S1", args.station_b or "S2"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    epoch = parse_iso_utc(args.start_date)
    events = [MicroEvent(station_id=train.station_id, event_time=float(t))
              for train in (pair.a, pair.b) for t in train.times]
    events.sort(key=lambda e: (e.event_time, e.station_id))
    log = MicroLog(events=tuple(events), epoch=epoch)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "events.csv").write_text(serialize_micro_events(log),
                                    encoding="utf-8")
    truth = {
        "schema_version": 1,
        "seed": args.seed,
        "epoch": format_iso(0.0, epoch),
        "days": args.days,
        "base_rate_per_day": args.rate,
        "coincidence_fraction": args.coincidence,
        "jitter_minutes": args.jitter_minutes,
        "stations": [pair.a.station_id, pair.b.station_id],
        "episodes": [
            {
                "start": format_iso(ep.start, epoch),
                "end": format_iso(ep.end, epoch),
                "start_day": ep.start / DAY,
                "end_day": ep.end / DAY,
                "mode": ep.mode,
                "rate_scale": ep.rate_scale,
            }
            for ep in pair.episodes
        ],
    }
    _write_json(out / "truth.json", truth)
    print(f"synth: {len(pair.a)} + {len(pair.b)} events -> {out}")
    return 0


# --------------------------------------------------------------------------
# rates


def cmd_rates(args: argparse.Namespace) -> int:
    path = _require_file(args.events, "station file")
    log = _load_micro(path)
    events = filter_micro_events(log.events, args.max_magnitude)
    if args.station:
        events = [e for e in events if e.station_id == args.station]
    times = [e.event_time for e in events]
    if times:
        interval = (min(times), max(times))
    else:
        interval = (0.0, 0.0)
    if args.start:
        interval = (to_seconds(parse_iso_utc(args.start), log.epoch),
                    interval[1])
    if args.end:
        interval = (interval[0],
                    to_seconds(parse_iso_utc(args.end), log.epoch))
    station = args.station or "all"
    train = SpikeTrain(station, interval,
                       np.sort(np.array([t for t in times
                                         if interval[0] <= t <= interval[1]])))

    if args.bandwidth_days == "auto":
        if len(train) < 2:
            raise DataError("bandwidth selection needs at least 2 events")
        bandwidth = optimize_bandwidth(train)
    else:
        try:
            bandwidth = float(args.bandwidth_days)
        except ValueError:
            raise ConfigError(
                f"bad --bandwidth-days {args.bandwidth_days!r}") from None
    profile = estimate_rate(train, bandwidth, args.grid_step_hours * HOUR)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "rates.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time_iso8601", "rate_per_day"])
        for t, v in zip(profile.grid, profile.values):
            writer.writerow([format_iso(t, log.epoch), _fmt(v)])
    if args.svg:
        from . import plots
        plots.save_rate_plot(out / "rates.svg", profile.grid, profile.values,
                             log.epoch)
    print(f"rates: bandwidth {bandwidth:.4g} days, "
          f"{profile.grid.size} grid points -> {out}")
    return 0


# --------------------------------------------------------------------------
# report


def cmd_report(args: argparse.Namespace) -> int:
    directory = Path(args.dir)
    if not directory.exists():
        raise DataError(f"no such directory: {directory}")
    shown = False
    anomalies_path = directory / "anomalies.json"
    if anomalies_path.exists():
        payload = json.loads(anomalies_path.read_text("utf-8"))
        print(f"analysis: measure {payload['measure']}, "
              f"{payload['surrogates']} surrogates, "
              f"confidence {payload['confidence']}, "
              f"dither window {payload['dither_window_days']:.3g} days")
        if payload["anomalies"]:
            print(f"{'label':<8}{'onset':<22}{'offset':<22}peak excess")
            for a in payload["anomalies"]:
                print(f"{a['label']:<8}{a['onset']:<22}{a['offset']:<22}"
                      f"{a['peak_excess']:.4g}")
        else:
            print("no anomalies")
        shown = True
    report_path = directory / "report.json"
    if report_path.exists():
        print(render_report_text(json.loads(report_path.read_text("utf-8"))),
              end="")
        shown = True
    if not shown:
        raise DataError(f"no artifacts found under {directory}")
    return 0


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seispike",
        description="Spike-train dissimilarity analysis of micro-earthquake "
                    "station logs")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="detect dissimilarity anomalies")
    pa.add_argument("--events-a", required=True, help="station A log CSV")
    pa.add_argument("--events-b", required=True, help="station B log CSV")
    pa.add_argument("--station-a", help="station id in events-a")
    pa.add_argument("--station-b", help="station id in events-b")
    pa.add_argument("--targets", help="target catalog CSV for event markers")
    pa.add_argument("--grouping", help="grouping overrides JSON")
    pa.add_argument("--out", required=True, help="output directory")
    pa.add_argument("--config", help="INI config file")
    pa.add_argument("--measure", choices=["vp", "cs"])
    pa.add_argument("--q-per-day", type=float, dest="q_per_day")
    pa.add_argument("--tau-hours", type=float, dest="tau_hours")
    pa.add_argument("--window-days", type=float, dest="window_days")
    pa.add_argument("--step-hours", type=float, dest="step_hours")
    pa.add_argument("--max-magnitude", type=float, dest="max_magnitude")
    pa.add_argument("--start", help="analysis start (ISO-8601)")
    pa.add_argument("--end", help="analysis end (ISO-8601)")
    pa.add_argument("--surrogates", type=int)
    pa.add_argument("--dither-window",
                    help="days, or 'auto' for the correlogram rule")
    pa.add_argument("--seed", type=int)
    pa.add_argument("--confidence", type=float)
    pa.add_argument("--cc-bin-days", type=float, dest="cc_bin_days")
    pa.add_argument("--cc-max-lag-days", type=float, dest="cc_max_lag_days")
    pa.add_argument("--threads", type=int, default=1,
                    help="worker cap; never changes results")
    pa.set_defaults(func=cmd_analyze)

    pe = sub.add_parser("evaluate", help="score anomalies against a catalog")
    pe.add_argument("--anomalies", required=True, help="anomalies.json")
    pe.add_argument("--targets", required=True, help="target catalog CSV")
    pe.add_argument("--grouping", help="grouping overrides JSON")
    pe.add_argument("--out", required=True, help="output directory")
    pe.add_argument("--config", help="INI config file")
    pe.add_argument("--horizon-hours", type=float, dest="horizon_hours")
    pe.set_defaults(func=cmd_evaluate)

    ps = sub.add_parser("synth", help="generate a synthetic station pair")
    ps.add_argument("--out", required=True, help="output directory")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--days", type=float, default=60.0)
    ps.add_argument("--rate", type=float, default=10.0,
                    help="per-station events/day")
    ps.add_argument("--coincidence", type=float, default=0.7)
    ps.add_argument("--jitter-minutes", type=float, default=2.0,
                    dest="jitter_minutes")
    ps.add_argument("--episode", action="append",
                    help="start_day:end_day:mode[:scale]; repeatable")
    ps.add_argument("--station-a", default="S1")
    ps.add_argument("--station-b", default="S2")
    ps.add_argument("--start-date", default="2020-01-01T00:00:00Z",
                    dest="start_date")
    ps.set_defaults(func=cmd_synth)

    pr = sub.add_parser("rates", help="kernel rate profile of one station")
    pr.add_argument("--events", required=True, help="station log CSV")
    pr.add_argument("--station")
    pr.add_argument("--bandwidth-days", default="auto", dest="bandwidth_days")
    pr.add_argument("--grid-step-hours", type=float, default=1.0,
                    dest="grid_step_hours")
    pr.add_argument("--max-magnitude", type=float, default=2.0,
                    dest="max_magnitude")
    pr.add_argument("--start", help="profile start (ISO-8601)")
    pr.add_argument("--end", help="profile end (ISO-8601)")
    pr.add_argument("--svg", action="store_true")
    pr.add_argument("--out", required=True, help="output directory")
    pr.set_defaults(func=cmd_rates)

    pp = sub.add_parser("report", help="print artifacts of a previous run")
    pp.add_argument("dir", help="analyze or evaluate output directory")
    pp.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except CatalogError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

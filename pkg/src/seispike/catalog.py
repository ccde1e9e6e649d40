"""Earthquake catalog and micro-earthquake station log ingestion.

Target catalogs (the earthquakes we score warnings against) arrive as CSV
or JSON; station logs of micro-earthquakes arrive as CSV and are reduced
to spike trains.  All parsed times become float seconds relative to a
dataset epoch, by default the earliest record's midnight UTC.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .spiketrain import SpikeTrain
from .timebase import (
    format_iso,
    midnight_utc,
    parse_iso_utc,
    to_seconds,
)

__all__ = [
    "CatalogError",
    "EarthquakeRecord",
    "MicroEvent",
    "EventGroup",
    "Catalog",
    "MicroLog",
    "parse_catalog",
    "serialize_catalog",
    "parse_micro_events",
    "serialize_micro_events",
    "filter_region",
    "filter_micro_events",
    "group_events",
    "to_spike_train",
    "great_circle_km",
]

EARTH_RADIUS_KM = 6371.0

CATALOG_COLUMNS = ["id", "date", "time", "magnitude", "region",
                   "latitude", "longitude", "depth_km"]
MICRO_COLUMNS = ["station_id", "timestamp_iso8601", "magnitude"]


class CatalogError(ValueError):
    """Malformed catalog or station-log input."""


@dataclass(frozen=True)
class EarthquakeRecord:
    """A cataloged target earthquake."""

    id: str
    origin_time: float  # seconds since dataset epoch
    magnitude: float
    latitude: float
    longitude: float
    depth: float  # kilometers
    region: str = ""

    def __post_init__(self):
        if not math.isfinite(self.magnitude):
            raise CatalogError(f"invalid magnitude for {self.id!r}")
        if not -90.0 <= self.latitude <= 90.0:
            raise CatalogError(f"invalid latitude for {self.id!r}")
        if not -180.0 <= self.longitude <= 180.0:
            raise CatalogError(f"invalid longitude for {self.id!r}")
        if not (math.isfinite(self.depth) and self.depth >= 0.0):
            raise CatalogError(f"invalid depth for {self.id!r}")


@dataclass(frozen=True)
class MicroEvent:
    """A single micro-earthquake logged by one station."""

    station_id: str
    event_time: float  # seconds since dataset epoch
    magnitude: Optional[float] = None


@dataclass(frozen=True)
class EventGroup:
    """A space-time cluster of target earthquakes around one main shock.

    The main shock is the first member attaining the group's maximum
    magnitude, i.e. no later member is strictly larger.  Members before it
    are foreshocks, members after it aftershocks.
    """

    members: tuple[EarthquakeRecord, ...]
    main_shock_index: int

    def __post_init__(self):
        if not self.members:
            raise CatalogError("empty event group")
        times = [m.origin_time for m in self.members]
        if any(b < a for a, b in zip(times, times[1:])):
            raise CatalogError("group members out of time order")
        if not 0 <= self.main_shock_index < len(self.members):
            raise CatalogError("main shock index out of range")
        mags = [m.magnitude for m in self.members]
        if any(m > mags[self.main_shock_index]
               for m in mags[self.main_shock_index + 1:]):
            raise CatalogError("member after the main shock is larger")

    @property
    def main_shock(self) -> EarthquakeRecord:
        return self.members[self.main_shock_index]

    @property
    def foreshocks(self) -> tuple[EarthquakeRecord, ...]:
        return self.members[: self.main_shock_index]

    @property
    def aftershocks(self) -> tuple[EarthquakeRecord, ...]:
        return self.members[self.main_shock_index + 1:]

    @property
    def first_event_time(self) -> float:
        return self.members[0].origin_time

    @property
    def last_event_time(self) -> float:
        return self.members[-1].origin_time


@dataclass(frozen=True)
class Catalog:
    """Parsed target records plus the epoch their times are relative to."""

    records: tuple[EarthquakeRecord, ...]
    epoch: datetime


@dataclass(frozen=True)
class MicroLog:
    """Parsed micro-earthquake events plus their epoch."""

    events: tuple[MicroEvent, ...]
    epoch: datetime


def _float_field(raw: str, name: str, row: int) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise CatalogError(f"invalid {name}, row {row}") from None


def _build_record(id_: str, when: datetime, magnitude: float, latitude: float,
                  longitude: float, depth: float, region: str,
                  row: int) -> tuple[datetime, EarthquakeRecord]:
    if not math.isfinite(magnitude):
        raise CatalogError(f"invalid magnitude, row {row}")
    if not -90.0 <= latitude <= 90.0:
        raise CatalogError(f"invalid latitude, row {row}")
    if not -180.0 <= longitude <= 180.0:
        raise CatalogError(f"invalid longitude, row {row}")
    if not (math.isfinite(depth) and depth >= 0.0):
        raise CatalogError(f"invalid depth, row {row}")
    rec = EarthquakeRecord(id=id_, origin_time=0.0, magnitude=magnitude,
                           latitude=latitude, longitude=longitude,
                           depth=depth, region=region)
    return when, rec


def _read_generic_csv(text: str) -> list[tuple[datetime, EarthquakeRecord]]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise CatalogError("empty catalog file")
    missing = [c for c in CATALOG_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise CatalogError(f"missing columns: {', '.join(missing)}")
    out = []
    for row_no, row in enumerate(reader, start=1):
        try:
            when = parse_iso_utc(f"{row['date']}T{row['time']}")
        except (ValueError, TypeError):
            raise CatalogError(f"invalid timestamp, row {row_no}") from None
        out.append(_build_record(
            row["id"],
            when,
            _float_field(row["magnitude"], "magnitude", row_no),
            _float_field(row["latitude"], "latitude", row_no),
            _float_field(row["longitude"], "longitude", row_no),
            _float_field(row["depth_km"], "depth", row_no),
            row.get("region") or "",
            row_no,
        ))
    return out


def _read_usgs_csv(text: str) -> list[tuple[datetime, EarthquakeRecord]]:
    # Standard USGS catalog export: time,latitude,longitude,depth,mag,...,id,...,place
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise CatalogError("empty catalog file")
    required = ["time", "latitude", "longitude", "depth", "mag", "id"]
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        raise CatalogError(f"missing columns: {', '.join(missing)}")
    out = []
    for row_no, row in enumerate(reader, start=1):
        try:
            when = parse_iso_utc(row["time"])
        except (ValueError, TypeError):
            raise CatalogError(f"invalid timestamp, row {row_no}") from None
        out.append(_build_record(
            row["id"],
            when,
            _float_field(row["mag"], "magnitude", row_no),
            _float_field(row["latitude"], "latitude", row_no),
            _float_field(row["longitude"], "longitude", row_no),
            _float_field(row["depth"], "depth", row_no),
            row.get("place") or "",
            row_no,
        ))
    return out


def _read_json(text: str) -> list[tuple[datetime, EarthquakeRecord]]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"invalid JSON catalog: {exc}") from None
    items = payload["records"] if isinstance(payload, dict) else payload
    out = []
    for row_no, item in enumerate(items, start=1):
        try:
            when = parse_iso_utc(item["time"])
        except (KeyError, ValueError, TypeError):
            raise CatalogError(f"invalid timestamp, row {row_no}") from None
        try:
            out.append(_build_record(
                str(item["id"]),
                when,
                float(item["magnitude"]),
                float(item["latitude"]),
                float(item["longitude"]),
                float(item["depth_km"]),
                str(item.get("region", "")),
                row_no,
            ))
        except (KeyError, ValueError) as exc:
            if isinstance(exc, CatalogError):
                raise
            raise CatalogError(f"malformed record, row {row_no}") from None
    return out


_READERS = {
    "generic_csv": _read_generic_csv,
    "usgs_csv": _read_usgs_csv,
    "json": _read_json,
}


def parse_catalog(source, format: str = "generic_csv",
                  epoch: Optional[datetime] = None) -> Catalog:
    """Parse a target-earthquake catalog.

    `source` is a path, text, or byte stream.  Records are returned sorted
    by origin time; non-monotone inputs are permitted.  The epoch defaults
    to the earliest record's midnight UTC.
    """
    if format not in _READERS:
        raise CatalogError(f"unknown catalog format {format!r}")
    text = _read_text(source)
    dated = _READERS[format](text)
    dated.sort(key=lambda pair: pair[0])
    if epoch is None:
        if not dated:
            epoch = datetime(1970, 1, 1, tzinfo=timezone.utc)
        else:
            epoch = midnight_utc(dated[0][0])
    records = tuple(
        replace(rec, origin_time=to_seconds(when, epoch))
        for when, rec in dated
    )
    return Catalog(records=records, epoch=epoch)


def serialize_catalog(catalog: Catalog, format: str = "generic_csv") -> str:
    """Inverse of `parse_catalog`: render records back to text."""
    if format == "generic_csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CATALOG_COLUMNS)
        for rec in catalog.records:
            stamp = format_iso(rec.origin_time, catalog.epoch)
            date, time_part = stamp.rstrip("Z").split("T")
            writer.writerow([rec.id, date, time_part, _fmt(rec.magnitude),
                             rec.region, _fmt(rec.latitude),
                             _fmt(rec.longitude), _fmt(rec.depth)])
        return buf.getvalue()
    if format == "json":
        items = [
            {
                "id": rec.id,
                "time": format_iso(rec.origin_time, catalog.epoch),
                "magnitude": rec.magnitude,
                "latitude": rec.latitude,
                "longitude": rec.longitude,
                "depth_km": rec.depth,
                "region": rec.region,
            }
            for rec in catalog.records
        ]
        return json.dumps({"records": items}, indent=2, sort_keys=True) + "\n"
    raise CatalogError(f"unknown catalog format {format!r}")


def parse_micro_events(source, epoch: Optional[datetime] = None) -> MicroLog:
    """Parse a station log CSV: station_id,timestamp_iso8601,magnitude."""
    text = _read_text(source)
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise CatalogError("empty station log")
    missing = [c for c in ("station_id", "timestamp_iso8601")
               if c not in reader.fieldnames]
    if missing:
        raise CatalogError(f"missing columns: {', '.join(missing)}")
    dated = []
    for row_no, row in enumerate(reader, start=1):
        try:
            when = parse_iso_utc(row["timestamp_iso8601"])
        except (ValueError, TypeError):
            raise CatalogError(f"invalid timestamp, row {row_no}") from None
        raw_mag = (row.get("magnitude") or "").strip()
        mag = _float_field(raw_mag, "magnitude", row_no) if raw_mag else None
        dated.append((when, row["station_id"], mag))
    dated.sort(key=lambda item: item[0])
    if epoch is None:
        if not dated:
            epoch = datetime(1970, 1, 1, tzinfo=timezone.utc)
        else:
            epoch = midnight_utc(dated[0][0])
    events = tuple(
        MicroEvent(station_id=sid, event_time=to_seconds(when, epoch),
                   magnitude=mag)
        for when, sid, mag in dated
    )
    return MicroLog(events=events, epoch=epoch)


def serialize_micro_events(log: MicroLog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MICRO_COLUMNS)
    for ev in log.events:
        mag = "" if ev.magnitude is None else _fmt(ev.magnitude)
        writer.writerow([ev.station_id,
                         format_iso(ev.event_time, log.epoch), mag])
    return buf.getvalue()


def filter_region(records: Sequence[EarthquakeRecord],
                  lat_range: tuple[float, float],
                  lon_range: tuple[float, float],
                  time_range: tuple[float, float],
                  min_magnitude: float = -math.inf,
                  ) -> list[EarthquakeRecord]:
    """Keep records inside all bounds (inclusive), order preserved."""
    for lo, hi, name in ((lat_range[0], lat_range[1], "latitude"),
                         (lon_range[0], lon_range[1], "longitude"),
                         (time_range[0], time_range[1], "time")):
        if lo > hi:
            raise CatalogError(f"{name} range reversed")
    return [
        r for r in records
        if lat_range[0] <= r.latitude <= lat_range[1]
        and lon_range[0] <= r.longitude <= lon_range[1]
        and time_range[0] <= r.origin_time <= time_range[1]
        and r.magnitude >= min_magnitude
    ]


def filter_micro_events(events: Iterable[MicroEvent],
                        max_magnitude: float = 2.0) -> list[MicroEvent]:
    """Drop events with a known magnitude above the micro-earthquake cap."""
    return [e for e in events
            if e.magnitude is None or e.magnitude <= max_magnitude]


def great_circle_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Haversine great-circle distance in kilometers."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dphi = p2 - p1
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def _main_shock_index(members: Sequence[EarthquakeRecord]) -> int:
    # First member at the group's maximum magnitude: nothing after it is
    # strictly larger, and an equal-magnitude follower counts as aftershock.
    mags = [m.magnitude for m in members]
    return mags.index(max(mags))


def group_events(records: Sequence[EarthquakeRecord],
                 max_gap: float = 36 * 3600.0,
                 max_distance: float = 150.0,
                 overrides: Optional[Sequence[Sequence[str]]] = None,
                 ) -> list[EventGroup]:
    """Cluster target records into main-shock groups.

    Default rule: each record joins the most recently active group whose
    last member is within `max_gap` seconds and `max_distance` kilometers;
    otherwise it opens a new group.  Groups may interleave in time when
    distant sequences overlap.

    `overrides` (a list of id lists) takes precedence entirely: listed
    groups are used verbatim and any unlisted record becomes a singleton.
    """
    times = [r.origin_time for r in records]
    if any(b < a for a, b in zip(times, times[1:])):
        raise CatalogError("records must be sorted by origin time")

    if overrides is not None:
        by_id = {r.id: r for r in records}
        if len(by_id) != len(records):
            raise CatalogError("duplicate record ids")
        seen: set[str] = set()
        groups = []
        for id_list in overrides:
            members = []
            for rid in id_list:
                if rid not in by_id:
                    raise CatalogError(f"override references unknown id {rid!r}")
                if rid in seen:
                    raise CatalogError(f"override repeats id {rid!r}")
                seen.add(rid)
                members.append(by_id[rid])
            members.sort(key=lambda r: r.origin_time)
            groups.append(EventGroup(tuple(members), _main_shock_index(members)))
        for rec in records:
            if rec.id not in seen:
                groups.append(EventGroup((rec,), 0))
        groups.sort(key=lambda g: g.first_event_time)
        return groups

    open_groups: list[list[EarthquakeRecord]] = []
    for rec in records:
        chosen = None
        for members in reversed(open_groups):
            last = members[-1]
            if rec.origin_time - last.origin_time > max_gap:
                continue
            if great_circle_km(last.latitude, last.longitude,
                               rec.latitude, rec.longitude) > max_distance:
                continue
            chosen = members
            break
        if chosen is None:
            open_groups.append([rec])
        else:
            chosen.append(rec)
    groups = [EventGroup(tuple(members), _main_shock_index(members))
              for members in open_groups]
    groups.sort(key=lambda g: g.first_event_time)
    return groups


def to_spike_train(events: Iterable[MicroEvent], station_id: str,
                   interval: tuple[float, float]) -> SpikeTrain:
    """Reduce one station's events inside a closed interval to a spike train."""
    t0, t1 = interval
    if t0 > t1:
        raise ValueError("interval reversed")
    times = np.sort(np.array(
        [e.event_time for e in events
         if e.station_id == station_id and t0 <= e.event_time <= t1],
        dtype=float,
    ))
    return SpikeTrain(station_id=station_id, interval=(t0, t1), times=times)


def _read_text(source) -> str:
    """Accept a path, raw text/bytes, or an open stream."""
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, os.PathLike):
        return Path(source).read_text(encoding="utf-8")
    text = str(source)
    if "\n" not in text and os.path.exists(text):
        return Path(text).read_text(encoding="utf-8")
    return text


def _fmt(x: float) -> str:
    return f"{x:g}"

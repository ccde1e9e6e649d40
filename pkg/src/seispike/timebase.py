"""Time conventions shared by the whole package.

All event times are stored as float seconds relative to a dataset epoch
(a UTC midnight).  Interface-level parameters stated in days or hours are
converted to seconds exactly once, at the boundary.
"""
from __future__ import annotations

from datetime import datetime, timedelta, timezone

HOUR = 3600.0
DAY = 86400.0


def days(x: float) -> float:
    """Days to seconds."""
    return x * DAY


def hours(x: float) -> float:
    """Hours to seconds."""
    return x * HOUR


def to_days(seconds: float) -> float:
    return seconds / DAY


def to_hours(seconds: float) -> float:
    return seconds / HOUR


def parse_iso_utc(text: str) -> datetime:
    """Parse an ISO-8601 timestamp as UTC.

    Accepts a trailing 'Z', an explicit offset, or a naive timestamp
    (interpreted as UTC).
    """
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    dt = datetime.fromisoformat(cleaned)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def midnight_utc(dt: datetime) -> datetime:
    return dt.replace(hour=0, minute=0, second=0, microsecond=0)


def to_seconds(dt: datetime, epoch: datetime) -> float:
    return (dt - epoch).total_seconds()


def from_seconds(seconds: float, epoch: datetime) -> datetime:
    return epoch + timedelta(seconds=seconds)


def format_iso(seconds: float, epoch: datetime) -> str:
    """Render seconds-since-epoch as an ISO-8601 UTC timestamp.

    Sub-second parts are kept only when present, so timestamps written by
    the CLI are stable across runs.
    """
    dt = from_seconds(seconds, epoch)
    text = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if dt.microsecond:
        text += f".{dt.microsecond:06d}".rstrip("0")
    return text + "Z"

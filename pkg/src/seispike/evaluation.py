"""Scoring of detected anomalies against the target catalog.

A group is warned when an anomaly's causal warning instant falls inside
the horizon before the group's first event (earliest foreshock, else the
main shock).  Precursory time runs from the earliest such warning to the
first event; duration is the anomaly's onset-to-offset span, reported as
"up to the event time" when the warning was still in effect at the event.

Confusion accounting follows the warning semantics of the study design:

* true positives are matched groups (a main shock with a warned foreshock
  counts: warning the first event of the group is what matters);
* false negatives are unmatched groups, including groups whose only
  anomaly appeared after their foreshock (too late to warn);
* false positives are anomalies that warn no group AND do not fall inside
  any group's event sequence: an exceedance while a sequence is already
  underway is not counted as a false alarm, it is simply not predictive;
* aftershocks never generate or receive their own matches.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .catalog import EventGroup
from .measures import CSParams, VPParams
from .pipeline import DEFAULT_WINDOW, Anomaly, common_interval, detect
from .spiketrain import SpikeTrain, window
from .timebase import HOUR

__all__ = ["WarningMatch", "SummaryStats", "WarningReport", "match_warnings",
           "confusion", "summary_stats", "cross_validate",
           "DEFAULT_HORIZON_HOURS"]

logger = logging.getLogger(__name__)

DEFAULT_HORIZON_HOURS = 168.0


@dataclass(frozen=True)
class WarningMatch:
    """One event group and the warning (if any) credited to it."""

    group: EventGroup
    anomaly: Optional[Anomaly] = None
    precursory_time: Optional[float] = None  # hours before the first event
    duration: Optional[float] = None  # onset-to-offset span, hours
    active_at_event: bool = False  # warning still in effect at the event

    def __post_init__(self):
        if self.anomaly is not None and self.precursory_time is not None:
            if self.precursory_time <= 0:
                raise ValueError("matched warning must precede the event")


@dataclass(frozen=True)
class SummaryStats:
    """Sample mean/std (ddof=1) over matched groups; std is NaN for n=1.

    A duration "up to the event time" contributes its precursory time:
    the warning was in effect from onset until the event struck.
    """

    n: int
    precursory_mean: float
    precursory_std: float
    duration_mean: float
    duration_std: float


@dataclass(frozen=True)
class WarningReport:
    matches: tuple[WarningMatch, ...]
    true_positives: tuple[WarningMatch, ...]
    false_negatives: tuple[EventGroup, ...]
    false_positives: tuple[Anomaly, ...]
    absorbed: tuple[Anomaly, ...]  # anomalies inside a group's event span
    ppv: Optional[float]
    stats: Optional[SummaryStats]


def match_warnings(anomalies: Sequence[Anomaly],
                   groups: Sequence[EventGroup],
                   horizon: float = DEFAULT_HORIZON_HOURS,
                   warning_delay: float = 0.0) -> list[WarningMatch]:
    """Match anomalies to the groups they warn.

    `horizon` is in hours.  `warning_delay` (seconds) shifts anomaly
    positions to their causally available instant: a window's exceedance
    is only known once the window has closed, so detection-derived
    anomalies should pass the analysis window length here.  An anomaly may
    warn several groups whose pre-event horizons contain it.
    """
    horizon_s = horizon * HOUR
    matches = []
    for group in groups:
        first = group.first_event_time
        best: Optional[Anomaly] = None
        best_on = np.inf
        for anomaly in anomalies:
            w_on = anomaly.onset + warning_delay
            if first - horizon_s <= w_on < first and w_on < best_on:
                best = anomaly
                best_on = w_on
        if best is None:
            matches.append(WarningMatch(group=group))
            continue
        w_off = best.offset + warning_delay
        matches.append(WarningMatch(
            group=group,
            anomaly=best,
            precursory_time=(first - best_on) / HOUR,
            duration=(best.offset - best.onset) / HOUR,
            active_at_event=w_off >= first,
        ))
    return matches


def confusion(matches: Sequence[WarningMatch],
              anomalies: Sequence[Anomaly],
              horizon: float = DEFAULT_HORIZON_HOURS,
              warning_delay: float = 0.0) -> WarningReport:
    """Classify groups and anomalies; PPV = |TP| / (|TP| + |FP|).

    A shared anomaly warning several groups yields one true positive per
    group but is a single positive call.  PPV is None when there are no
    positive calls at all.
    """
    horizon_s = horizon * HOUR
    tp = tuple(m for m in matches if m.anomaly is not None)
    fn = tuple(m.group for m in matches if m.anomaly is None)

    warning_ids = set()
    for group in (m.group for m in matches):
        first = group.first_event_time
        for anomaly in anomalies:
            w_on = anomaly.onset + warning_delay
            if first - horizon_s <= w_on < first:
                warning_ids.add(id(anomaly))

    false_positives = []
    absorbed = []
    for anomaly in anomalies:
        if id(anomaly) in warning_ids:
            continue
        w_on = anomaly.onset + warning_delay
        inside = any(
            m.group.first_event_time <= w_on <= m.group.last_event_time
            for m in matches
        )
        (absorbed if inside else false_positives).append(anomaly)

    positives = len(tp) + len(false_positives)
    ppv = len(tp) / positives if positives else None
    stats = summary_stats(matches) if tp else None
    return WarningReport(matches=tuple(matches), true_positives=tp,
                         false_negatives=fn,
                         false_positives=tuple(false_positives),
                         absorbed=tuple(absorbed), ppv=ppv, stats=stats)


def summary_stats(matches: Sequence[WarningMatch]) -> SummaryStats:
    """Mean/std of precursory time and duration over matched groups."""
    precursory = []
    durations = []
    for m in matches:
        if m.anomaly is None:
            continue
        precursory.append(m.precursory_time)
        durations.append(m.precursory_time if m.active_at_event else m.duration)
    if not precursory:
        raise ValueError("no matched groups")
    p = np.asarray(precursory, dtype=float)
    d = np.asarray(durations, dtype=float)
    n = p.size
    std = (lambda x: float(np.std(x, ddof=1))) if n > 1 else (lambda x: float("nan"))
    return SummaryStats(n=n,
                        precursory_mean=float(p.mean()),
                        precursory_std=std(p),
                        duration_mean=float(d.mean()),
                        duration_std=std(d))


def cross_validate(a: SpikeTrain, b: SpikeTrain, measure: str,
                   param_grid: Sequence[float],
                   groups: Sequence[EventGroup],
                   folds: int = 5,
                   horizon: float = DEFAULT_HORIZON_HOURS,
                   window_length: Optional[float] = None,
                   **detect_kwargs):
    """Pick the measure parameter maximizing mean PPV over temporal folds.

    The common interval is split into `folds` contiguous spans; each fold
    is analyzed independently and scored against the groups whose first
    event falls inside it.  Folds with no groups contribute only when they
    produce anomalies (their PPV is then 0); folds where PPV is undefined
    are skipped and logged.  Ties prefer the smoother setting: the smaller
    shift cost, or the larger kernel width.
    """
    if not param_grid:
        raise ValueError("empty parameter grid")
    if window_length is None:
        window_length = DEFAULT_WINDOW
    c0, c1 = common_interval(a, b)
    edges = np.linspace(c0, c1, folds + 1)

    def params_for(value: float):
        return VPParams(value) if measure == "vp" else CSParams(value)

    candidates = sorted(set(float(v) for v in param_grid))
    mean_ppv = {}
    for value in candidates:
        ppvs = []
        for f in range(folds):
            f0, f1 = edges[f], edges[f + 1]
            fold_groups = [g for g in groups
                           if f0 <= g.first_event_time < f1]
            result = detect(window(a, f0, f1 - f0), window(b, f0, f1 - f0),
                            measure, params_for(value),
                            window_length=window_length, **detect_kwargs)
            matches = match_warnings(result.anomalies, fold_groups,
                                     horizon=horizon,
                                     warning_delay=window_length)
            report = confusion(matches, result.anomalies, horizon=horizon,
                               warning_delay=window_length)
            if not fold_groups and not result.anomalies:
                logger.info("fold %d: no groups and no anomalies, skipped", f)
                continue
            if report.ppv is None:
                logger.info("fold %d: PPV undefined, skipped", f)
                continue
            ppvs.append(report.ppv)
        mean_ppv[value] = float(np.mean(ppvs)) if ppvs else float("-inf")

    best_score = max(mean_ppv.values())
    winners = [v for v in candidates if mean_ppv[v] == best_score]
    choice = min(winners) if measure == "vp" else max(winners)
    return params_for(choice)

"""End-to-end anomaly detection.

A sliding window walks the common interval of two station trains; at each
position the chosen dissimilarity measure compares the windowed trains.
The same windows applied to M one-to-one surrogate pairs give a null
ensemble, quantile-normalized and reduced to a one-tailed acceptance
band.  Maximal runs of positions whose original dissimilarity exceeds the
upper limit are the anomalies.

Everything is deterministic given the seed: each surrogate draws from its
own index-keyed stream, so the worker count cannot change any output.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .measures import CSParams, VPParams
from .spiketrain import SpikeTrain
from .surrogate import (
    AcceptanceBand,
    Correlogram,
    SurrogateParams,
    acceptance_band,
    cross_correlogram,
    dither,
    quantile_normalize,
    select_dither_window,
    surrogate_rng,
)
from .timebase import DAY, HOUR

__all__ = ["DissimilarityProfile", "Anomaly", "DetectionResult",
           "profile_positions", "sliding_profile", "detect",
           "extract_anomalies", "validate_anomalies",
           "DEFAULT_WINDOW", "DEFAULT_STEP", "DEFAULT_CONFIDENCE",
           "DEFAULT_CC_BIN", "DEFAULT_CC_MAX_LAG"]

DEFAULT_WINDOW = 2 * DAY
DEFAULT_STEP = 1 * HOUR
DEFAULT_CONFIDENCE = 0.9
DEFAULT_CC_BIN = 2 * DAY
DEFAULT_CC_MAX_LAG = 30 * DAY

Params = Union[VPParams, CSParams]


@dataclass(frozen=True)
class DissimilarityProfile:
    """Measure values over sliding windows; NaN marks an undefined value."""

    measure: str
    params: Params
    window_length: float
    step: float
    positions: np.ndarray  # window start times, seconds
    values: np.ndarray

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if positions.size != values.size:
            raise ValueError("positions and values length mismatch")
        if positions.size >= 2:
            steps = np.diff(positions)
            if steps.min() <= 0 or not np.allclose(steps, steps[0]):
                raise ValueError("positions must increase with a constant step")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class Anomaly:
    """A maximal run of window positions above the acceptance limit."""

    label: str
    onset: float  # first exceeding window position, seconds
    offset: float  # last exceeding window position, seconds
    peak_value: float
    peak_excess: float  # peak value minus the upper limit at the peak

    def __post_init__(self):
        if self.onset > self.offset:
            raise ValueError("anomaly onset after offset")


@dataclass(frozen=True)
class DetectionResult:
    profile: DissimilarityProfile
    band: AcceptanceBand
    anomalies: tuple[Anomaly, ...]
    correlogram: Optional[Correlogram]
    dither_window: float


def _check_measure(measure: str, params: Params) -> None:
    if measure == "vp":
        if not isinstance(params, VPParams):
            raise TypeError("vp measure takes VPParams")
    elif measure == "cs":
        if not isinstance(params, CSParams):
            raise TypeError("cs measure takes CSParams")
    else:
        raise ValueError(f"unknown measure {measure!r}")


def profile_positions(interval: tuple[float, float], window_length: float,
                      step: float) -> np.ndarray:
    """Window start times covering the interval; the last window ends at
    or before the interval end."""
    if window_length <= 0 or step <= 0:
        raise ValueError("window length and step must be positive")
    t0, t1 = interval
    span = t1 - t0 - window_length
    if span < 0:
        return np.empty(0)
    count = int(np.floor(span / step)) + 1
    return t0 + step * np.arange(count)


def common_interval(a: SpikeTrain, b: SpikeTrain) -> tuple[float, float]:
    c0 = max(a.t0, b.t0)
    c1 = min(a.t1, b.t1)
    if c0 > c1:
        raise ValueError("trains share no common interval")
    return c0, c1


def _profile_values(times_a: np.ndarray, times_b: np.ndarray,
                    positions: np.ndarray, window_length: float,
                    measure: str, params: Params) -> np.ndarray:
    if measure == "vp":
        return _kernels.vp_profile(times_a, times_b, positions,
                                   window_length, params.q_per_second)
    return _kernels.cs_profile(times_a, times_b, positions,
                               window_length, params.tau_seconds)


def sliding_profile(a: SpikeTrain, b: SpikeTrain, measure: str,
                    params: Params, window_length: float = DEFAULT_WINDOW,
                    step: float = DEFAULT_STEP) -> DissimilarityProfile:
    """Dissimilarity of the two stations at every window position."""
    _check_measure(measure, params)
    positions = profile_positions(common_interval(a, b), window_length, step)
    values = _profile_values(a.times, b.times, positions, window_length,
                             measure, params)
    return DissimilarityProfile(measure=measure, params=params,
                                window_length=window_length, step=step,
                                positions=positions, values=values)


def extract_anomalies(profile: DissimilarityProfile,
                      band: AcceptanceBand) -> tuple[Anomaly, ...]:
    """Maximal runs of consecutive positions with value above the upper
    limit, labeled A1, A2, ... chronologically.

    A position with a missing value or an undefined limit can never be
    anomalous, so missingness splits runs.
    """
    values = profile.values
    upper = band.upper
    defined = ~(np.isnan(values) | np.isnan(upper))
    exceed = np.zeros(values.size, dtype=bool)
    exceed[defined] = values[defined] > upper[defined]
    anomalies = []
    i = 0
    while i < exceed.size:
        if not exceed[i]:
            i += 1
            continue
        j = i
        while j + 1 < exceed.size and exceed[j + 1]:
            j += 1
        run = slice(i, j + 1)
        peak = i + int(np.argmax(values[run]))
        anomalies.append(Anomaly(
            label=f"A{len(anomalies) + 1}",
            onset=float(profile.positions[i]),
            offset=float(profile.positions[j]),
            peak_value=float(values[peak]),
            peak_excess=float(values[peak] - upper[peak]),
        ))
        i = j + 1
    return tuple(anomalies)


def validate_anomalies(profile: DissimilarityProfile, band: AcceptanceBand,
                       anomalies: tuple[Anomaly, ...]) -> None:
    """Independent check of the anomaly contract; raises on violation."""
    last_onset = -np.inf
    for anomaly in anomalies:
        if anomaly.onset <= last_onset:
            raise AssertionError("anomaly onsets not strictly increasing")
        last_onset = anomaly.onset
        covered = ((profile.positions >= anomaly.onset)
                   & (profile.positions <= anomaly.offset))
        if not covered.any():
            raise AssertionError("anomaly covers no position")
        vals = profile.values[covered]
        ups = band.upper[covered]
        if np.isnan(vals).any() or np.isnan(ups).any():
            raise AssertionError("anomaly spans a missing value")
        if not (vals > ups).all():
            raise AssertionError("anomaly position inside the band")


def detect(a: SpikeTrain, b: SpikeTrain, measure: str, params: Params,
           window_length: float = DEFAULT_WINDOW, step: float = DEFAULT_STEP,
           sp: SurrogateParams = SurrogateParams(),
           confidence: float = DEFAULT_CONFIDENCE,
           cc_bin_width: float = DEFAULT_CC_BIN,
           cc_max_lag: float = DEFAULT_CC_MAX_LAG,
           threads: int = 1) -> DetectionResult:
    """Full detection: profile, surrogate ensemble, band, anomalies."""
    _check_measure(measure, params)
    if sp.count < 10:
        raise ValueError("need at least 10 surrogates for a usable band")
    interval = common_interval(a, b)
    positions = profile_positions(interval, window_length, step)
    values = _profile_values(a.times, b.times, positions, window_length,
                             measure, params)
    profile = DissimilarityProfile(measure=measure, params=params,
                                   window_length=window_length, step=step,
                                   positions=positions, values=values)

    correlogram = None
    if sp.dither_window == "auto":
        correlogram = cross_correlogram(a, b, cc_bin_width, cc_max_lag)
        dither_window = select_dither_window(correlogram)
    else:
        dither_window = float(sp.dither_window)
        try:
            correlogram = cross_correlogram(a, b, cc_bin_width, cc_max_lag)
        except ValueError:
            correlogram = None  # too short to bin; not needed in explicit mode

    def one_surrogate(i: int) -> np.ndarray:
        da = dither(a, dither_window, surrogate_rng(sp.seed, i, 0))
        db = dither(b, dither_window, surrogate_rng(sp.seed, i, 1))
        return _profile_values(da.times, db.times, positions, window_length,
                               measure, params)

    distances = np.empty((sp.count, positions.size))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, row in enumerate(pool.map(one_surrogate, range(sp.count))):
                distances[i] = row
    else:
        for i in range(sp.count):
            distances[i] = one_surrogate(i)

    normalized = quantile_normalize(distances)
    band = acceptance_band(normalized, positions, confidence)
    anomalies = extract_anomalies(profile, band)
    validate_anomalies(profile, band, anomalies)
    return DetectionResult(profile=profile, band=band, anomalies=anomalies,
                           correlogram=correlogram,
                           dither_window=dither_window)

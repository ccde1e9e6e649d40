"""Null-hypothesis machinery for the dissimilarity test.

Surrogate trains are built by causal uniform dithering: every spike moves
forward by an independent uniform draw on [0, W], which preserves the
slowly varying rate profile while destroying spike coincidences between
stations.  W is chosen as the first local minimum of the binned
cross-correlogram, the shortest lag at which the two stations decorrelate.
Surrogate distance profiles are quantile-normalized across window
positions before the one-tailed acceptance band is read off their order
statistics.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .spiketrain import SpikeTrain, bin_counts, window
from .timebase import DAY

__all__ = ["SurrogateParams", "Correlogram", "AcceptanceBand", "dither",
           "surrogate_rng", "cross_correlogram", "select_dither_window",
           "quantile_normalize", "acceptance_band"]


@dataclass(frozen=True)
class SurrogateParams:
    """Ensemble size, dithering window (seconds or "auto"), and RNG seed."""

    count: int = 1000
    dither_window: Union[float, str] = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("need at least 2 surrogates")
        if isinstance(self.dither_window, str):
            if self.dither_window != "auto":
                raise ValueError(f"bad dither window {self.dither_window!r}")
        elif self.dither_window < 0:
            raise ValueError("dither window must be non-negative")


@dataclass(frozen=True)
class Correlogram:
    """Pearson correlation of binned counts at non-negative lags."""

    lags: np.ndarray  # seconds, multiples of bin_width, starting at 0
    values: np.ndarray  # correlation coefficients
    bin_width: float

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if lags.size != values.size:
            raise ValueError("lags and values length mismatch")
        if lags.size == 0 or lags[0] != 0 or np.any(np.diff(lags) <= 0):
            raise ValueError("lags must increase strictly from 0")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class AcceptanceBand:
    """Per-position lower/upper limits from surrogate order statistics.

    One-tailed: only values above the upper limit count as anomalous.
    Positions whose surrogate column had missing values carry NaN limits.
    """

    positions: np.ndarray  # window start times, seconds
    lower: np.ndarray
    upper: np.ndarray
    confidence: float

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")
        positions = np.asarray(self.positions, dtype=float)
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if not positions.size == lower.size == upper.size:
            raise ValueError("band arrays length mismatch")
        defined = ~(np.isnan(lower) | np.isnan(upper))
        if np.any(lower[defined] > upper[defined]):
            raise ValueError("lower limit above upper limit")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


def surrogate_rng(seed: int, index: int, stream: int) -> np.random.Generator:
    """Independent, reproducible generator for one surrogate of one station.

    Keyed by (surrogate index, stream) so any single surrogate is
    regenerable in isolation and results cannot depend on scheduling order.
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(index, stream)))


def dither(train: SpikeTrain, dither_window: float,
           rng: np.random.Generator) -> SpikeTrain:
    """Causal uniform dithering: each spike moves to t + U[0, W].

    Spike count is preserved and no spike ever moves backward, so a
    surrogate warning can never borrow information from the future.  The
    interval stretches to [t0, t1 + W] since trailing spikes may spill
    past the original end.
    """
    if dither_window < 0:
        raise ValueError("dither window must be non-negative")
    t0, t1 = train.interval
    shifted = train.times + rng.uniform(0.0, dither_window, size=len(train))
    return SpikeTrain(train.station_id, (t0, t1 + dither_window),
                      np.sort(shifted))


def cross_correlogram(a: SpikeTrain, b: SpikeTrain, bin_width: float,
                      max_lag: float) -> Correlogram:
    """Correlation of binned counts as one train is lagged past the other.

    Both trains are binned over their common interval; the value at lag
    k*w is the Pearson correlation of counts_a[:-k] with counts_b[k:].
    Lags run from 0 up to max_lag, limited so at least 3 bin pairs remain.
    A zero-variance slice yields 0 (no measurable linear association).
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    c0 = max(a.t0, b.t0)
    c1 = min(a.t1, b.t1)
    if c0 >= c1:
        raise ValueError("insufficient bins")
    counts_a = bin_counts(window(a, c0, c1 - c0), bin_width).counts.astype(float)
    counts_b = bin_counts(window(b, c0, c1 - c0), bin_width).counts.astype(float)
    n = counts_a.size
    if n < 3:
        raise ValueError("insufficient bins")
    max_k = min(int(math.floor(max_lag / bin_width)), n - 3)
    lags = bin_width * np.arange(max_k + 1)
    values = np.empty(max_k + 1)
    for k in range(max_k + 1):
        x = counts_a[: n - k] if k else counts_a
        y = counts_b[k:]
        values[k] = _pearson(x, y)
    return Correlogram(lags=lags, values=values, bin_width=bin_width)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float((dx * dx).sum()) * float((dy * dy).sum()))
    if denom == 0.0:
        return 0.0
    return float((dx * dy).sum()) / denom


def select_dither_window(cc: Correlogram) -> float:
    """Smallest positive lag that is a local minimum of the correlogram.

    A lag qualifies when its value is <= both neighbors.  If no interior
    local minimum exists the largest available lag is returned with a
    warning; the caller should widen max_lag.
    """
    if cc.lags.size < 3:
        raise ValueError("need at least 3 lags")
    v = cc.values
    for i in range(1, cc.lags.size - 1):
        if v[i] <= v[i - 1] and v[i] <= v[i + 1]:
            return float(cc.lags[i])
    warnings.warn("no local minimum in correlogram; using the largest lag "
                  f"({cc.lags[-1] / DAY:.3g} days)")
    return float(cc.lags[-1])


def quantile_normalize(matrix: np.ndarray) -> np.ndarray:
    """Give all complete columns the identical value distribution.

    Each column's k-th order statistic becomes the mean of k-th order
    statistics across complete columns; within-column rank order is
    preserved, and tied entries receive the average of their tied ranks'
    reference values.  Columns containing NaN are excluded and returned
    untouched (their NaNs flag them to the caller).
    """
    data = np.asarray(matrix, dtype=float)
    if data.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    m = data.shape[0]
    if m < 2:
        raise ValueError("need at least 2 surrogates per column")
    included = ~np.isnan(data).any(axis=0)
    out = data.copy()
    if not included.any():
        return out
    cols = data[:, included]
    order = np.argsort(cols, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(cols, order, axis=0)
    reference = sorted_vals.mean(axis=1)
    normed = np.empty_like(cols)
    for c in range(cols.shape[1]):
        col_sorted = sorted_vals[:, c]
        target = np.empty(m)
        i = 0
        while i < m:
            j = i + 1
            while j < m and col_sorted[j] == col_sorted[i]:
                j += 1
            target[i:j] = reference[i:j].mean()
            i = j
        normed[order[:, c], c] = target
    out[:, included] = normed
    return out


def acceptance_band(normalized: np.ndarray, positions: np.ndarray,
                    confidence: float = 0.9) -> AcceptanceBand:
    """One-tailed band from per-position surrogate order statistics.

    lower = the smallest surrogate value; upper = the floor(confidence*M)-th
    order statistic (1-indexed), e.g. the 900th of 1000 sorted values at
    90% confidence.  Columns with missing values yield NaN limits.
    """
    data = np.asarray(normalized, dtype=float)
    if data.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    m = data.shape[0]
    if m < 2:
        raise ValueError("need at least 2 surrogates")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    k = int(math.floor(confidence * m))
    k = max(k, 1)
    lower = np.full(data.shape[1], np.nan)
    upper = np.full(data.shape[1], np.nan)
    complete = ~np.isnan(data).any(axis=0)
    if complete.any():
        sorted_cols = np.sort(data[:, complete], axis=0)
        lower[complete] = sorted_cols[0]
        upper[complete] = sorted_cols[k - 1]
    return AcceptanceBand(positions=np.asarray(positions, dtype=float),
                          lower=lower, upper=upper, confidence=confidence)

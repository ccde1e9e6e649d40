"""Core spike-train value type plus windowing and binning primitives."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SpikeTrain", "BinnedCounts", "window", "bin_counts"]


@dataclass(frozen=True)
class SpikeTrain:
    """Sorted event times of one station over a closed observation interval.

    Times are float seconds relative to the dataset epoch.  Duplicate times
    are legal: two micro-earthquakes may be logged in the same second, and
    dropping either would bias rate estimates.
    """

    station_id: str
    interval: tuple[float, float]
    times: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        t0, t1 = self.interval
        if not (math.isfinite(t0) and math.isfinite(t1)):
            raise ValueError("interval bounds must be finite")
        if t0 > t1:
            raise ValueError(f"interval reversed: [{t0}, {t1}]")
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if times.size and np.any(np.diff(times) < 0):
            raise ValueError("times must be non-decreasing")
        if times.size and (times[0] < t0 or times[-1] > t1):
            raise ValueError("spike outside the observation interval")
        object.__setattr__(self, "interval", (float(t0), float(t1)))
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def t0(self) -> float:
        return self.interval[0]

    @property
    def t1(self) -> float:
        return self.interval[1]

    @property
    def duration(self) -> float:
        return self.interval[1] - self.interval[0]


@dataclass(frozen=True)
class BinnedCounts:
    """Spike counts over contiguous bins of fixed width starting at `origin`."""

    bin_width: float
    counts: np.ndarray
    origin: float

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValueError("bin_width must be positive")
        counts = np.asarray(self.counts, dtype=int)
        if counts.size and counts.min() < 0:
            raise ValueError("negative bin count")
        object.__setattr__(self, "counts", counts)


def window(train: SpikeTrain, start: float, length: float) -> SpikeTrain:
    """Restrict a train to the closed window [start, start+length].

    The window need not lie inside the train's own interval; spikes outside
    simply drop out.  Closed endpoints mean a spike sitting exactly on a
    window boundary belongs to both adjacent windows rather than neither.
    """
    if length <= 0:
        raise ValueError("window length must be positive")
    end = start + length
    lo = np.searchsorted(train.times, start, side="left")
    hi = np.searchsorted(train.times, end, side="right")
    return SpikeTrain(train.station_id, (start, end), train.times[lo:hi])


def bin_counts(train: SpikeTrain, bin_width: float) -> BinnedCounts:
    """Count spikes in half-open bins [t0+k*w, t0+(k+1)*w).

    The final bin is closed on the right so the bins partition the interval
    exactly; a spike at t1 lands in the last bin.  The number of bins is
    ceil((t1-t0)/w), minimum 1.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    t0, t1 = train.interval
    n_bins = max(int(math.ceil((t1 - t0) / bin_width)), 1)
    idx = np.floor((train.times - t0) / bin_width).astype(int)
    idx = np.clip(idx, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    return BinnedCounts(bin_width=bin_width, counts=counts, origin=t0)

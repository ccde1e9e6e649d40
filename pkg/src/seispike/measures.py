"""Binless spike-train dissimilarity measures.

Two measures with complementary sensitivities:

* the shift-cost edit distance (`vp_distance`): the minimum cost of
  transforming one train into the other by spike insertion (cost 1),
  deletion (cost 1), and time shifts (cost q per day of displacement).
  Shifting is worthwhile only within 2/q days; beyond that a
  delete-plus-insert at cost 2 wins, so the per-pair cost is effectively
  min(q*|dt|, 2).

* the kernel divergence (`cs_divergence`): minus the log of the squared,
  normalized inner product of exponentially smoothed intensity functions,
  equal to zero exactly when the trains coincide and non-negative by the
  Cauchy-Schwarz inequality.  The kernel width tau (hours) plays the
  reciprocal role of q.

The exponential kernel is normalized to unit peak; any positive scale
cancels in the divergence ratio, as does the count normalization of the
cross-intensity average, so the choice is free and this is the simplest.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .spiketrain import SpikeTrain
from .timebase import DAY, HOUR

__all__ = ["VPParams", "CSParams", "vp_distance", "mci", "cs_divergence"]


@dataclass(frozen=True)
class VPParams:
    """Shift cost in inverse days: moving a spike one day costs q."""

    q_per_day: float = 100.0

    def __post_init__(self):
        if self.q_per_day < 0:
            raise ValueError("q must be non-negative")

    @property
    def q_per_second(self) -> float:
        return self.q_per_day / DAY


@dataclass(frozen=True)
class CSParams:
    """Exponential kernel width in hours."""

    tau_hours: float = 2.5

    def __post_init__(self):
        if self.tau_hours <= 0:
            raise ValueError("tau must be positive")

    @property
    def tau_seconds(self) -> float:
        return self.tau_hours * HOUR


def vp_distance(a: SpikeTrain, b: SpikeTrain, p: VPParams) -> float:
    """Minimum-cost transform between two spike trains.

    Empty trains are fine: against an empty train the distance is the
    other train's spike count (all deletions).
    """
    return float(_kernels.vp_pair(a.times, b.times, p.q_per_second))


def mci(a: SpikeTrain, b: SpikeTrain, p: CSParams) -> float:
    """Cross-intensity average: mean over spike pairs of exp(-|dt|/tau)."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("mCI undefined for empty train")
    gaps = np.abs(np.subtract.outer(a.times, b.times))
    return float(np.exp(-gaps / p.tau_seconds).mean())


def cs_divergence(a: SpikeTrain, b: SpikeTrain, p: CSParams) -> float:
    """Kernel divergence -log(I(a,b)^2 / (I(a,a) I(b,b))), always >= 0.

    Evaluated through max-shifted log-sums so widely separated trains
    cannot underflow the cross term into a bogus infinity.
    """
    if len(a) == 0 or len(b) == 0:
        raise ValueError("CS divergence undefined for empty train")
    return float(_kernels.cs_pair(a.times, b.times, p.tau_seconds))

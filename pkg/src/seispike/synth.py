"""Seeded synthetic station pairs: the ground-truth substrate for tests.

Coupling uses a mother process: a fraction of mother events appears in
both stations (with independent jitter), the rest goes to one station
only, so each station is Poisson at the base rate while the pair shares
controllable coincidences.  Episodes overwrite stretches of the record
with decoupled or rate-shifted activity and are returned as ground truth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .spiketrain import SpikeTrain
from .timebase import DAY

__all__ = ["Episode", "CoupledPair", "gen_poisson", "gen_coupled_pair"]

EPISODE_MODES = ("decouple", "rate_shift")


@dataclass(frozen=True)
class Episode:
    """A ground-truth disturbance of the coupled pair.

    decouple: shared events inside [start, end] are replaced by
    independent fills, station B at rate_scale times the base rate.
    rate_shift: coupling stays intact and station B's rate is scaled.
    """

    start: float  # seconds
    end: float
    mode: str = "decouple"
    rate_scale: float = 1.0

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError("episode must have positive length")
        if self.mode not in EPISODE_MODES:
            raise ValueError(f"unknown episode mode {self.mode!r}")
        if self.rate_scale < 0:
            raise ValueError("rate_scale must be non-negative")


@dataclass(frozen=True)
class CoupledPair:
    a: SpikeTrain
    b: SpikeTrain
    episodes: tuple[Episode, ...]


def _homogeneous(rng: np.random.Generator, rate_per_day: float,
                 t0: float, t1: float) -> np.ndarray:
    expected = rate_per_day * (t1 - t0) / DAY
    n = rng.poisson(expected)
    return rng.uniform(t0, t1, size=n)


def gen_poisson(rate_fn: Callable[[np.ndarray], np.ndarray] | float,
                interval: tuple[float, float], seed: int,
                max_rate: float | None = None,
                station_id: str = "S") -> SpikeTrain:
    """Inhomogeneous Poisson train by thinning.

    `rate_fn` maps seconds to events/day (a constant is accepted);
    `max_rate` must bound it.  Homogeneous candidates at the max rate are
    kept with probability rate_fn(t)/max_rate, which realizes the exact
    inhomogeneous law.
    """
    t0, t1 = interval
    if t1 <= t0:
        raise ValueError("interval must have positive length")
    if isinstance(rate_fn, (int, float)):
        const = float(rate_fn)
        rate_fn = lambda t: np.full_like(np.asarray(t, dtype=float), const)
        if max_rate is None:
            max_rate = const
    if max_rate is None:
        raise ValueError("max_rate is required for a function rate")
    if not (math.isfinite(max_rate) and max_rate >= 0):
        raise ValueError("max_rate must be finite and non-negative")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    if max_rate == 0:
        return SpikeTrain(station_id, (t0, t1), np.empty(0))
    candidates = _homogeneous(rng, max_rate, t0, t1)
    rates = np.asarray(rate_fn(candidates), dtype=float)
    if rates.shape != candidates.shape:
        rates = np.broadcast_to(rates, candidates.shape)
    if not np.all(np.isfinite(rates)):
        raise ValueError("rate function produced a non-finite value")
    if rates.size and rates.max() > max_rate * (1 + 1e-9):
        raise ValueError("rate function exceeds the declared maximum")
    keep = rng.uniform(0.0, max_rate, size=candidates.size) < rates
    return SpikeTrain(station_id, (t0, t1), np.sort(candidates[keep]))


def gen_coupled_pair(base_rate: float, coincidence_fraction: float,
                     jitter: float, episodes: Sequence[Episode],
                     interval: tuple[float, float], seed: int,
                     station_ids: tuple[str, str] = ("S1", "S2"),
                     ) -> CoupledPair:
    """Two stations at `base_rate` events/day sharing a coincidence fraction.

    Shared events receive independent Gaussian jitter (std `jitter`
    seconds) per station.  Episodes must be disjoint.
    """
    if not 0.0 <= coincidence_fraction <= 1.0:
        raise ValueError("coincidence_fraction must be in [0, 1]")
    if jitter < 0:
        raise ValueError("jitter must be non-negative")
    eps = sorted(episodes, key=lambda e: e.start)
    for prev, cur in zip(eps, eps[1:]):
        if cur.start < prev.end:
            raise ValueError("episodes overlap")
    t0, t1 = interval
    if t1 <= t0:
        raise ValueError("interval must have positive length")

    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    c = coincidence_fraction
    # Mother rate such that each daughter sees base_rate: shared events
    # reach both stations, solo events reach exactly one.
    mother_rate = 2.0 * base_rate / (1.0 + c)
    mother = _homogeneous(rng, mother_rate, t0, t1)
    u = rng.uniform(size=mother.size)
    shared = u < c
    solo_a = (~shared) & (u < c + (1.0 - c) / 2.0)
    solo_b = (~shared) & ~solo_a

    def jittered(times: np.ndarray) -> np.ndarray:
        if jitter == 0 or times.size == 0:
            return times.copy()
        return np.clip(times + rng.normal(0.0, jitter, size=times.size), t0, t1)

    times_a = np.concatenate([jittered(mother[shared]), mother[solo_a]])
    times_b = np.concatenate([jittered(mother[shared]), mother[solo_b]])

    for ep in eps:
        lo, hi = max(ep.start, t0), min(ep.end, t1)
        if hi <= lo:
            continue
        if ep.mode == "decouple":
            times_a = times_a[(times_a < lo) | (times_a > hi)]
            times_b = times_b[(times_b < lo) | (times_b > hi)]
            times_a = np.concatenate([times_a, _homogeneous(rng, base_rate, lo, hi)])
            times_b = np.concatenate(
                [times_b, _homogeneous(rng, base_rate * ep.rate_scale, lo, hi)])
        else:  # rate_shift: keep coupling, thin or boost station B
            inside = (times_b >= lo) & (times_b <= hi)
            if ep.rate_scale < 1.0:
                drop = inside & (rng.uniform(size=times_b.size) > ep.rate_scale)
                times_b = times_b[~drop]
            elif ep.rate_scale > 1.0:
                extra = _homogeneous(rng, base_rate * (ep.rate_scale - 1.0), lo, hi)
                times_b = np.concatenate([times_b, extra])

    a = SpikeTrain(station_ids[0], (t0, t1), np.sort(times_a))
    b = SpikeTrain(station_ids[1], (t0, t1), np.sort(times_b))
    return CoupledPair(a=a, b=b, episodes=tuple(eps))

"""SVG figures for the analysis artifacts.

SVG keeps the outputs self-contained and diffable; the hash salt and
stripped date metadata make repeated runs byte-stable.
"""
from __future__ import annotations

from datetime import datetime
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "seispike"

import matplotlib.pyplot as plt
import numpy as np

from .pipeline import Anomaly, DissimilarityProfile
from .surrogate import AcceptanceBand, Correlogram
from .timebase import DAY

__all__ = ["save_profile_plot", "save_monthly_plot", "save_correlogram_plot",
           "save_rate_plot"]

_SAVE_KW = dict(format="svg", metadata={"Date": None})


def _plot_panel(ax, profile: DissimilarityProfile, band: AcceptanceBand,
                anomalies: Sequence[Anomaly],
                events: Sequence[tuple[float, str, bool]],
                lo: float, hi: float) -> None:
    sel = (profile.positions >= lo) & (profile.positions <= hi)
    x = profile.positions[sel] / DAY
    vals = profile.values[sel]
    ax.fill_between(x, band.lower[sel], band.upper[sel],
                    color="0.8", label="acceptance band")
    ax.plot(x, vals, color="C0", lw=0.8, label="dissimilarity")
    for anomaly in anomalies:
        if anomaly.offset < lo or anomaly.onset > hi:
            continue
        mask = sel & (profile.positions >= anomaly.onset) \
            & (profile.positions <= anomaly.offset)
        ax.plot(profile.positions[mask] / DAY, profile.values[mask],
                color="C3", lw=1.6)
        ax.annotate(anomaly.label,
                    (anomaly.onset / DAY, anomaly.peak_value),
                    fontsize=7, color="C3")
    for when, label, is_main in events:
        if not lo <= when <= hi:
            continue
        ax.axvline(when / DAY, color="0.4", ls="--", lw=0.6)
        if is_main:
            ax.annotate(label, (when / DAY, ax.get_ylim()[1]),
                        fontsize=6, rotation=90, va="top", color="0.3")
    ax.set_xlim(lo / DAY, hi / DAY)
    ax.set_ylabel(profile.measure.upper())


def save_profile_plot(path, profile: DissimilarityProfile,
                      band: AcceptanceBand, anomalies: Sequence[Anomaly],
                      events: Sequence[tuple[float, str, bool]] = (),
                      epoch: Optional[datetime] = None) -> None:
    """Full-period profile with shaded band, anomaly highlights, event marks."""
    fig, ax = plt.subplots(figsize=(11, 3.2))
    if profile.positions.size:
        _plot_panel(ax, profile, band, anomalies, events,
                    profile.positions[0], profile.positions[-1])
    ax.set_xlabel(_xlabel(epoch))
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_monthly_plot(path, profile: DissimilarityProfile,
                      band: AcceptanceBand, anomalies: Sequence[Anomaly],
                      events: Sequence[tuple[float, str, bool]] = (),
                      epoch: Optional[datetime] = None,
                      panel_days: float = 30.0) -> None:
    """Profile split into stacked ~monthly panels."""
    if not profile.positions.size:
        save_profile_plot(path, profile, band, anomalies, events, epoch)
        return
    lo = profile.positions[0]
    hi = profile.positions[-1]
    n_panels = max(1, int(np.ceil((hi - lo) / (panel_days * DAY))))
    fig, axes = plt.subplots(n_panels, 1,
                             figsize=(11, 2.2 * n_panels), squeeze=False)
    for k in range(n_panels):
        p_lo = lo + k * panel_days * DAY
        p_hi = min(hi, p_lo + panel_days * DAY)
        _plot_panel(axes[k][0], profile, band, anomalies, events, p_lo, p_hi)
    axes[-1][0].set_xlabel(_xlabel(epoch))
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_correlogram_plot(path, cc: Correlogram) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(cc.lags / DAY, cc.values, marker="o", ms=3, color="C0")
    ax.axhline(0.0, color="0.6", lw=0.6)
    ax.set_xlabel("lag (days)")
    ax.set_ylabel("cross-correlation")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_rate_plot(path, grid: np.ndarray, values: np.ndarray,
                   epoch: Optional[datetime] = None) -> None:
    fig, ax = plt.subplots(figsize=(11, 3.2))
    ax.plot(grid / DAY, values, color="C0", lw=0.9)
    ax.set_xlabel(_xlabel(epoch))
    ax.set_ylabel("events / day")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def _xlabel(epoch: Optional[datetime]) -> str:
    if epoch is None:
        return "time (days)"
    return f"days since {epoch.date().isoformat()}"

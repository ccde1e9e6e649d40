"""Spike-train dissimilarity analysis of micro-earthquake station logs.

Micro-earthquake timings from two seismic stations are reduced to spike
trains and compared over a sliding window with binless dissimilarity
measures; a causal surrogate test turns the profile into statistically
significant anomalies, which are scored as warnings against a catalog of
larger target earthquakes.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .catalog import (
    Catalog,
    CatalogError,
    EarthquakeRecord,
    EventGroup,
    MicroEvent,
    MicroLog,
    filter_micro_events,
    filter_region,
    group_events,
    parse_catalog,
    parse_micro_events,
    serialize_catalog,
    serialize_micro_events,
    to_spike_train,
)
from .evaluation import (
    SummaryStats,
    WarningMatch,
    WarningReport,
    confusion,
    cross_validate,
    match_warnings,
    summary_stats,
)
from .measures import CSParams, VPParams, cs_divergence, mci, vp_distance
from .pipeline import (
    Anomaly,
    DetectionResult,
    DissimilarityProfile,
    detect,
    sliding_profile,
)
from .rates import RateProfile, estimate_rate, optimize_bandwidth
from .spiketrain import BinnedCounts, SpikeTrain, bin_counts, window
from .surrogate import (
    AcceptanceBand,
    Correlogram,
    SurrogateParams,
    acceptance_band,
    cross_correlogram,
    dither,
    quantile_normalize,
    select_dither_window,
)
from .synth import CoupledPair, Episode, gen_coupled_pair, gen_poisson

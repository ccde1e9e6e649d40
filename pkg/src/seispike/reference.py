"""Bundled reference data for the 2012 Tabriz-region study window.

The target catalog is a rectangular USGS search (latitude 35.6 to 43.1,
longitude 35.5 to 49.2, M>=4, 2012-03-15 through 2012-08-11), versioned
here as a fixture.  The grouping file assigns each record to its
main-shock group, and the two warning tables record the published
per-group precursory performance of each dissimilarity measure.
"""
from __future__ import annotations

import json
from importlib import resources

from .catalog import Catalog, EventGroup, group_events, parse_catalog

STUDY_LAT_RANGE = (35.6, 43.1)
STUDY_LON_RANGE = (35.5, 49.2)
STUDY_MIN_MAGNITUDE = 4.0


def _data_text(name: str) -> str:
    return resources.files("seispike.data").joinpath(name).read_text("utf-8")


def load_target_catalog() -> Catalog:
    """The 41 cataloged target earthquakes E1..E41."""
    return parse_catalog(_data_text("tabriz2012_targets.csv"), "generic_csv")


def load_grouping_overrides() -> list[list[str]]:
    """Explicit main-shock grouping of the target catalog (25 groups)."""
    return json.loads(_data_text("tabriz2012_grouping.json"))["groups"]


def load_reference_groups() -> list[EventGroup]:
    catalog = load_target_catalog()
    return group_events(catalog.records, overrides=load_grouping_overrides())


def load_warning_table(measure: str) -> dict:
    """Published per-group warning rows for 'vp' or 'cs'."""
    if measure not in ("vp", "cs"):
        raise ValueError(f"unknown measure {measure!r}")
    return json.loads(_data_text(f"tabriz2012_{measure}_warnings.json"))

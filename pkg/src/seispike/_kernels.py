"""Compiled inner loops shared by the measures and the sliding-window profiler.

Everything here works in raw seconds with per-second parameters; unit
conversion happens in the calling modules.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=False, nogil=True)
def vp_pair(ta, tb, q):
    """Min-cost edit distance: insert/delete cost 1, shift cost q per second.

    Standard O(Na*Nb) dynamic program with two rolling rows.
    """
    na = ta.shape[0]
    nb = tb.shape[0]
    if na == 0:
        return float(nb)
    if nb == 0:
        return float(na)
    prev = np.empty(nb + 1)
    cur = np.empty(nb + 1)
    for j in range(nb + 1):
        prev[j] = j
    for i in range(1, na + 1):
        cur[0] = i
        ti = ta[i - 1]
        for j in range(1, nb + 1):
            shift = prev[j - 1] + q * abs(ti - tb[j - 1])
            best = prev[j] + 1.0
            if cur[j - 1] + 1.0 < best:
                best = cur[j - 1] + 1.0
            if shift < best:
                best = shift
            cur[j] = best
        prev, cur = cur, prev
    return prev[nb]


@njit(cache=False, nogil=True)
def log_kernel_sum(ta, tb, tau):
    """log sum_{i,j} exp(-|ta_i - tb_j|/tau), max-shifted to dodge underflow.

    Both inputs must be non-empty.
    """
    na = ta.shape[0]
    nb = tb.shape[0]
    dmin = abs(ta[0] - tb[0])
    for i in range(na):
        for j in range(nb):
            d = abs(ta[i] - tb[j])
            if d < dmin:
                dmin = d
    total = 0.0
    for i in range(na):
        for j in range(nb):
            total += np.exp(-(abs(ta[i] - tb[j]) - dmin) / tau)
    return -dmin / tau + np.log(total)


@njit(cache=False, nogil=True)
def cs_pair(ta, tb, tau):
    """Kernel divergence between two non-empty spike-time arrays.

    log I(a,a) + log I(b,b) - 2 log I(a,b) with the count normalizations
    cancelling exactly; clamped at zero against rounding.
    """
    value = (log_kernel_sum(ta, ta, tau) + log_kernel_sum(tb, tb, tau)
             - 2.0 * log_kernel_sum(ta, tb, tau))
    if value < 0.0:
        value = 0.0
    return value


@njit(cache=False, nogil=True)
def vp_profile(ta, tb, positions, window_length, q):
    """Shift-cost distance over sliding windows; windows are closed intervals."""
    out = np.empty(positions.shape[0])
    for k in range(positions.shape[0]):
        start = positions[k]
        end = start + window_length
        a_lo = np.searchsorted(ta, start, side="left")
        a_hi = np.searchsorted(ta, end, side="right")
        b_lo = np.searchsorted(tb, start, side="left")
        b_hi = np.searchsorted(tb, end, side="right")
        out[k] = vp_pair(ta[a_lo:a_hi], tb[b_lo:b_hi], q)
    return out


@njit(cache=False, nogil=True)
def cs_profile(ta, tb, positions, window_length, tau):
    """Kernel divergence over sliding windows; NaN where either window is empty."""
    out = np.empty(positions.shape[0])
    for k in range(positions.shape[0]):
        start = positions[k]
        end = start + window_length
        a_lo = np.searchsorted(ta, start, side="left")
        a_hi = np.searchsorted(ta, end, side="right")
        b_lo = np.searchsorted(tb, start, side="left")
        b_hi = np.searchsorted(tb, end, side="right")
        if a_hi == a_lo or b_hi == b_lo:
            out[k] = np.nan
        else:
            out[k] = cs_pair(ta[a_lo:a_hi], tb[b_lo:b_hi], tau)
    return out

"""Compensated summation helpers.

``math.fsum`` covers one-shot totals. The helpers here cover the two shapes
it does not: running prefix sums (kept as double-double pairs so that level
jumps can be recovered exactly) and many independent segment sums at once.
"""

import numpy as np


def two_sum(a, b):
    """Error-free transformation: returns (s, e) with s + e == a + b exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def compensated_cumsum(values):
    """Prefix sums ``P[i] = sum(values[:i])`` as a double-double pair.

    Returns two float arrays ``(hi, lo)`` of length ``len(values) + 1``;
    ``hi + lo`` carries the prefix to roughly twice double precision.
    """
    vals = np.asarray(values, dtype=float)
    hi = np.zeros(vals.size + 1)
    lo = np.zeros(vals.size + 1)
    s, c = 0.0, 0.0
    for i, v in enumerate(vals.tolist()):
        s, e = two_sum(s, v)
        c += e
        # renormalize so that hi is the rounded value of the pair
        s, c = two_sum(s, c)
        hi[i + 1] = s
        lo[i + 1] = c
    return hi, lo


def segmented_sum(values, segment_ids, n_segments):
    """Neumaier-compensated sum of ``values`` grouped by ``segment_ids``.

    ``segment_ids`` must be sorted ascending (values of one segment are
    contiguous). Elements are fed to their accumulators in rank order so
    every vectorized update touches each segment at most once.
    """
    vals = np.asarray(values, dtype=float)
    seg = np.asarray(segment_ids, dtype=np.int64)
    total = np.zeros(n_segments)
    comp = np.zeros(n_segments)
    if vals.size == 0:
        return total
    if np.any(np.diff(seg) < 0):
        raise ValueError("segment_ids must be sorted")
    starts = np.searchsorted(seg, np.arange(n_segments), side="left")
    rank = np.arange(seg.size) - starts[seg]
    order = np.argsort(rank, kind="stable")
    bounds = np.concatenate([[0], np.cumsum(np.bincount(rank))])
    for r in range(bounds.size - 1):
        idx = order[bounds[r]:bounds[r + 1]]
        g = seg[idx]
        v = vals[idx]
        s = total[g]
        t = s + v
        comp[g] += np.where(np.abs(s) >= np.abs(v), (s - t) + v, (v - t) + s)
        total[g] = t
    return total + comp

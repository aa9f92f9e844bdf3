"""Signal similarity metrics.

The contact-decision statistic compares one scan against one processed range
vector: the id overlap ratio O (shared ids over the smaller id set) divided by
one plus the mean out-of-range RSSI distance D of the shared ids. It lands in
[0, 1]; 1 means every shared RSSI sits inside its range and the smaller id set
is fully covered.

Jaccard, average Manhattan distance (AMD) and average Euclidean distance (AED)
are the scan-to-scan baselines used for comparison; AMD/AED fill ids missing
on one side with the -100 dBm floor.
"""

from __future__ import annotations

import math

from .model import RSSI_FLOOR, ProcessedVector, SignalVector


def overlap_ratio(a: SignalVector, p: ProcessedVector) -> float:
    """|shared ids| / min(|a.ids|, |p.ids|); 0 if either side is empty."""
    if not a.readings or not p.ranges:
        return 0.0
    shared = a.ids & p.ids
    return len(shared) / min(len(a.readings), len(p.ranges))


def rssi_difference(a: SignalVector, p: ProcessedVector) -> float | None:
    """Mean out-of-range distance of shared ids' RSSIs.

    A reading inside its range contributes 0; below the range it contributes
    (min - rssi); above, (rssi - max). Returns None when no ids are shared
    (callers map that to zero similarity).
    """
    shared = a.ids & p.ids
    if not shared:
        return None
    total = 0
    for sid in shared:
        rssi = a.readings[sid]
        lo, hi = p.ranges[sid]
        if rssi < lo:
            total += lo - rssi
        elif rssi > hi:
            total += rssi - hi
    return total / len(shared)


def signal_similarity(a: SignalVector, p: ProcessedVector) -> float:
    """Contact-decision similarity O / (D + 1) in [0, 1]; 0 for disjoint ids."""
    d = rssi_difference(a, p)
    if d is None:
        return 0.0
    return overlap_ratio(a, p) / (d + 1.0)


def jaccard(a: SignalVector, b: SignalVector) -> float:
    """|a.ids & b.ids| / |a.ids | b.ids|; 0 when both are empty."""
    union = a.ids | b.ids
    if not union:
        return 0.0
    return len(a.ids & b.ids) / len(union)


def _filled_diffs(a: SignalVector, b: SignalVector) -> list[int]:
    union = a.ids | b.ids
    if not union:
        raise ValueError("both vectors are empty, distance undefined")
    return [
        a.readings.get(sid, RSSI_FLOOR) - b.readings.get(sid, RSSI_FLOOR)
        for sid in union
    ]


def _denominator(a: SignalVector, b: SignalVector, denominator: str) -> int:
    if denominator == "union":
        return len(a.ids | b.ids)
    if denominator == "shared":
        return len(a.ids & b.ids)
    raise ValueError(f"denominator must be 'union' or 'shared', got {denominator!r}")


def amd(a: SignalVector, b: SignalVector, denominator: str = "union") -> float:
    """Average Manhattan distance with -100 fill for ids missing on one side.

    With the default denominator every id in the union counts (after filling,
    all of them overlap). ``denominator="shared"`` divides by the pre-fill
    shared-id count instead, and returns inf when no ids are shared.
    """
    diffs = _filled_diffs(a, b)
    n = _denominator(a, b, denominator)
    if n == 0:
        return math.inf
    return sum(abs(d) for d in diffs) / n


def aed(a: SignalVector, b: SignalVector, denominator: str = "union") -> float:
    """Average Euclidean distance; same fill and denominator rules as amd()."""
    diffs = _filled_diffs(a, b)
    n = _denominator(a, b, denominator)
    if n == 0:
        return math.inf
    return math.sqrt(sum(d * d for d in diffs)) / n

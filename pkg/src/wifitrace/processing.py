"""Turn discrete scan profiles into continuous processed profiles.

Scans arrive sporadically, so a published profile cannot be matched at
arbitrary times as-is. Two constructions close the gap:

* the with-app path pairs consecutive scans into per-AP RSSI ranges, one
  segment per scan pair, each valid until the next scan plus the virus
  lifespan for that slot;
* the infected-area path aggregates a whole survey walk into a single
  min/max range vector valid for the case's stay plus the lifespan.
"""

from __future__ import annotations

import logging

from .model import (
    RSSI_FLOOR,
    InsufficientDataError,
    LifespanSchedule,
    ProcessedProfile,
    ProcessedVector,
    ProfileSegment,
    SignalProfile,
    SignalVector,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_GAP = 600  # seconds between scans above which no segment is built


def build_processed_vector(a: SignalVector, b: SignalVector) -> ProcessedVector:
    """Range vector over the union of two scans' ids.

    Ids seen in both scans get (min, max) of the two readings; ids seen in
    only one get a range opening at the weak-signal floor. Symmetric in its
    arguments.
    """
    ranges: dict = {}
    for sid, rssi in a.readings.items():
        other = b.readings.get(sid)
        if other is None:
            ranges[sid] = (RSSI_FLOOR, rssi)
        else:
            ranges[sid] = (min(rssi, other), max(rssi, other))
    for sid, rssi in b.readings.items():
        if sid not in ranges:
            ranges[sid] = (RSSI_FLOOR, rssi)
    return ProcessedVector(ranges)


def build_case_profile(
    walk: SignalProfile,
    lifespans: LifespanSchedule,
    max_gap: int = DEFAULT_MAX_GAP,
    case_label: str = "",
) -> ProcessedProfile:
    """Processed profile for a confirmed case with the app installed.

    Consecutive scans (A_i at t_i, A_{i+1} at t_{i+1}) form segment i with
    window [t_i, t_{i+1} + lifespan_i]. Pairs further apart than ``max_gap``
    seconds are skipped (device off or carried far away) with a logged note;
    skipping never raises.

    Raises:
        InsufficientDataError: fewer than two scans.
        ValueError: per-segment lifespan list of the wrong length.
    """
    n = len(walk.vectors)
    if n < 2:
        raise InsufficientDataError(
            f"need at least 2 scans to build a case profile, got {n}"
        )
    if lifespans.per_segment is not None and len(lifespans.per_segment) != n - 1:
        raise ValueError(
            f"per-segment lifespan list has {len(lifespans.per_segment)} entries, "
            f"profile with {n} scans needs {n - 1}"
        )
    segments = []
    for i in range(n - 1):
        a, b = walk.vectors[i], walk.vectors[i + 1]
        if b.timestamp - a.timestamp > max_gap:
            logger.info(
                "skipping scan pair %d: gap %ds exceeds max_gap %ds",
                i, b.timestamp - a.timestamp, max_gap,
            )
            continue
        segments.append(
            ProfileSegment(
                vector=build_processed_vector(a, b),
                t_start=a.timestamp,
                t_end=b.timestamp + lifespans.lifespan_for(i),
            )
        )
    return ProcessedProfile(segments, case_label=case_label)


def build_area_profile(
    survey: SignalProfile,
    stay_start: int,
    stay_end: int,
    lifespan: int,
    case_label: str = "",
) -> ProcessedProfile:
    """Processed profile for an infected area from a survey walk.

    Every id scanned anywhere in the walk gets the (min, max) of its observed
    RSSIs; ids absent from some scans are not padded with the floor value.
    The single segment is valid from the case's arrival until departure plus
    the lifespan.

    Raises:
        InsufficientDataError: empty survey walk.
        ValueError: stay_start not before stay_end, or negative lifespan.
    """
    if len(survey.vectors) == 0:
        raise InsufficientDataError("survey profile has no scans")
    if stay_start >= stay_end:
        raise ValueError(f"stay window [{stay_start}, {stay_end}] is empty")
    if lifespan < 0:
        raise ValueError("lifespan must be >= 0")
    ranges: dict = {}
    for vec in survey.vectors:
        for sid, rssi in vec.readings.items():
            lo, hi = ranges.get(sid, (rssi, rssi))
            ranges[sid] = (min(lo, rssi), max(hi, rssi))
    segment = ProfileSegment(
        vector=ProcessedVector(ranges),
        t_start=stay_start,
        t_end=stay_end + lifespan,
    )
    return ProcessedProfile([segment], case_label=case_label)

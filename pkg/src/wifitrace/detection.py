"""Contact detection against published processed profiles.

Per-timestamp matching: a user's scan at time t is checked against every
published segment whose validity window contains t; the first segment whose
similarity reaches the threshold flags the timestamp as a contact (matching
stops there, which never changes the boolean outcome, only which segment gets
recorded).

Close-contact aggregation: a sliding time window of configurable length is
passed over the flags; wherever the true flags inside some window placement
amount to at least the minimum exposure (true-flag count times the sampling
period), those flags join an episode, and overlapping qualifying windows merge
into maximal episodes.
"""

from __future__ import annotations

import math
import urllib.parse
from dataclasses import dataclass
from typing import Sequence

from .model import ProcessedProfile, SignalProfile
from .similarity import signal_similarity


@dataclass(frozen=True)
class DetectionConfig:
    """Thresholds and timing for detection and aggregation.

    alpha is the similarity threshold in (0, 1]. The defaults implement the
    5-of-10-minutes close-contact rule at a 1-minute scan cadence.
    """

    alpha: float = 0.2
    window_length: int = 600
    min_exposure: int = 300
    sampling_period: int = 60

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        for name in ("window_length", "min_exposure", "sampling_period"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.min_exposure > self.window_length:
            raise ValueError("min_exposure cannot exceed window_length")

    @property
    def min_true_flags(self) -> int:
        """True flags needed inside one window to qualify."""
        return math.ceil(self.min_exposure / self.sampling_period)


@dataclass(frozen=True)
class ContactFlag:
    """Detection outcome for one user scan."""

    timestamp: int
    in_contact: bool
    best_score: float
    matched_segment: int | None = None
    matched_case: str | None = None


@dataclass(frozen=True)
class ContactEpisode:
    """A maximal close-contact stretch satisfying the sliding-window rule."""

    start: int
    end: int
    case_label: str
    contact_minutes: float


@dataclass(frozen=True)
class ContactReport:
    flags: Sequence[ContactFlag]
    episodes: Sequence[ContactEpisode]

    def __post_init__(self) -> None:
        object.__setattr__(self, "flags", tuple(self.flags))
        object.__setattr__(self, "episodes", tuple(self.episodes))

    def summary(self) -> dict:
        return {
            "flags": len(self.flags),
            "contacts": sum(1 for f in self.flags if f.in_contact),
            "episodes": len(self.episodes),
            "exposure_minutes": sum(e.contact_minutes for e in self.episodes),
        }


def detect_contacts(
    user: SignalProfile,
    published: Sequence[ProcessedProfile],
    cfg: DetectionConfig,
) -> list[ContactFlag]:
    """Flag each user scan against every published profile.

    For a scan at t, segments are tried in input order (profiles first, then
    their segments); only segments whose window contains t are scored. The
    first score >= alpha produces a true flag recording that score, segment
    index and case label. Otherwise the flag is false and carries the best
    score seen (0 if no window contained t).

    Output has exactly one flag per user scan, in timestamp order.
    """
    flags: list[ContactFlag] = []
    for vec in user.vectors:
        t = vec.timestamp
        best = 0.0
        flag = None
        for profile in published:
            for seg_idx, seg in enumerate(profile.segments):
                if not seg.covers(t):
                    continue
                score = signal_similarity(vec, seg.vector)
                if score > best:
                    best = score
                if score >= cfg.alpha:
                    flag = ContactFlag(t, True, score, seg_idx, profile.case_label)
                    break
            if flag is not None:
                break
        if flag is None:
            flag = ContactFlag(t, False, best)
        flags.append(flag)
    return flags


def _merge_closed_intervals(
    intervals: list[tuple[int, int]],
) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def aggregate_episodes(
    flags: Sequence[ContactFlag], cfg: DetectionConfig
) -> ContactReport:
    """Apply the sliding-window close-contact rule to timestamped flags.

    A window placement [w, w + window_length] qualifies when it contains at
    least min_exposure / sampling_period true flags; every true flag inside a
    qualifying placement joins an episode, and placements whose windows
    overlap in time merge into one maximal episode. Episode duration is
    counted as true flags times the sampling period (exact at the fixed scan
    cadence and well defined under missing samples).
    """
    for prev, cur in zip(flags, flags[1:]):
        if cur.timestamp <= prev.timestamp:
            raise ValueError("flags must be ordered by timestamp")
    trues = [f for f in flags if f.in_contact]
    m = cfg.min_true_flags
    length = cfg.window_length

    # Each run of m consecutive true flags spanning <= window_length admits
    # the qualifying placements [t_last - L, t_first]; such windows cover the
    # time interval [t_last - L, t_first + L].
    covered: list[tuple[int, int]] = []
    for j in range(len(trues) - m + 1):
        first, last = trues[j].timestamp, trues[j + m - 1].timestamp
        if last - first <= length:
            covered.append((last - length, first + length))

    episodes: list[ContactEpisode] = []
    for lo, hi in _merge_closed_intervals(covered):
        members = [f for f in trues if lo <= f.timestamp <= hi]
        episodes.append(
            ContactEpisode(
                start=members[0].timestamp,
                end=members[-1].timestamp,
                case_label=members[0].matched_case or "",
                contact_minutes=len(members) * cfg.sampling_period / 60.0,
            )
        )
    return ContactReport(flags=flags, episodes=episodes)


def match_and_notify(
    user: SignalProfile,
    published: Sequence[ProcessedProfile],
    cfg: DetectionConfig,
) -> ContactReport:
    """Full pipeline: per-timestamp detection, then episode aggregation."""
    return aggregate_episodes(detect_contacts(user, published, cfg), cfg)


def _quote(label: str | None) -> str:
    if label is None or label == "":
        return "-"
    return urllib.parse.quote(label, safe="")


def serialize_report(report: ContactReport) -> bytes:
    """Line-oriented report: one flag line per timestamp, one episode line
    per episode, one trailing summary line."""
    lines = ["vcontact-report/1"]
    for f in report.flags:
        seg = f.matched_segment if f.matched_segment is not None else "-"
        lines.append(
            f"flag t={f.timestamp} contact={int(f.in_contact)} "
            f"score={f.best_score!r} segment={seg} case={_quote(f.matched_case)}"
        )
    for e in report.episodes:
        lines.append(
            f"episode start={e.start} end={e.end} "
            f"minutes={e.contact_minutes!r} case={_quote(e.case_label)}"
        )
    s = report.summary()
    lines.append(
        f"summary flags={s['flags']} contacts={s['contacts']} "
        f"episodes={s['episodes']} exposure_minutes={s['exposure_minutes']!r}"
    )
    return ("\n".join(lines) + "\n").encode("utf-8")

"""Core data types for WiFi-scan contact detection.

A scan produces a :class:`SignalVector`: the set of access points heard at one
instant, keyed by a salted one-way hash of the AP MAC address, with integer
RSSIs in dBm. A device accumulates scans into a :class:`SignalProfile`.
Published artifacts are :class:`ProcessedProfile` objects, whose per-AP RSSI
*ranges* summarize an interval (or a surveyed area) and whose validity windows
are extended by the virus lifespan.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

RSSI_FLOOR = -100  # weak-signal floor in dBm; one-sided ranges open here
RSSI_CEIL = 0

_MAC_RE = re.compile(r"^[0-9A-F]{2}(?::[0-9A-F]{2}){5}$")


class InsufficientDataError(ValueError):
    """Raised when an operation needs more scan data than was supplied."""


@dataclass(frozen=True, order=True)
class SignalId:
    """Opaque 32-byte digest identifying one access point."""

    value: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.value, bytes) or len(self.value) != 32:
            raise ValueError("SignalId value must be a 32-byte digest")

    @classmethod
    def from_hex(cls, text: str) -> "SignalId":
        return cls(bytes.fromhex(text))

    @property
    def hex(self) -> str:
        return self.value.hex()

    def __repr__(self) -> str:
        return f"SignalId({self.value.hex()[:12]}..)"


def hash_mac(mac: str, salt: bytes) -> SignalId:
    """One-way hash of a canonical AP MAC address.

    Args:
        mac: 6-octet colon-separated uppercase hex, e.g. "AA:BB:CC:DD:EE:FF".
        salt: deployment-wide salt, prepended before hashing so public MAC
            lists cannot be reversed by dictionary lookup.

    Returns:
        Deterministic SignalId; same (mac, salt) always yields the same id.

    Raises:
        ValueError: if the MAC string is not in canonical form.
    """
    if not isinstance(mac, str) or not _MAC_RE.match(mac):
        raise ValueError(f"not a canonical MAC address: {mac!r}")
    if not isinstance(salt, bytes):
        raise ValueError("salt must be bytes")
    return SignalId(hashlib.sha256(salt + mac.encode("ascii")).digest())


def clamp_rssi(raw: int) -> int:
    """Clamp a raw dBm reading into [RSSI_FLOOR, RSSI_CEIL]."""
    return min(RSSI_CEIL, max(RSSI_FLOOR, int(raw)))


@dataclass(frozen=True)
class SignalVector:
    """One scan: AP ids with their RSSIs, at one timestamp.

    RSSIs are clamped into [-100, 0] at construction; each id appears once
    (enforced by the mapping).
    """

    readings: Mapping[SignalId, int]
    timestamp: int

    def __post_init__(self) -> None:
        clamped = {sid: clamp_rssi(rssi) for sid, rssi in self.readings.items()}
        object.__setattr__(self, "readings", MappingProxyType(clamped))
        object.__setattr__(self, "timestamp", int(self.timestamp))

    @property
    def ids(self) -> frozenset[SignalId]:
        return frozenset(self.readings)

    def __len__(self) -> int:
        return len(self.readings)


@dataclass(frozen=True)
class SignalProfile:
    """Time-ordered sequence of scans from one device or one survey walk."""

    vectors: Sequence[SignalVector]
    device_tag: str = ""

    def __post_init__(self) -> None:
        vectors = tuple(self.vectors)
        for prev, cur in zip(vectors, vectors[1:]):
            if cur.timestamp <= prev.timestamp:
                raise ValueError(
                    "timestamps must be strictly increasing "
                    f"({prev.timestamp} followed by {cur.timestamp})"
                )
        object.__setattr__(self, "vectors", vectors)

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class ProcessedVector:
    """Per-AP RSSI (min, max) ranges summarizing an interval or an area."""

    ranges: Mapping[SignalId, tuple[int, int]]

    def __post_init__(self) -> None:
        canon: dict[SignalId, tuple[int, int]] = {}
        for sid, (lo, hi) in self.ranges.items():
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise ValueError(f"rssiMin {lo} > rssiMax {hi} for {sid!r}")
            if lo < RSSI_FLOOR:
                raise ValueError(f"rssiMin {lo} below floor {RSSI_FLOOR} for {sid!r}")
            if hi > RSSI_CEIL:
                raise ValueError(f"rssiMax {hi} above {RSSI_CEIL} for {sid!r}")
            canon[sid] = (lo, hi)
        object.__setattr__(self, "ranges", MappingProxyType(canon))

    @property
    def ids(self) -> frozenset[SignalId]:
        return frozenset(self.ranges)

    def __len__(self) -> int:
        return len(self.ranges)


@dataclass(frozen=True)
class ProfileSegment:
    """A processed vector with its lifespan-extended validity window."""

    vector: ProcessedVector
    t_start: int
    t_end: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_start", int(self.t_start))
        object.__setattr__(self, "t_end", int(self.t_end))
        if self.t_start >= self.t_end:
            raise ValueError(f"tStart {self.t_start} must precede tEnd {self.t_end}")

    def covers(self, t: int) -> bool:
        return self.t_start <= t <= self.t_end


@dataclass(frozen=True)
class ProcessedProfile:
    """The published artifact of a confirmed case or infected area.

    Segments are ordered by t_start and may overlap in time (consecutive
    lifespan extensions usually do).
    """

    segments: Sequence[ProfileSegment]
    case_label: str = ""

    def __post_init__(self) -> None:
        segments = tuple(self.segments)
        for prev, cur in zip(segments, segments[1:]):
            if cur.t_start < prev.t_start:
                raise ValueError(
                    "segments must be ordered by tStart "
                    f"({prev.t_start} followed by {cur.t_start})"
                )
        object.__setattr__(self, "segments", segments)

    def __len__(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class LifespanSchedule:
    """Virus lifespan per processed segment, in seconds.

    When ``per_segment`` is given for a profile with n vectors it must hold
    n - 1 entries; otherwise every segment uses ``default``.
    """

    default: int = 1800
    per_segment: Sequence[int] | None = None

    def __post_init__(self) -> None:
        if self.default < 0:
            raise ValueError("default lifespan must be >= 0")
        if self.per_segment is not None:
            per = tuple(int(t) for t in self.per_segment)
            if any(t < 0 for t in per):
                raise ValueError("lifespans must be >= 0")
            object.__setattr__(self, "per_segment", per)

    def lifespan_for(self, segment_index: int) -> int:
        if self.per_segment is None:
            return self.default
        return self.per_segment[segment_index]


def _sorted_ids(ids) -> list[SignalId]:
    return sorted(ids, key=lambda s: s.value)


# shared by serialization and the similarity metrics
def sorted_readings(vec: SignalVector) -> list[tuple[SignalId, int]]:
    return [(sid, vec.readings[sid]) for sid in _sorted_ids(vec.readings)]


def sorted_ranges(pv: ProcessedVector) -> list[tuple[SignalId, tuple[int, int]]]:
    return [(sid, pv.ranges[sid]) for sid in _sorted_ids(pv.ranges)]

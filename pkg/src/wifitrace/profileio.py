"""Profile file format: canonical, line-oriented, append-friendly.

Both profile kinds share the layout::

    vcontact/1 signal [label=<percent-encoded>]
    t=<epoch> <id_hex>:<rssi> <id_hex>:<rssi> ...

    vcontact/1 processed [label=<percent-encoded>]
    t=<start>..<end> <id_hex>:<min>..<max> ...

Fields are space-separated, ids sorted lexicographically, segments ordered by
start time. Serialization is byte-for-byte stable for a given profile, and
``parse_profile(serialize_profile(p)) == p``.
"""

from __future__ import annotations

import urllib.parse

from .model import (
    ProcessedProfile,
    ProcessedVector,
    ProfileSegment,
    SignalId,
    SignalProfile,
    SignalVector,
    sorted_ranges,
    sorted_readings,
)

MAGIC = "vcontact/1"
KIND_SIGNAL = "signal"
KIND_PROCESSED = "processed"


class ProfileFormatError(ValueError):
    """Parse failure; the message names the offending line and field."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def _header(kind: str, label: str) -> str:
    if label:
        return f"{MAGIC} {kind} label={urllib.parse.quote(label, safe='')}"
    return f"{MAGIC} {kind}"


def serialize_profile(profile: SignalProfile | ProcessedProfile) -> bytes:
    """Serialize a profile to its canonical UTF-8 byte form."""
    lines: list[str] = []
    if isinstance(profile, SignalProfile):
        lines.append(_header(KIND_SIGNAL, profile.device_tag))
        for vec in profile.vectors:
            tokens = [f"t={vec.timestamp}"]
            tokens += [f"{sid.hex}:{rssi}" for sid, rssi in sorted_readings(vec)]
            lines.append(" ".join(tokens))
    elif isinstance(profile, ProcessedProfile):
        lines.append(_header(KIND_PROCESSED, profile.case_label))
        for seg in profile.segments:
            tokens = [f"t={seg.t_start}..{seg.t_end}"]
            tokens += [
                f"{sid.hex}:{lo}..{hi}" for sid, (lo, hi) in sorted_ranges(seg.vector)
            ]
            lines.append(" ".join(tokens))
    else:
        raise TypeError(f"not a profile: {type(profile).__name__}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _parse_id(token: str, line_no: int) -> SignalId:
    try:
        sid = SignalId.from_hex(token)
    except ValueError:
        raise ProfileFormatError(f"bad signal id {token!r}", line_no) from None
    return sid


def _parse_int(token: str, what: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ProfileFormatError(f"bad {what} {token!r}", line_no) from None


def _split_range(token: str, what: str, line_no: int) -> tuple[int, int]:
    parts = token.split("..")
    if len(parts) != 2:
        raise ProfileFormatError(f"bad {what} {token!r} (want <a>..<b>)", line_no)
    return (
        _parse_int(parts[0], what, line_no),
        _parse_int(parts[1], what, line_no),
    )


def _parse_signal_record(line: str, line_no: int) -> SignalVector:
    tokens = line.split(" ")
    if not tokens[0].startswith("t="):
        raise ProfileFormatError("record must start with t=<epoch>", line_no)
    ts = _parse_int(tokens[0][2:], "timestamp", line_no)
    readings: dict[SignalId, int] = {}
    for token in tokens[1:]:
        id_part, sep, rssi_part = token.partition(":")
        if not sep:
            raise ProfileFormatError(f"bad reading {token!r} (want id:rssi)", line_no)
        sid = _parse_id(id_part, line_no)
        if sid in readings:
            raise ProfileFormatError(f"duplicate signal id {id_part!r}", line_no)
        readings[sid] = _parse_int(rssi_part, "rssi", line_no)
    return SignalVector(readings, ts)


def _parse_processed_record(line: str, line_no: int) -> ProfileSegment:
    tokens = line.split(" ")
    if not tokens[0].startswith("t="):
        raise ProfileFormatError("record must start with t=<start>..<end>", line_no)
    t_start, t_end = _split_range(tokens[0][2:], "time window", line_no)
    ranges: dict[SignalId, tuple[int, int]] = {}
    for token in tokens[1:]:
        id_part, sep, range_part = token.partition(":")
        if not sep:
            raise ProfileFormatError(
                f"bad range {token!r} (want id:min..max)", line_no
            )
        sid = _parse_id(id_part, line_no)
        if sid in ranges:
            raise ProfileFormatError(f"duplicate signal id {id_part!r}", line_no)
        ranges[sid] = _split_range(range_part, "rssi range", line_no)
    try:
        vector = ProcessedVector(ranges)
        return ProfileSegment(vector, t_start, t_end)
    except ValueError as exc:
        raise ProfileFormatError(str(exc), line_no) from None


def parse_profile(data: bytes) -> SignalProfile | ProcessedProfile:
    """Parse profile bytes, rejecting any invariant violation.

    Raises:
        ProfileFormatError: malformed bytes or violated invariants, with a
            diagnostic naming the offending line and field.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProfileFormatError(f"not UTF-8: {exc}") from None
    lines = text.splitlines()
    if not lines:
        raise ProfileFormatError("empty input, missing header", 1)

    head = lines[0].split(" ")
    if len(head) < 2 or head[0] != MAGIC or head[1] not in (KIND_SIGNAL, KIND_PROCESSED):
        raise ProfileFormatError(
            f"bad header {lines[0]!r} (want '{MAGIC} signal|processed')", 1
        )
    label = ""
    if len(head) == 3 and head[2].startswith("label="):
        label = urllib.parse.unquote(head[2][len("label="):])
    elif len(head) > 2:
        raise ProfileFormatError(f"unexpected header fields {head[2:]!r}", 1)

    records = [(i + 2, line) for i, line in enumerate(lines[1:]) if line]
    try:
        if head[1] == KIND_SIGNAL:
            vectors = [_parse_signal_record(line, no) for no, line in records]
            return SignalProfile(vectors, device_tag=label)
        segments = [_parse_processed_record(line, no) for no, line in records]
        return ProcessedProfile(segments, case_label=label)
    except ProfileFormatError:
        raise
    except ValueError as exc:
        # profile-level invariant (timestamp order, segment order)
        raise ProfileFormatError(str(exc)) from None


def write_profile(path, profile: SignalProfile | ProcessedProfile) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_profile(profile))


def read_profile(path) -> SignalProfile | ProcessedProfile:
    with open(path, "rb") as fh:
        return parse_profile(fh.read())

"""Decentralized WiFi-scan contact detection with virus lifespan.

Scans are matched against published, lifespan-annotated signal-range
profiles; sustained matches become close-contact episodes. Includes a
synthetic radio simulator and an evaluation harness for desk-scale
experiments, plus a minimal publish/fetch exchange service.
"""

from .detection import (
    ContactEpisode,
    ContactFlag,
    ContactReport,
    DetectionConfig,
    aggregate_episodes,
    detect_contacts,
    match_and_notify,
    serialize_report,
)
from .model import (
    RSSI_CEIL,
    RSSI_FLOOR,
    InsufficientDataError,
    LifespanSchedule,
    ProcessedProfile,
    ProcessedVector,
    ProfileSegment,
    SignalId,
    SignalProfile,
    SignalVector,
    clamp_rssi,
    hash_mac,
)
from .processing import (
    build_area_profile,
    build_case_profile,
    build_processed_vector,
)
from .profileio import (
    ProfileFormatError,
    parse_profile,
    read_profile,
    serialize_profile,
    write_profile,
)
from .similarity import (
    aed,
    amd,
    jaccard,
    overlap_ratio,
    rssi_difference,
    signal_similarity,
)

__version__ = "0.1.0"

__all__ = [
    "ContactEpisode", "ContactFlag", "ContactReport", "DetectionConfig",
    "InsufficientDataError", "LifespanSchedule", "ProcessedProfile",
    "ProcessedVector", "ProfileFormatError", "ProfileSegment",
    "RSSI_CEIL", "RSSI_FLOOR", "SignalId", "SignalProfile", "SignalVector",
    "aed", "aggregate_episodes", "amd", "build_area_profile",
    "build_case_profile", "build_processed_vector", "clamp_rssi",
    "detect_contacts", "hash_mac", "jaccard", "match_and_notify",
    "overlap_ratio", "parse_profile", "read_profile", "rssi_difference",
    "serialize_profile", "serialize_report", "signal_similarity",
    "write_profile",
]

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wifitrace.model import (
    RSSI_CEIL,
    RSSI_FLOOR,
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

from conftest import ID_POOL

MAC = "AA:BB:CC:DD:EE:FF"


class TestHashMac:
    def test_deterministic(self):
        assert hash_mac(MAC, b"s") == hash_mac(MAC, b"s")

    def test_distinct_macs_distinct_ids(self):
        assert hash_mac(MAC, b"s") != hash_mac("AA:BB:CC:DD:EE:F0", b"s")

    def test_distinct_salts_distinct_ids(self):
        assert hash_mac(MAC, b"s1") != hash_mac(MAC, b"s2")

    def test_digest_is_32_bytes(self):
        assert len(hash_mac(MAC, b"s").value) == 32

    @pytest.mark.parametrize("bad", [
        "aa:bb:cc:dd:ee:ff",      # lowercase
        "AA-BB-CC-DD-EE-FF",      # wrong separator
        "AA:BB:CC:DD:EE",         # five octets
        "AA:BB:CC:DD:EE:FF:00",   # seven octets
        "AABB:CC:DD:EE:FF",       # malformed octet
        "",
    ])
    def test_rejects_non_canonical(self, bad):
        with pytest.raises(ValueError):
            hash_mac(bad, b"s")

    def test_hex_round_trip(self):
        sid = hash_mac(MAC, b"s")
        assert SignalId.from_hex(sid.hex) == sid


class TestClampRssi:
    def test_in_range_passthrough(self):
        assert clamp_rssi(-60) == -60

    def test_floor(self):
        assert clamp_rssi(-120) == -100

    def test_ceiling(self):
        assert clamp_rssi(5) == 0

    @given(st.integers(-10_000, 10_000))
    def test_always_in_bounds(self, raw):
        assert RSSI_FLOOR <= clamp_rssi(raw) <= RSSI_CEIL


class TestSignalVector:
    def test_clamps_at_ingest(self):
        vec = SignalVector({ID_POOL[0]: -130, ID_POOL[1]: 7}, 0)
        assert vec.readings[ID_POOL[0]] == -100
        assert vec.readings[ID_POOL[1]] == 0

    def test_readings_immutable(self):
        vec = SignalVector({ID_POOL[0]: -50}, 0)
        with pytest.raises(TypeError):
            vec.readings[ID_POOL[1]] = -60


class TestSignalProfile:
    def test_rejects_non_increasing_timestamps(self):
        v1 = SignalVector({ID_POOL[0]: -50}, 100)
        v2 = SignalVector({ID_POOL[0]: -55}, 100)
        with pytest.raises(ValueError, match="strictly increasing"):
            SignalProfile([v1, v2])

    def test_empty_ok(self):
        assert len(SignalProfile([])) == 0


class TestProcessedTypes:
    def test_min_above_max_rejected(self):
        with pytest.raises(ValueError, match="rssiMin"):
            ProcessedVector({ID_POOL[0]: (-40, -50)})

    def test_below_floor_rejected(self):
        with pytest.raises(ValueError, match="floor"):
            ProcessedVector({ID_POOL[0]: (-120, -50)})

    def test_segment_needs_forward_window(self):
        pv = ProcessedVector({ID_POOL[0]: (-60, -50)})
        with pytest.raises(ValueError):
            ProfileSegment(pv, 100, 100)

    def test_segments_ordered_by_start(self):
        pv = ProcessedVector({ID_POOL[0]: (-60, -50)})
        with pytest.raises(ValueError, match="ordered"):
            ProcessedProfile([ProfileSegment(pv, 100, 200),
                              ProfileSegment(pv, 50, 300)])

    def test_overlapping_segments_allowed(self):
        pv = ProcessedVector({ID_POOL[0]: (-60, -50)})
        profile = ProcessedProfile([ProfileSegment(pv, 0, 2000),
                                    ProfileSegment(pv, 60, 2060)])
        assert len(profile) == 2


class TestLifespanSchedule:
    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            LifespanSchedule(default=-1)
        with pytest.raises(ValueError):
            LifespanSchedule(per_segment=[600, -5])

    def test_per_segment_lookup(self):
        sched = LifespanSchedule(default=1800, per_segment=[10, 20, 30])
        assert [sched.lifespan_for(i) for i in range(3)] == [10, 20, 30]

    def test_default_lookup(self):
        sched = LifespanSchedule(default=1800)
        assert sched.lifespan_for(7) == 1800

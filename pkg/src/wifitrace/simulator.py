"""Synthetic WiFi scans with known ground truth.

Log-distance path loss with Gaussian shadowing stands in for physical sites:
rssi = tx_power - 10 n log10(d) + N(0, sigma) + device_bias, clamped into
[-100, 0]; an AP lands in a scan iff that value clears the detection floor
and a per-AP Bernoulli(detect_rate) draw succeeds (modeling scan-ability
differences between devices).

Randomness is keyed by (environment seed, stream, scan index) through numpy
SeedSequence entropy tuples, so any scan is reproducible in isolation and
independent of evaluation order.

Three site presets mirror common deployments: a small office, an outdoor
bus station with mostly-distant APs, and a store inside a dense mall. AP
layouts come from fixed per-site seeds, so a preset is the same physical
site under every scenario seed; detection floors are tuned so average
per-scan AP counts land near 19 / 24 / 46 respectively.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detection import DetectionConfig
from .model import (
    RSSI_CEIL,
    RSSI_FLOOR,
    SignalId,
    SignalProfile,
    SignalVector,
    clamp_rssi,
)
from .profileio import write_profile

TRUTH_MAGIC = "vcontact-truth/1"

# fixed per-site layout seeds: a preset is the same site in every scenario
_SITE_SEEDS = {"office": 132, "bus-station": 201, "mall": 319}


@dataclass(frozen=True)
class SimAp:
    """One access point: hashed id, planar position, tx power at 1 m."""

    sid: SignalId
    position: tuple[float, float]
    tx_power: float


@dataclass(frozen=True)
class DeviceParams:
    """Per-device scan characteristics.

    bias shifts every RSSI the device reports; detect_rate is the chance an
    audible AP actually makes it into a scan (phones differ widely here).
    """

    bias: float = 0.0
    detect_rate: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.detect_rate <= 1.0):
            raise ValueError("detect_rate must be in (0, 1]")


@dataclass(frozen=True)
class SimEnvironment:
    aps: tuple[SimAp, ...]
    path_loss_exponent: float = 2.5
    shadowing_std: float = 2.0
    detection_floor: int = -90
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "aps", tuple(self.aps))
        if not (1.5 <= self.path_loss_exponent <= 6.0):
            raise ValueError("path_loss_exponent must be in [1.5, 6]")
        if self.shadowing_std < 0:
            raise ValueError("shadowing_std must be >= 0")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        pos = np.array([ap.position for ap in self.aps], dtype=float)
        if pos.size and not np.all(np.isfinite(pos)):
            raise ValueError("AP positions must be finite")
        # cached arrays for vectorized scanning (not dataclass fields)
        object.__setattr__(self, "_ap_pos", pos.reshape(len(self.aps), 2))
        object.__setattr__(
            self, "_ap_tx", np.array([ap.tx_power for ap in self.aps], dtype=float)
        )

    def with_seed(self, seed: int) -> "SimEnvironment":
        return SimEnvironment(
            self.aps, self.path_loss_exponent, self.shadowing_std,
            self.detection_floor, seed,
        )


@dataclass(frozen=True)
class SimTrajectory:
    """Waypoints (time, position) with the carrying device's parameters.

    Positions are linearly interpolated between waypoints and clamped to the
    endpoints outside them.
    """

    waypoints: tuple[tuple[int, tuple[float, float]], ...]
    device: DeviceParams = DeviceParams()

    def __post_init__(self) -> None:
        wps = tuple((int(t), (float(x), float(y))) for t, (x, y) in self.waypoints)
        if not wps:
            raise ValueError("trajectory needs at least one waypoint")
        for (t0, _), (t1, _) in zip(wps, wps[1:]):
            if t1 <= t0:
                raise ValueError("waypoint times must be strictly increasing")
        object.__setattr__(self, "waypoints", wps)

    def position_at(self, t: float) -> tuple[float, float]:
        times = [w[0] for w in self.waypoints]
        xs = [w[1][0] for w in self.waypoints]
        ys = [w[1][1] for w in self.waypoints]
        return (float(np.interp(t, times, xs)), float(np.interp(t, times, ys)))

    @property
    def t_start(self) -> int:
        return self.waypoints[0][0]

    @property
    def t_end(self) -> int:
        return self.waypoints[-1][0]


def stationary(position: tuple[float, float], t_start: int, t_end: int,
               device: DeviceParams = DeviceParams()) -> SimTrajectory:
    return SimTrajectory(((t_start, position), (t_end, position)), device)


def _rng(env: SimEnvironment, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng((env.seed, stream, index))


def sample_scan(
    env: SimEnvironment,
    position: tuple[float, float],
    device: DeviceParams = DeviceParams(),
    stream: int = 0,
    index: int = 0,
    timestamp: int = 0,
) -> SignalVector:
    """One synthetic scan at a position.

    (stream, index) select the random draw; the same (env.seed, stream,
    index) always reproduces the same scan bit-for-bit.
    """
    pos = np.asarray(position, dtype=float)
    if not np.all(np.isfinite(pos)):
        raise ValueError("scan position must be finite")
    n_aps = len(env.aps)
    if n_aps == 0:
        return SignalVector({}, timestamp)
    rng = _rng(env, stream, index)
    dist = np.hypot(*(env._ap_pos - pos).T)
    # tx_power is referenced at 1 m; the model is not valid closer than that
    rssi = env._ap_tx - 10.0 * env.path_loss_exponent * np.log10(
        np.maximum(dist, 1.0)
    )
    rssi = rssi + rng.normal(0.0, env.shadowing_std or 0.0, n_aps) + device.bias
    detect = rng.random(n_aps) < device.detect_rate
    rssi = np.clip(np.rint(rssi), RSSI_FLOOR, RSSI_CEIL).astype(int)
    readings = {
        env.aps[i].sid: int(rssi[i])
        for i in range(n_aps)
        if rssi[i] >= env.detection_floor and detect[i]
    }
    return SignalVector(readings, timestamp)


def scan_times(t_start: int, t_end: int, sampling_period: int) -> list[int]:
    """Scan instants [t_start, t_end) at the given period; at least one."""
    if sampling_period <= 0:
        raise ValueError("sampling_period must be positive")
    return list(range(t_start, t_end, sampling_period)) or [t_start]


def simulate_profile(
    env: SimEnvironment,
    trajectory: SimTrajectory,
    sampling_period: int,
    stream: int = 0,
    device_tag: str = "",
) -> SignalProfile:
    """Scan along a trajectory, one scan per sampling period.

    Timestamps start at the first waypoint and run to (but not including)
    the last; a single-waypoint trajectory yields one scan.
    """
    vectors = []
    for i, t in enumerate(scan_times(trajectory.t_start, trajectory.t_end,
                                     sampling_period)):
        vectors.append(
            sample_scan(env, trajectory.position_at(t), trajectory.device,
                        stream=stream, index=i, timestamp=t)
        )
    return SignalProfile(vectors, device_tag=device_tag)


def make_paired_scenario(
    env: SimEnvironment,
    separation: float,
    duration: int,
    sampling_period: int,
    seeds: tuple[int, int] = (0, 1),
    anchor: tuple[float, float] = (0.0, 0.0),
    direction: tuple[float, float] = (0.0, 1.0),
) -> tuple[SignalProfile, SignalProfile, float]:
    """Two co-timed stationary devices a fixed distance apart.

    The first profile sits at the anchor, the second ``separation`` meters
    along ``direction``; noise draws are independent (distinct streams).
    Returns both profiles and the ground-truth distance.
    """
    if separation < 0:
        raise ValueError("separation must be >= 0")
    norm = math.hypot(*direction)
    if norm == 0:
        raise ValueError("direction must be non-zero")
    other = (
        anchor[0] + direction[0] / norm * separation,
        anchor[1] + direction[1] / norm * separation,
    )
    first = simulate_profile(env, stationary(anchor, 0, duration),
                             sampling_period, stream=seeds[0])
    second = simulate_profile(env, stationary(other, 0, duration),
                              sampling_period, stream=seeds[1])
    return first, second, float(separation)


def perturb_filter_aps(
    profile: SignalProfile, rate: float, seed: int = 0
) -> SignalProfile:
    """Drop a random fraction of the profile's distinct ids from every scan.

    Each id is removed independently with probability ``rate`` (chosen once
    for the whole profile, matching an AP disappearing from the site).
    """
    if not (0.0 <= rate <= 1.0):
        raise ValueError("rate must be in [0, 1]")
    ids = sorted({sid for vec in profile.vectors for sid in vec.readings})
    rng = np.random.default_rng((seed, 0xF117E2))
    removed = {sid for sid, u in zip(ids, rng.random(len(ids))) if u < rate}
    vectors = [
        SignalVector(
            {sid: r for sid, r in vec.readings.items() if sid not in removed},
            vec.timestamp,
        )
        for vec in profile.vectors
    ]
    return SignalProfile(vectors, device_tag=profile.device_tag)


def perturb_rssi_noise(
    profile: SignalProfile, std: float, seed: int = 0
) -> SignalProfile:
    """Add Gaussian noise to every reading, re-clamped into [-100, 0]."""
    if std < 0:
        raise ValueError("std must be >= 0")
    rng = np.random.default_rng((seed, 0x201E))
    vectors = []
    for vec in profile.vectors:
        items = sorted(vec.readings.items())
        noise = rng.normal(0.0, std, len(items))
        vectors.append(
            SignalVector(
                {
                    sid: clamp_rssi(int(round(rssi + dn)))
                    for (sid, rssi), dn in zip(items, noise)
                },
                vec.timestamp,
            )
        )
    return SignalProfile(vectors, device_tag=profile.device_tag)


# --- site presets -----------------------------------------------------------

@dataclass(frozen=True)
class SiteLayout:
    """Where devices can be placed within a preset site.

    walk_area is the experiment zone (the office room, the store); site_area
    is the whole region devices could roam (defaults to the walk area).
    """

    walk_area: tuple[tuple[float, float], tuple[float, float]]
    line_anchor: tuple[float, float]
    line_direction: tuple[float, float]
    site_area: tuple[tuple[float, float], tuple[float, float]] | None = None

    def __post_init__(self) -> None:
        if self.site_area is None:
            object.__setattr__(self, "site_area", self.walk_area)

    def line_position(self, meters: float) -> tuple[float, float]:
        dx, dy = self.line_direction
        norm = math.hypot(dx, dy)
        return (
            self.line_anchor[0] + dx / norm * meters,
            self.line_anchor[1] + dy / norm * meters,
        )

    @property
    def center(self) -> tuple[float, float]:
        (x0, y0), (x1, y1) = self.walk_area
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


# name -> (ap_count, scatter area, walk area, anchor, direction, floor)
_PRESETS: dict[str, dict] = {
    # 10x12 m office, 32 APs in and around it, ~19 APs per scan
    "office": dict(
        ap_count=32,
        scatter=((0.0, 0.0), (30.0, 36.0)),
        walk=((10.0, 12.0), (20.0, 24.0)),
        anchor=(15.0, 13.0),
        direction=(0.0, 1.0),
        floor=-67,
    ),
    # 2x15 m outdoor strip, 109 mostly-distant APs, ~24 per scan
    "bus-station": dict(
        ap_count=109,
        scatter=((0.0, 0.0), (80.0, 40.0)),
        walk=((39.0, 12.5), (41.0, 27.5)),
        anchor=(40.0, 13.0),
        direction=(0.0, 1.0),
        floor=-68,
    ),
    # 20x25 m store in a dense mall, 301 APs, ~46 per scan
    "mall": dict(
        ap_count=301,
        scatter=((0.0, 0.0), (60.0, 50.0)),
        walk=((20.0, 12.5), (40.0, 37.5)),
        anchor=(30.0, 14.0),
        direction=(0.0, 1.0),
        floor=-66,
    ),
}

PRESET_NAMES = tuple(_PRESETS)


def _generate_aps(count: int, area, site_seed: int) -> tuple[SimAp, ...]:
    rng = np.random.default_rng(site_seed)
    (x0, y0), (x1, y1) = area
    xs = rng.uniform(x0, x1, count)
    ys = rng.uniform(y0, y1, count)
    tx = rng.uniform(-44.0, -36.0, count)
    aps = []
    for i in range(count):
        digest = bytes(rng.integers(0, 256, 32, dtype=np.uint8))
        aps.append(SimAp(SignalId(digest), (float(xs[i]), float(ys[i])),
                         float(tx[i])))
    return tuple(aps)


def make_site(
    name: str,
    seed: int = 0,
    path_loss_exponent: float = 2.5,
    shadowing_std: float = 2.0,
    detection_floor: int | None = None,
) -> tuple[SimEnvironment, SiteLayout]:
    """Build a preset site. ``seed`` drives only the scan noise; the AP
    layout is fixed per preset."""
    if name not in _PRESETS:
        raise ValueError(f"unknown site preset {name!r}, know {PRESET_NAMES}")
    p = _PRESETS[name]
    env = SimEnvironment(
        aps=_generate_aps(p["ap_count"], p["scatter"], _SITE_SEEDS[name]),
        path_loss_exponent=path_loss_exponent,
        shadowing_std=shadowing_std,
        detection_floor=p["floor"] if detection_floor is None else detection_floor,
        seed=seed,
    )
    layout = SiteLayout(p["walk"], p["anchor"], p["direction"], p["scatter"])
    return env, layout


# --- scenario config files --------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """A full simulation scenario loaded from a config file."""

    env: SimEnvironment
    layout: SiteLayout
    case: SimTrajectory
    user: SimTrajectory
    case_period: int = 5
    user_period: int = 60
    lifespan: int = 1800
    case_label: str = "case"
    filter_rate: float = 0.0
    noise_std: float = 0.0
    detection: DetectionConfig = field(default_factory=DetectionConfig)

    CASE_STREAM = 0
    USER_STREAM = 1

    def case_profile(self) -> SignalProfile:
        return simulate_profile(self.env, self.case, self.case_period,
                                stream=self.CASE_STREAM, device_tag=self.case_label)

    def user_profile(self) -> SignalProfile:
        profile = simulate_profile(self.env, self.user, self.user_period,
                                   stream=self.USER_STREAM)
        if self.filter_rate > 0:
            profile = perturb_filter_aps(profile, self.filter_rate, self.env.seed)
        if self.noise_std > 0:
            profile = perturb_rssi_noise(profile, self.noise_std, self.env.seed)
        return profile


class ScenarioError(ValueError):
    """Scenario config file problem."""


def _parse_waypoints(text: str) -> tuple[tuple[int, tuple[float, float]], ...]:
    waypoints = []
    for token in text.split():
        parts = token.split(",")
        if len(parts) != 3:
            raise ScenarioError(f"bad waypoint {token!r} (want t,x,y)")
        t, x, y = parts
        waypoints.append((int(t), (float(x), float(y))))
    return tuple(waypoints)


def _env_from_config(cp: configparser.ConfigParser) -> tuple[SimEnvironment, SiteLayout]:
    if not cp.has_section("environment"):
        raise ScenarioError("missing [environment] section")
    sec = cp["environment"]
    kwargs = dict(
        seed=sec.getint("seed", fallback=0),
        path_loss_exponent=sec.getfloat("path_loss_exponent", fallback=2.5),
        shadowing_std=sec.getfloat("shadowing_std", fallback=2.0),
    )
    if "preset" in sec:
        floor = sec.getint("detection_floor", fallback=None)
        return make_site(sec["preset"], detection_floor=floor, **kwargs)
    # explicit site: ap_count + area + site_seed
    try:
        count = sec.getint("ap_count")
        x0, y0, x1, y1 = (float(v) for v in sec["area"].split(","))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"environment needs preset, or ap_count and area: {exc}")
    area = ((x0, y0), (x1, y1))
    env = SimEnvironment(
        aps=_generate_aps(count, area, sec.getint("site_seed", fallback=1)),
        detection_floor=sec.getint("detection_floor", fallback=-90),
        **kwargs,
    )
    layout = SiteLayout(area, ((x0 + x1) / 2, (y0 + y1) / 2), (0.0, 1.0))
    return env, layout


def _trajectory_from_config(sec, layout: SiteLayout) -> SimTrajectory:
    device = DeviceParams(
        bias=sec.getfloat("device_bias", fallback=0.0),
        detect_rate=sec.getfloat("device_detect_rate", fallback=1.0),
    )
    if "waypoints" not in sec:
        raise ScenarioError(f"[{sec.name}] needs waypoints = t,x,y t,x,y ...")
    return SimTrajectory(_parse_waypoints(sec["waypoints"]), device)


def _detection_from_config(cp: configparser.ConfigParser) -> DetectionConfig:
    if not cp.has_section("detection"):
        return DetectionConfig()
    sec = cp["detection"]
    return DetectionConfig(
        alpha=sec.getfloat("alpha", fallback=0.2),
        window_length=sec.getint("window_length", fallback=600),
        min_exposure=sec.getint("min_exposure", fallback=300),
        sampling_period=sec.getint("sampling_period", fallback=60),
    )


def read_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if not cp.read(path):
        raise ScenarioError(f"cannot read config file {path}")
    return cp


def load_scenario(path) -> Scenario:
    """Load a scenario config (key=value sections, see README)."""
    cp = read_config(path)
    env, layout = _env_from_config(cp)
    for section in ("case", "user"):
        if not cp.has_section(section):
            raise ScenarioError(f"missing [{section}] section")
    perturb = cp["perturb"] if cp.has_section("perturb") else {}
    return Scenario(
        env=env,
        layout=layout,
        case=_trajectory_from_config(cp["case"], layout),
        user=_trajectory_from_config(cp["user"], layout),
        case_period=cp["case"].getint("sampling_period", fallback=5),
        user_period=cp["user"].getint("sampling_period", fallback=60),
        lifespan=cp["case"].getint("lifespan", fallback=1800),
        case_label=cp["case"].get("label", fallback="case"),
        filter_rate=float(perturb.get("filter_rate", 0.0)),
        noise_std=float(perturb.get("noise_std", 0.0)),
        detection=_detection_from_config(cp),
    )


def write_ground_truth(path, scenario: Scenario, user_profile: SignalProfile) -> None:
    """Per-timestamp true distance between the user and the case's position
    (the case trajectory is endpoint-clamped, so after departure this is the
    distance to where the virus was left)."""
    lines = [TRUTH_MAGIC]
    for vec in user_profile.vectors:
        ux, uy = scenario.user.position_at(vec.timestamp)
        cx, cy = scenario.case.position_at(vec.timestamp)
        d = math.hypot(ux - cx, uy - cy)
        lines.append(f"t={vec.timestamp} d={d:.3f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_scenario(scenario: Scenario, out_dir) -> dict[str, str]:
    """Materialize a scenario: raw case/user profiles, the publishable
    processed case profile, and the ground-truth sidecar. Returns the
    written paths."""
    from .model import LifespanSchedule
    from .processing import build_case_profile

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    case_profile = scenario.case_profile()
    user_profile = scenario.user_profile()
    processed = build_case_profile(
        case_profile,
        LifespanSchedule(default=scenario.lifespan),
        case_label=scenario.case_label,
    )
    paths = {
        "case": str(out / "case.signal"),
        "user": str(out / "user.signal"),
        "processed": str(out / "case.processed"),
        "truth": str(out / "truth.txt"),
    }
    write_profile(paths["case"], case_profile)
    write_profile(paths["user"], user_profile)
    write_profile(paths["processed"], processed)
    write_ground_truth(paths["truth"], scenario, user_profile)
    return paths

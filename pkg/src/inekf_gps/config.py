"""Filter and scenario configuration.

Configs are plain YAML documents. Every constant the estimator needs but
the math does not pin down lives here with a default; unknown keys are an
error so typos never silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import ConfigError

GAIN_MODES = ("kalman", "wls")
HEADING_MODES = ("cog_composed", "imu_raw")
TRAJECTORY_KINDS = ("line", "circle", "figure_eight", "waypoint_polyline")


def _vec3(value, key):
    try:
        arr = np.broadcast_to(np.asarray(value, dtype=float), (3,)).copy()
    except (ValueError, TypeError):
        raise ConfigError(key, f"expected a scalar or 3-vector, got {value!r}") from None
    if not np.all(np.isfinite(arr)):
        raise ConfigError(key, "non-finite value")
    return arr


def _nonneg3(value, key):
    arr = _vec3(value, key)
    if np.any(arr < 0.0):
        raise ConfigError(key, "must be non-negative")
    return arr


@dataclass
class NoiseParams:
    """Continuous-time IMU noise densities.

    gyro in rad/s/sqrt(Hz), accel in m/s^2/sqrt(Hz), gyro_bias in
    rad/s^2/sqrt(Hz), accel_bias in m/s^3/sqrt(Hz). Scalars broadcast to
    all three axes.
    """

    gyro: Any = 1e-3
    accel: Any = 1e-2
    gyro_bias: Any = 1e-5
    accel_bias: Any = 1e-4

    def __post_init__(self):
        for name in ("gyro", "accel", "gyro_bias", "accel_bias"):
            setattr(self, name, _nonneg3(getattr(self, name), name))

    def density_diag(self):
        """Diagonal of the 15x15 continuous noise intensity (position row is zero)."""
        return np.concatenate(
            [self.gyro**2, self.accel**2, np.zeros(3), self.gyro_bias**2, self.accel_bias**2]
        )


@dataclass
class InitialBelief:
    yaw_deg: float = 0.0
    velocity: Any = (0.0, 0.0, 0.0)
    sigma_rot: Any = 0.01
    sigma_vel: Any = 0.1
    sigma_pos: Any = 1.0
    sigma_gyro_bias: Any = 0.01
    sigma_accel_bias: Any = 0.01

    def __post_init__(self):
        self.yaw_deg = float(self.yaw_deg)
        self.velocity = _vec3(self.velocity, "velocity")
        for name in ("sigma_rot", "sigma_vel", "sigma_pos", "sigma_gyro_bias", "sigma_accel_bias"):
            setattr(self, name, _nonneg3(getattr(self, name), name))

    def covariance_diag(self):
        return np.concatenate(
            [self.sigma_rot, self.sigma_vel, self.sigma_pos, self.sigma_gyro_bias, self.sigma_accel_bias]
        ) ** 2


@dataclass
class HeadingConfig:
    mode: str = "cog_composed"
    v_min: float = 0.3
    cog_yaw_sigma_deg: float = 5.0
    max_gap: float = 2.0
    # minimum time between the two fixes of a COG pair; 0 pairs consecutive fixes
    baseline_s: float = 0.0
    # references predicted noisier than this are not used
    max_sigma_deg: float = 30.0
    lag_compensation: bool = True

    def __post_init__(self):
        if self.mode not in HEADING_MODES:
            raise ConfigError("mode", f"must be one of {HEADING_MODES}, got {self.mode!r}")
        for name in ("v_min", "cog_yaw_sigma_deg", "max_gap", "baseline_s", "max_sigma_deg"):
            val = float(getattr(self, name))
            if not val >= 0.0:
                raise ConfigError(name, "must be non-negative")
            setattr(self, name, val)
        if self.baseline_s > self.max_gap:
            raise ConfigError("baseline_s", "must not exceed max_gap")
        self.lag_compensation = bool(self.lag_compensation)


@dataclass
class FilterConfig:
    noise: NoiseParams = field(default_factory=NoiseParams)
    initial: InitialBelief = field(default_factory=InitialBelief)
    heading: HeadingConfig = field(default_factory=HeadingConfig)
    gravity: Any = (0.0, 0.0, -9.81)
    gain_mode: str = "kalman"
    imu_includes_gravity: bool = True
    max_imu_gap: float = 0.1
    seed: int = 0

    def __post_init__(self):
        self.gravity = _vec3(self.gravity, "gravity")
        if self.gain_mode not in GAIN_MODES:
            raise ConfigError("gain_mode", f"must be one of {GAIN_MODES}, got {self.gain_mode!r}")
        self.max_imu_gap = float(self.max_imu_gap)
        if not self.max_imu_gap > 0.0:
            raise ConfigError("max_imu_gap", "must be positive")
        self.imu_includes_gravity = bool(self.imu_includes_gravity)
        self.seed = int(self.seed)

    @property
    def effective_gravity(self):
        """Gravity added to rotated accelerometer output; zero for net-acceleration IMUs."""
        return self.gravity if self.imu_includes_gravity else np.zeros(3)

    @classmethod
    def from_dict(cls, data):
        return _build(cls, data or {}, "")

    def to_dict(self):
        return _to_plain(self)


@dataclass
class GpsNoise:
    sigma_enu: Any = (0.3, 0.3, 0.3)

    def __post_init__(self):
        self.sigma_enu = _nonneg3(self.sigma_enu, "sigma_enu")
        if np.any(self.sigma_enu <= 0.0):
            raise ConfigError("sigma_enu", "must be positive")


@dataclass
class ImuNoise(NoiseParams):
    """Sensor noise used by the simulator, plus turn-on biases."""

    initial_gyro_bias: Any = (0.0, 0.0, 0.0)
    initial_accel_bias: Any = (0.0, 0.0, 0.0)

    def __post_init__(self):
        super().__post_init__()
        self.initial_gyro_bias = _vec3(self.initial_gyro_bias, "initial_gyro_bias")
        self.initial_accel_bias = _vec3(self.initial_accel_bias, "initial_accel_bias")


@dataclass
class Origin:
    lat: float = 42.2808
    lon: float = -83.7430
    alt: float = 250.0

    def __post_init__(self):
        self.lat, self.lon, self.alt = float(self.lat), float(self.lon), float(self.alt)
        if abs(self.lat) > 90.0:
            raise ConfigError("lat", "must lie in [-90, 90]")
        if abs(self.lon) > 180.0:
            raise ConfigError("lon", "must lie in [-180, 180]")


@dataclass
class Scenario:
    kind: str = "figure_eight"
    duration: float = 60.0
    speed: float = 2.0
    imu_rate: float = 200.0
    gps_rate: float = 5.0
    seed: int = 1
    # figure-eight half-width / circle radius, m
    size: float = 20.0
    waypoints: Any = ((0.0, 0.0), (60.0, 0.0), (60.0, 40.0), (0.0, 40.0))
    turn_radius: float = 5.0
    gps_delay_s: float = 0.0
    origin: Origin = field(default_factory=Origin)
    imu_noise: ImuNoise = field(default_factory=ImuNoise)
    gps_noise: GpsNoise = field(default_factory=GpsNoise)

    def __post_init__(self):
        if self.kind not in TRAJECTORY_KINDS:
            raise ConfigError("kind", f"must be one of {TRAJECTORY_KINDS}, got {self.kind!r}")
        for name in ("duration", "speed", "imu_rate", "gps_rate", "size", "turn_radius"):
            val = float(getattr(self, name))
            if not (val > 0.0 and math.isfinite(val)):
                raise ConfigError(name, "must be positive")
            setattr(self, name, val)
        if self.imu_rate < self.gps_rate:
            raise ConfigError("gps_rate", "must not exceed imu_rate")
        self.gps_delay_s = float(self.gps_delay_s)
        if self.gps_delay_s < 0.0:
            raise ConfigError("gps_delay_s", "must be non-negative")
        self.seed = int(self.seed)
        try:
            wp = np.asarray(self.waypoints, dtype=float)
        except (ValueError, TypeError):
            raise ConfigError("waypoints", "expected a list of [x, y] pairs") from None
        if wp.ndim != 2 or wp.shape[1] != 2 or len(wp) < 2:
            raise ConfigError("waypoints", "expected at least two [x, y] pairs")
        self.waypoints = wp

    @classmethod
    def from_dict(cls, data):
        return _build(cls, data or {}, "")

    def to_dict(self):
        return _to_plain(self)


def _build(cls, data, prefix):
    if not isinstance(data, dict):
        raise ConfigError(prefix.rstrip(".") or "<root>", "expected a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in fields:
            raise ConfigError(prefix + str(key), "unknown key")
        sub = _nested_type(cls, key)
        if sub is not None:
            kwargs[key] = _build(sub, value, f"{prefix}{key}.")
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(prefix + exc.key, exc.reason) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(prefix.rstrip(".") or "<root>", str(exc)) from None


_NESTED = {
    (FilterConfig, "noise"): NoiseParams,
    (FilterConfig, "initial"): InitialBelief,
    (FilterConfig, "heading"): HeadingConfig,
    (Scenario, "origin"): Origin,
    (Scenario, "imu_noise"): ImuNoise,
    (Scenario, "gps_noise"): GpsNoise,
}


def _nested_type(cls, key):
    return _NESTED.get((cls, key))


def _to_plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def load_yaml(path):
    """Read a YAML mapping; I/O errors propagate, syntax errors become ConfigError."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<syntax>", str(exc)) from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a mapping")
    return data


def load_filter_config(path):
    return FilterConfig.from_dict(load_yaml(path))


def load_scenario(path):
    """Scenario files may optionally nest everything under a ``scenario`` key."""
    data = load_yaml(path)
    if set(data) == {"scenario"}:
        data = data["scenario"]
    return Scenario.from_dict(data)

"""Synthetic planar vessel trajectories and matching IMU / GPS streams.

Truth is analytic: position, velocity and acceleration come from a closed
form path, yaw is tangent to the path and roll/pitch are zero. Sensor
noise follows the filter's own model (white noise plus random-walk biases,
given as continuous-time densities), so a filter configured with the same
numbers is statistically matched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geom
from .correction import GpsFix
from .errors import ConfigError
from .heading import EnuOrigin, enu_to_geodetic
from .propagation import GRAVITY, ImuSample


@dataclass
class Trajectory:
    """Time-indexed poses. ``omega`` (body rate) and ``accel`` (world
    acceleration) are filled in for analytic truth only."""

    t: np.ndarray
    R: np.ndarray
    v: np.ndarray
    p: np.ndarray
    omega: np.ndarray | None = None
    accel: np.ndarray | None = None

    def __len__(self):
        return len(self.t)

    @property
    def yaw(self):
        return np.arctan2(self.R[:, 1, 0], self.R[:, 0, 0])

    def transformed(self, yaw, translation):
        """Left-translate by the planar pose (Rz(yaw), translation)."""
        Rz = geom.rotz(yaw)
        T = np.asarray(translation, dtype=float)
        return Trajectory(
            self.t.copy(),
            np.einsum("ij,njk->nik", Rz, self.R),
            self.v @ Rz.T,
            self.p @ Rz.T + T,
            None if self.omega is None else self.omega.copy(),
            None if self.accel is None else self.accel @ Rz.T,
        )


@dataclass
class ImuStream:
    t: np.ndarray
    gyro: np.ndarray
    accel: np.ndarray
    gyro_bias: np.ndarray
    accel_bias: np.ndarray

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        for k in range(len(self.t)):
            yield ImuSample(float(self.t[k]), self.gyro[k], self.accel[k])

    def samples(self):
        return list(self)


# -- planar paths -----------------------------------------------------------
# Each path maps times to (position, velocity, acceleration), all (n, 2).


class _Line:
    def __init__(self, speed):
        self.speed = speed

    def __call__(self, t):
        z = np.zeros_like(t)
        return (
            np.stack([self.speed * t, z], axis=1),
            np.stack([np.full_like(t, self.speed), z], axis=1),
            np.stack([z, z], axis=1),
        )


class _Circle:
    """Counterclockwise circle through the origin, heading east at t = 0."""

    def __init__(self, speed, radius):
        self.r = radius
        self.rate = speed / radius

    def __call__(self, t):
        ph = self.rate * t
        s, c = np.sin(ph), np.cos(ph)
        r, w = self.r, self.rate
        return (
            np.stack([r * s, r * (1.0 - c)], axis=1),
            np.stack([r * w * c, r * w * s], axis=1),
            np.stack([-r * w * w * s, r * w * w * c], axis=1),
        )


class _FigureEight:
    """Lissajous 1:2 curve ``(A sin wt, A/2 sin 2wt)`` scaled so the mean
    speed equals ``speed``."""

    def __init__(self, speed, size):
        self.A = size
        u = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
        # mean of |d/du (sin u, sin(2u)/2)| over a period
        mean_norm = float(np.mean(np.hypot(np.cos(u), np.cos(2.0 * u))))
        self.rate = speed / (size * mean_norm)

    @property
    def period(self):
        return 2.0 * np.pi / self.rate

    def __call__(self, t):
        A, w = self.A, self.rate
        u = w * t
        return (
            np.stack([A * np.sin(u), 0.5 * A * np.sin(2.0 * u)], axis=1),
            np.stack([A * w * np.cos(u), A * w * np.cos(2.0 * u)], axis=1),
            np.stack([-A * w * w * np.sin(u), -2.0 * A * w * w * np.sin(2.0 * u)], axis=1),
        )


class _Polyline:
    """Closed waypoint loop with circular fillets of radius ``turn_radius``
    at every corner, driven at constant speed and repeated as needed."""

    def __init__(self, speed, waypoints, turn_radius):
        W = np.asarray(waypoints, dtype=float)
        if np.allclose(W[0], W[-1]):
            W = W[:-1]
        n = len(W)
        if n < 3:
            raise ConfigError("waypoints", "a closed loop needs at least three distinct waypoints")
        self.speed = speed
        d = np.array([W[(i + 1) % n] - W[i] for i in range(n)])
        lengths = np.linalg.norm(d, axis=1)
        if np.any(lengths <= 0.0):
            raise ConfigError("waypoints", "consecutive waypoints coincide")
        d /= lengths[:, None]
        r = turn_radius
        # fillet at vertex i joins segment i-1 to segment i
        cuts = np.zeros(n)
        fillets = []
        for i in range(n):
            din, dout = d[i - 1], d[i]
            turn = math.atan2(din[0] * dout[1] - din[1] * dout[0], din @ dout)
            if abs(abs(turn) - math.pi) < 1e-9:
                raise ConfigError("waypoints", "path reverses on itself")
            cuts[i] = r * math.tan(abs(turn) / 2.0)
            fillets.append(turn)
        for i in range(n):
            if cuts[i] + cuts[(i + 1) % n] > lengths[i] + 1e-12:
                raise ConfigError("turn_radius", "too large for the waypoint spacing")
        pieces = []
        for i in range(n):
            start = W[i] + d[i] * cuts[i]
            length = lengths[i] - cuts[i] - cuts[(i + 1) % n]
            pieces.append(("line", start, d[i], length))
            j = (i + 1) % n
            turn = fillets[j]
            if abs(turn) > 0.0:
                arc_start = W[j] - d[i] * cuts[j]
                sign = 1.0 if turn > 0.0 else -1.0
                normal = sign * np.array([-d[i][1], d[i][0]])
                center = arc_start + r * normal
                phi0 = math.atan2(arc_start[1] - center[1], arc_start[0] - center[0])
                pieces.append(("arc", center, (phi0, sign), r * abs(turn)))
        self.pieces = pieces
        self.bounds = np.concatenate([[0.0], np.cumsum([pc[3] for pc in pieces])])
        self.r = r

    def __call__(self, t):
        s_all = np.mod(self.speed * t, self.bounds[-1])
        idx = np.clip(np.searchsorted(self.bounds, s_all, side="right") - 1, 0, len(self.pieces) - 1)
        pos = np.zeros((len(t), 2))
        vel = np.zeros((len(t), 2))
        acc = np.zeros((len(t), 2))
        for k, (kind, a, b, _) in enumerate(self.pieces):
            m = idx == k
            if not np.any(m):
                continue
            s = s_all[m] - self.bounds[k]
            if kind == "line":
                pos[m] = a + np.outer(s, b)
                vel[m] = self.speed * b
            else:
                phi0, sign = b
                phi = phi0 + sign * s / self.r
                c, sn = np.cos(phi), np.sin(phi)
                pos[m] = a + self.r * np.stack([c, sn], axis=1)
                vel[m] = sign * self.speed * np.stack([-sn, c], axis=1)
                acc[m] = -(self.speed**2 / self.r) * np.stack([c, sn], axis=1)
        return pos, vel, acc


def make_path(sc):
    if sc.kind == "line":
        return _Line(sc.speed)
    if sc.kind == "circle":
        return _Circle(sc.speed, sc.size)
    if sc.kind == "figure_eight":
        return _FigureEight(sc.speed, sc.size)
    return _Polyline(sc.speed, sc.waypoints, sc.turn_radius)


def imu_times(sc):
    n = int(round(sc.duration * sc.imu_rate))
    return np.arange(n + 1) / sc.imu_rate


def gps_times(sc):
    n = int(math.floor(sc.duration * sc.gps_rate + 1e-9))
    return np.arange(n + 1) / sc.gps_rate


def truth_at(sc, t):
    """Analytic truth sampled at arbitrary times."""
    t = np.asarray(t, dtype=float)
    pos, vel, acc = make_path(sc)(t)
    n = len(t)
    yaw = np.arctan2(vel[:, 1], vel[:, 0])
    speed2 = np.einsum("ij,ij->i", vel, vel)
    yaw_rate = (vel[:, 0] * acc[:, 1] - vel[:, 1] * acc[:, 0]) / speed2
    c, s = np.cos(yaw), np.sin(yaw)
    R = np.zeros((n, 3, 3))
    R[:, 0, 0], R[:, 0, 1] = c, -s
    R[:, 1, 0], R[:, 1, 1] = s, c
    R[:, 2, 2] = 1.0
    z = np.zeros((n, 1))
    omega = np.zeros((n, 3))
    omega[:, 2] = yaw_rate
    return Trajectory(
        t=t.copy(),
        R=R,
        v=np.hstack([vel, z]),
        p=np.hstack([pos, z]),
        omega=omega,
        accel=np.hstack([acc, z]),
    )


def generate_truth(sc):
    return truth_at(sc, imu_times(sc))


def _rngs(seed):
    imu_seq, gps_seq = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.default_rng(imu_seq), np.random.default_rng(gps_seq)


def synthesize_imu(tr, noise, seed, rate=None, gravity=GRAVITY):
    """Body-frame gyro and specific force with random-walk biases and white
    noise. ``noise`` is an :class:`~inekf_gps.config.ImuNoise` (or plain
    ``NoiseParams``, meaning zero turn-on bias)."""
    rng, _ = _rngs(seed)
    n = len(tr)
    if rate is None:
        rate = 1.0 / float(np.median(np.diff(tr.t))) if n > 1 else 1.0
    dt = 1.0 / rate
    g = np.asarray(gravity, dtype=float)
    # R^T (a - g) for each sample
    true_accel = np.einsum("nji,nj->ni", tr.R, tr.accel - g)
    true_gyro = tr.omega

    bg0 = np.asarray(getattr(noise, "initial_gyro_bias", np.zeros(3)), dtype=float)
    ba0 = np.asarray(getattr(noise, "initial_accel_bias", np.zeros(3)), dtype=float)
    # one block of draws per quantity, in a fixed order, for reproducibility
    w_bg = rng.standard_normal((n, 3))
    w_ba = rng.standard_normal((n, 3))
    w_g = rng.standard_normal((n, 3))
    w_a = rng.standard_normal((n, 3))
    steps_bg = w_bg * (noise.gyro_bias * math.sqrt(dt))
    steps_ba = w_ba * (noise.accel_bias * math.sqrt(dt))
    steps_bg[0] = 0.0
    steps_ba[0] = 0.0
    gyro_bias = bg0 + np.cumsum(steps_bg, axis=0)
    accel_bias = ba0 + np.cumsum(steps_ba, axis=0)
    gyro = true_gyro + gyro_bias + w_g * (noise.gyro * math.sqrt(rate))
    accel = true_accel + accel_bias + w_a * (noise.accel * math.sqrt(rate))
    return ImuStream(tr.t.copy(), gyro, accel, gyro_bias, accel_bias)


def _sample_positions(tr, times):
    return np.stack([np.interp(times, tr.t, tr.p[:, i]) for i in range(3)], axis=1)


def synthesize_gps(tr, sigma_enu, gps_rate, origin, seed, delay=0.0):
    """Fixes at ``gps_rate`` over the span of ``tr`` with Gaussian ENU noise,
    expressed as geodetic coordinates around ``origin``."""
    _, rng = _rngs(seed)
    sigma = np.broadcast_to(np.asarray(sigma_enu, dtype=float), (3,)).copy()
    t0, t1 = float(tr.t[0]), float(tr.t[-1])
    n = int(math.floor((t1 - t0) * gps_rate + 1e-9))
    times = t0 + np.arange(n + 1) / gps_rate
    truth = _sample_positions(tr, times)
    noisy = truth + rng.standard_normal((len(times), 3)) * sigma
    fixes = []
    for t, enu in zip(times, noisy):
        lat, lon, alt = enu_to_geodetic(enu, origin)
        fixes.append(GpsFix(float(t + delay), lat, lon, alt, sigma.copy()))
    return fixes


def simulate(sc):
    """Truth, IMU stream and GPS fixes for a scenario."""
    tr = generate_truth(sc)
    imu = synthesize_imu(tr, sc.imu_noise, sc.seed, rate=sc.imu_rate)
    origin = EnuOrigin(sc.origin.lat, sc.origin.lon, sc.origin.alt)
    gps = synthesize_gps(tr, sc.gps_noise.sigma_enu, sc.gps_rate, origin, sc.seed, delay=sc.gps_delay_s)
    return tr, imu, gps

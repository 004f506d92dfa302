"""Local ENU conversion and course-over-ground heading references.

Course over ground (COG) is the direction of horizontal travel between two
consecutive fixes. Under way it equals the vessel's heading up to crab angle,
which makes yaw observable without a magnetometer. The reference rotation
takes its yaw from COG and its roll/pitch from the IMU-propagated attitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geom
from .errors import OriginUnset

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)

MAX_TANGENT_RANGE = 50_000.0
GIMBAL_PITCH = math.radians(85.0)


@dataclass(frozen=True)
class EnuOrigin:
    lat: float
    lon: float
    alt: float

    def radii(self):
        """Meridian and prime-vertical radii of curvature (m) at the origin."""
        s = math.sin(math.radians(self.lat))
        w2 = 1.0 - WGS84_E2 * s * s
        n = WGS84_A / math.sqrt(w2)
        m = n * (1.0 - WGS84_E2) / w2
        return m, n


def geodetic_to_enu(fix, origin):
    """Map a fix (anything with ``lat``, ``lon``, ``alt``) onto the tangent
    plane at ``origin``.

    Uses the WGS-84 radii of curvature at the origin latitude; the map is
    linear in (lat, lon, alt), so :func:`enu_to_geodetic` inverts it exactly.
    """
    if origin is None:
        raise OriginUnset("ENU origin has not been anchored")
    m, n = origin.radii()
    lat0 = math.radians(origin.lat)
    north = math.radians(fix.lat - origin.lat) * (m + origin.alt)
    east = math.radians(fix.lon - origin.lon) * (n + origin.alt) * math.cos(lat0)
    up = fix.alt - origin.alt
    if math.hypot(east, north) > MAX_TANGENT_RANGE:
        raise ValueError(f"fix is {math.hypot(east, north):.0f} m from the ENU origin")
    return np.array([east, north, up])


def enu_to_geodetic(enu, origin):
    """Inverse of :func:`geodetic_to_enu`; returns (lat, lon, alt)."""
    if origin is None:
        raise OriginUnset("ENU origin has not been anchored")
    m, n = origin.radii()
    lat0 = math.radians(origin.lat)
    east, north, up = (float(x) for x in enu)
    lat = origin.lat + math.degrees(north / (m + origin.alt))
    lon = origin.lon + math.degrees(east / ((n + origin.alt) * math.cos(lat0)))
    return lat, lon, origin.alt + up


def cog_heading(p_prev, p_curr, dt, v_min):
    """Course over ground between two ENU positions.

    Returns ``(yaw, valid)`` with yaw counterclockwise from east; ``valid``
    is False when the horizontal speed is below ``v_min``.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    dx = float(p_curr[0] - p_prev[0])
    dy = float(p_curr[1] - p_prev[1])
    speed = math.hypot(dx, dy) / dt
    return math.atan2(dy, dx), speed >= v_min


def build_heading_reference(yaw_cog, R_imu):
    """``Rz(yaw_cog) Ry(pitch) Rx(roll)`` with roll/pitch taken from ``R_imu``."""
    roll, pitch, _ = geom.to_euler(R_imu)
    return geom.from_euler(roll, pitch, yaw_cog)


def gimbal_proximity(R_imu):
    """True when pitch is too steep for a meaningful yaw/roll split."""
    return abs(geom.to_euler(R_imu)[1]) > GIMBAL_PITCH


@dataclass
class HeadingReference:
    t: float
    R: np.ndarray
    valid: bool
    speed: float
    yaw_cog: float
    sigma_yaw: float


class HeadingTracker:
    """Turns a stream of ENU fixes into heading references.

    Keeps a single anchor fix. Each new fix is paired with the anchor once
    the pair spans at least ``cfg.baseline_s``; a pair older than
    ``cfg.max_gap`` is stale and restarts the window. References are
    flagged invalid below the speed gate, near gimbal lock, or when the
    predicted yaw scatter exceeds ``cfg.max_sigma_deg``.

    When the caller passes the filter's velocity estimate, the speed gate
    must also hold for its horizontal speed and the yaw scatter is sized
    from the displacement that speed predicts. Gating on the fix pair alone
    is biased: noise that lengthens the displacement also passes the gate.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self._anchor = None  # (t, p_enu, sigma_enu, yaw_est)
        self.emitted = 0

    def reset(self):
        self._anchor = None

    def update(self, t, p_enu, sigma_enu, R_est, v_est=None):
        p_enu = np.asarray(p_enu, dtype=float)
        sigma_enu = np.asarray(sigma_enu, dtype=float)
        current = (t, p_enu, sigma_enu, _yaw(R_est))
        anchor = self._anchor
        if anchor is None:
            self._anchor = current
            return None
        t0, p0, sig0, yaw0 = anchor
        dt = t - t0
        if not 0.0 < dt <= self.cfg.max_gap:
            self._anchor = current
            return None
        if dt < self.cfg.baseline_s:
            return None
        self._anchor = current

        yaw_cog, valid = cog_heading(p0, p_enu, dt, self.cfg.v_min)
        disp = math.hypot(p_enu[0] - p0[0], p_enu[1] - p0[1])
        speed = disp / dt
        if v_est is not None:
            est_speed = math.hypot(v_est[0], v_est[1])
            valid = valid and est_speed >= self.cfg.v_min
            disp = est_speed * dt
        if self.cfg.lag_compensation:
            # COG is the course at mid-interval; advance it by half the
            # IMU-propagated turn since the anchor fix
            yaw_cog = geom.wrap_angle(yaw_cog + 0.5 * geom.wrap_angle(current[3] - yaw0))
        sigma_yaw = self.cog_sigma(disp / dt, disp, sig0, sigma_enu)
        if sigma_yaw > math.radians(self.cfg.max_sigma_deg) or gimbal_proximity(R_est):
            valid = False
        R_ref = build_heading_reference(yaw_cog, R_est)
        if valid:
            self.emitted += 1
        return HeadingReference(t, R_ref, valid, speed, yaw_cog, sigma_yaw)

    def cog_sigma(self, speed, disp, sig_prev, sig_curr):
        """Yaw std (rad): configured model error scaled by ``v_min / speed``
        plus the cross-track scatter of the two fixes over the baseline."""
        model = math.radians(self.cfg.cog_yaw_sigma_deg) * self.cfg.v_min / max(speed, 1e-9)
        cross = 0.5 * (sig_prev[0] ** 2 + sig_prev[1] ** 2 + sig_curr[0] ** 2 + sig_curr[1] ** 2)
        geometric = math.sqrt(cross) / max(disp, 1e-9)
        return min(math.hypot(model, geometric), math.pi)


def _yaw(R):
    return math.atan2(R[1, 0], R[0, 0])

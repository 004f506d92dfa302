"""Filter belief: extended pose plus IMU biases, and its 15x15 covariance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geom

STATE_CSV_HEADER = [
    "t",
    "px", "py", "pz",
    "vx", "vy", "vz",
    "roll_deg", "pitch_deg", "yaw_deg",
    "bgx", "bgy", "bgz",
    "bax", "bay", "baz",
]


def _zeros3():
    return np.zeros(3)


@dataclass
class RobotState:
    """Orientation ``R`` (body to world), world-frame velocity ``v`` and
    position ``p``, gyro bias ``bg`` and accel bias ``ba``, at time ``t``.

    ``v`` is the middle column of the SE_2(3) embedding, i.e. expressed in
    the local ENU world frame.
    """

    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    v: np.ndarray = field(default_factory=_zeros3)
    p: np.ndarray = field(default_factory=_zeros3)
    bg: np.ndarray = field(default_factory=_zeros3)
    ba: np.ndarray = field(default_factory=_zeros3)
    t: float = 0.0

    def copy(self):
        return RobotState(
            self.R.copy(), self.v.copy(), self.p.copy(), self.bg.copy(), self.ba.copy(), self.t
        )

    def is_finite(self):
        return bool(
            math.isfinite(self.t)
            and np.all(np.isfinite(self.R))
            and np.all(np.isfinite(self.v))
            and np.all(np.isfinite(self.p))
            and np.all(np.isfinite(self.bg))
            and np.all(np.isfinite(self.ba))
        )

    def is_valid(self):
        return self.is_finite() and geom.is_rotation(self.R)

    @property
    def euler(self):
        """(roll, pitch, yaw) in rad, ZYX convention."""
        return geom.to_euler(self.R)

    @property
    def yaw(self):
        return math.atan2(self.R[1, 0], self.R[0, 0])

    def to_row(self):
        roll, pitch, yaw = (math.degrees(a) for a in self.euler)
        return [self.t, *self.p, *self.v, roll, pitch, yaw, *self.bg, *self.ba]

    @classmethod
    def from_row(cls, row):
        row = [float(x) for x in row]
        R = geom.from_euler(*(math.radians(a) for a in row[7:10]))
        return cls(
            R=R,
            v=np.array(row[4:7]),
            p=np.array(row[1:4]),
            bg=np.array(row[10:13]),
            ba=np.array(row[13:16]),
            t=row[0],
        )


def initial_state(p0, yaw0, cfg, v0=None, t0=0.0):
    """Level attitude at heading ``yaw0``, zero biases, diagonal covariance
    from ``cfg.initial``.

    Returns ``(state, P)``.
    """
    state = RobotState(
        R=geom.rotz(yaw0),
        v=np.zeros(3) if v0 is None else np.asarray(v0, dtype=float).copy(),
        p=np.asarray(p0, dtype=float).copy(),
        t=float(t0),
    )
    P = np.diag(cfg.initial.covariance_diag())
    return state, P


def state_to_group(s):
    return geom.make_group(s.R, s.v, s.p)


def state_from_group(X, bg=None, ba=None, t=0.0):
    R, v, p = geom.split_group(X)
    return RobotState(
        R=R,
        v=v,
        p=p,
        bg=np.zeros(3) if bg is None else np.asarray(bg, dtype=float).copy(),
        ba=np.zeros(3) if ba is None else np.asarray(ba, dtype=float).copy(),
        t=t,
    )


def covariance_health(P):
    """Return (relative asymmetry, min eigenvalue / max eigenvalue)."""
    norm = np.linalg.norm(P)
    asym = np.linalg.norm(P - P.T) / norm if norm > 0.0 else 0.0
    eig = np.linalg.eigvalsh(0.5 * (P + P.T))
    ratio = eig[0] / eig[-1] if eig[-1] > 0.0 else 0.0
    return asym, ratio


def is_healthy_covariance(P, tol=1e-9):
    asym, ratio = covariance_health(P)
    return asym < tol and ratio >= -tol

"""IMU-driven prediction of the mean and the left-invariant covariance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geom
from ._kernels import propagate_step
from .errors import GapTooLarge, NonMonotonicTime
from .state import RobotState

GRAVITY = np.array([0.0, 0.0, -9.81])
MAX_DT = 0.1

_I15 = np.eye(15)
_I3 = np.eye(3)


@dataclass
class ImuSample:
    """Body-frame gyro rate (rad/s) and specific force (m/s^2) at time ``t``."""

    t: float
    gyro: np.ndarray
    accel: np.ndarray


def left_invariant_A(s, u):
    """Continuous-time left-invariant error dynamics, error ordered
    (rot, vel, pos, gyro bias, accel bias) with true = estimate + bias error.
    """
    w = u.gyro - s.bg
    a = u.accel - s.ba
    W = geom.skew(w)
    A = np.zeros((15, 15))
    A[0:3, 0:3] = -W
    A[0:3, 9:12] = -_I3
    A[3:6, 0:3] = -geom.skew(a)
    A[3:6, 3:6] = -W
    A[3:6, 12:15] = -_I3
    A[6:9, 3:6] = _I3
    A[6:9, 6:9] = -W
    return A


def propagate_mean(s, u, dt, gravity=GRAVITY):
    """Integrate the strapdown equations over ``dt`` holding ``u`` constant.

    The rotation increment is exact, and velocity/position use the closed-form
    integrals of a body-fixed specific force under constant rate, so the step
    reduces to ``v + (R a + g) dt`` and ``p + v dt + (R a + g) dt^2 / 2`` when
    the rate is zero.
    """
    phi = (u.gyro - s.bg) * dt
    a = u.accel - s.ba
    R = s.R
    G0, G1, G2 = geom.so3_gammas(phi)
    R_next = geom.orthonormalize(R @ G0)
    v_next = s.v + (R @ (G1 @ a) + gravity) * dt
    p_next = s.p + s.v * dt + (R @ (G2 @ a) + 0.5 * gravity) * (dt * dt)
    return RobotState(R_next, v_next, p_next, s.bg.copy(), s.ba.copy(), s.t + dt)


def propagate_covariance(P, A, dt, q_diag):
    """First-order discretization: ``Phi (P + Q dt) Phi^T`` with ``Phi = I + A dt``.

    Equivalent to ``Phi P Phi^T + Phi Q Phi^T dt``.
    """
    Phi = _I15 + A * dt
    P_next = Phi @ (P + np.diag(q_diag * dt)) @ Phi.T
    return 0.5 * (P_next + P_next.T)


def propagate(s, P, u, dt, q, gravity=GRAVITY, max_dt=MAX_DT):
    """One prediction step.

    Parameters
    ----------
    s, P
        Current state and 15x15 covariance.
    u : ImuSample
        Input held constant over the step.
    dt : float
        Step length in seconds; must lie in (0, max_dt].
    q : NoiseParams or ndarray
        Continuous-time noise densities, or the 15-element diagonal from
        :meth:`NoiseParams.density_diag`.

    Returns
    -------
    (RobotState, ndarray)
    """
    if not dt > 0.0:
        raise NonMonotonicTime(f"non-positive propagation interval {dt!r}")
    if dt > max_dt:
        raise GapTooLarge(f"propagation interval {dt:.6f} s exceeds {max_dt} s")
    q_diag = q if isinstance(q, np.ndarray) else q.density_diag()
    R, v, p, P_next = propagate_step(
        s.R, s.v, s.p, s.bg, s.ba, np.ascontiguousarray(P, dtype=float),
        np.asarray(u.gyro, dtype=float), np.asarray(u.accel, dtype=float),
        float(dt), q_diag, np.asarray(gravity, dtype=float),
    )
    return RobotState(R, v, p, s.bg.copy(), s.ba.copy(), s.t + dt), P_next

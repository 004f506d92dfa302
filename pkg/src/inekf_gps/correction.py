"""GPS position and heading-reference corrections for the left-invariant filter.

Measurements take the world-frame form ``Y = X b + V``; the innovation is
``X^-1 Y - b`` expressed in the body frame, so the Jacobians below are
constant and the noise is rotated into the body frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geom
from .errors import SingularInnovation
from .state import RobotState

MAX_CONDITION = 1e12

_E = np.eye(3)


@dataclass
class Measurement:
    """Innovation ``z``, Jacobian ``H`` (k x 15) and body-frame noise ``N``."""

    z: np.ndarray
    H: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        self.N = np.asarray(self.N, dtype=float)
        k = self.z.shape[0]
        if self.H.shape != (k, 15):
            raise ValueError(f"H must be {k}x15, got {self.H.shape}")
        if self.N.shape != (k, k):
            raise ValueError(f"N must be {k}x{k}, got {self.N.shape}")


@dataclass
class GpsFix:
    """Geodetic fix (deg, deg, m) with per-axis ENU standard deviations (m)."""

    t: float
    lat: float
    lon: float
    alt: float
    sigma_enu: np.ndarray

    def __post_init__(self):
        self.sigma_enu = np.asarray(self.sigma_enu, dtype=float)
        if abs(self.lat) > 90.0 or abs(self.lon) > 180.0:
            raise ValueError(f"latitude/longitude out of range: {self.lat}, {self.lon}")
        if self.sigma_enu.shape != (3,) or np.any(~(self.sigma_enu > 0.0)):
            raise ValueError("sigma_enu must be three positive values")


def position_innovation(s, p_meas):
    return s.R.T @ (np.asarray(p_meas, dtype=float) - s.p)


def position_jacobian():
    H = np.zeros((3, 15))
    H[:, geom.POS] = _E
    return H


def position_noise(s, sigma_enu):
    """Body-frame covariance ``R^T diag(sigma^2) R`` of a world-frame fix."""
    sigma = np.asarray(sigma_enu, dtype=float)
    return s.R.T @ np.diag(sigma * sigma) @ s.R


def orientation_innovations(s, R_meas):
    """Stack ``R^T R_meas e_i - e_i`` for the three basis vectors."""
    D = s.R.T @ np.asarray(R_meas, dtype=float) - _E
    # column i of D is R^T R_meas e_i - e_i
    return D.T.reshape(9)


def orientation_jacobian():
    H = np.zeros((9, 15))
    for i in range(3):
        H[3 * i:3 * i + 3, geom.ROT] = -geom.skew(_E[i])
    return H


def position_measurement(s, p_meas, sigma_enu):
    return Measurement(position_innovation(s, p_meas), position_jacobian(), position_noise(s, sigma_enu))


def stack_pose_measurement(s, p_meas, R_meas, sigma_pos, sigma_rot):
    """12-dim position + orientation measurement with block-diagonal noise."""
    z = np.concatenate([position_innovation(s, p_meas), orientation_innovations(s, R_meas)])
    H = np.vstack([position_jacobian(), orientation_jacobian()])
    N = np.zeros((12, 12))
    N[0:3, 0:3] = position_noise(s, sigma_pos)
    N_rot = position_noise(s, sigma_rot)
    for i in range(3):
        N[3 + 3 * i:6 + 3 * i, 3 + 3 * i:6 + 3 * i] = N_rot
    return Measurement(z, H, N)


def innovation_covariance(P, m):
    return m.H @ P @ m.H.T + m.N


def normalized_innovation_squared(P, m):
    S = innovation_covariance(P, m)
    return float(m.z @ np.linalg.solve(S, m.z))


def kalman_gain(P, m):
    S = innovation_covariance(P, m)
    S = 0.5 * (S + S.T)
    cond = np.linalg.cond(S)
    if not cond <= MAX_CONDITION:
        raise SingularInnovation(f"innovation covariance condition number {cond:.3g}")
    # K = P H^T S^-1, solved rather than inverted
    return np.linalg.solve(S, m.H @ P).T


def wls_gain(m):
    """Covariance-free weighted least-squares gain ``(H^T N^-1 H)^+ H^T N^-1``.

    ``H^T N^-1 H`` is rank deficient (only measured directions), so the
    pseudo-inverse restricts the correction to the observed subspace.
    """
    cond = np.linalg.cond(m.N)
    if not cond <= MAX_CONDITION:
        raise SingularInnovation(f"measurement noise condition number {cond:.3g}")
    Ninv = np.linalg.inv(m.N)
    HtNinv = m.H.T @ Ninv
    return np.linalg.pinv(HtNinv @ m.H, hermitian=True) @ HtNinv


def apply_correction(s, P, m, gain_mode="kalman"):
    """Right-multiplicative group update plus additive bias update.

    The covariance update uses the Joseph form, which keeps ``P`` symmetric
    positive semidefinite for any gain.
    """
    if gain_mode == "kalman":
        K = kalman_gain(P, m)
    elif gain_mode == "wls":
        K = wls_gain(m)
    else:
        raise ValueError(f"unknown gain mode {gain_mode!r}")
    delta = K @ m.z
    X = geom.make_group(s.R, s.v, s.p) @ geom.se23_exp(delta[0:9])
    R, v, p = geom.split_group(X)
    updated = RobotState(
        geom.orthonormalize(R), v, p, s.bg + delta[9:12], s.ba + delta[12:15], s.t
    )
    IKH = np.eye(15) - K @ m.H
    P_next = IKH @ P @ IKH.T + K @ m.N @ K.T
    return updated, 0.5 * (P_next + P_next.T)

"""SO(3) and SE_2(3) primitives.

Group elements of SE_2(3) are 5x5 matrices::

    [[R, v, p],
     [0, 1, 0],
     [0, 0, 1]]

Tangent vectors are ordered (rotation, velocity, position); the filter's
15-dim error appends (gyro bias, accel bias). All functions are pure and
operate on 1-D arrays of shape (3,) / (9,) and dense matrices.
"""

from __future__ import annotations

import math

import numpy as np

SMALL_ANGLE = 1e-7
# Gamma_2 loses ~all precision to cancellation well above SMALL_ANGLE.
_SERIES_GAMMA2 = 1e-2

ROT = slice(0, 3)
VEL = slice(3, 6)
POS = slice(6, 9)
BG = slice(9, 12)
BA = slice(12, 15)


def skew(v):
    """Cross-product matrix: ``skew(a) @ b == np.cross(a, b)``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m):
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def _coeffs(theta):
    """Return (sin(t)/t, (1-cos t)/t^2, (t-sin t)/t^3)."""
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        return 1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0
    s, c = math.sin(theta), math.cos(theta)
    t2 = theta * theta
    return s / theta, (1.0 - c) / t2, (theta - s) / (t2 * theta)


def so3_exp(w):
    """Rodrigues formula. ``w`` is a rotation vector in rad."""
    w = np.asarray(w, dtype=float)
    theta = math.sqrt(w @ w)
    a, b, _ = _coeffs(theta)
    K = skew(w)
    return np.eye(3) + a * K + b * (K @ K)


def so3_left_jacobian(w):
    w = np.asarray(w, dtype=float)
    theta = math.sqrt(w @ w)
    _, b, c = _coeffs(theta)
    K = skew(w)
    return np.eye(3) + b * K + c * (K @ K)


def so3_left_jacobian_inv(w):
    w = np.asarray(w, dtype=float)
    theta = math.sqrt(w @ w)
    K = skew(w)
    if theta < SMALL_ANGLE:
        return np.eye(3) - 0.5 * K + (K @ K) / 12.0
    half = 0.5 * theta
    coef = (1.0 - half * math.cos(half) / math.sin(half)) / (theta * theta)
    return np.eye(3) - 0.5 * K + coef * (K @ K)


def so3_gamma2(w):
    """Double integral of exp, ``sum_n w^n / (n+2)!``; used for position."""
    w = np.asarray(w, dtype=float)
    theta = math.sqrt(w @ w)
    K = skew(w)
    t2 = theta * theta
    if theta < _SERIES_GAMMA2:
        b = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
        c = 1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0
    else:
        s, co = math.sin(theta), math.cos(theta)
        b = (theta - s) / (t2 * theta)
        c = (t2 + 2.0 * co - 2.0) / (2.0 * t2 * t2)
    return 0.5 * np.eye(3) + b * K + c * (K @ K)


def so3_gammas(w):
    """Return ``(exp(w), J_l(w), Gamma_2(w))`` sharing one skew/square.

    These are the zeroth, first and second time integrals of the rotation
    under a constant rate, used by the strapdown step.
    """
    theta = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    a, b, c = _coeffs(theta)
    t2 = theta * theta
    if theta < _SERIES_GAMMA2:
        c2 = 1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0
    else:
        c2 = (t2 + 2.0 * math.cos(theta) - 2.0) / (2.0 * t2 * t2)
    K = skew(w)
    K2 = K @ K
    I = np.eye(3)
    return I + a * K + b * K2, I + b * K + c * K2, 0.5 * I + c * K + c2 * K2


def so3_log(R):
    """Rotation vector of ``R`` with angle in [0, pi]."""
    R = np.asarray(R, dtype=float)
    anti = vee(R - R.T)
    sin_t = 0.5 * math.sqrt(anti @ anti)
    cos_t = 0.5 * (np.trace(R) - 1.0)
    theta = math.atan2(sin_t, cos_t)
    if theta < SMALL_ANGLE:
        return 0.5 * anti
    if cos_t > -0.99:
        return anti * (0.5 * theta / sin_t)
    # near pi: recover the axis from the symmetric part, (1 - cos) n n^T
    S = 0.5 * (R + R.T) - cos_t * np.eye(3)
    k = int(np.argmax(np.diag(S)))
    axis = S[:, k] / math.sqrt(S[k, k] * (1.0 - cos_t))
    axis /= np.linalg.norm(axis)
    if anti @ axis < 0.0:
        axis = -axis
    return theta * axis


def rotz(yaw):
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def roty(pitch):
    c, s = math.cos(pitch), math.sin(pitch)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotx(roll):
    c, s = math.cos(roll), math.sin(roll)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def from_euler(roll, pitch, yaw):
    """ZYX convention: ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    return rotz(yaw) @ roty(pitch) @ rotx(roll)


def to_euler(R):
    """Inverse of :func:`from_euler`; returns (roll, pitch, yaw) in rad."""
    pitch = math.asin(min(1.0, max(-1.0, -R[2, 0])))
    roll = math.atan2(R[2, 1], R[2, 2])
    yaw = math.atan2(R[1, 0], R[0, 0])
    return roll, pitch, yaw


def wrap_angle(a):
    """Wrap to [-pi, pi)."""
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def is_rotation(R, tol=1e-9):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    ortho = np.linalg.norm(R.T @ R - np.eye(3))
    return ortho < tol and abs(np.linalg.det(R) - 1.0) <= tol


def orthonormalize(R, tol=1e-9):
    """Project onto SO(3) (polar factor) when drift exceeds ``tol``."""
    if np.linalg.norm(R.T @ R - np.eye(3)) <= tol:
        return R
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0.0:
        U[:, -1] = -U[:, -1]
        Q = U @ Vt
    return Q


def make_group(R, v, p):
    X = np.eye(5)
    X[:3, :3] = R
    X[:3, 3] = v
    X[:3, 4] = p
    return X


def split_group(X):
    return X[:3, :3].copy(), X[:3, 3].copy(), X[:3, 4].copy()


def group_inverse(X):
    R, v, p = split_group(X)
    Rt = R.T
    return make_group(Rt, -Rt @ v, -Rt @ p)


def se23_hat(xi):
    xi = np.asarray(xi, dtype=float)
    M = np.zeros((5, 5))
    M[:3, :3] = skew(xi[0:3])
    M[:3, 3] = xi[3:6]
    M[:3, 4] = xi[6:9]
    return M


def se23_vee(M):
    return np.concatenate([vee(M[:3, :3]), M[:3, 3], M[:3, 4]])


def se23_exp(xi):
    """Closed-form exponential of a (rotation, velocity, position) 9-vector."""
    xi = np.asarray(xi, dtype=float)
    w = xi[0:3]
    J = so3_left_jacobian(w)
    return make_group(so3_exp(w), J @ xi[3:6], J @ xi[6:9])


def se23_log(X):
    R, v, p = split_group(X)
    w = so3_log(R)
    Jinv = so3_left_jacobian_inv(w)
    return np.concatenate([w, Jinv @ v, Jinv @ p])


def se23_adjoint(X):
    """9x9 adjoint: ``X exp(xi) X^-1 = exp(Ad_X xi)``."""
    R, v, p = split_group(X)
    Ad = np.zeros((9, 9))
    Ad[0:3, 0:3] = R
    Ad[3:6, 3:6] = R
    Ad[6:9, 6:9] = R
    Ad[3:6, 0:3] = skew(v) @ R
    Ad[6:9, 0:3] = skew(p) @ R
    return Ad

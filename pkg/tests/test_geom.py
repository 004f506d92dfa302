import math

import numpy as np
import pytest

from inekf_gps import geom

from conftest import expm_series, random_rotation


def test_skew_examples():
    e1, e2, e3 = np.eye(3)
    assert np.array_equal(geom.skew(e1) @ e2, e3)
    assert np.array_equal(geom.skew(np.zeros(3)), np.zeros((3, 3)))
    assert np.array_equal(geom.skew([1, 2, 3]), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])


def test_skew_cross_product(rng):
    for _ in range(200):
        a, b = rng.normal(size=(2, 3))
        M = geom.skew(a)
        assert np.allclose(M, -M.T)
        assert np.allclose(M @ b, np.cross(a, b), atol=1e-14)


def test_vee_inverts_skew(rng):
    w = rng.normal(size=3)
    assert np.array_equal(geom.vee(geom.skew(w)), w)


def test_so3_exp_examples():
    assert np.array_equal(geom.so3_exp(np.zeros(3)), np.eye(3))
    R = geom.so3_exp([0, 0, math.pi / 2])
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)
    w = np.array([0.3, -0.2, 0.1])
    assert np.max(np.abs(geom.so3_exp(w) - expm_series(geom.skew(w)))) < 1e-12


def test_so3_exp_small_angle_branch():
    w = np.array([3e-8, -1e-8, 2e-8])
    assert np.max(np.abs(geom.so3_exp(w) - expm_series(geom.skew(w)))) < 1e-15


def test_so3_exp_is_rotation(rng):
    ws = rng.uniform(-1, 1, size=(10_000, 3)) * rng.uniform(0, 10, size=(10_000, 1))
    for w in ws:
        assert geom.is_rotation(geom.so3_exp(w))


def test_so3_log_examples():
    assert np.array_equal(geom.so3_log(np.eye(3)), np.zeros(3))
    v = np.array([0.6, -0.0, 0.8])
    assert np.allclose(geom.so3_log(geom.so3_exp(v)), v, atol=1e-12)


def test_so3_log_pi_branch():
    w = geom.so3_log(np.diag([-1.0, -1.0, 1.0]))
    assert np.allclose(np.abs(w), [0, 0, math.pi], atol=1e-12)
    # the series oracle maps it back to the same matrix
    assert np.allclose(expm_series(geom.skew(w), 60), np.diag([-1.0, -1.0, 1.0]), atol=1e-10)


def test_so3_log_near_pi(rng):
    for _ in range(200):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        theta = math.pi - 10 ** rng.uniform(-12, -1)
        R = geom.so3_exp(theta * axis)
        w = geom.so3_log(R)
        assert 0.0 <= np.linalg.norm(w) <= math.pi + 1e-12
        assert np.allclose(geom.so3_exp(w), R, atol=1e-9)


def test_so3_log_range(rng):
    for _ in range(500):
        R = random_rotation(rng)
        w = geom.so3_log(R)
        assert np.linalg.norm(w) <= math.pi + 1e-12
        assert np.allclose(geom.so3_exp(w), R, atol=1e-9)


def test_left_jacobian_matches_series(rng):
    # J_l(w) = sum_k K^k / (k+1)!
    for _ in range(20):
        w = rng.normal(size=3)
        K = geom.skew(w)
        J = np.eye(3)
        term = np.eye(3)
        for k in range(1, 30):
            term = term @ K
            J = J + term / math.factorial(k + 1)
        assert np.allclose(geom.so3_left_jacobian(w), J, atol=1e-12)
        assert np.allclose(geom.so3_left_jacobian_inv(w) @ J, np.eye(3), atol=1e-10)


def test_gamma2_matches_series(rng):
    for scale in (1e-9, 1e-4, 5e-3, 2e-2, 1.0):
        w = rng.normal(size=3) * scale
        K = geom.skew(w)
        G = 0.5 * np.eye(3)
        term = np.eye(3)
        for k in range(1, 30):
            term = term @ K
            G = G + term / math.factorial(k + 2)
        assert np.allclose(geom.so3_gamma2(w), G, atol=1e-13)
        _, J, G2 = geom.so3_gammas(w)
        assert np.allclose(G2, G, atol=1e-13)
        assert np.allclose(J, geom.so3_left_jacobian(w), atol=1e-15)


def test_euler_roundtrip(rng):
    for _ in range(100):
        roll, yaw = rng.uniform(-math.pi, math.pi, 2)
        pitch = rng.uniform(-1.5, 1.5)
        got = geom.to_euler(geom.from_euler(roll, pitch, yaw))
        assert np.allclose(got, (roll, pitch, yaw), atol=1e-12)


def test_wrap_angle():
    assert geom.wrap_angle(math.pi) == -math.pi
    assert geom.wrap_angle(0.0) == 0.0
    assert math.isclose(geom.wrap_angle(3 * math.pi / 2), -math.pi / 2)


def test_orthonormalize_projects(rng):
    R = random_rotation(rng)
    noisy = R + 1e-6 * rng.normal(size=(3, 3))
    assert not geom.is_rotation(noisy)
    Q = geom.orthonormalize(noisy)
    assert geom.is_rotation(Q)
    assert np.linalg.norm(Q - R) < 1e-5
    # already clean input is returned as is
    assert geom.orthonormalize(R) is R


def test_se23_exp_examples():
    assert np.array_equal(geom.se23_exp(np.zeros(9)), np.eye(5))
    a, b = np.array([1.0, 2.0, 3.0]), np.array([-4.0, 5.0, 0.5])
    X = geom.se23_exp(np.concatenate([np.zeros(3), a, b]))
    R, v, p = geom.split_group(X)
    assert np.array_equal(R, np.eye(3))
    assert np.array_equal(v, a)
    assert np.array_equal(p, b)
    xi = np.array([0.1, 0.2, 0.3, 1, 0, 0, 0, 1, 0])
    assert np.max(np.abs(geom.se23_exp(xi) - expm_series(geom.se23_hat(xi)))) < 1e-10


def test_se23_exp_vs_series(rng):
    for _ in range(200):
        xi = rng.normal(size=9)
        xi *= rng.uniform(0, 2) / np.linalg.norm(xi)
        assert np.max(np.abs(geom.se23_exp(xi) - expm_series(geom.se23_hat(xi)))) < 1e-10


def test_se23_log_roundtrip(rng):
    for _ in range(200):
        xi = rng.normal(size=9)
        xi[:3] *= 2.5 / max(np.linalg.norm(xi[:3]), 2.5)
        assert np.allclose(geom.se23_log(geom.se23_exp(xi)), xi, atol=1e-9)


def test_group_layout():
    X = geom.make_group(np.eye(3), [1, 2, 3], [4, 5, 6])
    assert np.array_equal(X[3:, 3:], np.eye(2))
    assert np.array_equal(X[3:, :3], np.zeros((2, 3)))
    assert np.array_equal(X[:3, 3], [1, 2, 3])
    assert np.array_equal(X[:3, 4], [4, 5, 6])


def test_group_inverse_examples(rng):
    assert np.array_equal(geom.group_inverse(np.eye(5)), np.eye(5))
    X = geom.make_group(np.eye(3), [1, 0, 0], [0, 2, 0])
    _, v, p = geom.split_group(geom.group_inverse(X))
    assert np.array_equal(v, [-1, 0, 0])
    assert np.array_equal(p, [0, -2, 0])
    for _ in range(100):
        X = geom.make_group(random_rotation(rng), rng.normal(size=3) * 10, rng.normal(size=3) * 100)
        Xi = geom.group_inverse(X)
        assert np.max(np.abs(X @ Xi - np.eye(5))) < 1e-12
        assert np.allclose(Xi, np.linalg.inv(X), atol=1e-12)


def test_adjoint_identity(rng):
    for _ in range(50):
        X = geom.make_group(random_rotation(rng), rng.normal(size=3), rng.normal(size=3))
        xi = rng.normal(size=9) * 0.3
        lhs = X @ geom.se23_exp(xi) @ geom.group_inverse(X)
        rhs = geom.se23_exp(geom.se23_adjoint(X) @ xi)
        assert np.allclose(lhs, rhs, atol=1e-10)


def test_tangent_ordering_slices():
    # position occupies the third block, biases follow
    assert (geom.ROT, geom.VEL, geom.POS, geom.BG, geom.BA) == (
        slice(0, 3), slice(3, 6), slice(6, 9), slice(9, 12), slice(12, 15)
    )


@pytest.mark.parametrize("bad", [np.diag([1.0, 1.0, -1.0]), 2 * np.eye(3), np.full((3, 3), np.nan)])
def test_is_rotation_rejects(bad):
    assert not geom.is_rotation(bad)

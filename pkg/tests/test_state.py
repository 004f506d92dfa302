import math

import numpy as np

from inekf_gps import geom
from inekf_gps.config import FilterConfig, InitialBelief
from inekf_gps.state import (
    STATE_CSV_HEADER,
    RobotState,
    covariance_health,
    initial_state,
    is_healthy_covariance,
    state_from_group,
    state_to_group,
)

from conftest import random_state


def test_initial_state_identity():
    s, P = initial_state(np.zeros(3), 0.0, FilterConfig())
    assert np.array_equal(s.R, np.eye(3))
    assert np.array_equal(s.v, np.zeros(3))
    assert np.array_equal(s.p, np.zeros(3))
    assert np.array_equal(s.bg, np.zeros(3)) and np.array_equal(s.ba, np.zeros(3))


def test_initial_state_quarter_turn():
    s, _ = initial_state(np.zeros(3), math.pi / 2, FilterConfig())
    assert np.allclose(s.R @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def test_initial_covariance_defaults():
    _, P = initial_state(np.zeros(3), 0.0, FilterConfig())
    expected = np.array([0.01] * 3 + [0.1] * 3 + [1.0] * 3 + [0.01] * 6) ** 2
    assert np.array_equal(P, np.diag(expected))


def test_initial_covariance_override():
    cfg = FilterConfig(initial=InitialBelief(sigma_rot=[0.01, 0.01, 0.5], sigma_pos=2.0))
    _, P = initial_state(np.ones(3), 0.3, cfg)
    assert P[2, 2] == 0.25
    assert P[7, 7] == 4.0


def test_group_roundtrip(rng):
    assert np.array_equal(state_to_group(RobotState()), np.eye(5))
    s = RobotState(p=np.array([1.0, 2.0, 3.0]))
    X = state_to_group(s)
    assert np.array_equal(X[:3, 4], [1, 2, 3]) and np.array_equal(X[:3, 3], np.zeros(3))
    for _ in range(20):
        s = random_state(rng)
        X = state_to_group(s)
        back = state_from_group(geom.group_inverse(geom.group_inverse(X)), s.bg, s.ba)
        assert np.allclose(back.R, s.R, atol=1e-14)
        assert np.allclose(back.v, s.v, atol=1e-13)
        assert np.allclose(back.p, s.p, atol=1e-12)


def test_csv_row_roundtrip(rng):
    s = random_state(rng)
    row = s.to_row()
    assert len(row) == len(STATE_CSV_HEADER)
    back = RobotState.from_row(row)
    assert np.allclose(back.R, s.R, atol=1e-12)
    assert np.array_equal(back.p, s.p)
    assert np.array_equal(back.ba, s.ba)


def test_validity():
    s = RobotState()
    assert s.is_valid()
    s.p[0] = np.nan
    assert not s.is_finite()
    s = RobotState(R=np.diag([1.0, 1.0, -1.0]))
    assert not s.is_valid()


def test_covariance_health():
    assert is_healthy_covariance(np.eye(15))
    P = np.eye(15)
    P[0, 1] = 1e-3
    asym, _ = covariance_health(P)
    assert asym > 1e-9 and not is_healthy_covariance(P)
    P = np.eye(15)
    P[3, 3] = -1e-3
    assert not is_healthy_covariance(P)

import numpy as np
import pytest

from inekf_gps import geom


def expm_series(M, terms=30):
    """Truncated power series sum_k M^k / k!; independent of the closed forms."""
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


def random_rotation(rng):
    # uniform via QR of a Gaussian matrix, sign-fixed to det +1
    Q, Rr = np.linalg.qr(rng.standard_normal((3, 3)))
    Q = Q @ np.diag(np.sign(np.diag(Rr)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def expm():
    return expm_series


def random_state(rng, bias=True):
    from inekf_gps.state import RobotState

    return RobotState(
        R=random_rotation(rng),
        v=rng.normal(size=3) * 3.0,
        p=rng.normal(size=3) * 10.0,
        bg=rng.normal(size=3) * 0.01 if bias else np.zeros(3),
        ba=rng.normal(size=3) * 0.1 if bias else np.zeros(3),
        t=0.0,
    )


def so3_hat(w):
    return geom.skew(w)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

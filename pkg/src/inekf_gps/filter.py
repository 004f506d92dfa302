"""Filter object and the IMU/GPS stream merge that drives it."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import correction, geom
from .errors import FilterDivergence, GapTooLarge
from .heading import HeadingTracker
from .propagation import ImuSample, propagate
from .sim import Trajectory
from .state import RobotState, initial_state

log = logging.getLogger(__name__)


@dataclass
class EnuFix:
    """A GPS fix already mapped to the local ENU frame."""

    t: float
    p: np.ndarray
    sigma: np.ndarray


@dataclass
class UpdateRecord:
    t: float
    kind: str  # "position" or "pose"
    nis: float
    dof: int


@dataclass
class Counters:
    imu_samples: int = 0
    fixes_read: int = 0
    fixes_used: int = 0
    fixes_dropped: int = 0
    heading_refs_emitted: int = 0
    position_updates: int = 0
    pose_updates: int = 0
    warnings: list = field(default_factory=list)

    def as_dict(self):
        return {
            "imu_samples": self.imu_samples,
            "fixes_read": self.fixes_read,
            "fixes_used": self.fixes_used,
            "fixes_dropped": self.fixes_dropped,
            "heading_refs_emitted": self.heading_refs_emitted,
            "position_updates": self.position_updates,
            "pose_updates": self.pose_updates,
            "warnings": list(self.warnings),
        }


class InvariantFilter:
    """Left-invariant EKF on SE_2(3) x R^6 fed by IMU samples and ENU fixes.

    IMU samples drive prediction with the average of consecutive samples held
    over each interval. Each fix triggers a stacked position + heading update
    when the heading tracker yields a valid reference, and a position-only
    update otherwise.
    """

    def __init__(self, cfg, state, P):
        self.cfg = cfg
        self.state = state
        self.P = np.array(P, dtype=float)
        self.heading = HeadingTracker(cfg.heading)
        self._q_diag = cfg.noise.density_diag()
        self._gravity = np.asarray(cfg.effective_gravity, dtype=float)
        self._last_imu = None
        self.updates = []
        self.heading_refs = []

    def predict(self, u):
        """Advance to ``u.t``. The first sample only sets the hold value."""
        prev = self._last_imu
        self._last_imu = u
        if prev is None:
            return
        held = ImuSample(u.t, 0.5 * (prev.gyro + u.gyro), 0.5 * (prev.accel + u.accel))
        dt = u.t - self.state.t
        self.state, self.P = propagate(
            self.state, self.P, held, dt, self._q_diag, gravity=self._gravity, max_dt=self.cfg.max_imu_gap
        )

    def correct_position(self, p_meas, sigma_enu):
        m = correction.position_measurement(self.state, p_meas, sigma_enu)
        return self._apply(m, "position")

    def correct_pose(self, p_meas, R_meas, sigma_pos, sigma_rot):
        m = correction.stack_pose_measurement(self.state, p_meas, R_meas, sigma_pos, sigma_rot)
        return self._apply(m, "pose")

    def _apply(self, m, kind):
        nis = correction.normalized_innovation_squared(self.P, m)
        self.state, self.P = correction.apply_correction(self.state, self.P, m, self.cfg.gain_mode)
        rec = UpdateRecord(self.state.t, kind, nis, len(m.z))
        self.updates.append(rec)
        return rec

    def handle_fix(self, fix):
        """Fuse one ENU fix at the current filter time. Returns the update kind."""
        ref = self.heading.update(fix.t, fix.p, fix.sigma, self.state.R, self.state.v)
        if ref is not None:
            self.heading_refs.append(ref)
        if ref is not None and ref.valid:
            if self.cfg.heading.mode == "cog_composed":
                R_meas = ref.R
            else:
                R_meas = self.state.R
            self.correct_pose(fix.p, R_meas, fix.sigma, np.full(3, ref.sigma_yaw))
            return "pose"
        self.correct_position(fix.p, fix.sigma)
        return "position"


@dataclass
class RunResult:
    t: np.ndarray
    R: np.ndarray
    v: np.ndarray
    p: np.ndarray
    bg: np.ndarray
    ba: np.ndarray
    counters: Counters
    updates: list
    heading_refs: list
    final_P: np.ndarray

    def trajectory(self):
        return Trajectory(self.t, self.R, self.v, self.p)

    def states(self):
        for k in range(len(self.t)):
            yield RobotState(self.R[k], self.v[k], self.p[k], self.bg[k], self.ba[k], float(self.t[k]))


def _check_increasing(times, what):
    for k in range(1, len(times)):
        if not times[k] > times[k - 1]:
            raise ValueError(f"{what} timestamps not strictly increasing at index {k}")


def run_filter(imu, fixes, cfg, init_yaw=None, init_velocity=None, init_position=None, observer=None):
    """Run the filter over a full IMU stream and a list of :class:`EnuFix`.

    Merge policy: every IMU sample with ``t <= fix.t`` is processed before
    the fix; ties go to the IMU. A fix older than the filter time by more
    than one IMU period is dropped (counted, not fused), as is a fix
    arriving after the IMU stream has ended.

    The initial position comes from ``init_position`` if given, otherwise
    from the first fix when it is within ``cfg.heading.max_gap`` of the
    first IMU sample (that fix is then consumed by initialization), and
    otherwise the ENU origin.

    ``observer(kind, filter)`` is called after every prediction and update.
    """
    samples = list(imu)
    if not samples:
        raise ValueError("IMU stream is empty")
    _check_increasing([u.t for u in samples], "IMU")
    _check_increasing([f.t for f in fixes], "GPS")

    counters = Counters(imu_samples=len(samples))
    yaw0 = math.radians(cfg.initial.yaw_deg) if init_yaw is None else float(init_yaw)
    v0 = cfg.initial.velocity if init_velocity is None else np.asarray(init_velocity, dtype=float)
    t0 = samples[0].t

    fi = 0
    if not fixes:
        counters.warnings.append("no GPS fixes: dead reckoning only")
        log.warning("no GPS fixes: dead reckoning only")
    p0 = np.zeros(3) if init_position is None else np.asarray(init_position, dtype=float)
    use_first = init_position is None and fixes and abs(fixes[0].t - t0) <= cfg.heading.max_gap
    if use_first:
        p0 = fixes[0].p

    state, P = initial_state(p0, yaw0, cfg, v0=v0, t0=t0)
    filt = InvariantFilter(cfg, state, P)
    if use_first:
        filt.heading.update(fixes[0].t, fixes[0].p, fixes[0].sigma, state.R)
        counters.fixes_read += 1
        counters.fixes_used += 1
        fi = 1

    n = len(samples)
    out_R = np.empty((n, 3, 3))
    out_v = np.empty((n, 3))
    out_p = np.empty((n, 3))
    out_bg = np.empty((n, 3))
    out_ba = np.empty((n, 3))
    out_t = np.empty(n)
    period = cfg.max_imu_gap
    if n > 1:
        period = float(np.median(np.diff([u.t for u in samples[: min(n, 1000)]])))

    for k, u in enumerate(samples):
        try:
            filt.predict(u)
        except GapTooLarge as exc:
            raise GapTooLarge(f"IMU sample {k}: {exc}") from None
        s = filt.state
        if not (math.isfinite(s.p[0] + s.p[1] + s.p[2] + s.v[0] + s.v[1] + s.v[2]) and math.isfinite(filt.P.trace())):
            _check_finite(s, u.t, filt.P)
        if observer is not None and k > 0:
            observer("predict", filt)
        t_next = samples[k + 1].t if k + 1 < n else math.inf
        while fi < len(fixes) and fixes[fi].t < t_next:
            fix = fixes[fi]
            fi += 1
            counters.fixes_read += 1
            lag = filt.state.t - fix.t
            if lag > period + 1e-12 or -lag > period + 1e-12:
                counters.fixes_dropped += 1
                continue
            kind = filt.handle_fix(fix)
            counters.fixes_used += 1
            if kind == "pose":
                counters.pose_updates += 1
            else:
                counters.position_updates += 1
            if observer is not None:
                observer(kind, filt)
            _check_finite(filt.state, fix.t, filt.P)
        s = filt.state
        out_t[k] = s.t
        out_R[k] = s.R
        out_v[k] = s.v
        out_p[k] = s.p
        out_bg[k] = s.bg
        out_ba[k] = s.ba

    counters.heading_refs_emitted = filt.heading.emitted
    _check_finite(filt.state, filt.state.t, filt.P)
    return RunResult(
        out_t, out_R, out_v, out_p, out_bg, out_ba, counters, filt.updates, filt.heading_refs, filt.P
    )


def _check_finite(s, t, P=None):
    if not s.is_finite():
        raise FilterDivergence(f"non-finite state at t = {t:.6f} s")
    if P is not None and not np.all(np.isfinite(P)):
        raise FilterDivergence(f"non-finite covariance at t = {t:.6f} s")


def gps_track(fixes):
    """GPS-only baseline: the fixes themselves as a position track."""
    t = np.array([f.t for f in fixes], dtype=float)
    p = np.array([f.p for f in fixes], dtype=float).reshape(-1, 3)
    R = np.full((len(t), 3, 3), np.nan)
    v = np.full((len(t), 3), np.nan)
    return Trajectory(t, R, v, p)


def fixes_to_enu(fixes, origin=None):
    """Anchor the ENU origin at the first fix (unless given) and convert all fixes."""
    from .heading import EnuOrigin, geodetic_to_enu

    if not fixes:
        return origin, []
    if origin is None:
        origin = EnuOrigin(fixes[0].lat, fixes[0].lon, fixes[0].alt)
    return origin, [EnuFix(f.t, geodetic_to_enu(f, origin), np.asarray(f.sigma_enu, dtype=float)) for f in fixes]

"""Scoring estimated tracks against ground truth."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from .errors import NoOverlap
from .sim import Trajectory


@dataclass
class ErrorReport:
    """Position and heading error statistics for one track.

    Heading fields are ``None`` for tracks without orientation (e.g. raw GPS).
    """

    pos_rmse: float
    pos_max: float
    heading_rmse: float | None
    heading_max: float | None
    n_samples: int
    t: np.ndarray = field(repr=False)
    pos_err: np.ndarray = field(repr=False)
    heading_err: np.ndarray | None = field(default=None, repr=False)

    def summary(self):
        return {
            "pos_rmse_m": self.pos_rmse,
            "pos_max_m": self.pos_max,
            "heading_rmse_deg": self.heading_rmse,
            "heading_max_deg": self.heading_max,
            "n_samples": self.n_samples,
        }


def _has_rotation(tr):
    return tr.R is not None and len(tr.R) > 0 and bool(np.all(np.isfinite(tr.R)))


def interpolate(tr, times):
    """Positions/velocities linearly, rotations along the SO(3) geodesic."""
    times = np.asarray(times, dtype=float)
    p = np.stack([np.interp(times, tr.t, tr.p[:, i]) for i in range(3)], axis=1)
    v = None
    if tr.v is not None and np.all(np.isfinite(tr.v)):
        v = np.stack([np.interp(times, tr.t, tr.v[:, i]) for i in range(3)], axis=1)
    R = None
    if _has_rotation(tr):
        if len(tr.t) == 1:
            R = np.repeat(tr.R[:1], len(times), axis=0)
        else:
            slerp = Slerp(tr.t, Rotation.from_matrix(tr.R))
            R = slerp(np.clip(times, tr.t[0], tr.t[-1])).as_matrix()
    return Trajectory(times.copy(), R, v, p)


def heading_error_deg(R_true, R_est):
    """Yaw of ``R_true^T R_est`` in degrees, wrapped to [-180, 180)."""
    D = np.einsum("nji,njk->nik", R_true, R_est)
    err = np.degrees(np.arctan2(D[:, 1, 0], D[:, 0, 0]))
    return (err + 180.0) % 360.0 - 180.0


def _overlap(est, ref):
    if len(est.t) == 0 or len(ref.t) == 0:
        raise NoOverlap("empty track")
    lo, hi = ref.t[0], ref.t[-1]
    mask = (est.t >= lo - 1e-9) & (est.t <= hi + 1e-9)
    if not np.any(mask):
        raise NoOverlap(
            f"estimate span [{est.t[0]:.3f}, {est.t[-1]:.3f}] s and reference span "
            f"[{lo:.3f}, {hi:.3f}] s do not overlap"
        )
    return mask


def _select(tr, mask):
    return Trajectory(
        tr.t[mask],
        None if tr.R is None else tr.R[mask],
        None if tr.v is None else tr.v[mask],
        tr.p[mask],
    )


def _rms(x):
    return float(math.sqrt(np.mean(np.square(x))))


def align_and_score(est, truth, t_min=None):
    """Interpolate ``truth`` to the estimate timestamps and score.

    Estimate samples outside the truth span are ignored; ``t_min`` restricts
    scoring to ``t >= t_min``.
    """
    mask = _overlap(est, truth)
    if t_min is not None:
        mask &= est.t >= t_min
        if not np.any(mask):
            raise NoOverlap(f"no estimate samples after t = {t_min}")
    est = _select(est, mask)
    ref = interpolate(truth, est.t)
    pos_err = np.linalg.norm(est.p - ref.p, axis=1)
    heading_err = None
    h_rmse = h_max = None
    if _has_rotation(est) and ref.R is not None:
        heading_err = heading_error_deg(ref.R, est.R)
        h_rmse = _rms(heading_err)
        h_max = float(np.max(np.abs(heading_err)))
    return ErrorReport(
        pos_rmse=_rms(pos_err),
        pos_max=float(np.max(pos_err)),
        heading_rmse=h_rmse,
        heading_max=h_max,
        n_samples=int(len(est.t)),
        t=est.t.copy(),
        pos_err=pos_err,
        heading_err=heading_err,
    )


def inter_track_rmse(a, b):
    """Position RMSE between two estimate tracks, ``b`` interpolated onto ``a``."""
    mask = _overlap(a, b)
    a = _select(a, mask)
    ref = interpolate(b, a.t)
    return _rms(np.linalg.norm(a.p - ref.p, axis=1))


_METRICS = (
    ("pos_rmse", "Position RMSE (m)"),
    ("pos_max", "Position Max Error (m)"),
    ("heading_rmse", "Heading RMSE (deg)"),
    ("heading_max", "Heading Max Error (deg)"),
)


@dataclass
class Comparison:
    labels: list
    reports: list
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        base = self.reports[0]
        runs = {}
        for label, rep in zip(self.labels, self.reports):
            entry = rep.summary()
            deltas = {}
            for key, _ in _METRICS:
                a, b = getattr(rep, key), getattr(base, key)
                deltas[key] = None if a is None or b is None else a - b
            entry["delta_vs_" + self.labels[0]] = deltas
            runs[label] = entry
        return {"labels": list(self.labels), "runs": runs, **self.extra}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self):
        width = max(len(name) for _, name in _METRICS) + 2
        cols = [max(10, len(lbl) + 2) for lbl in self.labels]
        lines = ["Error metric (vs. truth)".ljust(width) + "".join(l.rjust(c) for l, c in zip(self.labels, cols))]
        lines.append("-" * len(lines[0]))
        for key, name in _METRICS:
            cells = []
            for rep, c in zip(self.reports, cols):
                val = getattr(rep, key)
                cells.append(("---" if val is None else f"{val:.3f}").rjust(c))
            lines.append(name.ljust(width) + "".join(cells))
        lines.append("Samples".ljust(width) + "".join(str(r.n_samples).rjust(c) for r, c in zip(self.reports, cols)))
        for key, val in sorted(self.extra.items()):
            lines.append(f"{key}: {val:.3f}" if isinstance(val, float) else f"{key}: {val}")
        return "\n".join(lines)


def compare_runs(reports, labels, extra=None):
    if not reports:
        raise ValueError("need at least one report")
    if len(labels) != len(reports):
        raise ValueError("one label per report")
    return Comparison(list(labels), list(reports), dict(extra or {}))

"""CSV readers and writers for sensor streams, state tracks and error series.

Floats are written with ``repr`` (shortest round-trip form), so files are
lossless and byte-stable across runs.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from . import geom
from .correction import GpsFix
from .errors import SchemaError
from .sim import ImuStream, Trajectory
from .state import STATE_CSV_HEADER

IMU_HEADER = ["t", "wx", "wy", "wz", "ax", "ay", "az"]
GPS_HEADER = ["t", "lat", "lon", "alt", "sd_e", "sd_n", "sd_u"]
ERROR_HEADER = ["t", "pos_err_m", "heading_err_deg"]
HEADING_HEADER = ["t", "yaw_cog_deg", "speed", "valid"]


def _fmt(x):
    x = float(x)
    if x == 0.0:
        return "0.0"  # avoid "-0.0"
    return repr(x)


def write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")


def read_table(path, header):
    """Parse a numeric CSV with an exact header. Rows are numbered from 1
    (the header) in errors. Returns an (n, len(header)) array."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise SchemaError(path, 1, "file is empty, expected a header") from None
        got = [c.strip() for c in first]
        if got != header:
            raise SchemaError(path, 1, f"expected header {','.join(header)}, got {','.join(got)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(path, lineno, f"expected {len(header)} columns, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise SchemaError(path, lineno, "non-numeric value") from None
            if not all(math.isfinite(v) for v in vals):
                raise SchemaError(path, lineno, "non-finite value")
            if rows and not vals[0] > rows[-1][0][0]:
                raise SchemaError(path, lineno, f"t = {vals[0]!r} is not after the previous row")
            rows.append((vals, lineno))
    data = np.array([r for r, _ in rows], dtype=float).reshape(-1, len(header))
    return data, [ln for _, ln in rows]


# -- IMU --------------------------------------------------------------------


def write_imu(path, imu):
    write_rows(path, IMU_HEADER, (
        (imu.t[k], *imu.gyro[k], *imu.accel[k]) for k in range(len(imu.t))
    ))


def read_imu(path):
    data, _ = read_table(path, IMU_HEADER)
    n = len(data)
    return ImuStream(data[:, 0].copy(), data[:, 1:4].copy(), data[:, 4:7].copy(), np.zeros((n, 3)), np.zeros((n, 3)))


# -- GPS --------------------------------------------------------------------


def write_gps(path, fixes):
    write_rows(path, GPS_HEADER, ((f.t, f.lat, f.lon, f.alt, *f.sigma_enu) for f in fixes))


def read_gps(path):
    data, lines = read_table(path, GPS_HEADER)
    fixes = []
    for row, lineno in zip(data, lines):
        try:
            fixes.append(GpsFix(row[0], row[1], row[2], row[3], row[4:7]))
        except ValueError as exc:
            raise SchemaError(path, lineno, str(exc)) from None
    return fixes


# -- state tracks -----------------------------------------------------------


def track_rows(t, R, v, p, bg, ba):
    euler = np.degrees(np.stack(_euler_batch(R), axis=1))
    for k in range(len(t)):
        yield (t[k], *p[k], *v[k], *euler[k], *bg[k], *ba[k])


def _euler_batch(R):
    roll = np.arctan2(R[:, 2, 1], R[:, 2, 2])
    pitch = np.arcsin(np.clip(-R[:, 2, 0], -1.0, 1.0))
    yaw = np.arctan2(R[:, 1, 0], R[:, 0, 0])
    return roll, pitch, yaw


def write_track(path, t, R, v, p, bg=None, ba=None):
    n = len(t)
    bg = np.zeros((n, 3)) if bg is None else bg
    ba = np.zeros((n, 3)) if ba is None else ba
    write_rows(path, STATE_CSV_HEADER, track_rows(t, R, v, p, bg, ba))


def read_track(path):
    """Read a state CSV into a :class:`Trajectory`; biases are dropped."""
    data, _ = read_table(path, STATE_CSV_HEADER)
    ang = np.radians(data[:, 7:10])
    R = np.array([geom.from_euler(*a) for a in ang]).reshape(-1, 3, 3)
    return Trajectory(data[:, 0].copy(), R, data[:, 4:7].copy(), data[:, 1:4].copy())


POSITION_HEADER = ["t", "px", "py", "pz"]


def write_position_track(path, tr):
    write_rows(path, POSITION_HEADER, ((tr.t[k], *tr.p[k]) for k in range(len(tr.t))))


def read_any_track(path):
    """State CSV, or a position-only ``t,px,py,pz`` CSV (orientation unknown)."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if first == ",".join(POSITION_HEADER):
        data, _ = read_table(path, POSITION_HEADER)
        n = len(data)
        return Trajectory(data[:, 0].copy(), np.full((n, 3, 3), np.nan), np.full((n, 3), np.nan), data[:, 1:4].copy())
    return read_track(path)


# -- diagnostics ------------------------------------------------------------


def write_errors(path, report):
    herr = report.heading_err
    rows = []
    for k in range(len(report.t)):
        h = "" if herr is None else _fmt(herr[k])
        rows.append((report.t[k], report.pos_err[k], h))
    write_rows(path, ERROR_HEADER, rows)


def write_heading_refs(path, refs):
    write_rows(path, HEADING_HEADER, (
        (r.t, math.degrees(r.yaw_cog), r.speed, "1" if r.valid else "0") for r in refs
    ))

"""
CSV log readers and writers.

One file per channel: a header row, comma-separated values, ``#`` comments
and blank lines ignored. Schemas (SI units)::

    imu.csv          t, wx, wy, wz, ax, ay, az
    wheels.csv       t, qdot_r, qdot_l
    velocity.csv     t, vx, vy, vz                      (body frame)
    kin.csv          t, leg_id, px, py, pz, J (3 x n row-major), n, C (n x n row-major)
    contact.csv      t, leg_id, flag
    grf.csv          t, leg_id, f_n
    groundtruth.csv  t, px, py, pz, qw, qx, qy, qz
    trajectory.csv   t, px, py, pz, qw, qx, qy, qz, vx, vy, vz

Kinematics rows have a variable length; ``n`` follows the ``3 n`` Jacobian
entries, which is checked against the row length.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import LogParseError
from .measurements import (
    ContactEvent,
    GrfSample,
    ImuSample,
    KinematicsMeasurement,
    VelocityMeasurement,
    WheelRates,
)
from .metrics import Trajectory

IMU_HEADER = ("t", "wx", "wy", "wz", "ax", "ay", "az")
WHEELS_HEADER = ("t", "qdot_r", "qdot_l")
VELOCITY_HEADER = ("t", "vx", "vy", "vz")
KIN_HEADER = ("t", "leg_id", "px", "py", "pz", "J...", "n", "C...")
CONTACT_HEADER = ("t", "leg_id", "flag")
GRF_HEADER = ("t", "leg_id", "f_n")
GROUNDTRUTH_HEADER = ("t", "px", "py", "pz", "qw", "qx", "qy", "qz")
TRAJECTORY_HEADER = GROUNDTRUTH_HEADER + ("vx", "vy", "vz")


def _rows(path):
    """Yield ``(line_number, [float, ...])`` for data rows, skipping the header."""
    header_seen = False
    with open(path, newline="") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            fields = [x.strip() for x in text.split(",")]
            if not header_seen:
                header_seen = True
                try:
                    [float(x) for x in fields]
                except ValueError:
                    continue  # header row
                raise LogParseError(path, lineno, "missing header row")
            try:
                values = [float(x) for x in fields]
            except ValueError as exc:
                raise LogParseError(path, lineno, f"non-numeric field ({exc})") from None
            if not all(math.isfinite(v) for v in values):
                raise LogParseError(path, lineno, "non-finite value")
            yield lineno, values


def _fixed(path, width):
    for lineno, values in _rows(path):
        if len(values) != width:
            raise LogParseError(path, lineno, f"expected {width} fields, got {len(values)}")
        yield lineno, values


def _leg(path, lineno, value):
    if value != int(value) or value < 0:
        raise LogParseError(path, lineno, f"leg id must be a non-negative integer, got {value}")
    return int(value)


def read_imu(path):
    return [ImuSample(v[0], np.array(v[1:4]), np.array(v[4:7])) for _, v in _fixed(path, 7)]


def read_wheels(path, wheel_radius):
    return [WheelRates(v[0], v[1], v[2], wheel_radius) for _, v in _fixed(path, 3)]


def read_velocity(path, cov):
    cov = np.asarray(cov, dtype=float)
    return [VelocityMeasurement(v[0], np.array(v[1:4]), cov) for _, v in _fixed(path, 4)]


def read_kinematics(path):
    out = []
    for lineno, v in _rows(path):
        # t, leg, p(3), J(3n), n, C(n^2)  ->  len = 6 + 3n + n^2
        count = len(v)
        n = None
        for cand in range(1, 64):
            if 6 + 3 * cand + cand * cand == count:
                n = cand
                break
        if n is None or v[5 + 3 * n] != n:
            raise LogParseError(path, lineno, f"kinematics row of {count} fields is malformed")
        J = np.array(v[5:5 + 3 * n]).reshape(3, n)
        C = np.array(v[6 + 3 * n:]).reshape(n, n)
        out.append(KinematicsMeasurement(v[0], _leg(path, lineno, v[1]), np.array(v[2:5]), J, C))
    return out


def read_contact(path):
    out = []
    for lineno, v in _fixed(path, 3):
        if v[2] not in (0.0, 1.0):
            raise LogParseError(path, lineno, f"contact flag must be 0 or 1, got {v[2]}")
        out.append(ContactEvent(v[0], _leg(path, lineno, v[1]), bool(v[2])))
    return out


def read_grf(path):
    return [GrfSample(v[0], _leg(path, ln, v[1]), v[2]) for ln, v in _fixed(path, 3)]


def read_trajectory(path):
    """Ground-truth or estimated trajectory (extra velocity columns are ignored)."""
    rows = []
    for lineno, v in _rows(path):
        if len(v) not in (8, 11):
            raise LogParseError(path, lineno, f"expected 8 or 11 fields, got {len(v)}")
        if rows and v[0] <= rows[-1][0]:
            raise LogParseError(path, lineno, "stamps must be strictly increasing")
        rows.append(v[:8])
    a = np.array(rows, dtype=float).reshape(-1, 8)
    return Trajectory.from_arrays(a[:, 0], a[:, 1:4], a[:, 4:8])


def _write(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(repr(float(x)) if not isinstance(x, int) else str(x)
                             for x in row) + "\n")


def write_imu(path, samples):
    _write(path, IMU_HEADER, ([m.stamp, *m.omega, *m.accel] for m in samples))


def write_wheels(path, samples):
    _write(path, WHEELS_HEADER, ([m.stamp, m.qdot_r, m.qdot_l] for m in samples))


def write_velocity(path, samples):
    _write(path, VELOCITY_HEADER, ([m.stamp, *m.v_body] for m in samples))


def write_kinematics(path, samples):
    def row(m):
        n = m.jacobian.shape[1]
        return [m.stamp, m.leg_id, *m.foot_pos_body, *m.jacobian.ravel(), n,
                *m.encoder_cov.ravel()]
    _write(path, KIN_HEADER, (row(m) for m in samples))


def write_contact(path, events):
    _write(path, CONTACT_HEADER, ([m.stamp, m.leg_id, int(bool(m.in_contact))] for m in events))


def write_grf(path, samples):
    _write(path, GRF_HEADER, ([m.stamp, m.leg_id, m.grf_normal] for m in samples))


def write_groundtruth(path, stamps, positions, quaternions_wxyz):
    _write(path, GROUNDTRUTH_HEADER,
           ([t, *p, *q] for t, p, q in zip(stamps, positions, quaternions_wxyz)))


def write_trajectory(path, records):
    """Write :class:`~inekf.pipeline.TrajectoryRecord` rows."""
    _write(path, TRAJECTORY_HEADER,
           ([r.stamp, *r.position, *r.quaternion, *r.velocity] for r in records))

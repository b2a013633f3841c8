"""
Odometry accuracy metrics: relative pose error per meter and final drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from .errors import InsufficientOverlap


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Timestamped poses.

    Attributes
    ----------
    stamps : numpy.ndarray, shape (N,)
        Strictly increasing times (s).
    positions : numpy.ndarray, shape (N, 3)
    rotations : scipy.spatial.transform.Rotation
        ``N`` body-to-world rotations.
    """

    stamps: np.ndarray
    positions: np.ndarray
    rotations: Rotation

    def __post_init__(self):
        stamps = np.asarray(self.stamps, dtype=float).reshape(-1)
        positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if positions.shape[0] != stamps.shape[0] or len(self.rotations) != stamps.shape[0]:
            raise ValueError("stamps, positions and rotations must have equal length")
        if stamps.size > 1 and np.any(np.diff(stamps) <= 0.0):
            raise ValueError("trajectory stamps must be strictly increasing")
        object.__setattr__(self, "stamps", stamps)
        object.__setattr__(self, "positions", positions)

    def __len__(self):
        return self.stamps.shape[0]

    @classmethod
    def from_arrays(cls, stamps, positions, quaternions_wxyz=None, matrices=None):
        """Build from (w, x, y, z) quaternions or rotation matrices."""
        if matrices is not None:
            rot = Rotation.from_matrix(np.asarray(matrices, dtype=float))
        else:
            q = np.asarray(quaternions_wxyz, dtype=float).reshape(-1, 4)
            rot = Rotation.from_quat(q[:, [1, 2, 3, 0]])
        return cls(stamps, positions, rot)

    @classmethod
    def from_records(cls, records):
        """From a list of :class:`~inekf.pipeline.TrajectoryRecord`."""
        stamps = [r.stamp for r in records]
        pos = np.array([r.position for r in records]).reshape(-1, 3)
        quat = np.array([r.quaternion for r in records]).reshape(-1, 4)
        return cls.from_arrays(stamps, pos, quat)

    def cumulative_length(self):
        steps = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(steps)])

    def length(self):
        """Arc length of the position track (m)."""
        return float(self.cumulative_length()[-1]) if len(self) else 0.0

    def interpolate(self, stamps):
        """Linear positions and slerped rotations at ``stamps`` within range."""
        stamps = np.asarray(stamps, dtype=float)
        pos = np.column_stack([np.interp(stamps, self.stamps, self.positions[:, i])
                               for i in range(3)])
        rot = Slerp(self.stamps, self.rotations)(stamps)
        return Trajectory(stamps, pos, rot)


def _overlap(est, ref):
    if len(est) < 2 or len(ref) < 2:
        raise InsufficientOverlap("both trajectories need at least two poses")
    lo = max(est.stamps[0], ref.stamps[0])
    hi = min(est.stamps[-1], ref.stamps[-1])
    mask = (ref.stamps >= lo) & (ref.stamps <= hi)
    if mask.sum() < 2:
        raise InsufficientOverlap(
            f"time ranges [{est.stamps[0]}, {est.stamps[-1]}] and "
            f"[{ref.stamps[0]}, {ref.stamps[-1]}] barely overlap"
        )
    ref_o = Trajectory(ref.stamps[mask], ref.positions[mask], ref.rotations[np.flatnonzero(mask)])
    return est.interpolate(ref_o.stamps), ref_o


def rpe(est, ref, delta=1.0):
    """
    Root-mean-square relative pose error per meter travelled.

    For every reference pose ``i`` the partner ``j`` is the first pose at
    least ``delta`` metres further along the reference path. The relative
    motion error ``(Q_i^-1 Q_j)^-1 (P_i^-1 P_j)`` between reference ``Q``
    and estimate ``P`` is scaled by the reference path length between the
    two poses, so the result is in metres per metre and degrees per metre.

    Parameters
    ----------
    est, ref : Trajectory
        The estimate is interpolated at the reference stamps.
    delta : float
        Path-length separation of the pose pairs (m).

    Returns
    -------
    tuple of float
        ``(translational m/m, rotational deg/m)``.

    Raises
    ------
    InsufficientOverlap
        If the time ranges do not overlap or the overlapping reference path
        is shorter than ``delta``.
    """
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    est_i, ref_o = _overlap(est, ref)
    s = ref_o.cumulative_length()
    if s[-1] < delta:
        raise InsufficientOverlap(
            f"overlapping reference path {s[-1]:.3f} m is shorter than delta {delta} m"
        )
    i = np.flatnonzero(s <= s[-1] - delta)
    j = np.searchsorted(s, s[i] + delta, side="left")
    span = s[j] - s[i]

    def relative(traj):
        Ri, Rj = traj.rotations[i], traj.rotations[j]
        dp = Ri.inv().apply(traj.positions[j] - traj.positions[i])
        return Ri.inv() * Rj, dp

    dR_ref, dp_ref = relative(ref_o)
    dR_est, dp_est = relative(est_i)
    # E = (ref)^-1 (est): rotation ref^-1 est, translation ref_R^T (dp_est - dp_ref)
    rot_err = (dR_ref.inv() * dR_est).magnitude()
    trans_err = np.linalg.norm(dR_ref.inv().apply(dp_est - dp_ref), axis=1)
    t_rmse = float(np.sqrt(np.mean((trans_err / span) ** 2)))
    r_rmse = float(np.degrees(np.sqrt(np.mean((rot_err / span) ** 2))))
    return t_rmse, r_rmse


def drift_percentage(final_drift_m, length_m):
    """``100 * final drift / trajectory length``."""
    if not length_m > 0.0:
        raise ValueError("trajectory length must be positive")
    return 100.0 * final_drift_m / length_m


def final_drift(est, ref):
    """
    Distance between terminal positions and its share of the reference path.

    Returns
    -------
    tuple of float
        ``(drift m, drift percentage %)``; the percentage is 0 for a
        reference that does not move.
    """
    if len(est) == 0 or len(ref) == 0:
        raise ValueError("trajectories must be nonempty")
    d = float(np.linalg.norm(est.positions[-1] - ref.positions[-1]))
    length = ref.length()
    return d, (drift_percentage(d, length) if length > 0.0 else 0.0)


def attitude_errors(R_est, R_true):
    """
    Roll, pitch and yaw differences (deg) between two rotations, wrapped to (-180, 180].

    Angles are the x-y-z extrinsic Euler angles of each rotation.
    """
    e = Rotation.from_matrix(R_est).as_euler("xyz", degrees=True)
    t = Rotation.from_matrix(R_true).as_euler("xyz", degrees=True)
    d = e - t
    return (d + 180.0) % 360.0 - 180.0

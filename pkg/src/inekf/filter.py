"""
Invariant EKF machinery: estimator state, right/left-invariant updates and
error-frame switching.

The covariance is laid out over the tangent error ``(xi_omega, xi_v, xi_p,
xi_d1, ...)`` followed, when biases are estimated, by ``(zeta_bg, zeta_ba)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

from .errors import DimensionMismatch, SingularInnovation
from . import _kernels
from .liegroup import SEK3, adjoint, freeze, frozen, inverse
from .measurements import ImuSample

COND_LIMIT = 1e12
COV_FLOOR = 1e-12


class Frame(enum.Enum):
    """Invariance of an error definition or of an observation."""

    RIGHT = "right"
    LEFT = "left"


@dataclass(frozen=True, eq=False)
class BiasState:
    """Gyro bias ``bg`` (rad/s) and accelerometer bias ``ba`` (m/s^2)."""

    bg: np.ndarray = field(default_factory=lambda: np.zeros(3))
    ba: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("bg", "ba"):
            a = np.array(getattr(self, name), dtype=float).reshape(3)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def as_vector(self):
        return np.concatenate([self.bg, self.ba])

    @classmethod
    def from_vector(cls, x):
        return cls(x[:3], x[3:6])


_EMPTY = MappingProxyType({})


@dataclass(frozen=True, eq=False)
class EstimatorState:
    """
    Full filter estimate.

    Attributes
    ----------
    X : SEK3
        Navigation state (and contact points).
    P : numpy.ndarray
        Error covariance of size ``X.dim`` (+6 with biases).
    theta : BiasState or None
        IMU biases; ``None`` disables bias estimation.
    stamp : float
        Time of the latest processed measurement.
    error_frame : Frame
        Convention in which ``P`` is expressed.
    slots : tuple of int
        Leg id owning each contact column, in column order.
    imu_hold : ImuSample or None
        Last IMU sample, held constant until the next one arrives.
    contact_flags : Mapping[int, bool]
        Latest contact flag per leg.
    kin_cache : Mapping[int, KinematicsMeasurement]
        Latest kinematics sample per leg.
    gyro : GyroFilterState or None
        State of the upstream gyro filter when enabled.
    """

    X: SEK3
    P: np.ndarray
    theta: Optional[BiasState] = None
    stamp: float = 0.0
    error_frame: Frame = Frame.RIGHT
    slots: tuple = ()
    imu_hold: Optional[ImuSample] = None
    contact_flags: Mapping = _EMPTY
    kin_cache: Mapping = _EMPTY
    gyro: object = None

    def __post_init__(self):
        P = frozen(self.P)
        n = self.X.dim + (6 if self.theta is not None else 0)
        if P.shape != (n, n):
            raise DimensionMismatch(f"covariance must be {n}x{n}, got {P.shape}")
        if len(self.slots) != self.X.k - 2:
            raise DimensionMismatch(
                f"{len(self.slots)} slot owners for {self.X.k - 2} contact columns"
            )
        object.__setattr__(self, "P", P)

    @property
    def dim(self):
        return self.P.shape[0]

    @property
    def has_bias(self):
        return self.theta is not None

    def slot_column(self, leg_id):
        """Tangent block index of a leg's contact point, or ``None``."""
        try:
            return 3 + self.slots.index(leg_id)
        except ValueError:
            return None

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class LinearObservation:
    """
    Invariant observation ``Y = X^-1 b + V`` (right) or ``Y = X b + V`` (left).

    Only the first three rows of the innovation are kept; the homogeneous rows
    vanish identically. ``H`` and ``N`` are expressed on those reduced rows,
    and ``N`` is already conjugated into the error frame.
    """

    b: np.ndarray
    Y: np.ndarray
    H: np.ndarray
    N: np.ndarray
    form: Frame = Frame.RIGHT

    def __post_init__(self):
        for name in ("b", "Y", "H", "N"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.b.shape != self.Y.shape:
            raise DimensionMismatch(f"b {self.b.shape} and Y {self.Y.shape} differ")
        m = self.H.shape[0]
        if self.N.shape != (m, m):
            raise DimensionMismatch(f"N must be {m}x{m}, got {self.N.shape}")

    def innovation(self, X):
        """Reduced innovation ``X Y - b`` (right) or ``X^-1 Y - b`` (left)."""
        Y, b = self.Y, self.b
        if Y.shape[0] != 3 + X.k:
            raise DimensionMismatch(f"observation vector length {Y.shape[0]} for k={X.k}")
        if self.form is Frame.RIGHT:
            z = X.R @ Y[:3] + X.cols @ Y[3:]
        else:
            z = X.R.T @ (Y[:3] - X.cols @ Y[3:])
        return z - b[:3]


def kalman_gain(P, H, N):
    """
    Kalman gain ``L = P H^T S^-1`` with ``S = H P H^T + N``.

    Raises
    ------
    SingularInnovation
        If ``S`` is not positive definite or its condition number exceeds 1e12.
    """
    PHt = P @ H.T
    S = H @ PHt + N
    S = 0.5 * (S + S.T)
    w, V = np.linalg.eigh(S)
    if not w[0] > 0.0 or w[-1] > COND_LIMIT * w[0]:
        raise SingularInnovation(f"innovation covariance eigenvalues {w}")
    S_inv = (V / w) @ V.T
    return PHt @ S_inv


def floor_covariance(P, floor=COV_FLOOR):
    """Symmetrize and lift eigenvalues below ``floor`` up to it."""
    P = 0.5 * (P + P.T)
    n = P.shape[0]
    try:
        np.linalg.cholesky(P - floor * np.eye(n))
        return P
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(P)
        w = np.maximum(w, floor)
        P = (V * w) @ V.T
        return 0.5 * (P + P.T)


def joseph_update(P, L, H, N):
    """Joseph-form covariance update ``(I - L H) P (I - L H)^T + L N L^T``."""
    IKH = np.eye(P.shape[0]) - L @ H
    return IKH @ P @ IKH.T + L @ N @ L.T


def _check(s, obs, frame):
    if obs.form is not frame:
        raise ValueError(f"expected a {frame.value}-invariant observation, got {obs.form.value}")
    if s.error_frame is not frame:
        raise ValueError(
            f"state covariance is in the {s.error_frame.value} frame; switch_frame first"
        )
    if obs.H.shape[1] != s.dim:
        raise DimensionMismatch(f"H has {obs.H.shape[1]} columns, state dimension is {s.dim}")


def _apply(s, obs, left):
    z = obs.innovation(s.X)
    X = s.X
    R, cols, P, delta, ok = _kernels.update_step(
        X.R, X.cols, s.P, z, obs.H, obs.N, left, COND_LIMIT
    )
    if not ok:
        raise SingularInnovation("innovation covariance is singular or ill-conditioned")
    theta = s.theta
    if theta is not None:
        theta = BiasState.from_vector(theta.as_vector() + delta[X.dim:])
    if not _kernels.cholesky_ok(P, COV_FLOOR):
        P = floor_covariance(P)
    return replace(s, X=SEK3(freeze(R), freeze(cols)), theta=theta, P=freeze(P))


def ri_update(s, obs):
    """
    Right-invariant update ``X+ = exp(L (X Y - b)) X`` with Joseph-form covariance.

    Parameters
    ----------
    s : EstimatorState
        State whose covariance is in the right-invariant frame.
    obs : LinearObservation
        Right-invariant observation.

    Returns
    -------
    EstimatorState
    """
    _check(s, obs, Frame.RIGHT)
    return _apply(s, obs, left=False)


def li_update(s, obs):
    """Left-invariant update ``X+ = X exp(L (X^-1 Y - b))``; mirrors :func:`ri_update`."""
    _check(s, obs, Frame.LEFT)
    return _apply(s, obs, left=True)


def _extend(Ad, n):
    if Ad.shape[0] == n:
        return Ad
    T = np.eye(n)
    T[:Ad.shape[0], :Ad.shape[0]] = Ad
    return T


def frame_adjoint(s):
    """``block_diag(Ad_X, I_6)`` mapping left-invariant errors to right-invariant ones."""
    return _extend(adjoint(s.X), s.dim)


def switch_frame(s, target):
    """
    Re-express the covariance in another error convention.

    ``P_right = Ad P_left Ad^T``; the mean is untouched. Bias rows are carried
    by an identity block since the bias error is a plain difference.
    """
    if s.error_frame is target:
        return s
    if target is Frame.RIGHT:
        T = frame_adjoint(s)
    else:
        T = _extend(adjoint(inverse(s.X)), s.dim)
    P = T @ s.P @ T.T
    return replace(s, P=0.5 * (P + P.T), error_frame=target)


def update(s, obs):
    """Apply an observation of either invariance, switching frames around it if needed."""
    if obs.form is s.error_frame:
        return ri_update(s, obs) if obs.form is Frame.RIGHT else li_update(s, obs)
    original = s.error_frame
    s = switch_frame(s, obs.form)
    s = ri_update(s, obs) if obs.form is Frame.RIGHT else li_update(s, obs)
    return switch_frame(s, original)

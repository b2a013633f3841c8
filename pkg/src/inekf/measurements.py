"""
Measurement records consumed by the estimator.

Each sensor channel has its own small immutable record; together they form the
tagged union routed by :func:`inekf.pipeline.dispatch`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def _vec3(x):
    a = np.array(x, dtype=float).reshape(3)
    a.flags.writeable = False
    return a


def _mat(x, shape=None):
    a = np.array(x, dtype=float)
    if shape is not None:
        a = a.reshape(shape)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ImuSample:
    """Gyro rate ``omega`` (rad/s) and specific force ``accel`` (m/s^2) in the body frame."""

    stamp: float
    omega: np.ndarray
    accel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", _vec3(self.omega))
        object.__setattr__(self, "accel", _vec3(self.accel))


@dataclass(frozen=True, eq=False)
class VelocityMeasurement:
    """Body-frame velocity (m/s) with its 3x3 covariance."""

    stamp: float
    v_body: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v_body", _vec3(self.v_body))
        object.__setattr__(self, "cov", _mat(self.cov, (3, 3)))


@dataclass(frozen=True)
class WheelRates:
    """Right and left wheel angular rates (rad/s) of a differential-drive base."""

    stamp: float
    qdot_r: float
    qdot_l: float
    wheel_radius: float

    def __post_init__(self):
        if not self.wheel_radius > 0.0:
            raise ValueError(f"wheel radius must be positive, got {self.wheel_radius}")


@dataclass(frozen=True, eq=False)
class KinematicsMeasurement:
    """
    Leg forward kinematics evaluated at the measured joint angles.

    Attributes
    ----------
    stamp : float
    leg_id : int
    foot_pos_body : numpy.ndarray, shape (3,)
        Foot position in the body (IMU) frame.
    jacobian : numpy.ndarray, shape (3, n_joints)
        Jacobian of the foot position with respect to the joint angles.
    encoder_cov : numpy.ndarray, shape (n_joints, n_joints)
        Joint encoder noise covariance (rad^2).
    foot_rot_body : numpy.ndarray or None
        Orientation of the contact frame in the body frame; identity if absent.
    """

    stamp: float
    leg_id: int
    foot_pos_body: np.ndarray
    jacobian: np.ndarray
    encoder_cov: np.ndarray
    foot_rot_body: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "foot_pos_body", _vec3(self.foot_pos_body))
        J = _mat(self.jacobian)
        if J.ndim != 2 or J.shape[0] != 3:
            raise ValueError(f"jacobian must be 3 x n, got {J.shape}")
        n = J.shape[1]
        object.__setattr__(self, "jacobian", J)
        object.__setattr__(self, "encoder_cov", _mat(self.encoder_cov, (n, n)))
        if self.foot_rot_body is not None:
            object.__setattr__(self, "foot_rot_body", _mat(self.foot_rot_body, (3, 3)))

    def foot_cov_body(self):
        """Covariance of the body-frame foot position, ``J Cov J^T``."""
        return self.jacobian @ self.encoder_cov @ self.jacobian.T


@dataclass(frozen=True)
class ContactEvent:
    """Contact state change (or current flag) for one leg."""

    stamp: float
    leg_id: int
    in_contact: bool


@dataclass(frozen=True)
class GrfSample:
    """Estimated normal ground-reaction force (N) for one leg."""

    stamp: float
    leg_id: int
    grf_normal: float


@dataclass(frozen=True, eq=False)
class AngularRateMeasurement:
    """
    Secondary angular-velocity source used to correct the gyro filter.

    ``biased`` selects whether the gyro filter treats the reading as carrying
    the estimated bias.
    """

    stamp: float
    omega: np.ndarray
    cov: np.ndarray = field(default_factory=lambda: np.eye(3) * 1e-4)
    biased: bool = False

    def __post_init__(self):
        object.__setattr__(self, "omega", _vec3(self.omega))
        object.__setattr__(self, "cov", _mat(self.cov, (3, 3)))


MEASUREMENT_TYPES = (
    ImuSample,
    VelocityMeasurement,
    WheelRates,
    KinematicsMeasurement,
    ContactEvent,
    GrfSample,
    AngularRateMeasurement,
)

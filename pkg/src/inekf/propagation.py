"""
IMU strapdown process model and right-invariant covariance propagation.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, NonPositiveDt
from .filter import Frame, switch_frame, frame_adjoint
from . import _kernels
from .liegroup import SEK3, _reorthonormalize, freeze, gammas, skew

log = logging.getLogger(__name__)

GRAVITY = (0.0, 0.0, -9.80665)
DT_MIN = 1e-5
DT_MAX = 0.1


@dataclass(frozen=True, eq=False)
class ImuNoiseParams:
    """
    Continuous-time noise densities.

    Attributes
    ----------
    gyro_density : float
        rad/s/sqrt(Hz)
    accel_density : float
        m/s^2/sqrt(Hz)
    gyro_bias_walk : float
        rad/s^2/sqrt(Hz)
    accel_bias_walk : float
        m/s^3/sqrt(Hz)
    contact_density : float
        m/s/sqrt(Hz), velocity noise of a stance foot in the contact frame.
    gravity : numpy.ndarray
        World-frame gravity vector (m/s^2).
    """

    gyro_density: float = 0.0
    accel_density: float = 0.0
    gyro_bias_walk: float = 0.0
    accel_bias_walk: float = 0.0
    contact_density: float = 0.0
    gravity: np.ndarray = field(default_factory=lambda: np.array(GRAVITY))

    def __post_init__(self):
        for name in ("gyro_density", "accel_density", "gyro_bias_walk",
                     "accel_bias_walk", "contact_density"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        g = np.array(self.gravity, dtype=float).reshape(3)
        g.flags.writeable = False
        object.__setattr__(self, "gravity", g)


def clamp_dt(dt):
    """Clamp an IMU interval to ``[1e-5, 0.1]`` s, warning when it had to."""
    if dt < DT_MIN or dt > DT_MAX:
        clamped = min(max(dt, DT_MIN), DT_MAX)
        log.warning("IMU interval %.6g s outside [%g, %g]; clamped to %.6g s",
                    dt, DT_MIN, DT_MAX, clamped)
        return clamped
    return dt


def dynamics(X, omega, accel, gravity=GRAVITY):
    """
    Deterministic dynamics ``f_u(X)`` as a ``(3 + k)`` square matrix.

    ``dR = R skew(omega)``, ``dv = R accel + g``, ``dp = v`` and contact points
    are constant.
    """
    k = X.k
    F = np.zeros((3 + k, 3 + k))
    F[:3, :3] = X.R @ skew(omega)
    F[:3, 3] = X.R @ np.asarray(accel, dtype=float) + np.asarray(gravity, dtype=float)
    F[:3, 4] = X.v
    return F


def propagate_mean(s, u, dt, gravity=GRAVITY):
    """
    Integrate the mean over ``dt`` with the inputs held constant.

    ::

        R+ = R Gamma0(w dt)
        v+ = v + g dt + R Gamma1(w dt) a dt
        p+ = p + v dt + g dt^2 / 2 + R Gamma2(w dt) a dt^2

    where ``w`` and ``a`` are the bias-corrected gyro and accelerometer
    readings. Contact points and biases are unchanged.
    """
    if not dt > 0.0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")
    omega = u.omega
    accel = u.accel
    if s.theta is not None:
        omega = omega - s.theta.bg
        accel = accel - s.theta.ba
    g = np.asarray(gravity, dtype=float)
    X = s.X
    R, v, p = X.R, X.v, X.p
    G0, G1, G2 = gammas(omega * dt)
    cols = X.cols.copy()
    cols[:, 0] = v + g * dt + R @ (G1 @ accel) * dt
    cols[:, 1] = p + v * dt + 0.5 * g * dt * dt + R @ (G2 @ accel) * (dt * dt)
    return replace(s, X=SEK3(_reorthonormalize(R @ G0), cols))


def _base_A(n, k, gravity):
    A = np.zeros((n, n))
    A[3:6, 0:3] = skew(gravity)
    A[6:9, 3:6] = np.eye(3)
    return A


def error_dynamics_matrix(s, gravity=GRAVITY):
    """
    Linearized right-invariant error dynamics.

    Without biases the matrix only holds ``skew(g)`` and an identity block and
    is the same for every state. With biases, the last six columns couple the
    gyro bias through ``-R, -skew(v) R, -skew(p) R, -skew(d) R`` and the
    accelerometer bias through ``-R`` on the velocity rows.
    """
    n = s.dim
    k = s.X.k
    A = _base_A(n, k, gravity)
    if s.theta is None:
        return A
    R = s.X.R
    m = 3 * (k + 1)
    A[0:3, m:m + 3] = -R
    for j in range(k):
        A[3 * (j + 1):3 * (j + 2), m:m + 3] = -skew(s.X.cols[:, j]) @ R
    A[3:6, m + 3:m + 6] = -R
    return A


def discretize(A, dt):
    """
    Transition matrix ``exp(A dt)`` by its power series.

    The error-dynamics matrices are nilpotent, so the series terminates: the
    bias-free matrix gives ``I + A dt + (A dt)^2 / 2`` exactly.
    """
    if not dt > 0.0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")
    n = A.shape[0]
    Phi = np.eye(n)
    term = np.eye(n)
    Adt = A * dt
    for i in range(1, 30):
        term = term @ Adt / i
        if not term.any():
            break
        Phi = Phi + term
        if np.abs(term).max() <= 1e-17 * np.abs(Phi).max():
            break
    return Phi


def continuous_noise(noise, k, with_bias, foot_rotations=None):
    """
    Block-diagonal continuous noise covariance ``Q = Cov(w)``.

    ``foot_rotations`` optionally maps a contact column index (0-based among
    the contact slots) to the contact-frame orientation used to rotate the
    contact noise.
    """
    m = 3 * (k + 1)
    n = m + (6 if with_bias else 0)
    Q = np.zeros((n, n))
    eye = np.eye(3)
    Q[0:3, 0:3] = noise.gyro_density ** 2 * eye
    Q[3:6, 3:6] = noise.accel_density ** 2 * eye
    for j in range(k - 2):
        blk = noise.contact_density ** 2 * eye
        if foot_rotations and j in foot_rotations and foot_rotations[j] is not None:
            hR = foot_rotations[j]
            blk = hR @ blk @ hR.T
        Q[9 + 3 * j:12 + 3 * j, 9 + 3 * j:12 + 3 * j] = blk
    if with_bias:
        Q[m:m + 3, m:m + 3] = noise.gyro_bias_walk ** 2 * eye
        Q[m + 3:m + 6, m + 3:m + 6] = noise.accel_bias_walk ** 2 * eye
    return Q


def build_Qd(noise, dt, k, with_bias, Phi=None, foot_rotations=None):
    """
    Discrete process noise ``Qd = Phi (Q dt) Phi^T``.

    ``Phi`` defaults to the transition matrix of the state-independent
    (bias-free) dynamics for ``k`` columns.
    """
    if not dt > 0.0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")
    Q = continuous_noise(noise, k, with_bias, foot_rotations)
    if Phi is None:
        Phi = discretize(_base_A(Q.shape[0], k, noise.gravity), dt)
    elif Phi.shape != Q.shape:
        raise DimensionMismatch(f"Phi {Phi.shape} does not match noise {Q.shape}")
    return Phi @ (Q * dt) @ Phi.T


def propagate_covariance(s, Phi, Qd):
    """``P+ = Phi P Phi^T + Ad Qd Ad^T`` with ``Ad = block_diag(Ad_X, I)``."""
    n = s.dim
    if Phi.shape != (n, n) or Qd.shape != (n, n):
        raise DimensionMismatch(
            f"Phi {Phi.shape} and Qd {Qd.shape} must both be {n}x{n}"
        )
    T = frame_adjoint(s)
    P = Phi @ s.P @ Phi.T + T @ Qd @ T.T
    return replace(s, P=0.5 * (P + P.T))


@lru_cache(maxsize=64)
def _cached_noise(noise, k, with_bias):
    return freeze(continuous_noise(noise, k, with_bias))


def propagate(s, u, dt, noise, foot_rotations=None):
    """
    One full IMU step: covariance (from the pre-step mean) and mean.

    Equivalent to :func:`discretize` of :func:`error_dynamics_matrix`, then
    :func:`build_Qd`, :func:`propagate_covariance` and :func:`propagate_mean`,
    evaluated in one compiled pass.

    Parameters
    ----------
    s : EstimatorState
    u : ImuSample
        Input held over the interval.
    dt : float
        Interval length (s).
    noise : ImuNoiseParams
    foot_rotations : dict, optional
        Contact-frame orientations keyed by contact slot index.

    Returns
    -------
    EstimatorState
    """
    if not dt > 0.0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")
    original = s.error_frame
    if original is not Frame.RIGHT:
        s = switch_frame(s, Frame.RIGHT)
    X = s.X
    has_bias = s.theta is not None
    if foot_rotations:
        Qc = continuous_noise(noise, X.k, has_bias, foot_rotations)
    else:
        Qc = _cached_noise(noise, X.k, has_bias)
    bias = s.theta.as_vector() if has_bias else _NO_BIAS
    R, cols, P = _kernels.propagate_step(
        X.R, X.cols, s.P, u.omega, u.accel, bias, has_bias, float(dt), noise.gravity, Qc
    )
    s = replace(s, X=SEK3(freeze(R), freeze(cols)), P=freeze(P))
    if original is not Frame.RIGHT:
        s = switch_frame(s, original)
    return s


_NO_BIAS = np.zeros(6)

"""
Measurement dispatch and log replay.

:func:`dispatch` is the single entry point that advances an
:class:`~inekf.filter.EstimatorState` by one measurement. It is a pure
function; :class:`Estimator` wraps it as a single-writer state machine and
records the trajectory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from . import corrections
from .errors import OutOfOrderMeasurement, UnknownChannel
from .filter import BiasState, EstimatorState, Frame, update
from .gyro import GyroFilterState, default_process_noise, gf_correct, gf_propagate
from .liegroup import SEK3
from .measurements import (
    AngularRateMeasurement,
    ContactEvent,
    GrfSample,
    ImuSample,
    KinematicsMeasurement,
    VelocityMeasurement,
    WheelRates,
)
from .propagation import ImuNoiseParams, clamp_dt, propagate

log = logging.getLogger(__name__)

# tie-break order for measurements sharing a stamp
CHANNEL_ORDER = {
    ImuSample: 0,
    AngularRateMeasurement: 1,
    VelocityMeasurement: 2,
    WheelRates: 2,
    KinematicsMeasurement: 3,
    ContactEvent: 4,
    GrfSample: 4,
}


@dataclass(frozen=True, eq=False)
class FilterConfig:
    """
    Estimator settings.

    Attributes
    ----------
    noise : ImuNoiseParams
    forward_sigma, lateral_sigma, vertical_sigma : float
        Wheel pseudo-velocity standard deviations (m/s).
    slack : float
        Measurements up to this much older than the state stamp are applied as
        if current (s).
    kin_staleness : float
        Maximum age of the kinematics sample used to open a contact slot (s).
    gyro_filter : bool
        Run the angular-rate fusion filter upstream of propagation.
    gyro_axes : tuple of bool
        Axes whose gyro reading is replaced by the fused rate.
    gyro_Q : numpy.ndarray
        Per-step process noise of the gyro filter.
    gyro_self_correct : bool
        Also correct the gyro filter with the IMU reading as a biased source,
        so that the bias state tracks the IMU gyro bias.
    gyro_alpha_var : float
        Variance of the IMU gyro reading used for that self correction.
    track_width : float or None
        Wheel separation (m); when set, wheel rates also feed the gyro filter
        an unbiased yaw rate.
    yaw_rate_var : float
        Variance of the wheel-derived yaw rate ((rad/s)^2).
    """

    noise: ImuNoiseParams = field(default_factory=ImuNoiseParams)
    forward_sigma: float = corrections.DEFAULT_FORWARD_SIGMA
    lateral_sigma: float = corrections.DEFAULT_LATERAL_SIGMA
    vertical_sigma: float = corrections.DEFAULT_VERTICAL_SIGMA
    slack: float = 0.002
    kin_staleness: float = 0.02
    gyro_filter: bool = False
    gyro_axes: tuple = (False, False, True)
    gyro_Q: np.ndarray = field(default_factory=default_process_noise)
    gyro_self_correct: bool = True
    gyro_alpha_var: float = 1e-6
    track_width: Optional[float] = None
    yaw_rate_var: float = 1e-4


def initial_state(R=None, v=None, p=None, attitude_var=1e-4, velocity_var=1e-4,
                  position_var=1e-6, bias=True, gyro_bias_var=1e-6,
                  accel_bias_var=1e-4, stamp=0.0, theta=None):
    """
    Build a starting :class:`EstimatorState` with a diagonal right-invariant covariance.

    Variances may be scalars or 3-vectors.
    """
    R = np.eye(3) if R is None else R
    v = np.zeros(3) if v is None else v
    p = np.zeros(3) if p is None else p
    diag = [np.broadcast_to(np.asarray(x, dtype=float), (3,))
            for x in (attitude_var, velocity_var, position_var)]
    if bias:
        diag += [np.broadcast_to(np.asarray(x, dtype=float), (3,))
                 for x in (gyro_bias_var, accel_bias_var)]
        theta = BiasState() if theta is None else theta
    else:
        theta = None
    return EstimatorState(SEK3.from_parts(R, v, p), np.diag(np.concatenate(diag)),
                          theta=theta, stamp=stamp)


def align_from_accel(mean_accel):
    """
    Roll and pitch from a mean specific-force reading at rest (yaw = 0).

    Assumes gravity along the world -z axis.
    """
    f = np.asarray(mean_accel, dtype=float)
    f = f / np.linalg.norm(f)
    roll = np.arctan2(f[1], f[2])
    pitch = np.arctan2(-f[0], np.hypot(f[1], f[2]))
    return Rotation.from_euler("xyz", [roll, pitch, 0.0]).as_matrix()


def _foot_rotations(s):
    rots = {}
    for j, leg in enumerate(s.slots):
        kin = s.kin_cache.get(leg)
        if kin is not None and kin.foot_rot_body is not None:
            rots[j] = kin.foot_rot_body
    return rots or None


def _with_mapping(mapping, key, value):
    d = dict(mapping)
    d[key] = value
    return MappingProxyType(d)


def _fused_input(s, m, cfg):
    gf = s.gyro
    if gf is None:
        gf = GyroFilterState.initial(m.omega, m.stamp)
    else:
        gf = gf_propagate(gf, m.omega, m.stamp, cfg.gyro_Q)
    if cfg.gyro_self_correct:
        gf = gf_correct(gf, m.omega, True, np.eye(3) * cfg.gyro_alpha_var)
    omega = np.where(np.asarray(cfg.gyro_axes, dtype=bool), gf.omega, m.omega)
    return gf, ImuSample(m.stamp, omega, m.accel)


def _on_imu(s, m, cfg):
    gf = s.gyro
    if cfg.gyro_filter:
        if gf is not None and not m.stamp > gf.stamp:
            log.warning("dropping IMU sample at %.6f: not after %.6f", m.stamp, gf.stamp)
            return s
        gf, m = _fused_input(s, m, cfg)
    hold = s.imu_hold
    if hold is None:
        return replace(s, imu_hold=m, gyro=gf)
    dt = m.stamp - hold.stamp
    if not dt > 0.0:
        log.warning("dropping IMU sample at %.6f: not after %.6f", m.stamp, hold.stamp)
        return s
    s = propagate(s, hold, clamp_dt(dt), cfg.noise, _foot_rotations(s))
    return replace(s, imu_hold=m, gyro=gf)


def _on_wheels(s, m, cfg):
    if cfg.gyro_filter and cfg.track_width and s.gyro is not None:
        yaw_rate = m.wheel_radius * (m.qdot_r - m.qdot_l) / cfg.track_width
        gf = gf_correct(s.gyro, [0.0, 0.0, yaw_rate], False,
                        np.eye(3) * cfg.yaw_rate_var, axes=[2])
        s = replace(s, gyro=gf)
    vm = corrections.wheel_pseudo_velocity(m, cfg.lateral_sigma, cfg.vertical_sigma,
                                           cfg.forward_sigma)
    return update(s, corrections.velocity_observation(s, vm))


def _augment_if_ready(s, leg, now, cfg):
    kin = s.kin_cache.get(leg)
    if kin is None or now - kin.stamp > cfg.kin_staleness:
        return s
    return corrections.contact_augment(s, kin)


def _on_kinematics(s, m):
    s = replace(s, kin_cache=_with_mapping(s.kin_cache, m.leg_id, m))
    if m.leg_id in s.slots:
        return update(s, corrections.contact_observation(s, m))
    if s.contact_flags.get(m.leg_id, False):
        # rising edge seen earlier without fresh kinematics
        return corrections.contact_augment(s, m)
    return s


def _on_contact(s, m, cfg):
    flag = bool(m.in_contact)
    s = replace(s, contact_flags=_with_mapping(s.contact_flags, m.leg_id, flag))
    if flag and m.leg_id not in s.slots:
        return _augment_if_ready(s, m.leg_id, m.stamp, cfg)
    if not flag and m.leg_id in s.slots:
        return corrections.contact_marginalize(s, m.leg_id)
    return s


def dispatch(s, m, cfg=None):
    """
    Advance the estimator by one measurement.

    IMU samples propagate the state over the interval since the previous IMU
    sample using that previous (held) input. Velocity, wheel and kinematics
    readings build invariant observations and update; contact events open or
    close contact slots.

    Parameters
    ----------
    s : EstimatorState
    m : measurement record
    cfg : FilterConfig, optional

    Returns
    -------
    EstimatorState
        With ``stamp`` advanced to ``max(s.stamp, m.stamp)``.

    Raises
    ------
    OutOfOrderMeasurement
        If ``m`` is older than ``s.stamp`` by more than ``cfg.slack``.
    UnknownChannel
        For records the estimator cannot consume (raw GRF must go through
        :func:`inekf.contact.detect` first).
    """
    cfg = FilterConfig() if cfg is None else cfg
    stamp = getattr(m, "stamp", None)
    if stamp is None or type(m) not in CHANNEL_ORDER or isinstance(m, GrfSample):
        raise UnknownChannel(f"cannot dispatch {type(m).__name__}")
    if stamp < s.stamp - cfg.slack:
        raise OutOfOrderMeasurement(
            f"{type(m).__name__} at {stamp:.6f} is older than state stamp {s.stamp:.6f}"
        )
    if isinstance(m, ImuSample):
        s = _on_imu(s, m, cfg)
    elif isinstance(m, VelocityMeasurement):
        s = update(s, corrections.velocity_observation(s, m))
    elif isinstance(m, WheelRates):
        s = _on_wheels(s, m, cfg)
    elif isinstance(m, KinematicsMeasurement):
        s = _on_kinematics(s, m)
    elif isinstance(m, ContactEvent):
        s = _on_contact(s, m, cfg)
    elif isinstance(m, AngularRateMeasurement):
        if cfg.gyro_filter and s.gyro is not None:
            s = replace(s, gyro=gf_correct(s.gyro, m.omega, m.biased, m.cov))
    if stamp > s.stamp:
        s = replace(s, stamp=stamp)
    return s


def merge(*streams):
    """
    Merge measurement streams by stamp.

    Ties are broken by channel (IMU, angular rate, velocity/wheels,
    kinematics, contact), then by leg id, then by original order, so the
    result does not depend on how rows were split across inputs.
    """
    items = [m for stream in streams for m in stream]

    def key(m):
        return (m.stamp, CHANNEL_ORDER.get(type(m), 9), getattr(m, "leg_id", -1))

    return sorted(items, key=key)


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Serialized pose sample: quaternion ``(w, x, y, z)`` with ``w >= 0``."""

    stamp: float
    position: np.ndarray
    quaternion: np.ndarray
    velocity: np.ndarray

    @classmethod
    def from_state(cls, s):
        q = Rotation.from_matrix(s.X.R).as_quat()  # x, y, z, w
        q = np.array([q[3], q[0], q[1], q[2]])
        if q[0] < 0.0:
            q = -q
        q /= np.linalg.norm(q)
        return cls(s.stamp, np.array(s.X.p), q, np.array(s.X.v))


class Estimator:
    """
    Single-writer wrapper around :func:`dispatch`.

    Parameters
    ----------
    state : EstimatorState
        Initial estimate.
    cfg : FilterConfig, optional
    """

    def __init__(self, state, cfg=None):
        self.state = state
        self.cfg = FilterConfig() if cfg is None else cfg

    def process(self, m):
        self.state = dispatch(self.state, m, self.cfg)
        return self.state

    def run(self, measurements, on_step=None):
        """
        Process a time-ordered sequence, returning one record per IMU stamp.

        All measurements sharing a stamp are applied before that stamp is
        recorded. ``on_step(state)`` is called after each measurement and
        may return a replacement state (used to inject perturbations).
        """
        records = []
        pending_record = False
        last_stamp = None
        for m in measurements:
            if pending_record and m.stamp != last_stamp:
                records.append(TrajectoryRecord.from_state(self.state))
                pending_record = False
            self.process(m)
            if on_step is not None:
                out = on_step(self.state)
                if out is not None:
                    self.state = out
            if isinstance(m, ImuSample) and self.state.imu_hold is not None:
                pending_record = True
            last_stamp = m.stamp
        if pending_record:
            records.append(TrajectoryRecord.from_state(self.state))
        return records

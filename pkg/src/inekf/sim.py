"""
Synthetic trajectories and the sensor readings they imply.

Trajectories are planar and analytic, so velocity, acceleration and turn
rate come from closed-form derivatives rather than finite differences. The
body x axis points along the direction of travel (except for ``Static``),
which keeps the lateral and vertical body velocities at zero as wheeled
platforms require.

Every channel draws its noise from its own generator seeded with
``(seed, channel)``, so adding or dropping a channel does not change the
others and a fixed seed reproduces the logs bit for bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IncompatibleShape
from .measurements import (
    ContactEvent,
    ImuSample,
    KinematicsMeasurement,
    VelocityMeasurement,
    WheelRates,
)
from .propagation import GRAVITY, ImuNoiseParams


class Shape(enum.Enum):
    LINE = "line"
    CIRCLE = "circle"
    FIGURE_EIGHT = "figure_eight"
    STATIC = "static"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower().replace("-", "_").replace("figureeight", "figure_eight")
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown trajectory shape {text!r}")


# channel ids used to seed independent noise streams
_IMU, _VELOCITY, _WHEELS, _KINEMATICS, _BIAS = range(5)


@dataclass(frozen=True)
class TrajectorySpec:
    """
    Parameters of a synthetic run.

    Attributes
    ----------
    shape : Shape
    speed : float
        Travel speed (m/s). For ``FIGURE_EIGHT`` it sets the angular rate
        ``speed / radius`` of the parametrization rather than the exact speed.
    radius : float
        Circle radius or figure-eight half-width (m).
    duration : float
        Length of the run (s).
    imu_rate, aux_rate : float
        IMU and auxiliary (velocity, wheels, kinematics) sample rates (Hz).
    seed : int
    """

    shape: Shape = Shape.LINE
    speed: float = 1.0
    radius: float = 5.0
    duration: float = 10.0
    imu_rate: float = 200.0
    aux_rate: float = 20.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape.parse(self.shape.value if isinstance(self.shape, Shape) else self.shape))
        if not (self.imu_rate > 0.0 and self.aux_rate > 0.0):
            raise ValueError("sample rates must be positive")
        if not self.duration > 0.0:
            raise ValueError("duration must be positive")
        if self.shape in (Shape.CIRCLE, Shape.FIGURE_EIGHT) and not self.radius > 0.0:
            raise ValueError("radius must be positive for curved trajectories")


@dataclass(frozen=True)
class SensorNoiseSpec:
    """
    Sensor noise used to corrupt synthetic readings.

    Densities follow :class:`~inekf.propagation.ImuNoiseParams`; a discrete
    sample at rate ``f`` gets standard deviation ``density * sqrt(f)``.

    Attributes
    ----------
    gyro_density : float
        rad/s/sqrt(Hz)
    accel_density : float
        m/s^2/sqrt(Hz)
    gyro_bias_walk, accel_bias_walk : float
        Bias random-walk densities.
    contact_density : float
        Foot slip density used by the filter (the simulated foot never slips).
    velocity_sigma : float
        Body-velocity (DVL-style) standard deviation (m/s).
    encoder_sigma : float
        Joint-angle (rad) and wheel-rate (rad/s) standard deviation.
    gyro_bias, accel_bias : tuple of float
        Constant initial biases added to the IMU readings.
    """

    gyro_density: float = 0.0
    accel_density: float = 0.0
    gyro_bias_walk: float = 0.0
    accel_bias_walk: float = 0.0
    contact_density: float = 0.0
    velocity_sigma: float = 0.0
    encoder_sigma: float = 0.0
    gyro_bias: tuple = (0.0, 0.0, 0.0)
    accel_bias: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("gyro_density", "accel_density", "gyro_bias_walk", "accel_bias_walk",
                     "contact_density", "velocity_sigma", "encoder_sigma"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def marine(cls, **overrides):
        """Underwater-simulation levels: 0.0035 deg/s/sqrt(Hz), 0.0014, DVL 0.02626 m/s."""
        values = dict(gyro_density=math.radians(0.0035), accel_density=0.0014,
                      velocity_sigma=0.02626)
        values.update(overrides)
        return cls(**values)

    def imu_params(self, gravity=GRAVITY, contact_density=None):
        """The matching filter noise model."""
        return ImuNoiseParams(
            gyro_density=self.gyro_density,
            accel_density=self.accel_density,
            gyro_bias_walk=self.gyro_bias_walk,
            accel_bias_walk=self.accel_bias_walk,
            contact_density=self.contact_density if contact_density is None else contact_density,
            gravity=gravity,
        )


@dataclass(frozen=True, eq=False)
class Truth:
    """
    Ground-truth samples at the IMU rate.

    Attributes
    ----------
    t : numpy.ndarray, shape (N,)
    R : numpy.ndarray, shape (N, 3, 3)
    v, p : numpy.ndarray, shape (N, 3)
        World-frame velocity and position.
    omega : numpy.ndarray, shape (N, 3)
        Body angular velocity.
    accel : numpy.ndarray, shape (N, 3)
        World-frame acceleration ``dv/dt``.
    spec : TrajectorySpec
    gravity : numpy.ndarray
    """

    t: np.ndarray
    R: np.ndarray
    v: np.ndarray
    p: np.ndarray
    omega: np.ndarray
    accel: np.ndarray
    spec: TrajectorySpec
    gravity: np.ndarray = field(default_factory=lambda: np.array(GRAVITY))

    def __len__(self):
        return self.t.shape[0]

    @property
    def specific_force(self):
        """Body-frame accelerometer reading ``R^T (dv/dt - g)`` without noise."""
        return np.einsum("nji,nj->ni", self.R, self.accel - self.gravity)

    @property
    def body_velocity(self):
        return np.einsum("nji,nj->ni", self.R, self.v)

    def arc_length(self):
        return float(np.sum(np.linalg.norm(np.diff(self.p, axis=0), axis=1)))


def _yaw_matrices(yaw):
    c, s = np.cos(yaw), np.sin(yaw)
    R = np.zeros((yaw.shape[0], 3, 3))
    R[:, 0, 0] = c
    R[:, 0, 1] = -s
    R[:, 1, 0] = s
    R[:, 1, 1] = c
    R[:, 2, 2] = 1.0
    return R


def sample_trajectory(spec, t):
    """
    Evaluate the analytic trajectory at arbitrary times.

    Returns
    -------
    tuple
        ``(R, v, p, omega, accel)`` stacked along the first axis.
    """
    t = np.asarray(t, dtype=float)
    N = t.shape[0]
    zeros = np.zeros(N)
    shape = spec.shape
    if shape is Shape.STATIC:
        p = np.zeros((N, 3))
        v = np.zeros((N, 3))
        a = np.zeros((N, 3))
        yaw = zeros
        yaw_rate = zeros
    elif shape is Shape.LINE:
        p = np.column_stack([spec.speed * t, zeros, zeros])
        v = np.column_stack([np.full(N, spec.speed), zeros, zeros])
        a = np.zeros((N, 3))
        yaw = zeros
        yaw_rate = zeros
    elif shape is Shape.CIRCLE:
        r = spec.radius
        w = spec.speed / r
        th = w * t
        p = np.column_stack([r * np.cos(th), r * np.sin(th), zeros])
        v = np.column_stack([-spec.speed * np.sin(th), spec.speed * np.cos(th), zeros])
        a = np.column_stack([-spec.speed * w * np.cos(th), -spec.speed * w * np.sin(th), zeros])
        yaw = th + 0.5 * math.pi
        yaw_rate = np.full(N, w)
    else:
        # lemniscate of Gerono; the speed never vanishes
        r = spec.radius
        w = spec.speed / r
        s1, c1 = np.sin(w * t), np.cos(w * t)
        s2, c2 = np.sin(2 * w * t), np.cos(2 * w * t)
        p = np.column_stack([r * s1, 0.5 * r * s2, zeros])
        v = np.column_stack([r * w * c1, r * w * c2, zeros])
        a = np.column_stack([-r * w * w * s1, -2.0 * r * w * w * s2, zeros])
        yaw = np.arctan2(v[:, 1], v[:, 0])
        yaw_rate = (v[:, 0] * a[:, 1] - v[:, 1] * a[:, 0]) / (v[:, 0] ** 2 + v[:, 1] ** 2)
    R = _yaw_matrices(yaw)
    omega = np.column_stack([zeros, zeros, yaw_rate])
    return R, v, p, omega, a


def imu_times(spec):
    n = int(math.floor(spec.duration * spec.imu_rate + 1e-9)) + 1
    return np.arange(n) / spec.imu_rate


def aux_times(spec, rate=None):
    rate = spec.aux_rate if rate is None else rate
    n = int(math.floor(spec.duration * rate + 1e-9)) + 1
    return np.arange(n) / rate


def generate(spec, gravity=GRAVITY):
    """
    Sample the ground truth of ``spec`` at its IMU rate.

    Parameters
    ----------
    spec : TrajectorySpec
    gravity : array-like, shape (3,)

    Returns
    -------
    Truth
    """
    t = imu_times(spec)
    R, v, p, omega, a = sample_trajectory(spec, t)
    return Truth(t, R, v, p, omega, a, spec, np.asarray(gravity, dtype=float))


def _rng(spec, channel):
    return np.random.default_rng([spec.seed, channel])


def synthesize_imu(truth, noise=None):
    """
    IMU readings ``omega + b_g + n_g`` and ``R^T (dv/dt - g) + b_a + n_a``.

    Biases start at ``noise.gyro_bias`` / ``noise.accel_bias`` and follow a
    random walk with the configured densities.

    Returns
    -------
    list of ImuSample
    """
    noise = SensorNoiseSpec() if noise is None else noise
    spec = truth.spec
    rng = _rng(spec, _IMU)
    N = len(truth)
    sq = math.sqrt(spec.imu_rate)
    omega = truth.omega + noise.gyro_density * sq * rng.standard_normal((N, 3))
    accel = truth.specific_force + noise.accel_density * sq * rng.standard_normal((N, 3))
    bg, ba = bias_paths(truth, noise)
    omega = omega + bg
    accel = accel + ba
    return [ImuSample(float(truth.t[i]), omega[i], accel[i]) for i in range(N)]


def bias_paths(truth, noise):
    """True gyro and accelerometer biases at each IMU stamp."""
    spec = truth.spec
    N = len(truth)
    bg = np.tile(np.asarray(noise.gyro_bias, dtype=float), (N, 1))
    ba = np.tile(np.asarray(noise.accel_bias, dtype=float), (N, 1))
    if noise.gyro_bias_walk > 0.0 or noise.accel_bias_walk > 0.0:
        rng = _rng(spec, _BIAS)
        step = 1.0 / math.sqrt(spec.imu_rate)
        walk = rng.standard_normal((N, 6)) * step
        walk[0] = 0.0
        bg = bg + noise.gyro_bias_walk * np.cumsum(walk[:, :3], axis=0)
        ba = ba + noise.accel_bias_walk * np.cumsum(walk[:, 3:], axis=0)
    return bg, ba


def synthesize_velocity(truth, noise=None, rate=None):
    """Body-frame velocity readings (DVL style) at the auxiliary rate."""
    noise = SensorNoiseSpec() if noise is None else noise
    spec = truth.spec
    t = aux_times(spec, rate)
    R, v, _, _, _ = sample_trajectory(spec, t)
    vb = np.einsum("nji,nj->ni", R, v)
    sigma = noise.velocity_sigma
    vb = vb + sigma * _rng(spec, _VELOCITY).standard_normal(vb.shape)
    cov = np.eye(3) * max(sigma, 1e-3) ** 2
    return [VelocityMeasurement(float(t[i]), vb[i], cov) for i in range(t.shape[0])]


def synthesize_wheels(truth, noise=None, wheel_radius=0.1, track_width=0.5, rate=None):
    """
    Differential-drive wheel rates at the auxiliary rate.

    Raises
    ------
    IncompatibleShape
        If the body velocity has lateral or vertical components.
    """
    noise = SensorNoiseSpec() if noise is None else noise
    spec = truth.spec
    t = aux_times(spec, rate)
    R, v, _, omega, _ = sample_trajectory(spec, t)
    vb = np.einsum("nji,nj->ni", R, v)
    if np.abs(vb[:, 1:]).max() > 1e-9 or np.abs(omega[:, :2]).max() > 1e-9:
        raise IncompatibleShape("wheel odometry needs planar motion along the body x axis")
    half = 0.5 * track_width * omega[:, 2]
    qr = (vb[:, 0] + half) / wheel_radius
    ql = (vb[:, 0] - half) / wheel_radius
    e = noise.encoder_sigma * _rng(spec, _WHEELS).standard_normal((t.shape[0], 2))
    qr = qr + e[:, 0]
    ql = ql + e[:, 1]
    return [WheelRates(float(t[i]), float(qr[i]), float(ql[i]), wheel_radius)
            for i in range(t.shape[0])]


@dataclass(frozen=True)
class StubLeg:
    """
    One leg alternating stance and swing.

    During stance the foot stays where it touched down in the world frame.
    During swing it returns smoothly to ``hip_offset`` in the body frame,
    where the next touchdown happens.
    """

    stance: float = 0.5
    swing: float = 0.5
    hip_offset: tuple = (0.0, 0.0, -0.5)
    leg_id: int = 0

    @property
    def period(self):
        return self.stance + self.swing

    def in_stance(self, t):
        return (t % self.period) < self.stance

    def foot_body(self, spec, t):
        """Noiseless foot position in the body frame at times ``t``."""
        t = np.asarray(t, dtype=float)
        h0 = np.asarray(self.hip_offset, dtype=float)
        T = self.period
        k = np.floor(t / T)
        phase = t - k * T
        touch = k * T
        lift = touch + self.stance
        stance = phase <= self.stance
        # world foothold of the current cycle
        R0, _, p0, _, _ = sample_trajectory(spec, touch)
        d = p0 + np.einsum("nij,j->ni", R0, h0)
        R, _, p, _, _ = sample_trajectory(spec, t)
        h_stance = np.einsum("nji,nj->ni", R, d - p)
        # body position at lift-off, then cosine blend back to the hip offset
        R1, _, p1, _, _ = sample_trajectory(spec, lift)
        h_lift = np.einsum("nji,nj->ni", R1, d - p1)
        tau = np.clip((phase - self.stance) / self.swing, 0.0, 1.0)
        s = 0.5 * (1.0 - np.cos(math.pi * tau))
        h_swing = h_lift + (h0 - h_lift) * s[:, None]
        return np.where(stance[:, None], h_stance, h_swing)


def synthesize_kinematics(truth, noise=None, leg=None, rate=None):
    """
    Foot kinematics of a :class:`StubLeg` with identity Jacobian.

    Noise of ``encoder_sigma`` is added to the foot position, matching the
    encoder covariance reported with each sample.
    """
    noise = SensorNoiseSpec() if noise is None else noise
    leg = StubLeg() if leg is None else leg
    spec = truth.spec
    t = aux_times(spec, rate)
    h = leg.foot_body(spec, t)
    sigma = noise.encoder_sigma
    h = h + sigma * _rng(spec, _KINEMATICS).standard_normal(h.shape)
    J = np.eye(3)
    C = np.eye(3) * max(sigma, 1e-4) ** 2
    return [KinematicsMeasurement(float(t[i]), leg.leg_id, h[i], J, C)
            for i in range(t.shape[0])]


def synthesize_contacts(truth, leg=None):
    """Contact make and break events of a :class:`StubLeg` (touchdown at t = 0)."""
    leg = StubLeg() if leg is None else leg
    spec = truth.spec
    events = []
    k = 0
    while True:
        t0 = k * leg.period
        if t0 > spec.duration:
            break
        events.append(ContactEvent(t0, leg.leg_id, True))
        t1 = t0 + leg.stance
        if t1 > spec.duration:
            break
        events.append(ContactEvent(t1, leg.leg_id, False))
        k += 1
    return events

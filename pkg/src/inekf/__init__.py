"""
Invariant extended Kalman filtering on SE_k(3) for proprioceptive odometry.

The core API works on immutable :class:`EstimatorState` values: IMU samples
are integrated by :func:`propagate`, velocity and leg-kinematics readings
become invariant observations applied by :func:`update`, and
:func:`dispatch` / :class:`Estimator` route a time-ordered measurement stream
through all of it.
"""

from .errors import (
    AlreadyAugmented,
    ConfigError,
    DimensionMismatch,
    IncompatibleShape,
    InEKFError,
    InsufficientOverlap,
    LogParseError,
    NearAngularSingularity,
    NonMonotonicStamp,
    NonPositiveDt,
    NotAugmented,
    OutOfOrderMeasurement,
    SingularInnovation,
    SlotMismatch,
    UnknownChannel,
)
from .liegroup import SEK3, adjoint, compose, exp_sek3, gamma, gammas, inverse, log_sek3
from .filter import BiasState, EstimatorState, Frame, LinearObservation, switch_frame, update
from .measurements import (
    AngularRateMeasurement,
    ContactEvent,
    GrfSample,
    ImuSample,
    KinematicsMeasurement,
    VelocityMeasurement,
    WheelRates,
)
from .propagation import ImuNoiseParams, propagate
from .corrections import (
    contact_augment,
    contact_marginalize,
    contact_observation,
    velocity_observation,
    wheel_pseudo_velocity,
)
from .gyro import GyroFilterState, gf_correct, gf_propagate
from .pipeline import Estimator, FilterConfig, TrajectoryRecord, dispatch, initial_state, merge
from .metrics import Trajectory, final_drift, rpe

__version__ = "0.1.0"

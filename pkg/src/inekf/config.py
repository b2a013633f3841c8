"""
INI configuration for log replay and simulation.

Pipeline config (every key optional; defaults shown)::

    [pipeline]
    platform = generic          # generic | wheeled | legged | marine
    bias_estimation = true
    gyro_filter = false
    gyro_axes = z               # any of x, y, z, comma separated
    init_from_accel = false     # roll/pitch from the first 0.5 s of accelerometer data

    [noise]
    gyro_density = 1e-3         # rad/s/sqrt(Hz)
    accel_density = 1e-2        # m/s^2/sqrt(Hz)
    gyro_bias_walk = 1e-5       # rad/s^2/sqrt(Hz)
    accel_bias_walk = 1e-4      # m/s^3/sqrt(Hz)
    contact_density = 1e-2      # m/s/sqrt(Hz)
    velocity_sigma = 0.05       # m/s, body velocity readings
    gravity = 0 0 -9.80665

    [wheels]
    radius = 0.1
    track_width =               # empty: no wheel yaw rate for the gyro filter
    forward_sigma = 0.05
    lateral_sigma = 0.05
    vertical_sigma = 0.05

    [contact]                   # GRF thresholding, used when a grf file is given
    weight = 0                  # N; required with grf
    n_legs = 4
    cutoff_hz = 10
    min_dwell = 0.01

    [initial]
    position = 0 0 0
    velocity = 0 0 0
    orientation = 1 0 0 0       # quaternion w x y z
    attitude_var = 1e-4
    velocity_var = 1e-4
    position_var = 1e-6
    gyro_bias_var = 1e-6
    accel_bias_var = 1e-4

    [files]                     # relative to the config file
    imu = imu.csv
    wheels =
    velocity =
    kin =
    contact =
    grf =

Simulation spec::

    [trajectory]
    shape = line                # line | circle | figure_eight | static
    speed = 1.0
    radius = 5.0
    duration = 10.0
    imu_rate = 200
    aux_rate = 20
    seed = 0

    [noise]                     # as above plus encoder_sigma, gyro_bias, accel_bias

    [outputs]
    velocity = true
    wheels = true
    legged = false
    wheel_radius = 0.1
    track_width = 0.5
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import ConfigError
from .sim import SensorNoiseSpec, Shape, TrajectorySpec

PLATFORMS = ("generic", "wheeled", "legged", "marine")
CHANNELS = ("imu", "wheels", "velocity", "kin", "contact", "grf")

_NOISE_DEFAULTS = dict(
    gyro_density=1e-3,
    accel_density=1e-2,
    gyro_bias_walk=1e-5,
    accel_bias_walk=1e-4,
    contact_density=1e-2,
    velocity_sigma=0.05,
    encoder_sigma=0.0,
)


@dataclass(frozen=True, eq=False)
class PipelineConfig:
    platform: str = "generic"
    bias_estimation: bool = True
    gyro_filter: bool = False
    gyro_axes: tuple = (False, False, True)
    init_from_accel: bool = False
    noise: SensorNoiseSpec = field(default_factory=lambda: SensorNoiseSpec(**_NOISE_DEFAULTS))
    gravity: tuple = (0.0, 0.0, -9.80665)
    wheel_radius: float = 0.1
    track_width: Optional[float] = None
    forward_sigma: float = 0.05
    lateral_sigma: float = 0.05
    vertical_sigma: float = 0.05
    robot_weight: float = 0.0
    n_legs: int = 4
    cutoff_hz: float = 10.0
    min_dwell: float = 0.01
    position: tuple = (0.0, 0.0, 0.0)
    velocity: tuple = (0.0, 0.0, 0.0)
    orientation: tuple = (1.0, 0.0, 0.0, 0.0)
    attitude_var: float = 1e-4
    velocity_var: float = 1e-4
    position_var: float = 1e-6
    gyro_bias_var: float = 1e-6
    accel_bias_var: float = 1e-4
    files: dict = field(default_factory=dict)

    @property
    def rotation(self):
        w, x, y, z = self.orientation
        return Rotation.from_quat([x, y, z, w]).as_matrix()


def _parser(path):
    if not os.path.isfile(path):
        raise ConfigError(f"config file {path!r} does not exist")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cp


def _get(cp, section, key, kind, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    if raw == "":
        return default
    try:
        if kind is bool:
            return cp.getboolean(section, key)
        if kind is tuple:
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {kind.__name__}") from None


def _vec(cp, section, key, default, size):
    value = _get(cp, section, key, tuple, default)
    if len(value) != size:
        raise ConfigError(f"[{section}] {key} needs {size} numbers, got {len(value)}")
    return value


def _noise(cp, base):
    values = {}
    for key, default in base.items():
        values[key] = _get(cp, "noise", key, float, default)
    for key in ("gyro_bias", "accel_bias"):
        values[key] = _vec(cp, "noise", key, (0.0, 0.0, 0.0), 3)
    try:
        return SensorNoiseSpec(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _axes(text):
    names = [x.strip().lower() for x in text.replace(",", " ").split()]
    if not names or any(n not in ("x", "y", "z") for n in names):
        raise ConfigError(f"gyro_axes must list x, y and/or z, got {text!r}")
    return tuple(a in names for a in "xyz")


def load_config(path):
    """
    Parse and validate a pipeline config.

    Raises
    ------
    ConfigError
        For unreadable files, malformed values, non-positive variances,
        unknown platforms or missing channel files.
    """
    cp = _parser(path)
    base = os.path.dirname(os.path.abspath(path))
    platform = _get(cp, "pipeline", "platform", str, "generic").lower()
    if platform not in PLATFORMS:
        raise ConfigError(f"unknown platform {platform!r}; expected one of {PLATFORMS}")
    files = {}
    for ch in CHANNELS:
        name = _get(cp, "files", ch, str, None)
        if name:
            full = name if os.path.isabs(name) else os.path.join(base, name)
            if not os.path.isfile(full):
                raise ConfigError(f"[files] {ch} = {name!r} does not exist")
            files[ch] = full
    if "imu" not in files:
        raise ConfigError("[files] imu is required")
    cfg = PipelineConfig(
        platform=platform,
        bias_estimation=_get(cp, "pipeline", "bias_estimation", bool, True),
        gyro_filter=_get(cp, "pipeline", "gyro_filter", bool, False),
        gyro_axes=_axes(_get(cp, "pipeline", "gyro_axes", str, "z")),
        init_from_accel=_get(cp, "pipeline", "init_from_accel", bool, False),
        noise=_noise(cp, _NOISE_DEFAULTS),
        gravity=_vec(cp, "noise", "gravity", (0.0, 0.0, -9.80665), 3),
        wheel_radius=_get(cp, "wheels", "radius", float, 0.1),
        track_width=_get(cp, "wheels", "track_width", float, None),
        forward_sigma=_get(cp, "wheels", "forward_sigma", float, 0.05),
        lateral_sigma=_get(cp, "wheels", "lateral_sigma", float, 0.05),
        vertical_sigma=_get(cp, "wheels", "vertical_sigma", float, 0.05),
        robot_weight=_get(cp, "contact", "weight", float, 0.0),
        n_legs=_get(cp, "contact", "n_legs", int, 4),
        cutoff_hz=_get(cp, "contact", "cutoff_hz", float, 10.0),
        min_dwell=_get(cp, "contact", "min_dwell", float, 0.01),
        position=_vec(cp, "initial", "position", (0.0, 0.0, 0.0), 3),
        velocity=_vec(cp, "initial", "velocity", (0.0, 0.0, 0.0), 3),
        orientation=_vec(cp, "initial", "orientation", (1.0, 0.0, 0.0, 0.0), 4),
        attitude_var=_get(cp, "initial", "attitude_var", float, 1e-4),
        velocity_var=_get(cp, "initial", "velocity_var", float, 1e-4),
        position_var=_get(cp, "initial", "position_var", float, 1e-6),
        gyro_bias_var=_get(cp, "initial", "gyro_bias_var", float, 1e-6),
        accel_bias_var=_get(cp, "initial", "accel_bias_var", float, 1e-4),
        files=files,
    )
    for key in ("attitude_var", "velocity_var", "position_var", "gyro_bias_var",
                "accel_bias_var"):
        if not getattr(cfg, key) > 0.0:
            raise ConfigError(f"[initial] {key} must be positive")
    if not cfg.wheel_radius > 0.0:
        raise ConfigError("[wheels] radius must be positive")
    if cfg.track_width is not None and not cfg.track_width > 0.0:
        raise ConfigError("[wheels] track_width must be positive")
    if not np.isclose(np.linalg.norm(cfg.orientation), 1.0, atol=1e-6):
        raise ConfigError("[initial] orientation must be a unit quaternion")
    if "grf" in files and not cfg.robot_weight > 0.0:
        raise ConfigError("[contact] weight must be positive when a grf file is given")
    return cfg


@dataclass(frozen=True)
class SimConfig:
    spec: TrajectorySpec
    noise: SensorNoiseSpec
    velocity: bool = True
    wheels: bool = True
    legged: bool = False
    wheel_radius: float = 0.1
    track_width: float = 0.5


def load_sim_config(path):
    """Parse a simulation spec (see module docstring)."""
    cp = _parser(path)
    try:
        spec = TrajectorySpec(
            shape=Shape.parse(_get(cp, "trajectory", "shape", str, "line")),
            speed=_get(cp, "trajectory", "speed", float, 1.0),
            radius=_get(cp, "trajectory", "radius", float, 5.0),
            duration=_get(cp, "trajectory", "duration", float, 10.0),
            imu_rate=_get(cp, "trajectory", "imu_rate", float, 200.0),
            aux_rate=_get(cp, "trajectory", "aux_rate", float, 20.0),
            seed=_get(cp, "trajectory", "seed", int, 0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    zero = {k: 0.0 for k in _NOISE_DEFAULTS}
    return SimConfig(
        spec=spec,
        noise=_noise(cp, zero),
        velocity=_get(cp, "outputs", "velocity", bool, True),
        wheels=_get(cp, "outputs", "wheels", bool, True),
        legged=_get(cp, "outputs", "legged", bool, False),
        wheel_radius=_get(cp, "outputs", "wheel_radius", float, 0.1),
        track_width=_get(cp, "outputs", "track_width", float, 0.5),
    )

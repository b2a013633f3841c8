"""
Assemble and run the estimator from a :class:`~inekf.config.PipelineConfig`.
"""

from __future__ import annotations

import logging
import queue
import threading

import numpy as np

from . import logio
from .config import PipelineConfig
from .contact import ThresholdConfig, detect, flags_to_events
from .errors import ConfigError
from .pipeline import Estimator, FilterConfig, align_from_accel, initial_state, merge
from .propagation import ImuNoiseParams

log = logging.getLogger(__name__)

ALIGN_WINDOW = 0.5

_REQUIRED = {
    "wheeled": ("wheels",),
    "legged": ("kin",),
    "marine": ("velocity",),
    "generic": (),
}


def filter_config(pcfg: PipelineConfig) -> FilterConfig:
    n = pcfg.noise
    noise = ImuNoiseParams(n.gyro_density, n.accel_density, n.gyro_bias_walk,
                           n.accel_bias_walk, n.contact_density, pcfg.gravity)
    return FilterConfig(
        noise=noise,
        forward_sigma=pcfg.forward_sigma,
        lateral_sigma=pcfg.lateral_sigma,
        vertical_sigma=pcfg.vertical_sigma,
        gyro_filter=pcfg.gyro_filter,
        gyro_axes=pcfg.gyro_axes,
        track_width=pcfg.track_width,
    )


def load_streams(pcfg: PipelineConfig):
    """Parse every configured channel file into measurement lists."""
    missing = [ch for ch in _REQUIRED[pcfg.platform] if ch not in pcfg.files]
    if pcfg.platform == "legged" and "contact" not in pcfg.files and "grf" not in pcfg.files:
        missing.append("contact or grf")
    if missing:
        raise ConfigError(f"platform {pcfg.platform!r} needs [files] {', '.join(missing)}")
    f = pcfg.files
    streams = {"imu": logio.read_imu(f["imu"])}
    if "wheels" in f:
        streams["wheels"] = logio.read_wheels(f["wheels"], pcfg.wheel_radius)
    if "velocity" in f:
        cov = np.eye(3) * max(pcfg.noise.velocity_sigma, 1e-6) ** 2
        streams["velocity"] = logio.read_velocity(f["velocity"], cov)
    if "kin" in f:
        streams["kin"] = logio.read_kinematics(f["kin"])
    if "contact" in f:
        streams["contact"] = list(flags_to_events(logio.read_contact(f["contact"])))
    if "grf" in f:
        cfg = ThresholdConfig.from_weight(pcfg.robot_weight, pcfg.n_legs, pcfg.cutoff_hz,
                                          pcfg.min_dwell)
        grf = sorted(logio.read_grf(f["grf"]), key=lambda m: (m.stamp, m.leg_id))
        streams["grf_contact"] = list(detect(grf, cfg))
    return streams


def initial_estimate(pcfg: PipelineConfig, imu):
    R = pcfg.rotation
    if pcfg.init_from_accel and imu:
        t0 = imu[0].stamp
        acc = [m.accel for m in imu if m.stamp - t0 <= ALIGN_WINDOW]
        R = align_from_accel(np.mean(acc, axis=0))
    stamp = imu[0].stamp if imu else 0.0
    return initial_state(
        R, np.array(pcfg.velocity), np.array(pcfg.position),
        attitude_var=pcfg.attitude_var, velocity_var=pcfg.velocity_var,
        position_var=pcfg.position_var, bias=pcfg.bias_estimation,
        gyro_bias_var=pcfg.gyro_bias_var, accel_bias_var=pcfg.accel_bias_var,
        stamp=stamp,
    )


_DONE = object()


def run_pipeline(pcfg: PipelineConfig, threaded=False):
    """
    Replay the configured logs.

    With ``threaded=True`` parsing runs on a worker thread that feeds the
    merged measurements through a FIFO queue; the output is identical to the
    single-threaded replay.

    Returns
    -------
    list of TrajectoryRecord
    """
    if not threaded:
        streams = load_streams(pcfg)
        if not streams["imu"]:
            log.warning("IMU log is empty; the trajectory will be empty")
            return []
        est = Estimator(initial_estimate(pcfg, streams["imu"]), filter_config(pcfg))
        return est.run(merge(*streams.values()))

    q = queue.Queue(maxsize=4096)
    failure = []

    def producer():
        try:
            streams = load_streams(pcfg)
            q.put(initial_estimate(pcfg, streams["imu"]) if streams["imu"] else None)
            for m in merge(*streams.values()):
                q.put(m)
        except Exception as exc:  # re-raised on the consumer side
            failure.append(exc)
        finally:
            q.put(_DONE)

    worker = threading.Thread(target=producer, daemon=True)
    worker.start()
    first = q.get()
    if first is _DONE:
        worker.join()
        raise failure[0]
    if first is None:
        while q.get() is not _DONE:
            pass
        worker.join()
        log.warning("IMU log is empty; the trajectory will be empty")
        return []
    est = Estimator(first, filter_config(pcfg))

    def consume():
        while True:
            m = q.get()
            if m is _DONE:
                return
            yield m

    records = est.run(consume())
    worker.join()
    if failure:
        raise failure[0]
    return records

"""
Per-step latency of the filter operations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import corrections
from .filter import update
from .gyro import GyroFilterState, default_process_noise, gf_correct, gf_propagate
from .measurements import ImuSample, KinematicsMeasurement, VelocityMeasurement
from .pipeline import initial_state
from .propagation import ImuNoiseParams, propagate

ROWS = (
    "InEKF propagation",
    "InEKF propagation with contact",
    "InEKF velocity correction",
    "InEKF contact correction",
    "Gyro filter propagation",
    "Gyro filter correction",
)


@dataclass(frozen=True)
class BenchRow:
    name: str
    mean_us: float
    std_us: float
    iterations: int


def _time(fn, iterations, warmup):
    for _ in range(warmup):
        fn()
    out = np.empty(iterations)
    clock = time.perf_counter_ns
    for i in range(iterations):
        t0 = clock()
        fn()
        out[i] = clock() - t0
    return out * 1e-3


def _cases(seed=0):
    rng = np.random.default_rng(seed)
    noise = ImuNoiseParams(1e-3, 1e-2, 1e-5, 1e-4, 1e-2)
    s = initial_state(v=rng.normal(size=3), p=rng.normal(size=3))
    u = ImuSample(0.0, rng.normal(size=3) * 0.1, np.array([0.0, 0.0, 9.8]) + rng.normal(size=3))
    dt = 0.005
    kin = KinematicsMeasurement(0.0, 0, np.array([0.1, 0.0, -0.4]), np.eye(3), np.eye(3) * 1e-4)
    sc = corrections.contact_augment(s, kin)
    vel = VelocityMeasurement(0.0, np.array([1.0, 0.0, 0.0]), np.eye(3) * 1e-2)
    gf = GyroFilterState.initial(np.zeros(3), 0.0)
    Q = default_process_noise()
    R = np.eye(3) * 1e-4
    beta = np.array([0.0, 0.0, 0.1])
    alpha = np.array([0.0, 0.0, 0.1])

    return {
        ROWS[0]: lambda: propagate(s, u, dt, noise),
        ROWS[1]: lambda: propagate(sc, u, dt, noise),
        ROWS[2]: lambda: update(s, corrections.velocity_observation(s, vel)),
        ROWS[3]: lambda: update(sc, corrections.contact_observation(sc, kin)),
        ROWS[4]: lambda: gf_propagate(gf, alpha, 1.0, Q),
        ROWS[5]: lambda: gf_correct(gf, beta, False, R),
    }


def run_bench(iterations=100_000, warmup=1000, rows=ROWS, seed=0):
    """
    Time each operation ``iterations`` times after ``warmup`` untimed calls.

    Each call starts from the same state, so every iteration measures the
    same amount of work.

    Returns
    -------
    list of BenchRow
    """
    cases = _cases(seed)
    out = []
    for name in rows:
        t = _time(cases[name], iterations, warmup)
        out.append(BenchRow(name, float(t.mean()), float(t.std()), iterations))
    return out


def format_table(rows):
    width = max(len(r.name) for r in rows)
    lines = [f"{'operation':<{width}}  {'mean us':>9}  {'std us':>9}  {'n':>7}"]
    for r in rows:
        lines.append(f"{r.name:<{width}}  {r.mean_us:9.2f}  {r.std_us:9.2f}  {r.iterations:7d}")
    return "\n".join(lines)

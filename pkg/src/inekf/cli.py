"""
Command-line interface.

Subcommands::

    inekf run   --config <ini> --out <dir> [--threaded]
    inekf rpe   --est <csv> --ref <csv> [--delta 1.0]
    inekf drift --est <csv> --ref <csv>
    inekf sim   --spec <ini> --out <dir>
    inekf bench [--iterations 100000] [--warmup 1000]

Exit codes: 0 success, 1 configuration error, 2 log parse error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

import numpy as np
from scipy.spatial.transform import Rotation

from . import logio, sim
from .bench import format_table, run_bench
from .config import load_config, load_sim_config
from .errors import ConfigError, InEKFError, LogParseError
from .metrics import final_drift, rpe
from .replay import run_pipeline

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3

log = logging.getLogger("inekf")

# filter noise written into generated configs never drops below these
_MIN_FILTER_NOISE = dict(gyro_density=1e-4, accel_density=1e-3, contact_density=1e-3,
                         velocity_sigma=1e-3)


def _cmd_run(args):
    cfg = load_config(args.config)
    t0 = time.perf_counter()
    records = run_pipeline(cfg, threaded=args.threaded)
    elapsed = time.perf_counter() - t0
    out = os.path.join(args.out, "trajectory.csv")
    logio.write_trajectory(out, records)
    print(f"records: {len(records)}")
    if records:
        p = records[-1].position
        print(f"final stamp: {records[-1].stamp:.6f} s")
        print(f"final position: {p[0]:.6f} {p[1]:.6f} {p[2]:.6f} m")
    print(f"elapsed: {elapsed:.3f} s")
    print(f"trajectory: {out}")
    return EXIT_OK


def _read_pair(args):
    return logio.read_trajectory(args.est), logio.read_trajectory(args.ref)


def _cmd_rpe(args):
    est, ref = _read_pair(args)
    t, r = rpe(est, ref, args.delta)
    print(f"translational drift: {t:.6f} m/m")
    print(f"rotational drift: {r:.6f} deg/m")
    return EXIT_OK


def _cmd_drift(args):
    est, ref = _read_pair(args)
    d, pct = final_drift(est, ref)
    print(f"final drift: {d:.4f} m")
    print(f"trajectory length: {ref.length():.4f} m")
    print(f"drift percentage: {pct:.2f} %")
    return EXIT_OK


def _write_run_config(path, scfg, platform, files, truth):
    n = scfg.noise
    q = Rotation.from_matrix(truth.R[0]).as_quat()
    w = np.array([q[3], q[0], q[1], q[2]])
    w = -w if w[0] < 0 else w

    def floor(key):
        return max(getattr(n, key), _MIN_FILTER_NOISE.get(key, 0.0))

    lines = [
        "# generated by inekf sim",
        "[pipeline]",
        f"platform = {platform}",
        "bias_estimation = false",
        "",
        "[noise]",
        f"gyro_density = {floor('gyro_density')!r}",
        f"accel_density = {floor('accel_density')!r}",
        f"gyro_bias_walk = {n.gyro_bias_walk!r}",
        f"accel_bias_walk = {n.accel_bias_walk!r}",
        f"contact_density = {floor('contact_density')!r}",
        f"velocity_sigma = {floor('velocity_sigma')!r}",
        "",
        "[wheels]",
        f"radius = {scfg.wheel_radius!r}",
        f"track_width = {scfg.track_width!r}",
        "",
        "[initial]",
        "position = " + " ".join(repr(float(x)) for x in truth.p[0]),
        "velocity = " + " ".join(repr(float(x)) for x in truth.v[0]),
        "orientation = " + " ".join(repr(float(x)) for x in w),
        "",
        "[files]",
    ]
    lines += [f"{k} = {v}" for k, v in files.items()]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _cmd_sim(args):
    scfg = load_sim_config(args.spec)
    truth = sim.generate(scfg.spec)
    os.makedirs(args.out, exist_ok=True)
    files = {"imu": "imu.csv"}
    logio.write_imu(os.path.join(args.out, "imu.csv"), sim.synthesize_imu(truth, scfg.noise))
    platform = "generic"
    if scfg.velocity:
        files["velocity"] = "velocity.csv"
        logio.write_velocity(os.path.join(args.out, "velocity.csv"),
                             sim.synthesize_velocity(truth, scfg.noise))
        platform = "marine"
    if scfg.wheels:
        files["wheels"] = "wheels.csv"
        logio.write_wheels(os.path.join(args.out, "wheels.csv"),
                           sim.synthesize_wheels(truth, scfg.noise, scfg.wheel_radius,
                                                 scfg.track_width))
        platform = "wheeled"
    if scfg.legged:
        files["kin"] = "kin.csv"
        files["contact"] = "contact.csv"
        logio.write_kinematics(os.path.join(args.out, "kin.csv"),
                               sim.synthesize_kinematics(truth, scfg.noise))
        logio.write_contact(os.path.join(args.out, "contact.csv"), sim.synthesize_contacts(truth))
        platform = "legged"
    q = Rotation.from_matrix(truth.R).as_quat()[:, [3, 0, 1, 2]]
    q[q[:, 0] < 0] *= -1.0
    logio.write_groundtruth(os.path.join(args.out, "groundtruth.csv"), truth.t, truth.p, q)
    _write_run_config(os.path.join(args.out, "config.ini"), scfg, platform, files, truth)
    print(f"wrote {len(truth)} IMU samples ({platform}) to {args.out}")
    return EXIT_OK


def _cmd_bench(args):
    rows = run_bench(args.iterations, args.warmup)
    print(format_table(rows))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="inekf", description="Invariant EKF odometry tools.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="replay logs through the estimator")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threaded", action="store_true",
                   help="parse on a worker thread (same output)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("rpe", help="relative pose error per meter")
    p.add_argument("--est", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--delta", type=float, default=1.0, help="pair separation in meters")
    p.set_defaults(func=_cmd_rpe)

    p = sub.add_parser("drift", help="final drift and drift percentage")
    p.add_argument("--est", required=True)
    p.add_argument("--ref", required=True)
    p.set_defaults(func=_cmd_drift)

    p = sub.add_parser("sim", help="write synthetic logs and a matching config")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("bench", help="per-step latency")
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--warmup", type=int, default=1000)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LogParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InEKFError, FloatingPointError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""
A wheeled robot drives straight for a minute and only has wheel odometry to
correct its IMU. The filter starts 5 degrees off on every axis.

Watch the three attitude errors: gravity pulls roll and pitch back within about
a second, but nothing in a body-velocity reading says which way north is,
so the yaw error just sits there. The covariance agrees with the errors: the
yaw standard deviation barely moves while roll and pitch collapse.

    python3 demos/wheeled_yaw_unobservable.py
"""

import math

import numpy as np

from inekf import sim
from inekf.liegroup import SEK3, exp_sek3
from inekf.metrics import attitude_errors
from inekf.pipeline import Estimator, FilterConfig, initial_state, merge

spec = sim.TrajectorySpec("line", speed=1.0, duration=60.0, imu_rate=200, aux_rate=20, seed=0)
noise = sim.SensorNoiseSpec.marine(encoder_sigma=0.01)
truth = sim.generate(spec)
measurements = merge(sim.synthesize_imu(truth, noise), sim.synthesize_wheels(truth, noise))

xi = np.zeros(9)
xi[:3] = math.radians(5.0)
X0 = exp_sek3(xi) @ SEK3.from_parts(truth.R[0], truth.v[0], truth.p[0])
state = initial_state(X0.R, X0.v, X0.p, attitude_var=math.radians(10.0) ** 2,
                      velocity_var=0.01, position_var=1e-6, bias=False)
cfg = FilterConfig(noise=noise.imu_params(), forward_sigma=0.01, lateral_sigma=0.01,
                   vertical_sigma=0.01)

checkpoints = [0.0, 1.0, 5.0, 15.0, 30.0, 60.0]
rows = []


def watch(s):
    if checkpoints and s.stamp >= checkpoints[0]:
        i = int(round(s.stamp * spec.imu_rate))
        err = attitude_errors(s.X.R, truth.R[i])
        sd = np.degrees(np.sqrt(np.diag(s.P)[:3]))
        rows.append((checkpoints.pop(0), err, sd))


Estimator(state, cfg).run(measurements, on_step=watch)

print(f"{'t (s)':>6}  {'roll':>7} {'pitch':>7} {'yaw':>7}   {'sd roll':>8} {'sd pitch':>8} "
      f"{'sd yaw':>8}   (deg)")
for t, err, sd in rows:
    print(f"{t:6.1f}  {err[0]:7.3f} {err[1]:7.3f} {err[2]:7.3f}   {sd[0]:8.3f} {sd[1]:8.3f} "
          f"{sd[2]:8.3f}")

import numpy as np
import pytest

from inekf.corrections import velocity_observation, wheel_pseudo_velocity
from inekf.errors import OutOfOrderMeasurement, UnknownChannel
from inekf.filter import update
from inekf.measurements import (
    AngularRateMeasurement,
    ContactEvent,
    GrfSample,
    ImuSample,
    KinematicsMeasurement,
    VelocityMeasurement,
    WheelRates,
)
from inekf.pipeline import (
    Estimator,
    FilterConfig,
    align_from_accel,
    dispatch,
    initial_state,
    merge,
)
from inekf.propagation import ImuNoiseParams, propagate
from inekf.sim import Shape, StubLeg, TrajectorySpec, generate, synthesize_contacts, \
    synthesize_imu, synthesize_kinematics, synthesize_velocity

GRAV_UP = np.array([0.0, 0.0, 9.80665])
CFG = FilterConfig(noise=ImuNoiseParams(1e-3, 1e-2, 1e-5, 1e-4, 1e-2))


def kin(stamp, leg=0, h=(0.0, 0.0, -0.5)):
    return KinematicsMeasurement(stamp, leg, h, np.eye(3), np.eye(3) * 1e-6)


class TestDispatch:
    def test_first_imu_is_held(self):
        s = initial_state()
        out = dispatch(s, ImuSample(0.0, [0, 0, 1], GRAV_UP), CFG)
        assert out.imu_hold is not None and out.X is s.X

    def test_imu_propagates_with_held_sample(self):
        s = initial_state()
        u0 = ImuSample(0.0, [0.0, 0.0, 1.0], GRAV_UP + [1.0, 0.0, 0.0])
        u1 = ImuSample(0.01, [0.0, 0.0, -5.0], GRAV_UP)
        out = dispatch(dispatch(s, u0, CFG), u1, CFG)
        ref = propagate(s, u0, 0.01, CFG.noise)
        np.testing.assert_array_equal(out.X.matrix(), ref.X.matrix())
        np.testing.assert_array_equal(out.P, ref.P)
        assert out.stamp == 0.01 and out.imu_hold is u1

    def test_velocity_routes_to_update(self):
        s = initial_state(v=[0.5, 0.0, 0.0])
        m = VelocityMeasurement(0.0, [1.0, 0.0, 0.0], np.eye(3) * 1e-2)
        out = dispatch(s, m, CFG)
        ref = update(s, velocity_observation(s, m))
        np.testing.assert_array_equal(out.X.matrix(), ref.X.matrix())

    def test_wheels_route_to_pseudo_velocity(self):
        s = initial_state()
        w = WheelRates(0.0, 10.0, 10.0, 0.1)
        out = dispatch(s, w, CFG)
        ref = update(s, velocity_observation(s, wheel_pseudo_velocity(w)))
        np.testing.assert_array_equal(out.X.matrix(), ref.X.matrix())
        assert out.X.v[0] > 0.0

    def test_stamp_advances(self):
        s = initial_state(stamp=1.0)
        out = dispatch(s, ContactEvent(2.0, 0, False), CFG)
        assert out.stamp == 2.0

    def test_out_of_order(self):
        s = initial_state(stamp=1.0)
        with pytest.raises(OutOfOrderMeasurement):
            dispatch(s, ImuSample(0.5, np.zeros(3), GRAV_UP), CFG)
        # within the slack the measurement is applied and the stamp kept
        out = dispatch(s, VelocityMeasurement(0.999, np.zeros(3), np.eye(3)), CFG)
        assert out.stamp == 1.0

    @pytest.mark.parametrize("m", [GrfSample(0.0, 0, 10.0), object(), 3.0])
    def test_unknown_channel(self, m):
        with pytest.raises(UnknownChannel):
            dispatch(initial_state(), m, CFG)

    def test_angular_rate_ignored_without_gyro_filter(self):
        s = initial_state()
        out = dispatch(s, AngularRateMeasurement(0.0, [0, 0, 1]), CFG)
        assert out.gyro is None


class TestContactLifecycle:
    def test_augment_on_rising_edge(self):
        s = initial_state(bias=False)
        s = dispatch(s, kin(0.0), CFG)
        assert s.slots == ()
        s = dispatch(s, ContactEvent(0.01, 0, True), CFG)
        assert s.slots == (0,)
        np.testing.assert_allclose(s.X.contacts[:, 0], [0.0, 0.0, -0.5])
        s = dispatch(s, ContactEvent(0.5, 0, False), CFG)
        assert s.slots == () and s.X.k == 2 and s.P.shape == (9, 9)

    def test_stale_kinematics_wait_for_fresh(self):
        s = initial_state(bias=False)
        s = dispatch(s, kin(0.0), CFG)
        s = dispatch(s, ContactEvent(0.05, 0, True), CFG)
        assert s.slots == ()
        s = dispatch(s, kin(0.06), CFG)
        assert s.slots == (0,)

    def test_kinematics_in_contact_update(self):
        s = initial_state(bias=False)
        s = dispatch(dispatch(s, kin(0.0), CFG), ContactEvent(0.0, 0, True), CFG)
        before = s.P[6:9, 6:9].trace()
        s = dispatch(s, kin(0.01, h=(0.0, 0.0, -0.5)), CFG)
        assert s.P[6:9, 6:9].trace() <= before

    def test_slots_ordered_by_augmentation(self):
        s = initial_state(bias=False)
        for leg in (3, 1):
            s = dispatch(s, kin(0.0, leg=leg), CFG)
            s = dispatch(s, ContactEvent(0.0, leg, True), CFG)
        assert s.slots == (3, 1) and s.slot_column(1) == 4

    def test_release_without_slot_is_harmless(self):
        s = initial_state()
        out = dispatch(s, ContactEvent(0.0, 2, False), CFG)
        assert out.slots == ()


class TestGyroWiring:
    def test_only_masked_axis_replaced(self):
        cfg = FilterConfig(noise=ImuNoiseParams(), gyro_filter=True, gyro_self_correct=False)
        s = initial_state(bias=False)
        s = dispatch(s, ImuSample(0.0, [0.1, 0.2, 0.3], GRAV_UP), cfg)
        s = dispatch(s, AngularRateMeasurement(0.0, [0.0, 0.0, 0.0], np.eye(3) * 1e-8), cfg)
        s = dispatch(s, ImuSample(0.01, [0.1, 0.2, 0.3], GRAV_UP), cfg)
        held = s.imu_hold
        assert held.omega[0] == 0.1 and held.omega[1] == 0.2
        assert abs(held.omega[2]) < 1e-3

    def test_wheel_yaw_rate_feeds_filter(self):
        cfg = FilterConfig(noise=ImuNoiseParams(), gyro_filter=True, track_width=0.5)
        s = initial_state(bias=False)
        s = dispatch(s, ImuSample(0.0, [0.0, 0.0, 0.5], GRAV_UP), cfg)
        for i in range(1, 200):
            t = i * 0.005
            s = dispatch(s, ImuSample(t, [0.0, 0.0, 0.5], GRAV_UP), cfg)
            # true yaw rate 0.4 rad/s; the IMU reads 0.1 too high
            s = dispatch(s, WheelRates(t, 11.0, 9.0, 0.1), cfg)
        assert s.gyro.omega[2] == pytest.approx(0.4, abs=5e-3)
        assert s.gyro.bias[2] == pytest.approx(0.1, abs=5e-3)


class TestMerge:
    def test_tie_break(self):
        items = [ContactEvent(0.0, 0, True), kin(0.0), VelocityMeasurement(0.0, np.zeros(3),
                 np.eye(3)), ImuSample(0.0, np.zeros(3), GRAV_UP)]
        kinds = [type(m).__name__ for m in merge(items)]
        assert kinds == ["ImuSample", "VelocityMeasurement", "KinematicsMeasurement",
                         "ContactEvent"]

    def test_permutation_invariant_output(self):
        spec = TrajectorySpec(Shape.CIRCLE, speed=0.5, duration=3.0, aux_rate=100)
        tr = generate(spec)
        streams = [synthesize_imu(tr), synthesize_velocity(tr), synthesize_kinematics(tr),
                   synthesize_contacts(tr)]
        flat = [m for st in streams for m in st]
        rng = np.random.default_rng(0)

        def run(items):
            est = Estimator(initial_state(tr.R[0], tr.v[0], tr.p[0]), CFG)
            return est.run(merge(items))

        ref = run(flat)
        shuffled = [flat[i] for i in rng.permutation(len(flat))]
        out = run(shuffled)
        assert len(out) == len(ref)
        assert all(np.array_equal(a.position, b.position) and
                   np.array_equal(a.quaternion, b.quaternion) for a, b in zip(ref, out))


class TestEstimator:
    def test_one_record_per_imu_stamp(self):
        tr = generate(TrajectorySpec(Shape.LINE, duration=1.0))
        imu = synthesize_imu(tr)
        vel = synthesize_velocity(tr)
        est = Estimator(initial_state(tr.R[0], tr.v[0], tr.p[0]), CFG)
        recs = est.run(merge(imu, vel))
        assert len(recs) == len(imu)
        assert [r.stamp for r in recs] == [m.stamp for m in imu]
        for r in recs:
            assert r.quaternion[0] >= 0.0
            assert abs(np.linalg.norm(r.quaternion) - 1.0) < 1e-6

    def test_on_step_replaces_state(self):
        tr = generate(TrajectorySpec(Shape.STATIC, duration=0.1))
        est = Estimator(initial_state(), CFG)
        seen = []

        def hook(s):
            seen.append(s.stamp)
            return s.replace(X=s.X) if s.stamp > 0.05 else None

        est.run(synthesize_imu(tr), on_step=hook)
        assert len(seen) == len(tr)

    def test_legged_stub_tracks_truth(self):
        spec = TrajectorySpec(Shape.LINE, speed=0.5, duration=5.0, aux_rate=100)
        tr = generate(spec)
        items = merge(synthesize_imu(tr), synthesize_kinematics(tr), synthesize_contacts(tr))
        est = Estimator(initial_state(tr.R[0], tr.v[0], tr.p[0], bias=False), CFG)
        recs = est.run(items)
        assert np.linalg.norm(recs[-1].position - tr.p[-1]) < 1e-3


def test_align_from_accel():
    R = align_from_accel(GRAV_UP)
    np.testing.assert_allclose(R, np.eye(3), atol=1e-12)
    roll = 0.2
    f = np.array([0.0, np.sin(roll), np.cos(roll)]) * 9.8
    R = align_from_accel(f)
    # gravity seen in the body frame matches the reading
    np.testing.assert_allclose(R.T @ [0, 0, 9.8], f, atol=1e-12)

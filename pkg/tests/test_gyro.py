import numpy as np
import pytest

from inekf.errors import NonMonotonicStamp, SingularInnovation
from inekf.gyro import (
    GyroFilterState,
    default_process_noise,
    gf_correct,
    gf_propagate,
    matched_process_noise,
)


def test_default_noise():
    np.testing.assert_array_equal(np.diag(default_process_noise()), [1e-5] * 3 + [1e-6] * 3)


class TestPropagate:
    def test_constant_alpha(self):
        s = GyroFilterState.initial([0.1, 0.2, 0.3], 0.0)
        Q = default_process_noise()
        out = gf_propagate(s, [0.1, 0.2, 0.3], 0.005, Q)
        np.testing.assert_array_equal(out.omega, s.omega)
        np.testing.assert_array_equal(out.P, s.P + Q)

    def test_step(self):
        s = GyroFilterState.initial(np.zeros(3), 0.0)
        out = gf_propagate(s, [0.1, 0.0, 0.0], 0.005, default_process_noise())
        np.testing.assert_allclose(out.omega, [0.1, 0.0, 0.0])
        np.testing.assert_array_equal(out.bias, s.bias)

    def test_zero_q_keeps_p(self):
        s = GyroFilterState.initial(np.zeros(3), 0.0)
        for i in range(1, 50):
            s2 = gf_propagate(s, np.ones(3) * i, i * 0.01, np.zeros((6, 6)))
            np.testing.assert_array_equal(s2.P, s.P)
            s = s2

    @pytest.mark.parametrize("stamp", [0.0, -0.1])
    def test_monotonic(self, stamp):
        s = GyroFilterState.initial(np.zeros(3), 0.0)
        with pytest.raises(NonMonotonicStamp):
            gf_propagate(s, np.zeros(3), stamp, default_process_noise())


class TestCorrect:
    def test_consistent_unbiased(self):
        s = GyroFilterState.initial([0.1, 0.0, 0.2], 0.0)
        out = gf_correct(s, s.omega, False, np.eye(3) * 1e-4)
        np.testing.assert_array_equal(out.omega, s.omega)
        np.testing.assert_array_equal(out.bias, s.bias)
        assert np.trace(out.P[:3, :3]) <= np.trace(s.P[:3, :3])

    def test_huge_noise_is_no_op(self):
        s = GyroFilterState.initial([0.1, 0.0, 0.2], 0.0)
        out = gf_correct(s, [1.0, 1.0, 1.0], True, np.eye(3) * 1e12)
        assert np.abs(out.omega - s.omega).max() < 1e-9
        assert np.abs(out.bias - s.bias).max() < 1e-9

    def test_scalar_oracle(self):
        # single unbiased correction is a textbook scalar KF per axis
        s = GyroFilterState.initial(np.zeros(3), 0.0, omega_var=0.04, bias_var=0.01)
        r = 0.01
        out = gf_correct(s, [1.0, 2.0, 3.0], False, np.eye(3) * r)
        gain = 0.04 / (0.04 + r)
        np.testing.assert_allclose(out.omega, gain * np.array([1.0, 2.0, 3.0]), rtol=1e-12)
        np.testing.assert_allclose(np.diag(out.P)[:3], (1 - gain) * 0.04, rtol=1e-12)
        np.testing.assert_allclose(np.diag(out.P)[3:], 0.01, rtol=1e-12)

    def test_biased_splits_innovation_by_variance(self):
        s = GyroFilterState.initial(np.zeros(3), 0.0, omega_var=0.03, bias_var=0.01)
        out = gf_correct(s, [0.4, 0.0, 0.0], True, np.eye(3) * 1e-12)
        # gains proportional to prior variances; sum reproduces the reading
        assert out.omega[0] == pytest.approx(0.3, rel=1e-6)
        assert out.bias[0] == pytest.approx(0.1, rel=1e-6)

    def test_axis_mask(self):
        s = GyroFilterState.initial(np.zeros(3), 0.0)
        out = gf_correct(s, [0.0, 0.0, 0.5], False, np.eye(3) * 1e-4, axes=[2])
        assert out.omega[0] == 0.0 and out.omega[1] == 0.0 and out.omega[2] > 0.4
        out2 = gf_correct(s, [0.5], False, np.eye(1) * 1e-4, axes=[False, False, True])
        np.testing.assert_array_equal(out.omega, out2.omega)

    def test_singular(self):
        s = GyroFilterState(np.zeros(3), np.zeros(3), np.zeros((6, 6)), np.zeros(3), 0.0)
        with pytest.raises(SingularInnovation):
            gf_correct(s, np.zeros(3), False, np.zeros((3, 3)))


def run_pair(alpha_bias, true_omega, cycles, rng=None, alpha_sigma=0.0, beta_sigma=0.0,
             Q=None, R_alpha=1e-6, R_beta=1e-6):
    """Alternate propagate with the biased source and correct with both sources."""
    Q = default_process_noise() if Q is None else Q
    rng = np.random.default_rng(0) if rng is None else rng
    w = np.asarray(true_omega, dtype=float)

    def alpha():
        return w + alpha_bias + rng.normal(scale=alpha_sigma, size=3) if alpha_sigma else w + alpha_bias

    def beta():
        return w + rng.normal(scale=beta_sigma, size=3) if beta_sigma else w

    s = GyroFilterState.initial(alpha(), 0.0)
    for i in range(1, cycles + 1):
        a = alpha()
        s = gf_propagate(s, a, i * 0.005, Q)
        s = gf_correct(s, a, True, np.eye(3) * R_alpha)
        s = gf_correct(s, beta(), False, np.eye(3) * R_beta)
    return s


def test_bias_of_biased_source_is_recovered():
    s = run_pair(np.array([0.02, 0.0, 0.0]), [0.1, 0.0, 0.0], 500)
    assert abs(s.omega[0] - 0.1) < 1e-3
    assert abs(s.bias[0] - 0.02) < 2e-3


def test_noiseless_consistent_is_fixed_point():
    w = np.array([0.1, -0.2, 0.3])
    s = GyroFilterState(w.copy(), np.zeros(3), np.eye(6) * 1e-2, w.copy(), 0.0)
    for i in range(1, 20):
        s = gf_propagate(s, w, i * 0.005, default_process_noise())
        s = gf_correct(s, w, True, np.eye(3) * 1e-4)
        s = gf_correct(s, w, False, np.eye(3) * 1e-4)
        np.testing.assert_allclose(s.omega, w, atol=1e-15)
        np.testing.assert_allclose(s.bias, 0.0, atol=1e-15)
        assert np.linalg.eigvalsh(s.P).min() > 0.0
        np.testing.assert_array_equal(s.P, s.P.T)


def test_matched_noise():
    Q = matched_process_noise(0.01, 1e-9)
    np.testing.assert_allclose(np.diag(Q), [2e-4 + 1e-12] * 3 + [1e-9] * 3)

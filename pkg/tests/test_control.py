import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from windsmc.control import (
    DerivativeFilter,
    PidConfig,
    PidState,
    SmcConfig,
    equivalent_control,
    filtered_derivative,
    pid_torque,
    reference_speed,
    sliding_rate,
    sliding_variable,
    smc_torque,
    stability_margin,
    switching_control,
)
from windsmc.errors import ConfigError
from windsmc.plant import TurbineParams, rotor_derivative

P = TurbineParams()


class TestReference:
    def test_eight_metres_per_second(self):
        # 6.9 * 8 / 1.26
        assert reference_speed(8.0, P) == pytest.approx(43.8095238, rel=1e-8)

    def test_unit(self):
        assert reference_speed(P.radius / P.lambda_opt, P) == pytest.approx(1.0)

    @given(st.floats(0.5, 30), st.floats(0.01, 5))
    def test_monotone(self, v, dv):
        assert reference_speed(v, P) < reference_speed(v + dv, P)


class TestFilteredDerivative:
    def run(self, signal, dt, tau, n):
        state, y = DerivativeFilter(), 0.0
        for k in range(n):
            y, state = filtered_derivative(signal(k * dt), state, dt, tau)
        return y

    def test_constant_signal(self):
        assert self.run(lambda t: 3.0, 0.001, 0.05, 500) == 0.0

    def test_ramp_slope_after_five_time_constants(self):
        # first-order lag of a unit step in slope: 1 - (1 - dt/tau)^n, < 1% after 5 tau
        a = 2.5
        y = self.run(lambda t: a * t, 0.001, 0.05, 251)
        assert y == pytest.approx(a, rel=0.01)

    def test_unity_blend(self):
        state = DerivativeFilter(previous=1.0, value=7.0)
        y, _ = filtered_derivative(1.3, state, 0.1, 0.1)
        assert y == pytest.approx(3.0)

    def test_first_sample_primes(self):
        y, state = filtered_derivative(5.0, DerivativeFilter(), 0.01, 0.05)
        assert y == 0.0 and state.previous == 5.0


class TestSlidingSurface:
    cfg = SmcConfig(k_p=1.0, k_i=2.0)

    def test_zero(self):
        assert sliding_variable(0.0, 0.0, self.cfg) == 0.0

    def test_rate_arithmetic(self):
        # k_p * e_dot + k_i * e = 1 * 0.1 + 2 * 0.5
        assert sliding_rate(0.1, 0.5, self.cfg) == pytest.approx(1.1)

    def test_surface_arithmetic(self):
        assert sliding_variable(0.5, 0.1, self.cfg) == pytest.approx(0.7)

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.1, 10))
    def test_linear(self, e, e_int, alpha):
        assert sliding_variable(alpha * e, alpha * e_int, self.cfg) == pytest.approx(
            alpha * sliding_variable(e, e_int, self.cfg), abs=1e-9)


class TestEquivalentControl:
    def test_all_zero(self):
        assert equivalent_control(0, 0, 0, 0, 0, P, SmcConfig()) == 0.0

    def test_reduces_to_aero_torque(self):
        assert equivalent_control(16.6, 43.8, 0, 0, 0, P, SmcConfig()) == pytest.approx(16.6)

    def test_arithmetic(self):
        cfg = SmcConfig(k_p=1.0, k_i=2.0)
        # 16.6 - 1.5*2 + 1.5*2*0.5 - 1 (the estimate offsets a load disturbance)
        assert equivalent_control(16.6, 10.0, 2.0, 0.5, 1.0, P, cfg) == pytest.approx(14.1)

    @given(st.floats(0.1, 10), st.floats(-5, 5))
    def test_gain_ratio_invariance(self, alpha, e):
        base = SmcConfig(k_p=0.1, k_i=2.0)
        scaled = SmcConfig(k_p=0.1 * alpha, k_i=2.0 * alpha)
        assert equivalent_control(10, 40, 0.3, e, 0.2, P, base) == pytest.approx(
            equivalent_control(10, 40, 0.3, e, 0.2, P, scaled), rel=1e-12, abs=1e-12)


class TestSwitchingControl:
    cfg = SmcConfig(k_p=1.0, k1=10.0, k2=5.0, tanh_width=0.001)

    def test_zero(self):
        assert switching_control(0.0, P, self.cfg) == 0.0

    @given(st.floats(0.05, 100))
    def test_saturation(self, s):
        expected = (P.j_total / self.cfg.k_p) * (self.cfg.k1 * s + self.cfg.k2)
        assert switching_control(s, P, self.cfg) == pytest.approx(expected, abs=1e-6 * self.cfg.k2)

    @given(st.floats(-10, 10))
    def test_odd(self, s):
        assert switching_control(-s, P, self.cfg) == -switching_control(s, P, self.cfg)

    def test_arithmetic(self):
        assert switching_control(0.01, P, self.cfg) == pytest.approx(7.65, abs=1e-6)


class TestSmcTorque:
    def test_sum_of_components(self):
        cfg = SmcConfig()
        args = (16.0, 42.0, 0.4, -0.2)
        s, d_hat = 0.003, 0.7
        total = smc_torque(*args, s, d_hat, P, cfg)
        assert total == equivalent_control(*args, d_hat, P, cfg) + switching_control(s, P, cfg)

    def test_saturation(self):
        cfg = SmcConfig(torque_limit=20.0)
        assert smc_torque(25.0, 40.0, 0.0, 0.0, 0.0, 0.0, P, cfg) == 20.0
        assert smc_torque(-25.0, 40.0, 0.0, 0.0, 0.0, 0.0, P, cfg) == -20.0

    def test_perfect_tracking_is_equilibrium(self):
        cfg = SmcConfig()
        d = 3.0
        tau_aero = 16.5
        tau = smc_torque(tau_aero, 43.8, 0.0, 0.0, 0.0, d, P, cfg)
        assert tau == equivalent_control(tau_aero, 43.8, 0.0, 0.0, d, P, cfg)
        assert rotor_derivative(43.8, tau_aero, tau, d, P) == pytest.approx(0.0, abs=1e-12)

    @given(st.floats(0.01, 10), st.floats(-20, 20), st.floats(0, 60))
    def test_positive_error_brakes_rotor(self, e, d, omega):
        cfg = SmcConfig()
        e_int = 0.0
        s = sliding_variable(e, e_int, cfg)
        tau_aero = 16.0
        eq_torque = tau_aero - P.b_total * omega - d
        tau = smc_torque(tau_aero, omega, 0.0, e, s, d, P, cfg)
        assert tau > eq_torque
        assert rotor_derivative(omega, tau_aero, tau, d, P) < 0


class TestStabilityMargin:
    cfg = SmcConfig(k_p=1.0, k2=5.0)

    def test_no_error(self):
        assert stability_margin(0.0, P, self.cfg) == pytest.approx(7.5)

    def test_boundary(self):
        assert stability_margin(-7.5, P, self.cfg) == pytest.approx(0.0)

    def test_arithmetic(self):
        assert stability_margin(4.0, P, self.cfg) == pytest.approx(3.5)


class TestPid:
    def run(self, errors, dt, cfg):
        state, u = PidState(), None
        for e in errors:
            u, state = pid_torque(e, state, dt, cfg)
        return u, state

    def test_zero_error(self):
        u, _ = self.run([0.0] * 100, 0.01, PidConfig(kp=3, ki=2, kd=1))
        assert u == 0.0

    def test_proportional(self):
        u, _ = pid_torque(2.0, PidState(), 0.01, PidConfig(kp=3.0))
        assert u == 6.0

    def test_integral_exact(self):
        dt = 0.001
        u, _ = self.run([1.0] * 5001, dt, PidConfig(kp=0.0, ki=2.0, kd=0.0))
        assert u == pytest.approx(10.0, rel=1e-9)

    def test_trapezoid(self):
        # ramp e = t integrates exactly under the trapezoid rule
        dt = 0.01
        u, _ = self.run([k * dt for k in range(101)], dt, PidConfig(kp=0.0, ki=1.0))
        assert u == pytest.approx(0.5, rel=1e-12)

    def test_filtered_derivative(self):
        dt = 0.001
        u, _ = self.run([3.0 * k * dt for k in range(1001)], dt, PidConfig(kp=0.0, kd=2.0, derivative_filter_tau=0.05))
        assert u == pytest.approx(6.0, rel=1e-3)

    def test_anti_windup(self):
        cfg = PidConfig(kp=1.0, ki=5.0, torque_limit=2.0)
        u, state = self.run([1.0] * 1000, 0.01, cfg)
        assert u == 2.0
        # the integral stops once the output saturates: ki * I stays near limit - kp * e
        assert cfg.ki * state.integral <= 2.0
        # recovery is immediate when the error reverses
        u, _ = pid_torque(-1.0, state, 0.01, cfg)
        assert u < 2.0

    @pytest.mark.parametrize("kwargs", [dict(kp=0, ki=0, kd=0), dict(kp=-1), dict(derivative_filter_tau=0)])
    def test_config_invariants(self, kwargs):
        with pytest.raises(ConfigError):
            PidConfig(**kwargs)


@pytest.mark.parametrize("name", ["k_p", "k_i", "k1", "k2", "tanh_width", "tau_f"])
def test_smc_config_invariants(name):
    with pytest.raises(ConfigError, match=name):
        SmcConfig(**{name: 0.0})


def test_smc_defaults_discretely_stable():
    # inside the boundary layer the sampled reaching law contracts by 1 - dt*(k1 + k2/width)
    cfg = SmcConfig()
    factor = 1 - 1e-3 * (cfg.k1 + cfg.k2 / cfg.tanh_width)
    assert abs(factor) < 1
    assert stability_margin(10.0, P, cfg) >= 2.0
    assert math.isclose(P.j_total * cfg.k2 / cfg.k_p, 12.0)

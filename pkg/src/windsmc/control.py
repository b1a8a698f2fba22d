"""Reference generation, sliding-mode torque law, stability monitor and PID baseline.

Sign conventions: the tracking error is ``e = omega_rot - omega_ref`` (positive when
the rotor is too fast) and the generator torque ``tau_gen`` brakes the rotor, so a
positive error calls for more torque.

The sliding surface is of PI type,

    s = k_p * e + k_i * integral(e dt),     ds/dt = k_p * de/dt + k_i * e,

and the control law cancels the modelled dynamics so that

    ds/dt = -k1 * s - k2 * tanh(s / width) - (k_p / J_t) * (d - d_hat).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConfigError
from .plant import TurbineParams


@dataclass(frozen=True)
class SmcConfig:
    k_p: float = 0.1
    k_i: float = 2.0
    k1: float = 30.0
    k2: float = 0.8
    tanh_width: float = 0.001
    torque_limit: float | None = None
    tau_f: float = 0.05

    def __post_init__(self):
        for name in ("k_p", "k_i", "k1", "k2", "tanh_width", "tau_f"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"smc.{name} must be > 0")
        if self.torque_limit is not None and not self.torque_limit > 0:
            raise ConfigError("smc.torque_limit must be > 0 when set")


@dataclass(frozen=True)
class PidConfig:
    kp: float = 1.0
    ki: float = 0.0
    kd: float = 0.0
    derivative_filter_tau: float = 0.05
    torque_limit: float | None = None

    def __post_init__(self):
        gains = (self.kp, self.ki, self.kd)
        if any(g < 0 for g in gains):
            raise ConfigError("pid gains must be >= 0")
        if not any(g > 0 for g in gains):
            raise ConfigError("pid gains must not all be zero")
        if not self.derivative_filter_tau > 0:
            raise ConfigError("pid.derivative_filter_tau must be > 0")
        if self.torque_limit is not None and not self.torque_limit > 0:
            raise ConfigError("pid.torque_limit must be > 0 when set")


class DerivativeFilter(NamedTuple):
    """Memory of a low-pass filtered backward difference.

    ``previous`` is None until the first sample has been seen.
    """

    previous: float | None = None
    value: float = 0.0


class PidState(NamedTuple):
    integral: float = 0.0
    previous_error: float | None = None
    derivative: float = 0.0


def reference_speed(v_wind, params: TurbineParams):
    """Rotor speed that holds the tip-speed ratio at its optimum."""
    return params.lambda_opt * v_wind / params.radius


def filtered_derivative(signal_now, state: DerivativeFilter, dt, tau_f):
    """Advance a first-order low-pass of the backward difference of a signal.

    Returns ``(derivative, new_state)``. The first sample only primes the memory.
    """
    if state.previous is None:
        return state.value, DerivativeFilter(signal_now, state.value)
    raw = (signal_now - state.previous) / dt
    y = state.value + (dt / tau_f) * (raw - state.value)
    return y, DerivativeFilter(signal_now, y)


def sliding_variable(e, e_int, cfg: SmcConfig):
    """PI sliding surface ``k_p * e + k_i * integral(e)``."""
    return cfg.k_p * e + cfg.k_i * e_int


def sliding_rate(e_dot, e, cfg: SmcConfig):
    return cfg.k_p * e_dot + cfg.k_i * e


def equivalent_control(tau_aero, omega_rot, omega_ref_dot, e, d_hat, params: TurbineParams, cfg: SmcConfig):
    """Model-cancelling torque that keeps the state on ``s = 0``.

    ``d_hat`` estimates the load-type disturbance, so it is subtracted: the
    aerodynamic torque already available to the generator is reduced by it.
    """
    j = params.j_total
    return (tau_aero - params.b_total * omega_rot - j * omega_ref_dot
            + (j * cfg.k_i / cfg.k_p) * e - d_hat)


def switching_control(s, params: TurbineParams, cfg: SmcConfig):
    return (params.j_total / cfg.k_p) * (cfg.k1 * s + cfg.k2 * math.tanh(s / cfg.tanh_width))


def _clamp(u, limit):
    if limit is None:
        return u
    return max(-limit, min(limit, u))


def smc_torque(tau_aero, omega_rot, omega_ref_dot, e, s, d_hat, params: TurbineParams, cfg: SmcConfig):
    u = (equivalent_control(tau_aero, omega_rot, omega_ref_dot, e, d_hat, params, cfg)
         + switching_control(s, params, cfg))
    return _clamp(u, cfg.torque_limit)


def stability_margin(d_tilde, params: TurbineParams, cfg: SmcConfig):
    """``J_t * k2 / k_p - |d_tilde|``; positive while the reaching condition holds."""
    return params.j_total * cfg.k2 / cfg.k_p - abs(d_tilde)


def pid_torque(e, state: PidState, dt, cfg: PidConfig):
    """One PID update; returns ``(torque, new_state)``.

    Trapezoidal integral, first-order filtered derivative and conditional
    integration (the integral is frozen while the output saturates in the
    direction of the error).
    """
    if state.previous_error is None:
        integral, deriv = state.integral, state.derivative
    else:
        integral = state.integral + 0.5 * dt * (e + state.previous_error)
        raw = (e - state.previous_error) / dt
        deriv = state.derivative + (dt / cfg.derivative_filter_tau) * (raw - state.derivative)
    u = cfg.kp * e + cfg.ki * integral + cfg.kd * deriv
    limit = cfg.torque_limit
    if limit is not None and abs(u) > limit:
        if e * u > 0:
            integral = state.integral
            u = cfg.kp * e + cfg.ki * integral + cfg.kd * deriv
        u = _clamp(u, limit)
    return u, PidState(integral, e, deriv)

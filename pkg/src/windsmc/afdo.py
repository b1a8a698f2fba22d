"""Adaptive fuzzy disturbance observer (AFDO).

The lumped disturbance is approximated as ``d_hat = theta_hat . psi(omega, omega_dot)``
where ``psi`` is a normalised grid of Gaussian membership products. A speed
observer ``z`` produces the error ``zeta = omega - z`` whose dynamics are

    dzeta/dt = -sigma * zeta + (d_hat - d) / J_t,

and ``theta_hat`` is adapted along ``-gamma_bar * zeta * psi``, the direction that
makes ``zeta**2 / 2 + |theta_hat - theta*|**2 / (2 * gamma)`` non-increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .plant import TurbineParams


def _uniform(lo, hi, m):
    if m == 1:
        return (0.5 * (lo + hi),)
    return tuple(np.linspace(lo, hi, m).tolist())


@dataclass(frozen=True)
class FuzzyBasisConfig:
    """Gaussian membership grid over (rotor speed, rotor acceleration)."""

    centers_omega: tuple
    centers_omega_dot: tuple
    widths_omega: tuple
    widths_omega_dot: tuple

    def __post_init__(self):
        for name in ("centers_omega", "centers_omega_dot", "widths_omega", "widths_omega_dot"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        m = len(self.centers_omega)
        if m < 1 or len(self.centers_omega_dot) != m:
            raise ConfigError("afdo.m: both inputs need the same number (>= 1) of memberships")
        if len(self.widths_omega) != m or len(self.widths_omega_dot) != m:
            raise ConfigError("afdo: one width per membership center is required")
        for centers in (self.centers_omega, self.centers_omega_dot):
            if any(b <= a for a, b in zip(centers, centers[1:])):
                raise ConfigError("afdo: membership centers must be strictly increasing")
        if any(w <= 0 for w in self.widths_omega + self.widths_omega_dot):
            raise ConfigError("afdo: membership widths must be > 0")

    @classmethod
    def uniform(cls, m=5, omega_range=(0.0, 80.0), omega_dot_range=(-20.0, 20.0)):
        """Evenly spaced centers with width equal to the center spacing."""
        c1 = _uniform(*omega_range, m)
        c2 = _uniform(*omega_dot_range, m)
        w1 = (omega_range[1] - omega_range[0]) / max(m - 1, 1)
        w2 = (omega_dot_range[1] - omega_dot_range[0]) / max(m - 1, 1)
        return cls(c1, c2, (w1,) * m, (w2,) * m)

    @property
    def m(self):
        return len(self.centers_omega)

    @property
    def size(self):
        return self.m**2


@dataclass(frozen=True)
class AfdoConfig:
    basis: FuzzyBasisConfig = None
    sigma: float = 5.0
    gamma_bar: float = 100.0
    epsilon_bound: float = 1e-3
    freeze_theta: bool = False
    theta_limit: float = 1e3

    def __post_init__(self):
        if self.basis is None:
            object.__setattr__(self, "basis", FuzzyBasisConfig.uniform())
        if not self.sigma > 0:
            raise ConfigError("afdo.sigma must be > 0")
        if not self.gamma_bar > 0:
            raise ConfigError("afdo.gamma_bar must be > 0")
        if not self.epsilon_bound >= 0:
            raise ConfigError("afdo.epsilon_bound must be >= 0")
        if not self.theta_limit > 0:
            raise ConfigError("afdo.theta_limit must be > 0")


class AfdoState(NamedTuple):
    theta_hat: tuple
    z: float
    zeta: float = 0.0


def initial_state(omega0, cfg: AfdoConfig) -> AfdoState:
    """Zero weights and an observer started on the measured speed."""
    return AfdoState((0.0,) * cfg.basis.size, float(omega0), 0.0)


def _memberships(x, centers, widths):
    # Normalised Gaussian grades; shifting the exponents keeps far-out inputs finite.
    expo = [-0.5 * ((x - c) / w) ** 2 for c, w in zip(centers, widths)]
    top = max(expo)
    grades = [math.exp(q - top) for q in expo]
    total = sum(grades)
    return [g / total for g in grades]


def fuzzy_basis(omega_bar, cfg: FuzzyBasisConfig):
    """Normalised rule firing strengths, row-major over (speed, acceleration) rules.

    Entries are non-negative and sum to one.
    """
    mu1 = _memberships(omega_bar[0], cfg.centers_omega, cfg.widths_omega)
    mu2 = _memberships(omega_bar[1], cfg.centers_omega_dot, cfg.widths_omega_dot)
    return [a * b for a in mu1 for b in mu2]


def disturbance_estimate(theta_hat, psi):
    if len(theta_hat) != len(psi):
        raise ConfigError(f"theta_hat has length {len(theta_hat)} but psi has length {len(psi)}")
    return math.fsum(t * p for t, p in zip(theta_hat, psi))


def observer_step(state: AfdoState, omega_rot, tau_aero, tau_gen, d_hat,
                  params: TurbineParams, cfg: AfdoConfig, dt) -> AfdoState:
    """Forward-Euler step of the speed observer; records ``zeta = omega - z``."""
    zeta = omega_rot - state.z
    z_dot = cfg.sigma * zeta + (tau_aero - params.b_total * omega_rot - tau_gen - d_hat) / params.j_total
    return AfdoState(state.theta_hat, state.z + dt * z_dot, zeta)


def adapt_theta(state: AfdoState, psi, cfg: AfdoConfig, dt) -> AfdoState:
    """Forward-Euler step of the adaptive law ``dtheta/dt = -gamma_bar * zeta * psi``."""
    if cfg.freeze_theta or state.zeta == 0.0:
        return state
    gain = dt * cfg.gamma_bar * state.zeta
    theta = tuple(t - gain * p for t, p in zip(state.theta_hat, psi))
    return AfdoState(theta, state.z, state.zeta)


def theta_norm(state: AfdoState):
    return math.sqrt(sum(t * t for t in state.theta_hat))


def zeta_condition(zeta, epsilon_bound, sigma):
    """True when ``zeta**2 >= (epsilon_bound / sigma)**2``."""
    if not sigma > 0:
        raise ConfigError("sigma must be > 0")
    return zeta * zeta >= (epsilon_bound / sigma) ** 2

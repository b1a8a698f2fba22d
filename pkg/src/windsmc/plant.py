"""Rotor aerodynamics and drivetrain dynamics of a variable-speed wind turbine.

The simulated plant is the one-mass reduced model

    J_t * domega/dt = tau_aero - B_t * omega - tau_gen - d

with ``tau_gen`` the generator torque reflected to the low-speed shaft and ``d``
a lumped disturbance. The two-mass description is kept only to check the
reduction identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, SingularityError

BETZ_LIMIT = 16.0 / 27.0

# Maximum of the Cp(lambda, beta=0) curve, rounded up at the 4th decimal so that
# Cp(lambda, 0) <= CP_OPT everywhere (grid max is 0.44119938 at lambda=6.908).
CP_OPT = 0.4412


@dataclass(frozen=True)
class TurbineParams:
    """Physical constants of the plant (SI units, pitch angle in degrees)."""

    rho: float = 1.29
    radius: float = 1.26
    j_total: float = 1.5
    b_total: float = 0.0
    lambda_opt: float = 6.9
    cp_opt: float = CP_OPT
    mu: tuple = (110.23, 0.4234, 0.00146, 9.636, 18.4)
    mu_x: float = 2.14
    omega_floor: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        checks = [
            (self.rho > 0, "plant.rho", "must be > 0"),
            (self.radius > 0, "plant.radius", "must be > 0"),
            (self.j_total > 0, "plant.j_total", "must be > 0"),
            (self.b_total >= 0, "plant.b_total", "must be >= 0"),
            (self.omega_floor > 0, "plant.omega_floor", "must be > 0"),
            (self.lambda_opt > 0, "plant.lambda_opt", "must be > 0"),
            (0 < self.cp_opt <= BETZ_LIMIT, "plant.cp_opt", "must lie in (0, 0.593]"),
            (len(self.mu) == 5, "plant.mu", "needs exactly 5 coefficients"),
        ]
        for ok, key, constraint in checks:
            if not ok:
                raise ConfigError(f"{key} {constraint}")

    @property
    def swept_area(self):
        return math.pi * self.radius**2


@dataclass(frozen=True)
class TwoMassParams:
    """Rotor/generator two-mass drivetrain joined by a gearbox of ratio ``eta``.

    Stiffness terms are carried for completeness; the reduced model ignores them.
    """

    j_rot: float
    j_gen: float
    b_rot: float
    b_gen: float
    eta: float
    k_rot: float = 0.0
    k_gen: float = 0.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ConfigError("eta must be > 0")
        if self.j_rot <= 0 or self.j_gen <= 0:
            raise ConfigError("inertias must be > 0")

    @property
    def j_total(self):
        return self.j_rot + self.eta**2 * self.j_gen

    @property
    def b_total(self):
        return self.b_rot + self.eta**2 * self.b_gen

    @property
    def k_total(self):
        return self.k_rot + self.eta * self.k_gen

    def reduced(self, base: TurbineParams | None = None) -> TurbineParams:
        """One-mass parameters with inertia and damping lumped on the rotor side."""
        base = base or TurbineParams()
        fields = {**base.__dict__, "j_total": self.j_total, "b_total": self.b_total}
        return TurbineParams(**fields)


def tip_speed_ratio(omega_rot, v_wind, params: TurbineParams):
    if v_wind <= 0:
        raise DomainError(f"wind speed must be positive, got {v_wind}")
    return omega_rot * params.radius / v_wind


def power_coefficient(lam, beta, params: TurbineParams):
    """Power coefficient Cp(lambda, beta), clamped below at zero.

    ``beta`` is the pitch angle in degrees.
    """
    mu1, mu2, mu3, mu4, mu5 = params.mu
    if beta == 0.0:
        num = 1.0 - 3e-3 * lam
        den = lam
        pitch_terms = 0.0
    else:
        if beta < 0 and not float(params.mu_x).is_integer():
            raise DomainError(f"negative pitch {beta} with non-integer exponent {params.mu_x}")
        b3 = beta**3
        num = b3 + 6e-6 * beta - 3e-3 * lam + 1.0
        den = -0.02 * beta**4 + lam * b3 - 0.02 * beta + lam
        pitch_terms = mu2 * beta + mu3 * beta**params.mu_x
    if abs(den) < 1e-12:
        raise SingularityError(f"Cp ratio denominator vanishes at lambda={lam}, beta={beta}")
    phi = num / den
    lead = mu1 * phi - pitch_terms - mu4
    if lead <= 0.0:
        return 0.0
    return lead * math.exp(-mu5 * phi)


def optimal_tip_speed_ratio(params: TurbineParams, beta=0.0, lam_min=1.0, lam_max=12.0, step=1e-3):
    """Brute-force scan of Cp over a tip-speed-ratio grid; returns (lambda*, Cp*)."""
    grid = np.arange(lam_min, lam_max + 0.5 * step, step)
    best_lam, best_cp = float(grid[0]), -1.0
    for lam in grid.tolist():
        cp = power_coefficient(lam, beta, params)
        if cp > best_cp:
            best_lam, best_cp = lam, cp
    return best_lam, best_cp


def aerodynamic_power(omega_rot, v_wind, beta, params: TurbineParams):
    lam = tip_speed_ratio(omega_rot, v_wind, params)
    return 0.5 * params.rho * params.swept_area * power_coefficient(lam, beta, params) * v_wind**3


def aerodynamic_torque(omega_rot, v_wind, beta, params: TurbineParams):
    """Rotor torque P_aero / omega, dividing by ``max(omega, omega_floor)``.

    The tip-speed ratio uses the un-floored speed.
    """
    return aerodynamic_power(omega_rot, v_wind, beta, params) / max(omega_rot, params.omega_floor)


def optimal_aerodynamic_power(v_wind, params: TurbineParams):
    return 0.5 * params.rho * params.swept_area * params.cp_opt * v_wind**3


def rotor_derivative(omega_rot, tau_aero, tau_gen, d, params: TurbineParams):
    """Rotor acceleration of the reduced model; ``d`` acts as a load torque."""
    return (tau_aero - params.b_total * omega_rot - tau_gen - d) / params.j_total


def two_mass_rotor_acceleration(omega_rot, tau_aero, tau_elec, tm: TwoMassParams):
    """Rotor acceleration of the rigid-shaft two-mass drivetrain.

    Solves the rotor equation and the gear-reflected generator equation jointly
    for the acceleration and the low-speed shaft torque (stiffness ignored).
    """
    eta = tm.eta
    a = np.array([[tm.j_rot, 1.0], [eta**2 * tm.j_gen, -1.0]])
    b = np.array([
        tau_aero - tm.b_rot * omega_rot,
        -eta * tau_elec - eta**2 * tm.b_gen * omega_rot,
    ])
    acc, _tau_low_speed = np.linalg.solve(a, b)
    return float(acc)

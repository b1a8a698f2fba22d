"""Fixed-step closed-loop simulation, run records and performance metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import afdo as _afdo
from .afdo import AfdoConfig, AfdoState
from .control import (
    DerivativeFilter,
    PidConfig,
    PidState,
    SmcConfig,
    filtered_derivative,
    pid_torque,
    reference_speed,
    sliding_variable,
    smc_torque,
    stability_margin,
)
from .errors import ComparisonError, ConfigError, DomainError, IntegrationError, MonitorError
from .plant import TurbineParams, optimal_aerodynamic_power, power_coefficient, rotor_derivative
from .wind import WindProfile, generate_wind, load_wind

CONTROLLERS = ("smc_afdo", "smc_plain", "pid")
DISTURBANCES = ("none", "constant", "sinusoid", "step")
INTEGRATORS = ("rk4", "euler")

COLUMNS = (
    "t", "v_wind", "omega_ref", "omega_rot", "e", "s", "tau_gen", "tau_aero", "d", "d_hat",
    "zeta", "lambda", "cp", "p_gen", "p_aero_opt", "stability_margin", "zeta_cond",
)

# Metrics that look at monitors skip the start-up transient.
TRANSIENT = 5.0
SETTLE_BAND = 0.5


@dataclass(frozen=True)
class Disturbance:
    """Lumped load-torque disturbance d(t) in N*m."""

    kind: str = "none"
    d0: float = 0.0
    t_on: float = 0.0
    amplitude: float = 0.0
    period: float = 1.0

    def __post_init__(self):
        if self.kind not in DISTURBANCES:
            raise ConfigError(f"disturbance.kind must be one of {DISTURBANCES}, got {self.kind!r}")
        if self.kind == "sinusoid" and not self.period > 0:
            raise ConfigError("disturbance.period must be > 0")

    def __call__(self, t):
        if self.kind == "none":
            return 0.0
        if self.kind == "constant":
            return self.d0
        if self.kind == "step":
            return self.d0 if t >= self.t_on else 0.0
        return self.amplitude * math.sin(2.0 * math.pi * t / self.period)


@dataclass(frozen=True)
class WindSpec:
    """Where a scenario's wind comes from: a CSV file or the synthetic generator."""

    mean: float = 8.0
    turbulence_intensity: float = 0.12
    path: str | None = None

    def __post_init__(self):
        if self.path is None:
            if not self.mean > 0:
                raise ConfigError("wind.mean must be > 0")
            if not 0 <= self.turbulence_intensity < 0.5:
                raise ConfigError("wind.turbulence_intensity must lie in [0, 0.5)")

    def build(self, duration, dt, seed) -> WindProfile:
        if self.path:
            return load_wind(self.path)
        return generate_wind(self.mean, self.turbulence_intensity, duration, dt, seed)


@dataclass(frozen=True)
class Scenario:
    params: TurbineParams = field(default_factory=TurbineParams)
    wind: WindSpec = field(default_factory=WindSpec)
    controller: str = "smc_afdo"
    smc: SmcConfig = field(default_factory=SmcConfig)
    pid: PidConfig = field(default_factory=PidConfig)
    afdo: AfdoConfig = field(default_factory=AfdoConfig)
    disturbance: Disturbance = field(default_factory=Disturbance)
    t_end: float = 600.0
    dt: float = 1e-3
    omega0: float = 40.0
    seed: int = 42
    integrator: str = "rk4"

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ConfigError(f"controller.type must be one of {CONTROLLERS}, got {self.controller!r}")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"sim.integrator must be one of {INTEGRATORS}")
        if not self.dt > 0:
            raise ConfigError("sim.dt must be > 0")
        if not self.t_end >= 10 * self.dt:
            raise ConfigError("sim.t_end must be >= 10 * sim.dt")
        if not self.omega0 > self.params.omega_floor:
            raise ConfigError("sim.omega0 must exceed plant.omega_floor")

    @property
    def n_steps(self):
        return int(math.floor(self.t_end / self.dt + 1e-9))

    def wind_profile(self) -> WindProfile:
        return self.wind.build(self.t_end, self.dt, self.seed)

    def environment(self):
        """Everything except the controller choice and its gains."""
        return (self.params, self.wind, self.disturbance, self.t_end, self.dt,
                self.omega0, self.seed, self.integrator)


class SimState(NamedTuple):
    k: int
    omega: float
    e_int: float
    ref_filter: DerivativeFilter
    omega_filter: DerivativeFilter
    pid: PidState
    afdo: AfdoState | None


def rk4_step(f, t, x, h):
    """One classic fourth-order Runge-Kutta step of ``dx/dt = f(t, x)``."""
    k1 = f(t, x)
    k2 = f(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = f(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(f, t, x, h):
    return x + h * f(t, x)


class ClosedLoop:
    """Plant, controller and observer wired together for one scenario.

    ``step`` is a pure function of the state it receives: it returns the
    record row for the current instant and the state one ``dt`` later.
    """

    def __init__(self, scenario: Scenario, wind: WindProfile | None = None):
        self.scenario = scenario
        self.wind = wind if wind is not None else scenario.wind_profile()
        p = scenario.params
        self._half_rho_area = 0.5 * p.rho * p.swept_area
        self._use_afdo = scenario.controller == "smc_afdo"
        self._use_smc = scenario.controller != "pid"
        self._integrate = rk4_step if scenario.integrator == "rk4" else euler_step

    def initial_state(self) -> SimState:
        sc = self.scenario
        obs = _afdo.initial_state(sc.omega0, sc.afdo) if self._use_afdo else None
        return SimState(0, float(sc.omega0), 0.0, DerivativeFilter(), DerivativeFilter(), PidState(), obs)

    def aero_torque(self, omega, v):
        p = self.scenario.params
        cp = power_coefficient(omega * p.radius / v, 0.0, p)
        return self._half_rho_area * cp * v**3 / max(omega, p.omega_floor)

    def step(self, state: SimState):
        sc = self.scenario
        p, dt, smc = sc.params, sc.dt, sc.smc
        t = state.k * dt
        v = self.wind.at(t)
        omega = state.omega

        omega_ref = reference_speed(v, p)
        omega_ref_dot, ref_filter = filtered_derivative(omega_ref, state.ref_filter, dt, smc.tau_f)
        omega_dot, omega_filter = filtered_derivative(omega, state.omega_filter, dt, smc.tau_f)
        e = omega - omega_ref
        s = sliding_variable(e, state.e_int, smc)

        lam = omega * p.radius / v
        cp = power_coefficient(lam, 0.0, p)
        tau_aero = self._half_rho_area * cp * v**3 / max(omega, p.omega_floor)
        d = sc.disturbance(t)

        obs = state.afdo
        d_hat = 0.0
        if self._use_afdo:
            psi = _afdo.fuzzy_basis((omega, omega_dot), sc.afdo.basis)
            d_hat = _afdo.disturbance_estimate(obs.theta_hat, psi)

        pid_state = state.pid
        if self._use_smc:
            tau_gen = smc_torque(tau_aero, omega, omega_ref_dot, e, s, d_hat, p, smc)
        else:
            tau_gen, pid_state = pid_torque(e, pid_state, dt, sc.pid)

        zeta, zeta_ok = 0.0, 0.0
        if self._use_afdo:
            obs = _afdo.observer_step(obs, omega, tau_aero, tau_gen, d_hat, p, sc.afdo, dt)
            obs = _afdo.adapt_theta(obs, psi, sc.afdo, dt)
            zeta = obs.zeta
            zeta_ok = float(_afdo.zeta_condition(zeta, sc.afdo.epsilon_bound, sc.afdo.sigma))
            norm = _afdo.theta_norm(obs)
            if not norm <= sc.afdo.theta_limit:
                raise MonitorError("theta_norm", state.k, f"|theta_hat| = {norm:.6g} exceeds {sc.afdo.theta_limit:g}")

        row = (
            t, v, omega_ref, omega, e, s, tau_gen, tau_aero, d, d_hat, zeta, lam, cp,
            tau_gen * omega, optimal_aerodynamic_power(v, p),
            stability_margin(d - d_hat, p, smc), zeta_ok,
        )

        def f(_t, x):
            return rotor_derivative(x, self.aero_torque(x, v), tau_gen, d, p)

        omega_next = self._integrate(f, t, omega, dt)
        if not math.isfinite(omega_next):
            raise IntegrationError(f"non-finite rotor speed at step {state.k}")
        nxt = SimState(state.k + 1, omega_next, state.e_int + dt * e,
                       ref_filter, omega_filter, pid_state, obs)
        return row, nxt


def integrate_step(state: SimState, scenario: Scenario, dt=None, wind: WindProfile | None = None) -> SimState:
    """Advance the closed loop by one step (convenience wrapper around ``ClosedLoop``)."""
    if dt is not None and dt != scenario.dt:
        raise ConfigError(f"step size {dt} does not match scenario dt {scenario.dt}")
    return ClosedLoop(scenario, wind).step(state)[1]


class RunRecord:
    """Per-step channels of one run, stored as an ``(n_rows, 17)`` float array."""

    columns = COLUMNS

    def __init__(self, data):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(COLUMNS):
            raise DomainError(f"record data must have {len(COLUMNS)} columns")
        self.data = data

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name):
        return self.data[:, COLUMNS.index(name)]

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(COLUMNS) + "\n")
            np.savetxt(fh, self.data, fmt="%.9g", delimiter=",")

    @classmethod
    def from_csv(cls, path):
        with Path(path).open(encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != COLUMNS:
                raise DomainError(f"{path}: unexpected record header")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(data)


@dataclass(frozen=True)
class RunMetrics:
    mse_speed: float
    mse_lambda: float
    torque_std: float
    energy_efficiency: float
    settle_time: float
    min_stability_margin: float

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def mse(series):
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise DomainError("mean square error of an empty series")
    return float(np.mean(x * x))


def std_dev(series):
    """Population standard deviation (divisor N)."""
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        raise DomainError("standard deviation needs at least two samples")
    return float(np.std(x))


def energy_efficiency(record: RunRecord):
    """Generated energy over the energy available at the optimal power coefficient."""
    t = record["t"]
    if len(record) == 0:
        raise DomainError("empty record")
    available = np.trapezoid(record["p_aero_opt"], t)
    if available == 0:
        raise DomainError("zero available wind energy")
    return float(np.trapezoid(record["p_gen"], t) / available)


def settle_time(record: RunRecord, band=SETTLE_BAND):
    """Earliest time after which |e| stays inside ``band``; the horizon if never."""
    t, e = record["t"], np.abs(record["e"])
    outside = np.nonzero(e > band)[0]
    if outside.size == 0:
        return float(t[0])
    last = outside[-1]
    return float(t[last + 1]) if last + 1 < len(t) else float(t[-1])


def compute_metrics(record: RunRecord, params: TurbineParams) -> RunMetrics:
    t = record["t"]
    after = t >= min(TRANSIENT, t[-1])
    return RunMetrics(
        mse_speed=mse(record["e"]),
        mse_lambda=mse(record["lambda"] - params.lambda_opt),
        torque_std=std_dev(record["tau_gen"]),
        energy_efficiency=energy_efficiency(record),
        settle_time=settle_time(record),
        min_stability_margin=float(np.min(record["stability_margin"][after])),
    )


def run(scenario: Scenario, wind: WindProfile | None = None):
    """Execute a scenario; returns ``(RunRecord, RunMetrics)``."""
    loop = ClosedLoop(scenario, wind)
    n = scenario.n_steps
    if loop.wind.t[0] > 0 or loop.wind.t[-1] < n * scenario.dt:
        raise ConfigError("wind profile does not cover the simulation horizon")
    data = np.empty((n + 1, len(COLUMNS)))
    state = loop.initial_state()
    step = loop.step
    for k in range(n):
        data[k], state = step(state)
    data[n] = step(state)[0]
    record = RunRecord(data)
    return record, compute_metrics(record, scenario.params)


@dataclass(frozen=True)
class Comparison:
    a: RunMetrics
    b: RunMetrics
    speed_mse_improvement: float
    lambda_mse_improvement: float
    torque_std_change: float
    energy_gain: float


def _improvement(a, b):
    if b == 0:
        return 0.0 if a == 0 else -math.inf
    return (b - a) / b


def compare_metrics(a: RunMetrics, b: RunMetrics) -> Comparison:
    """Relative improvement of ``a`` over ``b`` (positive when ``a`` is better)."""
    return Comparison(
        a=a,
        b=b,
        speed_mse_improvement=_improvement(a.mse_speed, b.mse_speed),
        lambda_mse_improvement=_improvement(a.mse_lambda, b.mse_lambda),
        torque_std_change=_improvement(a.torque_std, b.torque_std),
        energy_gain=a.energy_efficiency - b.energy_efficiency,
    )


def compare(scenario_a: Scenario, scenario_b: Scenario):
    """Run two scenarios that differ only in the controller and compare them.

    Returns ``(comparison, (record_a, record_b))``.
    """
    if scenario_a.environment() != scenario_b.environment():
        raise ComparisonError("scenarios differ in plant, wind, disturbance or horizon")
    wind = scenario_a.wind_profile()
    rec_a, met_a = run(scenario_a, wind)
    rec_b, met_b = run(scenario_b, wind)
    return compare_metrics(met_a, met_b), (rec_a, rec_b)

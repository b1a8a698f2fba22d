"""Flat ``section.key = value`` scenario files.

Blank lines and ``#`` comments are ignored. Every key must be known; missing
keys take the library defaults. Optional numbers accept ``none``.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .afdo import AfdoConfig, FuzzyBasisConfig
from .control import PidConfig, SmcConfig
from .errors import ConfigError
from .plant import TurbineParams
from .sim import Disturbance, Scenario, WindSpec


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    return None if text.strip().lower() in ("none", "") else float(text)


def _floats(text):
    return tuple(float(x) for x in text.split(","))


def _str(text):
    return text.strip()


def _opt_str(text):
    text = text.strip()
    return text or None


KEYS = {
    "plant.rho": float,
    "plant.radius": float,
    "plant.j_total": float,
    "plant.b_total": float,
    "plant.lambda_opt": float,
    "plant.cp_opt": float,
    "plant.mu": _floats,
    "plant.mu_x": float,
    "plant.omega_floor": float,
    "wind.mean": float,
    "wind.turbulence_intensity": float,
    "wind.path": _opt_str,
    "controller.type": _str,
    "smc.k_p": float,
    "smc.k_i": float,
    "smc.k1": float,
    "smc.k2": float,
    "smc.tanh_width": float,
    "smc.torque_limit": _opt_float,
    "smc.tau_f": float,
    "pid.kp": float,
    "pid.ki": float,
    "pid.kd": float,
    "pid.derivative_filter_tau": float,
    "pid.torque_limit": _opt_float,
    "afdo.m": int,
    "afdo.omega_min": float,
    "afdo.omega_max": float,
    "afdo.omega_dot_min": float,
    "afdo.omega_dot_max": float,
    "afdo.sigma": float,
    "afdo.gamma_bar": float,
    "afdo.epsilon_bound": float,
    "afdo.freeze_theta": _bool,
    "afdo.theta_limit": float,
    "disturbance.kind": _str,
    "disturbance.d0": float,
    "disturbance.t_on": float,
    "disturbance.amplitude": float,
    "disturbance.period": float,
    "sim.t_end": float,
    "sim.dt": float,
    "sim.omega0": float,
    "sim.seed": int,
    "sim.integrator": _str,
}


def parse_lines(lines, source="<config>"):
    """Parse ``key = value`` lines into a dict of raw strings."""
    raw = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in text.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        raw[key] = value
    return raw


def parse_overrides(items):
    """``["smc.k2=12", ...]`` -> ``{"smc.k2": "12"}``."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"override names unknown key '{key}'")
        out[key] = value
    return out


def _convert(raw):
    values = {}
    for key, text in raw.items():
        try:
            values[key] = KEYS[key](text)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {text!r} ({exc})") from None
    return values


def _section(values, prefix):
    n = len(prefix) + 1
    return {k[n:]: v for k, v in values.items() if k.startswith(prefix + ".")}


def build_scenario(raw, base_dir=None) -> Scenario:
    """Validate a dict of raw ``key -> text`` entries and build a Scenario."""
    values = _convert(raw)
    plant = _section(values, "plant")
    wind = _section(values, "wind")
    if wind.get("path") and base_dir is not None and not Path(wind["path"]).is_absolute():
        wind["path"] = str(Path(base_dir) / wind["path"])
    a = _section(values, "afdo")
    basis = FuzzyBasisConfig.uniform(
        m=a.pop("m", 5),
        omega_range=(a.pop("omega_min", 0.0), a.pop("omega_max", 80.0)),
        omega_dot_range=(a.pop("omega_dot_min", -20.0), a.pop("omega_dot_max", 20.0)),
    )
    sim = _section(values, "sim")
    return Scenario(
        params=TurbineParams(**plant),
        wind=WindSpec(**wind),
        controller=values.get("controller.type", "smc_afdo"),
        smc=SmcConfig(**_section(values, "smc")),
        pid=PidConfig(**_section(values, "pid")),
        afdo=AfdoConfig(basis=basis, **a),
        disturbance=Disturbance(**_section(values, "disturbance")),
        **sim,
    )


def shipped_scenarios():
    root = resources.files("windsmc") / "scenarios"
    return sorted(p.name[: -len(".scenario")] for p in root.iterdir() if p.name.endswith(".scenario"))


def resolve_scenario_path(name):
    """A filesystem path, or the name of a scenario shipped with the package."""
    path = Path(name)
    if path.is_file():
        return path
    stem = name[: -len(".scenario")] if name.endswith(".scenario") else name
    shipped = resources.files("windsmc") / "scenarios" / f"{stem}.scenario"
    if shipped.is_file():
        return Path(str(shipped))
    raise ConfigError(f"scenario file not found: {name}")


def parse_scenario(path, overrides=None, seed=None) -> Scenario:
    """Load a scenario file, apply ``key=value`` overrides and an optional seed."""
    path = resolve_scenario_path(str(path))
    raw = parse_lines(path.read_text(encoding="utf-8").splitlines(), source=str(path))
    if isinstance(overrides, dict):
        for key in overrides:
            if key not in KEYS:
                raise ConfigError(f"override names unknown key '{key}'")
        raw.update({k: str(v) for k, v in overrides.items()})
    else:
        raw.update(parse_overrides(overrides))
    if seed is not None:
        raw["sim.seed"] = str(seed)
    return build_scenario(raw, base_dir=path.parent)

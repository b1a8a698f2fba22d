"""Wind-speed time series: seeded synthetic profiles and CSV ingestion."""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, DomainError, IngestionError

MIN_WIND = 0.5

# Periods of the deterministic gust components (s); incommensurate on purpose.
GUST_PERIODS = (50.0, 23.0, 11.0)
GUST_AMPLITUDES = (1.0, 0.7, 0.5)
NOISE_TIME_CONSTANT = 1.0
NOISE_SHARE = 0.5


@dataclass(frozen=True, eq=False)
class WindProfile:
    """Time-indexed wind speed, read with zero-order hold.

    ``t`` and ``v`` are read-only float arrays.
    """

    t: np.ndarray
    v: np.ndarray
    mean_target: float
    seed: int | None = None
    kind: str = "synthetic"
    _times: list = field(init=False, repr=False)
    _speeds: list = field(init=False, repr=False)

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        v = np.array(self.v, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size == 0:
            raise DomainError("t and v must be equal-length non-empty 1-D sequences")
        if np.any(np.diff(t) <= 0):
            raise DomainError("sample times must be strictly increasing")
        if np.any(v <= 0):
            raise DomainError("wind speeds must be positive")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "_times", t.tolist())
        object.__setattr__(self, "_speeds", v.tolist())

    def __len__(self):
        return self.t.size

    def __eq__(self, other):
        if not isinstance(other, WindProfile):
            return NotImplemented
        return np.array_equal(self.t, other.t) and np.array_equal(self.v, other.v)

    def at(self, t):
        """Wind speed at time ``t`` (hold of the latest sample at or before ``t``)."""
        times = self._times
        if t < times[0] or t > times[-1]:
            raise DomainError(f"t={t} outside profile range [{times[0]}, {times[-1]}]")
        return self._speeds[bisect.bisect_right(times, t) - 1]

    def to_csv(self, path):
        """Write the ``t,v`` CSV format with shortest round-trip float text."""
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write("t,v\n")
            for ti, vi in zip(self._times, self._speeds):
                fh.write(f"{ti!r},{vi!r}\n")


def wind_at(profile: WindProfile, t):
    return profile.at(t)


def _gust_mixture(t, rng):
    phases = rng.uniform(0.0, 2.0 * math.pi, size=len(GUST_PERIODS))
    mix = np.zeros_like(t)
    for period, amp, ph in zip(GUST_PERIODS, GUST_AMPLITUDES, phases):
        mix += amp * np.sin(2.0 * math.pi * t / period + ph)
    return mix


def _filtered_noise(n, dt, rng):
    # Two cascaded first-order lags so the wind derivative stays finite.
    burn = int(math.ceil(5 * NOISE_TIME_CONSTANT / dt))
    white = rng.standard_normal(n + burn)
    a = dt / (NOISE_TIME_CONSTANT + dt)
    x = lfilter([a], [1.0, a - 1.0], white)
    x = lfilter([a], [1.0, a - 1.0], x)
    return x[burn:]


def _unit(x):
    x = x - x.mean()
    sd = x.std()
    return x / sd if sd > 0 else x


def generate_wind(mean, turbulence_intensity, duration, dt, seed) -> WindProfile:
    """Seeded synthetic profile with the requested mean and turbulence intensity.

    The fluctuation is a mixture of three sinusoidal gusts and low-pass
    filtered noise, normalised so that ``std(v) / mean == turbulence_intensity``
    before clamping to ``MIN_WIND``.
    """
    if not mean > 0:
        raise ConfigError("wind.mean must be > 0")
    if not 0 <= turbulence_intensity < 0.5:
        raise ConfigError("wind.turbulence_intensity must lie in [0, 0.5)")
    if not dt > 0:
        raise ConfigError("dt must be > 0")
    if not duration >= dt:
        raise ConfigError("duration must be >= dt")

    n = int(math.floor(duration / dt + 1e-9)) + 1
    t = np.arange(n) * dt
    if turbulence_intensity == 0:
        v = np.full(n, float(mean))
    else:
        rng = np.random.default_rng(seed)
        gusts = _unit(_gust_mixture(t, rng))
        noise = _unit(_filtered_noise(n, dt, rng))
        fluct = _unit(math.sqrt(1 - NOISE_SHARE) * gusts + math.sqrt(NOISE_SHARE) * noise)
        v = mean + turbulence_intensity * mean * fluct
        v = np.maximum(v, MIN_WIND)
    return WindProfile(t=t, v=v, mean_target=float(mean), seed=seed, kind="synthetic")


def constant_wind(speed, duration, dt) -> WindProfile:
    return generate_wind(speed, 0.0, duration, dt, seed=0)


def load_wind(path) -> WindProfile:
    """Read a ``t,v`` CSV file; errors name the offending line number."""
    path = Path(path)
    ts, vs = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "v"]:
            raise IngestionError(f"{path}: expected header 't,v', got {header}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise IngestionError(f"{path}: row {line}: expected 2 columns, got {len(row)}")
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                raise IngestionError(f"{path}: row {line}: non-numeric value {row}") from None
            if not (math.isfinite(t) and math.isfinite(v)):
                raise IngestionError(f"{path}: row {line}: non-finite value")
            if v <= 0:
                raise IngestionError(f"{path}: row {line}: wind speed must be positive, got {v}")
            if ts and t <= ts[-1]:
                raise IngestionError(f"{path}: row {line}: time {t} not increasing")
            ts.append(t)
            vs.append(v)
    if not ts:
        raise IngestionError(f"{path}: no samples")
    return WindProfile(t=np.array(ts), v=np.array(vs), mean_target=float(np.mean(vs)), kind="ingested")

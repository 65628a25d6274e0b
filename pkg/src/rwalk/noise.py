"""Reference stochastic processes and the Cauchy law.

White noise is iid innovations; Brownian noise (a random walk) starts at 0
and adds the previous innovation at every step, so the walk drawn from
stream ``k`` is the running sum of the white trace drawn from stream ``k``.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .ingest import TimeSeries

EPOCH = dt.date(2000, 1, 1)


@dataclass(frozen=True)
class NoiseSpec:
    kind: str  # white | brownian | cauchy
    n: int
    seed: int = 0
    stream: int = 0
    innovation: str = "gaussian"  # gaussian | uniform
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("white", "brownian", "cauchy"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.innovation not in ("gaussian", "uniform"):
            raise ValueError(f"unknown innovation {self.innovation!r}")
        if self.n < 2:
            raise ValueError("noise traces need n >= 2")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def innovations(spec: NoiseSpec, count: int | None = None) -> np.ndarray:
    """The first ``count`` innovations of this trace's stream (default ``n``)."""
    count = spec.n if count is None else count
    state = rng.seed(spec.seed, spec.stream)
    if spec.innovation == "gaussian":
        g = rng.normal_array(state, count)
    else:
        g = rng.uniform_ab_array(state, -1.0, 1.0, count)
    return g * spec.sigma if spec.sigma != 1.0 else g


def white_noise(spec: NoiseSpec) -> TimeSeries:
    return TimeSeries(f"white_s{spec.stream}", EPOCH, innovations(spec))


def brownian_noise(spec: NoiseSpec) -> TimeSeries:
    g = innovations(spec)
    b = np.empty(spec.n)
    b[0] = 0.0
    b[1:] = np.cumsum(g[:-1])
    return TimeSeries(f"brownian_s{spec.stream}", EPOCH, b)


def cauchy_noise(spec: NoiseSpec) -> TimeSeries:
    state = rng.seed(spec.seed, spec.stream)
    return TimeSeries(f"cauchy_s{spec.stream}", EPOCH, rng.cauchy_array(state, 0.0, spec.sigma, spec.n))


def generate(spec: NoiseSpec) -> TimeSeries:
    if spec.kind == "white":
        return white_noise(spec)
    if spec.kind == "brownian":
        return brownian_noise(spec)
    return cauchy_noise(spec)


def _check_scale(lam: float) -> None:
    if not lam > 0:
        raise ValueError(f"Cauchy scale must be positive, got {lam}")


def cauchy_pdf(x, mu: float = 0.0, lam: float = 1.0):
    _check_scale(lam)
    x = np.asarray(x, dtype=np.float64)
    return (1.0 / math.pi) * lam / (lam * lam + (x - mu) ** 2)


def cauchy_cdf(x, mu: float = 0.0, lam: float = 1.0):
    _check_scale(lam)
    x = np.asarray(x, dtype=np.float64)
    return np.arctan((x - mu) / lam) / math.pi + 0.5


def cauchy_quantile(p, mu: float = 0.0, lam: float = 1.0):
    _check_scale(lam)
    p = np.asarray(p, dtype=np.float64)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("quantile probabilities must lie in (0, 1)")
    return mu + lam * np.tan(math.pi * (p - 0.5))


def cauchy_ci_span(lam: float = 1.0, level: float = 0.95) -> float:
    """Width of the central ``level`` interval, about 25.412 lambda at 95 %."""
    q = (1.0 + level) / 2.0
    return float(2.0 * lam * math.tan(math.pi * (q - 0.5)))

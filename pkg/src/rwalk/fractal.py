"""Waveform-length fractal dimension, Monte Carlo calibration and V-P comparison.

A waveform of ``N`` samples is embedded in the unit square, its polyline
length ``L`` measured, and

    D_s = 1 + (ln L - ln 2) / ln(2 N'),    N' = N - 1.

``D_s`` only approaches the Hausdorff-Besicovitch dimension as ``N' -> inf``,
so estimates are compared against noise ensembles simulated at the same
``N``. Differences are judged with the Vysochanskij-Petunin inequality,
which needs only unimodality and a finite variance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import noise

SQRT_8_3 = math.sqrt(8.0 / 3.0)
EPSILON_THRESHOLD = 1.0 / 6.0


class NoDispersionError(ValueError):
    """Two dimensions differ but carry no variance to judge the difference."""


@dataclass(frozen=True)
class UnitSquareCurve:
    xstar: np.ndarray
    ystar: np.ndarray
    segments: np.ndarray
    degenerate: bool = False

    @property
    def n(self) -> int:
        return self.xstar.size

    @property
    def length(self) -> float:
        return float(self.segments.sum())


@dataclass(frozen=True)
class FractalEstimate:
    d_s: float
    var_ds: float
    n: int
    length: float
    degenerate: bool = False

    @property
    def n_prime(self) -> int:
        return self.n - 1

    @property
    def sd(self) -> float:
        return math.sqrt(self.var_ds)

    # shared surface with CalibrationEnsemble for compare_ds
    @property
    def mean(self) -> float:
        return self.d_s

    @property
    def variance(self) -> float:
        return self.var_ds

    def to_dict(self) -> dict:
        return {
            "d_s": self.d_s,
            "var_ds": self.var_ds,
            "sd": self.sd,
            "n": self.n,
            "length": self.length,
            "degenerate": self.degenerate,
        }


def embed_unit_square(y) -> UnitSquareCurve:
    """Map samples ``y[0..N-1]`` onto the unit square.

    The abscissa is the sample index divided by its maximum, ``N - 1``; the
    ordinate is min-max scaled. A constant series has no ordinate range and
    is returned flat with ``degenerate=True``.
    """
    y = np.asarray(getattr(y, "values", y), dtype=np.float64)
    n = y.size
    if n < 2:
        raise ValueError("need at least 2 points to embed a curve")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains missing or non-finite values")
    xstar = np.arange(n, dtype=np.float64) / (n - 1)
    lo, hi = y.min(), y.max()
    degenerate = not hi > lo
    ystar = np.zeros(n) if degenerate else (y - lo) / (hi - lo)
    segments = np.hypot(np.diff(xstar), np.diff(ystar))
    return UnitSquareCurve(xstar, ystar, segments, degenerate)


def waveform_dimension(curve: UnitSquareCurve) -> FractalEstimate:
    """D_s and its within-trace variance from the segment-length spread."""
    n = curve.n
    seg = curve.segments
    L = float(seg.sum())
    if curve.degenerate:
        return FractalEstimate(1.0, 0.0, n, L, degenerate=True)
    n_prime = n - 1
    log2n = math.log(2.0 * n_prime)
    d_s = 1.0 + (math.log(L) - math.log(2.0)) / log2n
    if n >= 3:
        spread = float(np.sum((seg - seg.mean()) ** 2)) / n_prime
        var = n_prime / (L * L * log2n * log2n) * spread
    else:
        var = 0.0
    return FractalEstimate(d_s, var, n, L)


def estimate(y) -> FractalEstimate:
    """Shorthand for ``waveform_dimension(embed_unit_square(y))``."""
    return waveform_dimension(embed_unit_square(y))


@dataclass(frozen=True)
class CalibrationEnsemble:
    """D_s statistics of ``M`` simulated reference traces of length ``N``."""

    kind: str
    m: int
    n: int
    seed: int
    stream_base: int
    d_s: np.ndarray
    var_ds: np.ndarray
    innovation: str = "gaussian"
    mean_ds: float = field(init=False)
    var_between: float = field(init=False)
    var_within: float = field(init=False)
    var_total: float = field(init=False)

    def __post_init__(self):
        d = np.asarray(self.d_s, dtype=np.float64)
        v = np.asarray(self.var_ds, dtype=np.float64)
        m = d.size
        mean = float(np.sum(d) / m)
        between = float(np.sum((d - mean) ** 2) / (m - 1))
        within = float(np.sum(v) / m)
        object.__setattr__(self, "d_s", d)
        object.__setattr__(self, "var_ds", v)
        object.__setattr__(self, "mean_ds", mean)
        object.__setattr__(self, "var_between", between)
        object.__setattr__(self, "var_within", within)
        object.__setattr__(self, "var_total", between + within)

    @property
    def mean(self) -> float:
        return self.mean_ds

    @property
    def variance(self) -> float:
        return self.var_total

    @property
    def sd_total(self) -> float:
        return math.sqrt(self.var_total)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "innovation": self.innovation,
            "m": self.m,
            "n": self.n,
            "seed": self.seed,
            "stream_base": self.stream_base,
            "mean_ds": self.mean_ds,
            "var_between": self.var_between,
            "var_within": self.var_within,
            "var_total": self.var_total,
            "d_s": [float(x) for x in self.d_s],
            "var_ds": [float(x) for x in self.var_ds],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationEnsemble":
        return cls(
            kind=d["kind"],
            m=int(d["m"]),
            n=int(d["n"]),
            seed=int(d["seed"]),
            stream_base=int(d.get("stream_base", 0)),
            d_s=np.asarray(d["d_s"], dtype=np.float64),
            var_ds=np.asarray(d["var_ds"], dtype=np.float64),
            innovation=d.get("innovation", "gaussian"),
        )


def calibrate(
    kind: str,
    m: int,
    n: int,
    seed: int,
    stream_base: int = 0,
    innovation: str = "gaussian",
    workers: int = 1,
    streams: list[int] | None = None,
) -> CalibrationEnsemble:
    """Simulate ``m`` reference traces and summarise their D_s.

    Trace ``k`` always uses stream ``stream_base + k``, so the result does not
    depend on ``workers``. ``streams`` overrides the stream list outright,
    repeats allowed.
    """
    if m < 2:
        raise ValueError("calibration needs at least 2 traces")
    if n < 3:
        raise ValueError("calibration needs at least 3 points per trace")
    if streams is None:
        streams = [stream_base + k for k in range(m)]
    elif len(streams) != m:
        raise ValueError("streams must list exactly m stream ids")

    def one(stream: int) -> FractalEstimate:
        spec = noise.NoiseSpec(kind=kind, n=n, seed=seed, stream=stream, innovation=innovation)
        return estimate(noise.generate(spec).values)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ests = list(pool.map(one, streams))
    else:
        ests = [one(s) for s in streams]
    return CalibrationEnsemble(
        kind=kind,
        m=m,
        n=n,
        seed=seed,
        stream_base=stream_base,
        d_s=np.array([e.d_s for e in ests]),
        var_ds=np.array([e.var_ds for e in ests]),
        innovation=innovation,
    )


def critical_lambda(alpha: float = 0.05) -> float:
    """One-tailed V-P threshold: sqrt(2 / (9 alpha)), sqrt(40/9) at 0.05."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return math.sqrt(2.0 / (9.0 * alpha))


@dataclass(frozen=True)
class SignificanceResult:
    """Outcome of a V-P comparison of two D_s means.

    ``epsilon`` is ``4 / (9 lambda^2)`` and is only a probability bound when
    ``lambda > sqrt(8/3)``; at or below that the comparison is ``bounded``
    and all that can be said is ``1/6 <= P <= 1``. ``raw_epsilon`` is kept
    for reporting either way.
    """

    delta: float
    s_delta: float
    lam: float
    alpha: float
    lam_star: float

    @property
    def bounded(self) -> bool:
        return self.lam <= SQRT_8_3

    @property
    def raw_epsilon(self) -> float:
        return math.inf if self.lam == 0 else 4.0 / (9.0 * self.lam**2)

    @property
    def epsilon(self) -> float | None:
        return None if self.bounded else self.raw_epsilon

    @property
    def significant(self) -> bool:
        return not self.bounded and self.lam >= self.lam_star

    @property
    def verdict(self) -> str:
        if self.bounded:
            return "bounded"
        return "significant" if self.significant else "not significant"

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "s_delta": self.s_delta,
            "lambda": self.lam,
            "alpha": self.alpha,
            "lambda_star": self.lam_star,
            "epsilon": self.epsilon,
            "raw_epsilon": None if math.isinf(self.raw_epsilon) else self.raw_epsilon,
            "verdict": self.verdict,
            "p_bounds": [EPSILON_THRESHOLD, 1.0] if self.bounded else None,
        }


def significance(delta: float, s_delta: float, alpha: float = 0.05) -> SignificanceResult:
    """V-P verdict for a difference ``delta`` with standard error ``s_delta``."""
    delta = abs(delta)
    if s_delta == 0:
        if delta > 0:
            raise NoDispersionError("no dispersion: D_s values differ with zero variance")
        lam = 0.0
    else:
        lam = delta / s_delta
    return SignificanceResult(delta, s_delta, lam, alpha, critical_lambda(alpha))


def compare_ds(a, b, alpha: float = 0.05) -> SignificanceResult:
    """Compare two estimates or ensembles (anything with ``mean``/``variance``)."""
    delta = abs(a.mean - b.mean)
    s_delta = math.sqrt(a.variance + b.variance)
    return significance(delta, s_delta, alpha)

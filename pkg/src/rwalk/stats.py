"""Nonparametric statistics battery.

Runs about the median, Hodges-Lehmann location, empirical CDF, two-sample
Smirnov, Jarque-Bera and its robust Gel-Gastwirth variant, Theil slope
regression and Spearman correlation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.stats import rankdata


class DegenerateDataError(ValueError):
    """The sample has no spread for the statistic being asked for."""


def _as_array(x) -> np.ndarray:
    a = np.asarray(getattr(x, "values", x), dtype=np.float64)
    if a.ndim != 1:
        raise ValueError("expected a one-dimensional sample")
    return a


def _norm_cdf(z):
    return special.ndtr(z)


# -- runs about the median -------------------------------------------------


@dataclass(frozen=True)
class RunsResult:
    """Runs above/below the median.

    ``p_rrd`` is the probability of observing exactly ``n_runs`` runs under
    random ordering, ``p_tail`` the one-sided tail in the direction of
    ``alternative`` (too few runs by default).
    """

    n_used: int
    n_above: int
    n_below: int
    n_runs: int
    median: float
    expected_runs: float
    p_rrd: float
    p_tail: float
    exact: bool
    alternative: str = "clustered"

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@lru_cache(maxsize=4096)
def _runs_pmf_table(n1: int, n2: int) -> tuple[float, ...]:
    """Exact Wald-Wolfowitz probabilities P(R = r), r = 0 .. n1 + n2."""
    total = math.comb(n1 + n2, n1)
    out = [0.0] * (n1 + n2 + 1)
    for r in range(2, n1 + n2 + 1):
        if r % 2 == 0:
            k = r // 2
            ways = 2 * math.comb(n1 - 1, k - 1) * math.comb(n2 - 1, k - 1)
        else:
            k = (r - 1) // 2
            ways = math.comb(n1 - 1, k - 1) * math.comb(n2 - 1, k) + math.comb(
                n1 - 1, k
            ) * math.comb(n2 - 1, k - 1)
        out[r] = ways / total
    return tuple(out)


def runs_probabilities(
    n_runs: int, n1: int, n2: int, exact: bool = True, alternative: str = "clustered"
) -> tuple[float, float]:
    """(P(R = n_runs), one-sided tail) for group sizes ``n1``, ``n2``.

    ``alternative="clustered"`` gives P(R <= n_runs), ``"alternating"``
    P(R >= n_runs). The normal approximation uses a half-run continuity
    correction.
    """
    if n1 < 1 or n2 < 1:
        # one-sided samples always form a single run
        return 1.0, 1.0
    if exact:
        pmf = _runs_pmf_table(n1, n2)
        point = pmf[n_runs] if 0 <= n_runs < len(pmf) else 0.0
        if alternative == "clustered":
            tail = math.fsum(pmf[: n_runs + 1])
        else:
            tail = math.fsum(pmf[n_runs:])
        return point, min(tail, 1.0)
    n = n1 + n2
    mu = 2.0 * n1 * n2 / n + 1.0
    var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0))
    sd = math.sqrt(var)
    point = float(_norm_cdf((n_runs + 0.5 - mu) / sd) - _norm_cdf((n_runs - 0.5 - mu) / sd))
    if alternative == "clustered":
        tail = float(_norm_cdf((n_runs + 0.5 - mu) / sd))
    else:
        tail = float(1.0 - _norm_cdf((n_runs - 0.5 - mu) / sd))
    return point, tail


def runs_test(series, exact_max: int = 60, alternative: str = "clustered") -> RunsResult:
    """Wald-Wolfowitz runs above and below the sample median.

    Points equal to the median are dropped before counting. Exact
    probabilities are used up to ``exact_max`` retained points.
    """
    if alternative not in ("clustered", "alternating"):
        raise ValueError(f"unknown alternative {alternative!r}")
    x = _as_array(series)
    med = float(np.median(x))
    keep = x[x != med]
    if keep.size == 0:
        raise DegenerateDataError("degenerate: no off-median points")
    above = keep > med
    n1 = int(above.sum())
    n2 = int(keep.size - n1)
    n_runs = 1 + int(np.count_nonzero(above[1:] != above[:-1]))
    n = n1 + n2
    expected = 2.0 * n1 * n2 / n + 1.0
    exact = n <= exact_max
    point, tail = runs_probabilities(n_runs, n1, n2, exact, alternative)
    return RunsResult(n, n1, n2, n_runs, med, expected, point, tail, exact, alternative)


# -- Hodges-Lehmann location ------------------------------------------------


@dataclass(frozen=True)
class LocationEstimate:
    median: float
    ci_low: float
    ci_high: float
    n: int
    level: float = 0.95

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@lru_cache(maxsize=64)
def _signed_rank_cdf(n: int) -> np.ndarray:
    """Exact null CDF of the Wilcoxon signed-rank statistic T+ for size n."""
    top = n * (n + 1) // 2
    counts = np.zeros(top + 1, dtype=object)
    counts[0] = 1
    for k in range(1, n + 1):
        shifted = np.zeros_like(counts)
        shifted[k:] = counts[:-k]
        counts = counts + shifted
    total = 2**n
    cum = np.cumsum(counts)
    return np.array([c / total for c in cum], dtype=np.float64)


def _walsh_averages(x: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(x.size)
    return (x[i] + x[j]) / 2.0


def signed_rank_k(n: int, level: float = 0.95, exact_max: int = 50) -> int:
    """1-based rank of the lower CI bound among the sorted Walsh averages."""
    alpha = 1.0 - level
    m = n * (n + 1) // 2
    if n <= exact_max:
        cdf = _signed_rank_cdf(n)
        # largest k with P(T+ <= k - 1) <= alpha / 2
        k = int(np.searchsorted(cdf, alpha / 2.0 + 1e-12, side="right"))
    else:
        z = special.ndtri(1.0 - alpha / 2.0)
        sd = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0)
        k = int(math.floor(m / 2.0 - z * sd + 0.5))
    return min(max(k, 1), m)


def hl_location(series, level: float = 0.95, exact_max: int = 50) -> LocationEstimate:
    """Hodges-Lehmann median with its distribution-free confidence interval.

    The point estimate is the median of all ``n (n + 1) / 2`` Walsh averages;
    the CI bounds are Walsh averages picked at signed-rank critical ranks.
    """
    x = _as_array(series)
    x = x[np.isfinite(x)]
    n = x.size
    if n < 3:
        raise ValueError("hl_location needs at least 3 points")
    w = np.sort(_walsh_averages(x))
    m = w.size
    k = signed_rank_k(n, level, exact_max)
    est = float(np.median(w))
    lo, hi = float(w[k - 1]), float(w[m - k])
    return LocationEstimate(est, min(lo, est), max(hi, est), n, level)


# -- empirical CDF and Smirnov ------------------------------------------------


class EmpiricalCDF:
    """Right-continuous step function ``F(x) = #{x_i <= x} / n``."""

    def __init__(self, series):
        x = _as_array(series)
        if x.size < 1:
            raise ValueError("empirical_cdf needs at least one point")
        self.x = np.sort(x)
        self.n = x.size

    def __call__(self, t):
        return np.searchsorted(self.x, np.asarray(t, dtype=np.float64), side="right") / self.n

    def steps(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct support points and F at each of them."""
        u = np.unique(self.x)
        return u, self(u)


def empirical_cdf(series) -> EmpiricalCDF:
    return EmpiricalCDF(series)


@dataclass(frozen=True)
class SmirnovResult:
    d: float
    p: float
    n_a: int
    n_b: int

    def __iter__(self):
        return iter((self.d, self.p))

    def to_dict(self) -> dict:
        return {"d": self.d, "p": self.p, "n_a": self.n_a, "n_b": self.n_b}


def smirnov_test(a, b) -> SmirnovResult:
    """Two-sample Smirnov test with the asymptotic Kolmogorov P value.

    Both CDFs are evaluated on the pooled distinct support, so ties never
    produce a spurious gap.
    """
    fa, fb = EmpiricalCDF(a), EmpiricalCDF(b)
    support = np.unique(np.concatenate([fa.x, fb.x]))
    d = float(np.max(np.abs(fa(support) - fb(support))))
    ne = fa.n * fb.n / (fa.n + fb.n)
    p = 1.0 if d == 0 else float(special.kolmogorov(math.sqrt(ne) * d))
    return SmirnovResult(d, min(max(p, 0.0), 1.0), fa.n, fb.n)


# -- normality ---------------------------------------------------------------


@dataclass(frozen=True)
class NormalityResult:
    statistic: float
    p: float
    skewness: float
    kurtosis: float  # excess

    def __iter__(self):
        return iter((self.statistic, self.p))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _chi2_2_sf(x: float) -> float:
    return math.exp(-x / 2.0)


def jarque_bera(series) -> NormalityResult:
    """JB = n/6 (S^2 + K^2/4), P from chi-square with 2 degrees of freedom."""
    x = _as_array(series)
    n = x.size
    if n < 8:
        raise ValueError("jarque_bera needs at least 8 points")
    d = x - x.mean()
    m2 = float(np.mean(d**2))
    if m2 == 0:
        raise DegenerateDataError("jarque_bera: zero variance")
    s = float(np.mean(d**3)) / m2**1.5
    k = float(np.mean(d**4)) / m2**2 - 3.0
    jb = n / 6.0 * (s * s + k * k / 4.0)
    return NormalityResult(jb, _chi2_2_sf(jb), s, k)


def jarque_bera_gel(series) -> NormalityResult:
    """Robustified Jarque-Bera (Gel and Gastwirth, 2008).

    The standard deviation in both moment ratios is replaced by the average
    absolute deviation from the median, ``J = sqrt(pi/2) mean|x - median|``:

        RJB = n/6 (m3 / J^3)^2 + n/64 (m4 / J^4 - 3)^2

    with ``m3``, ``m4`` the central sample moments. P from chi-square(2).
    """
    x = _as_array(series)
    n = x.size
    if n < 8:
        raise ValueError("jarque_bera_gel needs at least 8 points")
    j = math.sqrt(math.pi / 2.0) * float(np.mean(np.abs(x - np.median(x))))
    if j == 0:
        raise DegenerateDataError("jarque_bera_gel: zero spread")
    d = x - x.mean()
    s = float(np.mean(d**3)) / j**3
    k = float(np.mean(d**4)) / j**4 - 3.0
    rjb = n / 6.0 * s * s + n / 64.0 * k * k
    return NormalityResult(rjb, _chi2_2_sf(rjb), s, k)


# -- rank correlation and Theil regression ----------------------------------


@dataclass(frozen=True)
class SpearmanResult:
    rho: float
    p: float
    n: int
    exact: bool

    def __iter__(self):
        return iter((self.rho, self.p))


_PERM_CACHE: dict[int, np.ndarray] = {}


def _all_permutations(n: int) -> np.ndarray:
    if n not in _PERM_CACHE:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.permutations(range(n))),
            dtype=np.int8,
            count=math.factorial(n) * n,
        )
        _PERM_CACHE[n] = flat.reshape(-1, n)
    return _PERM_CACHE[n]


def spearman(x, y, exact_max: int = 10) -> SpearmanResult:
    """Spearman rho on mid-ranks, two-sided P.

    Mid-ranks make the Pearson-on-ranks formula the tie-corrected
    coefficient. For ``n <= exact_max`` P comes from enumerating every
    permutation of the y ranks; above it from the t approximation.
    """
    x, y = _as_array(x), _as_array(y)
    if x.size != y.size:
        raise ValueError("spearman needs paired samples")
    n = x.size
    if n < 3:
        raise ValueError("spearman needs at least 3 pairs")
    rx, ry = rankdata(x), rankdata(y)
    dx, dy = rx - rx.mean(), ry - ry.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise DegenerateDataError("spearman: zero rank variance")
    rho = float(dx @ dy) / math.sqrt(sxx * syy)
    rho = max(-1.0, min(1.0, rho))
    if n <= exact_max:
        perms = _all_permutations(n)
        obs = abs(float(dx @ dy))
        cut = obs - 1e-9 * max(1.0, obs)
        hits = 0
        for i in range(0, len(perms), 200_000):
            hits += int(np.count_nonzero(np.abs(dy[perms[i : i + 200_000]] @ dx) >= cut))
        p = hits / len(perms)
        return SpearmanResult(rho, p, n, True)
    if abs(rho) >= 1.0:
        return SpearmanResult(rho, 0.0, n, False)
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = float(2.0 * special.stdtr(n - 2, -abs(t)))
    return SpearmanResult(rho, p, n, False)


@dataclass(frozen=True)
class TheilFit:
    alpha: float
    alpha_ci: tuple[float, float]
    beta: float
    beta_ci: tuple[float, float]
    rho_s: float
    p_rho: float
    n: int

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "alpha_ci": list(self.alpha_ci),
            "beta": self.beta,
            "beta_ci": list(self.beta_ci),
            "rho_s": self.rho_s,
            "p_rho": self.p_rho,
            "n": self.n,
        }


_FULL_PAIRS = 4_000_000


def _pair_slopes_block(x, y, i0, i1):
    """Slopes of pairs (i, j), i in [i0, i1), j > i, with x_i != x_j."""
    out = []
    for i in range(i0, i1):
        dx = x[i + 1 :] - x[i]
        dy = y[i + 1 :] - y[i]
        ok = dx != 0
        out.append(dy[ok] / dx[ok])
    return np.concatenate(out) if out else np.empty(0)


def _blocks(n: int, target: int = 1_000_000):
    i = 0
    while i < n - 1:
        j = i
        size = 0
        while j < n - 1 and size < target:
            size += n - 1 - j
            j += 1
        yield i, j
        i = j


def pairwise_slope_order_stats(x, y, ranks) -> tuple[int, list[float]]:
    """Selected order statistics (1-based ``ranks``) of all pairwise slopes.

    Returns the number of usable pairs and the requested values. Large inputs
    are handled in two streamed passes: count slopes per quantile bucket,
    then collect only the buckets holding the requested ranks.
    """
    x, y = _as_array(x), _as_array(y)
    n = x.size
    n_pairs_max = n * (n - 1) // 2
    if n_pairs_max <= _FULL_PAIRS:
        s = np.sort(_pair_slopes_block(x, y, 0, n - 1))
        return s.size, [float(s[r - 1]) for r in ranks]

    # bucket edges from a deterministic sample of pairs
    step = max(1, n // 200)
    sub = np.arange(0, n, step)
    sample = np.sort(_pair_slopes_block(x[sub], y[sub], 0, sub.size - 1))
    edges = np.unique(sample[np.linspace(0, sample.size - 1, 2001).astype(int)[1:-1]])
    counts = np.zeros(edges.size + 1, dtype=np.int64)
    for i0, i1 in _blocks(n):
        s = _pair_slopes_block(x, y, i0, i1)
        counts += np.bincount(np.searchsorted(edges, s, side="left"), minlength=edges.size + 1)
    total = int(counts.sum())
    cum = np.cumsum(counts)
    wanted = sorted({int(np.searchsorted(cum, r, side="left")) for r in ranks})
    kept = {b: [] for b in wanted}
    lo_edge = np.concatenate([[-np.inf], edges])
    hi_edge = np.concatenate([edges, [np.inf]])
    for i0, i1 in _blocks(n):
        s = _pair_slopes_block(x, y, i0, i1)
        for b in wanted:
            kept[b].append(s[(s > lo_edge[b]) & (s <= hi_edge[b])])
    values = []
    for r in ranks:
        b = int(np.searchsorted(cum, r, side="left"))
        before = int(cum[b - 1]) if b else 0
        bucket = np.sort(np.concatenate(kept[b]))
        values.append(float(bucket[r - before - 1]))
    return total, values


def count_slope_pairs(x) -> int:
    """Pairs with distinct abscissae, the ones that define a slope."""
    _, c = np.unique(_as_array(x), return_counts=True)
    n = int(c.sum())
    return n * (n - 1) // 2 - int(np.sum(c * (c - 1) // 2))


def theil_slope(x, y) -> float:
    n_pairs = count_slope_pairs(x)
    if n_pairs == 0:
        raise DegenerateDataError("theil: all x values are equal")
    mid = (n_pairs + 1) // 2
    ranks = [mid] if n_pairs % 2 else [mid, mid + 1]
    _, vals = pairwise_slope_order_stats(x, y, ranks)
    return float(np.mean(vals))


def theil_fit(x, y, level: float = 0.95) -> TheilFit:
    """Theil median-of-slopes line with rank-order confidence bounds.

    The slope CI uses the Kendall-statistic critical value
    ``C = z sqrt(n (n-1) (2n+5) / 18)`` and takes the pairwise slopes of
    rank ``(N - C) / 2`` and ``(N + C) / 2 + 1``. The intercept is the
    median of ``y - beta x``; its interval is the range of that median over
    the slope interval endpoints.
    """
    x, y = _as_array(x), _as_array(y)
    if x.size != y.size:
        raise ValueError("theil_fit needs paired samples")
    n = x.size
    if n < 3:
        raise ValueError("theil_fit needs at least 3 pairs")
    if np.all(x == x[0]):
        raise DegenerateDataError("theil: all x values are equal")
    n_pairs = count_slope_pairs(x)
    z = special.ndtri(0.5 + level / 2.0)
    c = z * math.sqrt(n * (n - 1) * (2 * n + 5) / 18.0)
    lo_r = int(min(max(round((n_pairs - c) / 2.0), 1), n_pairs))
    hi_r = int(min(max(round((n_pairs + c) / 2.0) + 1, 1), n_pairs))
    mid = (n_pairs + 1) // 2
    med_ranks = [mid] if n_pairs % 2 else [mid, mid + 1]
    _, vals = pairwise_slope_order_stats(x, y, med_ranks + [lo_r, hi_r])
    beta = float(np.mean(vals[: len(med_ranks)]))
    b_lo, b_hi = vals[-2], vals[-1]
    b_lo, b_hi = min(b_lo, beta), max(b_hi, beta)
    alpha = float(np.median(y - beta * x))
    a1 = float(np.median(y - b_lo * x))
    a2 = float(np.median(y - b_hi * x))
    a_lo, a_hi = min(a1, a2, alpha), max(a1, a2, alpha)
    try:
        sp = spearman(x, y)
        rho, p_rho = sp.rho, sp.p
    except DegenerateDataError:
        rho, p_rho = math.nan, math.nan  # constant y: the line is flat, rho undefined
    return TheilFit(alpha, (a_lo, a_hi), beta, (b_lo, b_hi), rho, p_rho, n)

"""Radix-2 FFT and spectral density.

Inputs are mean-removed, windowed, zero-padded to a power of two and
transformed with an iterative decimation-in-time Cooley-Tukey FFT. The
spectral density is the modulus ``sqrt(a^2 + b^2)`` of each positive
frequency bin; log-log slopes are fitted on power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stats import DegenerateDataError, theil_fit


def next_pow2(n: int) -> int:
    if n < 1:
        raise ValueError("length must be positive")
    return 1 << (n - 1).bit_length()


def window(kind: str, n: int) -> np.ndarray:
    """Symmetric raised-cosine window; both ends of hann are exactly 0."""
    if n < 2:
        raise ValueError("window needs n >= 2")
    k = np.arange(n)
    c = np.cos(2.0 * np.pi * k / (n - 1))
    if kind == "hann":
        w = 0.5 - 0.5 * c
        w[0] = w[-1] = 0.0
    elif kind == "hamming":
        w = 0.54 - 0.46 * c
        w[0] = w[-1] = 0.08
    else:
        raise ValueError(f"unknown window {kind!r}")
    return w


def apply_window(series, kind: str = "hann") -> np.ndarray:
    x = np.asarray(getattr(series, "values", series), dtype=np.float64)
    if x.size < 4:
        raise ValueError("apply_window needs at least 4 points")
    return (x - x.mean()) * window(kind, x.size)


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _fft_pow2(x: np.ndarray, inverse: bool = False) -> np.ndarray:
    n = x.size
    a = x[_bit_reverse_indices(n)].astype(np.complex128)
    sign = 1.0 if inverse else -1.0
    half = 1
    while half < n:
        tw = np.exp(sign * 1j * np.pi * np.arange(half) / half)
        a = a.reshape(-1, 2 * half)
        even = a[:, :half].copy()
        odd = a[:, half:] * tw
        a[:, :half] = even + odd
        a[:, half:] = even - odd
        a = a.reshape(-1)
        half *= 2
    return a


def fft(x, pad: bool = True) -> np.ndarray:
    """Forward transform ``X_k = sum_t x_t exp(-2 pi i k t / n)``.

    The input is zero-padded to the next power of two unless ``pad`` is
    False, in which case its length must already be one.
    """
    x = np.asarray(getattr(x, "values", x))
    if x.size == 0:
        raise ValueError("fft of an empty sequence")
    n = next_pow2(x.size)
    if n != x.size:
        if not pad:
            raise ValueError(f"length {x.size} is not a power of two")
        x = np.concatenate([x, np.zeros(n - x.size, dtype=x.dtype)])
    return _fft_pow2(x)


def ifft(X) -> np.ndarray:
    X = np.asarray(X)
    n = X.size
    if n != next_pow2(n):
        raise ValueError(f"length {n} is not a power of two")
    return _fft_pow2(X, inverse=True) / n


def dft_bruteforce(x) -> np.ndarray:
    """O(n^2) reference DFT."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


@dataclass(frozen=True)
class Spectrum:
    """Positive-frequency half of a transform.

    ``frequencies`` runs over bins 1 .. n_padded/2 in cycles per sampling
    interval divided by ``dt``; the DC term is kept separately.
    """

    frequencies: np.ndarray
    amplitude: np.ndarray
    power: np.ndarray
    dc: float
    n_padded: int
    window: str | None = None


def spectral_density(X, dt: float = 1.0, window_kind: str | None = None) -> Spectrum:
    X = np.asarray(X)
    n = X.size
    if n < 2:
        raise ValueError("need at least two bins")
    # a real input transforms to a conjugate-symmetric spectrum
    half = n // 2
    k = np.arange(1, half + 1)
    a, b = X[k].real, X[k].imag
    power = a * a + b * b
    return Spectrum(
        frequencies=k / (n * dt),
        amplitude=np.sqrt(power),
        power=power,
        dc=float(abs(X[0])),
        n_padded=n,
        window=window_kind,
    )


def spectrum(series, kind: str = "hann", dt: float = 1.0) -> Spectrum:
    """Window, pad, transform and reduce a real series to its spectrum."""
    return spectral_density(fft(apply_window(series, kind)), dt, kind)


def is_conjugate_symmetric(X, rtol: float = 1e-9) -> bool:
    X = np.asarray(X)
    mirror = np.conj(X[(-np.arange(X.size)) % X.size])
    scale = max(float(np.max(np.abs(X))), 1e-300)
    return bool(np.max(np.abs(X - mirror)) <= rtol * scale)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    ci: tuple[float, float]
    intercept: float
    n_bins: int
    f_max: float

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "ci": list(self.ci),
            "intercept": self.intercept,
            "n_bins": self.n_bins,
            "f_max": self.f_max,
        }


FIT_BAND = 0.25


def loglog_slope(spec: Spectrum, band: float = FIT_BAND, min_bins: int = 8) -> SlopeFit:
    """Theil slope of log10(power) against log10(f).

    Only bins with ``f <= band * f_nyquist`` are fitted: the upper bins carry
    the sampling artefact and, for a discrete walk, the bend of
    ``1 / sin^2(pi f)`` away from a pure power law. DC and Nyquist are never
    fitted.
    """
    f, p = spec.frequencies, spec.power
    if not np.any(p > 0):
        raise DegenerateDataError("flat input: the spectrum carries no power")
    keep = (f <= band * f[-1]) & (p > 0)
    keep[-1] = False
    if keep.sum() < min_bins:
        raise ValueError(f"only {int(keep.sum())} usable bins, need {min_bins}")
    lf, lp = np.log10(f[keep]), np.log10(p[keep])
    fit = theil_fit(lf, lp)
    return SlopeFit(fit.beta, fit.beta_ci, fit.alpha, int(keep.sum()), float(f[keep][-1]))


def peak_ratio(spec: Spectrum, fit: SlopeFit) -> float:
    """Largest ratio of bin power to the expected power over the fitted band.

    Periodogram ordinates scatter like exponential variables about the true
    spectrum, and a fit on log power tracks their median, which is ``ln 2``
    times the mean; the fitted line is rescaled accordingly.
    """
    f, p = spec.frequencies, spec.power
    keep = f <= fit.f_max
    expected = 10.0 ** (fit.intercept + fit.slope * np.log10(f[keep])) / math.log(2.0)
    return float(np.max(p[keep] / expected))


def peak_threshold(n_bins: int, p: float = 1e-3) -> float:
    """Ratio exceeded by the largest of ``n_bins`` exponential ordinates with probability ``p``."""
    return float(-math.log(-math.expm1(math.log1p(-p) / n_bins)))


def has_peak(spec: Spectrum, fit: SlopeFit, p: float = 1e-3) -> bool:
    """True when some bin stands out of the power law beyond chance level ``p``."""
    n_bins = int(np.count_nonzero(spec.frequencies <= fit.f_max))
    return peak_ratio(spec, fit) > peak_threshold(n_bins, p)

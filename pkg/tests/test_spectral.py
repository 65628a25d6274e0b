import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwalk import noise, spectral
from rwalk.noise import NoiseSpec


def test_next_pow2():
    assert [spectral.next_pow2(n) for n in (1, 2, 3, 1024, 1025, 1329)] == [1, 2, 4, 1024, 2048, 2048]


def test_windows_at_endpoints():
    x = np.arange(10.0) ** 2
    h = spectral.apply_window(x, "hann")
    assert h[0] == 0.0 and h[-1] == 0.0
    m = spectral.apply_window(x, "hamming")
    assert m[0] == pytest.approx(0.08 * (x[0] - x.mean()))
    assert m[-1] == pytest.approx(0.08 * (x[-1] - x.mean()))


def test_window_of_constant_is_zero():
    assert not spectral.apply_window(np.full(16, 7.0)).any()


def test_unknown_window():
    with pytest.raises(ValueError):
        spectral.apply_window(np.arange(8.0), "blackman")


def test_impulse_is_flat():
    assert np.allclose(spectral.fft([1.0, 0.0, 0.0, 0.0]), np.ones(4))


def test_padding():
    X = spectral.fft(np.ones(5))
    assert X.size == 8 and X[0] == pytest.approx(5.0)
    with pytest.raises(ValueError):
        spectral.fft(np.ones(5), pad=False)


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16, 32, 64])
def test_matches_bruteforce_dft(n):
    rs = np.random.default_rng(n)
    x = rs.normal(size=n) + 1j * rs.normal(size=n)
    X, ref = spectral.fft(x), spectral.dft_bruteforce(x)
    assert np.max(np.abs(X - ref)) <= 1e-9 * max(1.0, np.max(np.abs(ref)))


@pytest.mark.parametrize("n", [3, 17, 50, 64])
def test_parseval(n):
    x = np.random.default_rng(n).normal(size=n)
    X = spectral.fft(x)
    assert np.sum(np.abs(X) ** 2) / X.size == pytest.approx(np.sum(x**2), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(3, 12), seed=st.integers(0, 2**32 - 1))
def test_round_trip(k, seed):
    x = np.random.default_rng(seed).normal(size=2**k)
    back = spectral.ifft(spectral.fft(x))
    assert np.max(np.abs(back - x)) <= 1e-9 * max(1.0, np.max(np.abs(x)))


def test_real_input_conjugate_symmetric():
    X = spectral.fft(np.random.default_rng(0).normal(size=256))
    assert spectral.is_conjugate_symmetric(X)
    assert not spectral.is_conjugate_symmetric(spectral.fft(np.exp(1j * np.arange(8.0))))


def test_spectrum_layout():
    s = spectral.spectrum(np.random.default_rng(1).normal(size=1329))
    assert s.n_padded == 2048 and s.frequencies.size == 1024
    assert np.all(np.diff(s.frequencies) > 0)
    assert s.frequencies[-1] == 0.5
    assert np.allclose(s.amplitude, np.sqrt(s.power))


def sine(n=1024, period=128):
    return np.sin(2 * np.pi * np.arange(n) / period)


def test_sine_single_bin():
    s = spectral.spectrum(sine())
    k = int(np.argmax(s.amplitude))
    assert s.frequencies[k] == pytest.approx(1 / 128)
    assert s.amplitude[k] >= 100 * np.median(s.amplitude)


def test_sine_flagged_as_peak():
    x = sine(4096, 128) + np.random.default_rng(2).normal(size=4096)
    s = spectral.spectrum(x)
    fit = spectral.loglog_slope(s, band=1.0)
    assert spectral.has_peak(s, fit)


def test_exact_power_law():
    f = np.arange(1, 513) / 1024
    p = f**-2.0
    s = spectral.Spectrum(f, np.sqrt(p), p, 0.0, 1024)
    assert spectral.loglog_slope(s).slope == pytest.approx(-2.0, abs=1e-6)


def test_too_few_bins():
    s = spectral.spectrum(np.random.default_rng(3).normal(size=16))
    with pytest.raises(ValueError):
        spectral.loglog_slope(s)


def test_peak_threshold():
    t = spectral.peak_threshold(2048, 1e-3)
    # P(max of 2048 unit exponentials > t) = 1e-3
    assert 1 - (1 - np.exp(-t)) ** 2048 == pytest.approx(1e-3, rel=1e-9)


@pytest.mark.parametrize("stream", range(5))
def test_white_and_brownian_slopes(stream):
    w = noise.generate(NoiseSpec("white", 10**4, 7, stream)).values
    b = noise.generate(NoiseSpec("brownian", 10**4, 7, stream)).values
    assert -0.15 <= spectral.loglog_slope(spectral.spectrum(w)).slope <= 0.15
    assert -2.3 <= spectral.loglog_slope(spectral.spectrum(b)).slope <= -1.7


@pytest.mark.parametrize("stream", range(20))
def test_brownian_has_no_peak(stream):
    b = noise.generate(NoiseSpec("brownian", 10**4, 3, stream)).values
    s = spectral.spectrum(b)
    assert not spectral.has_peak(s, spectral.loglog_slope(s))


def test_hamming_window_slopes():
    b = noise.generate(NoiseSpec("brownian", 10**4, 1, 0)).values
    assert -2.3 <= spectral.loglog_slope(spectral.spectrum(b, "hamming")).slope <= -1.7

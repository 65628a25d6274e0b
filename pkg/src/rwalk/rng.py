"""Deterministic random-number substrate.

MT19937 (2002 initialization) as the uniform source, with Box-Muller
normal deviates, rectangular and Cauchy variates layered on top.

Every generator is addressed by ``(master seed, stream id)``. Stream 0 with a
32-bit master seed is the textbook ``init_genrand(master)`` generator, so the
reference test vectors apply directly; other streams go through a splitmix64
mix into ``init_by_array``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

N = 624
M = 397
MATRIX_A = 0x9908B0DF
UPPER_MASK = 0x80000000
LOWER_MASK = 0x7FFFFFFF
MASK32 = 0xFFFFFFFF
MASK64 = 0xFFFFFFFFFFFFFFFF


def splitmix64(x: int) -> int:
    """One splitmix64 output step for the 64-bit input ``x``."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _init_genrand(s: int) -> list[int]:
    mt = [0] * N
    mt[0] = s & MASK32
    for i in range(1, N):
        prev = mt[i - 1]
        mt[i] = (1812433253 * (prev ^ (prev >> 30)) + i) & MASK32
    return mt


def _init_by_array(key: list[int]) -> list[int]:
    mt = _init_genrand(19650218)
    i, j = 1, 0
    klen = len(key)
    for _ in range(max(N, klen)):
        prev = mt[i - 1]
        mt[i] = ((mt[i] ^ ((prev ^ (prev >> 30)) * 1664525)) + key[j] + j) & MASK32
        i += 1
        j += 1
        if i >= N:
            mt[0] = mt[N - 1]
            i = 1
        if j >= klen:
            j = 0
    for _ in range(N - 1):
        prev = mt[i - 1]
        mt[i] = ((mt[i] ^ ((prev ^ (prev >> 30)) * 1566083941)) - i) & MASK32
        i += 1
        if i >= N:
            mt[0] = mt[N - 1]
            i = 1
    mt[0] = 0x80000000
    return mt


def _twist(mt: np.ndarray) -> np.ndarray:
    """Regenerate the 624-word block.

    The recurrence reads ``mt[i + M]``, which for i >= 227 is a word already
    rewritten in this pass, so the block is updated in three vector slices.
    """
    old = mt
    new = np.empty_like(old)
    mag = np.array([0, MATRIX_A], dtype=np.uint32)

    def step(lo: int, hi: int, far: np.ndarray) -> None:
        y = (old[lo:hi] & UPPER_MASK) | (old[lo + 1 : hi + 1] & LOWER_MASK)
        new[lo:hi] = far ^ (y >> 1) ^ mag[y & 1]

    k = N - M  # 227
    step(0, k, old[M:N])
    step(k, 2 * k, new[0:k])
    step(2 * k, N - 1, new[k : N - 1 - k])
    y = (old[N - 1] & UPPER_MASK) | (new[0] & LOWER_MASK)
    new[N - 1] = new[M - 1] ^ (y >> 1) ^ mag[y & 1]
    return new


def _temper(y: np.ndarray) -> np.ndarray:
    y = y ^ (y >> 11)
    y = y ^ ((y << 7) & 0x9D2C5680)
    y = y ^ ((y << 15) & 0xEFC60000)
    return y ^ (y >> 18)


@dataclass
class GeneratorState:
    """Single-owner MT19937 state tied to a ``(master, stream)`` seed record.

    Not thread-safe; give each worker its own stream.
    """

    mt: np.ndarray
    index: int = N
    master: int = 0
    stream: int = 0
    _out: np.ndarray = field(default=None, repr=False)  # tempered current block
    draws: int = 0  # 32-bit words consumed

    def _refill(self) -> None:
        self.mt = _twist(self.mt)
        self._out = _temper(self.mt)
        self.index = 0

    def next_u32(self) -> int:
        if self.index >= N:
            self._refill()
        v = int(self._out[self.index])
        self.index += 1
        self.draws += 1
        return v

    def u32_array(self, n: int) -> np.ndarray:
        """The next ``n`` 32-bit outputs, identical to ``n`` calls of next_u32."""
        out = np.empty(n, dtype=np.uint32)
        pos = 0
        while pos < n:
            if self.index >= N:
                self._refill()
            take = min(n - pos, N - self.index)
            out[pos : pos + take] = self._out[self.index : self.index + take]
            self.index += take
            pos += take
        self.draws += n
        return out

    @property
    def seed_record(self) -> dict:
        return {"master": self.master, "stream": self.stream}


def seed(master: int, stream: int = 0) -> GeneratorState:
    """Initialise a generator for ``(master, stream)``.

    ``seed(5489, 0)`` is the reference MT19937 generator whose first output is
    3499211612. Masters wider than 32 bits, and every nonzero stream, are
    hashed with splitmix64 and fed through ``init_by_array``.
    """
    if master < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    if stream == 0 and master <= MASK32:
        words = _init_genrand(master)
    else:
        mixed = splitmix64((master & MASK64) ^ splitmix64(stream & MASK64))
        words = _init_by_array([mixed & MASK32, mixed >> 32, stream & MASK32])
    return GeneratorState(
        mt=np.array(words, dtype=np.uint32), index=N, master=master, stream=stream
    )


_TWO26 = 67108864.0
_TWO53 = 9007199254740992.0


def uniform01_array(state: GeneratorState, n: int) -> np.ndarray:
    """``n`` 53-bit uniforms in [0, 1), two 32-bit words each."""
    w = state.u32_array(2 * n).astype(np.float64)
    a = np.floor(w[0::2] / 32.0)  # top 27 bits
    b = np.floor(w[1::2] / 64.0)  # top 26 bits
    return (a * _TWO26 + b) / _TWO53


def uniform01(state: GeneratorState) -> float:
    a = state.next_u32() >> 5
    b = state.next_u32() >> 6
    return (a * _TWO26 + b) / _TWO53


def uniform_ab(state: GeneratorState, a: float, b: float) -> float:
    if not a < b:
        raise ValueError(f"uniform_ab needs a < b, got a={a}, b={b}")
    return a + (b - a) * uniform01(state)


def uniform_ab_array(state: GeneratorState, a: float, b: float, n: int) -> np.ndarray:
    if not a < b:
        raise ValueError(f"uniform_ab needs a < b, got a={a}, b={b}")
    return a + (b - a) * uniform01_array(state, n)


def box_muller(r1: float, r2: float) -> tuple[float, float]:
    """Map two uniforms to the (sin, cos) pair of standard normal deviates."""
    # same numpy kernel as normal_array, so both paths agree to the bit
    out = np.empty(2)
    _fill_pairs(out, 0, np.array([r1], dtype=np.float64), np.array([r2], dtype=np.float64))
    return float(out[0]), float(out[1])


def normal_pair(state: GeneratorState) -> tuple[float, float]:
    r1 = uniform01(state)
    r2 = uniform01(state)
    while r2 == 0.0:
        r2 = uniform01(state)
    return box_muller(r1, r2)


def normal_array(state: GeneratorState, n: int) -> np.ndarray:
    """``n`` N(0, 1) deviates, laid out as sin, cos, sin, cos, ...

    Same values and word consumption as repeated ``normal_pair`` calls; an odd
    ``n`` discards the last cosine.
    """
    pairs = (n + 1) // 2
    u = uniform01_array(state, 2 * pairs)
    out = np.empty(2 * pairs)
    if not np.any(u[1::2] == 0.0):
        _fill_pairs(out, 0, u[0::2], u[1::2])
        return out[:n]
    # a zero r2 shifts the pairing of every later word; replay sequentially
    flat = list(u)
    pos = 0

    def take() -> float:
        nonlocal pos
        if pos < len(flat):
            pos += 1
            return flat[pos - 1]
        return uniform01(state)

    for k in range(pairs):
        r1 = take()
        r2 = take()
        while r2 == 0.0:
            r2 = take()
        out[2 * k], out[2 * k + 1] = box_muller(r1, r2)
    return out[:n]


def _fill_pairs(out: np.ndarray, start: int, r1: np.ndarray, r2: np.ndarray) -> None:
    rad = np.sqrt(-2.0 * np.log(r2))
    ang = 2.0 * np.pi * r1
    k = r1.size
    out[2 * start : 2 * (start + k) : 2] = np.sin(ang) * rad
    out[2 * start + 1 : 2 * (start + k) : 2] = np.cos(ang) * rad


def cauchy_from_uniform(u: float | np.ndarray, mu: float, lam: float):
    return mu + lam * np.tan(np.pi * (np.asarray(u) - 0.5))


def cauchy_sample(state: GeneratorState, mu: float, lam: float) -> float:
    if lam <= 0:
        raise ValueError(f"Cauchy scale must be positive, got {lam}")
    u = uniform01(state)
    while u == 0.0:  # [0, 1) never yields 1
        u = uniform01(state)
    return float(cauchy_from_uniform(u, mu, lam))


def cauchy_array(state: GeneratorState, mu: float, lam: float, n: int) -> np.ndarray:
    if lam <= 0:
        raise ValueError(f"Cauchy scale must be positive, got {lam}")
    u = uniform01_array(state, n)
    zero = np.flatnonzero(u == 0.0)
    for i in zero:  # vanishingly rare; redraw in place
        v = 0.0
        while v == 0.0:
            v = uniform01(state)
        u[i] = v
    return cauchy_from_uniform(u, mu, lam)

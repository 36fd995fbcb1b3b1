"""Counter-based random streams for reproducible parallel Monte Carlo.

Every trial owns an independent substream derived from the master seed and
the trial index, and the k-th variate of a substream is a pure function of
(base, k):

    base(seed, trial) = mix(mix(seed) ^ ((trial + 1) * KEY_MULT))
    u64(base, k)      = mix(base + (k + 1) * WEYL)
    unit(base, k)     = (u64 >> 11) * 2^-53            in [0, 1)

where ``mix`` is the SplitMix64 finalizer.  Random access by k is what makes
the numba trial loop, the vectorized numpy twin and any degree of thread
parallelism produce the same draws.

This module holds the scalar reference implementation (Python ints masked to
64 bits) and vectorized numpy helpers.  The numba kernels re-state the same
arithmetic on uint64; equality is pinned by tests.
"""

import math

import numpy as np

MASK64 = (1 << 64) - 1
WEYL = 0x9E3779B97F4A7C15
MIX_MULT_1 = 0xBF58476D1CE4E5B9
MIX_MULT_2 = 0x94D049BB133111EB
KEY_MULT = 0xD2B74407B1CE6E93

_INV_2_53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer (bijective avalanche on 64 bits)."""
    z = int(z) & MASK64
    z ^= z >> 30
    z = (z * MIX_MULT_1) & MASK64
    z ^= z >> 27
    z = (z * MIX_MULT_2) & MASK64
    return z ^ (z >> 31)


def stream_base(seed: int, trial: int) -> int:
    return mix64(mix64(seed) ^ ((int(trial) + 1) * KEY_MULT & MASK64))


def unit(base: int, k: int) -> float:
    """k-th uniform [0,1) variate of the substream."""
    u = mix64((base + (k + 1) * WEYL) & MASK64)
    return (u >> 11) * _INV_2_53


def unit_vec(base: int, start: int, count: int) -> np.ndarray:
    """Uniforms for positions start .. start+count-1, vectorized."""
    ks = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(int(base) & MASK64) + ks * np.uint64(WEYL)
    z ^= z >> np.uint64(30)
    z *= np.uint64(MIX_MULT_1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(MIX_MULT_2)
    z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)) * _INV_2_53


class Stream:
    """Sequential view of one substream; tracks the draw position."""

    def __init__(self, seed: int, trial: int = 0):
        self.base = stream_base(seed, trial)
        self.pos = 0

    def uniform(self) -> float:
        u = unit(self.base, self.pos)
        self.pos += 1
        return u

    def uniforms(self, count: int) -> np.ndarray:
        u = unit_vec(self.base, self.pos, count)
        self.pos += count
        return u

    def exponential(self) -> float:
        return -math.log1p(-self.uniform())

    def gamma_int(self, shape: int) -> float:
        """Gamma(shape, 1) as a sum of ``shape`` unit exponentials."""
        total = 0.0
        for _ in range(shape):
            total += self.exponential()
        return total

    def poisson(self, mu: float) -> int:
        if mu < POISSON_PTRS_MIN_MU:
            return _poisson_knuth(self, mu)
        return _poisson_ptrs(self, mu)


# PTRS (transformed-rejection) is exact for mu >= 10; below that the Knuth
# uniform-product method is cheap and exact.
POISSON_PTRS_MIN_MU = 10.0


def _poisson_knuth(stream: Stream, mu: float) -> int:
    limit = math.exp(-mu)
    k = 0
    p = 1.0
    while True:
        p *= stream.uniform()
        if p <= limit:
            return k
        k += 1


def _poisson_ptrs(stream: Stream, mu: float) -> int:
    log_mu = math.log(mu)
    b = 0.931 + 2.53 * math.sqrt(mu)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = stream.uniform() - 0.5
        v = stream.uniform()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mu + 0.43)
        if us >= 0.07 and v <= v_r:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b) <= (
            k * log_mu - mu - math.lgamma(k + 1.0)
        ):
            return int(k)

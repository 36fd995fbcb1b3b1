"""Numba trial kernel for the Poisson-network SIR simulator.

Restates the substream arithmetic of ``_rng`` on native uint64 so the whole
trial loop compiles under ``@njit(parallel=True)``.  Trials are independent
substreams indexed by (seed, trial); the loop writes disjoint output slots
and reduces integer counters, so results are identical for any thread count.
The numpy twin in ``_kernels_numpy`` consumes the same draw positions; tests
pin the two backends together.
"""

import math

import numpy as np
from numba import njit, prange

U_WEYL = np.uint64(0x9E3779B97F4A7C15)
U_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
U_MIX_2 = np.uint64(0x94D049BB133111EB)
U_KEY = np.uint64(0xD2B74407B1CE6E93)
INV_2_53 = 2.0 ** -53

PTRS_MIN_MU = 10.0


@njit(cache=True)
def _mix(z):
    z = z ^ (z >> np.uint64(30))
    z = z * U_MIX_1
    z = z ^ (z >> np.uint64(27))
    z = z * U_MIX_2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _stream_base(seed, trial):
    return _mix(_mix(seed) ^ (np.uint64(trial + 1) * U_KEY))


@njit(cache=True)
def _unit(base, k):
    u = _mix(base + np.uint64(k + 1) * U_WEYL)
    return (u >> np.uint64(11)) * INV_2_53


@njit(cache=True)
def _poisson(base, pos, mu):
    """Draw Poisson(mu); returns (count, new position)."""
    if mu < PTRS_MIN_MU:
        limit = math.exp(-mu)
        k = 0
        p = 1.0
        while True:
            p *= _unit(base, pos)
            pos += 1
            if p <= limit:
                return k, pos
            k += 1
    log_mu = math.log(mu)
    b = 0.931 + 2.53 * math.sqrt(mu)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = _unit(base, pos) - 0.5
        v = _unit(base, pos + 1)
        pos += 2
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mu + 0.43)
        if us >= 0.07 and v <= v_r:
            return int(k), pos
        if k < 0 or (us < 0.013 and v > us):
            continue
        if math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b) <= (
            k * log_mu - mu - math.lgamma(k + 1.0)
        ):
            return int(k), pos


@njit(cache=True)
def _gamma_sum(base, pos, shape):
    """Gamma(shape, 1) as a sum of unit exponentials; returns (value, new pos)."""
    total = 0.0
    for _ in range(shape):
        total += -math.log1p(-_unit(base, pos))
        pos += 1
    return total, pos


@njit(cache=True)
def _pow_neg(d, alpha):
    """d^(-alpha) with fast paths for the common exponents."""
    if alpha == 4.0:
        t = d * d
        return 1.0 / (t * t)
    if alpha == 3.0:
        return 1.0 / (d * d * d)
    if alpha == 2.5:
        return 1.0 / (d * d * math.sqrt(d))
    if alpha == 2.0:
        return 1.0 / (d * d)
    return d ** (-alpha)


@njit(cache=True)
def _loss(d, exps, consts, brks):
    n = 0
    for i in range(brks.shape[0]):
        if d < brks[i]:
            break
        n += 1
    return consts[n] * _pow_neg(d, exps[n])


@njit(cache=True)
def _one_trial(base, mu, window, power, delta_h, sig_shape, int_shape,
               exps, consts, brks, max_attempts):
    """Returns (sir, serving 3-D distance, degenerate draws, empty draws, ok)."""
    pos = 0
    n_deg = 0
    n_empty = 0
    n = 0
    ok = False
    for _ in range(max_attempts):
        n, pos = _poisson(base, pos, mu)
        if n >= 2:
            ok = True
            break
        if n == 1:
            n_deg += 1
        else:
            n_empty += 1
    if not ok:
        return np.nan, np.nan, n_deg, n_empty, False

    radii = np.empty(n)
    serving = 0
    r_min = np.inf
    for j in range(n):
        r = window * math.sqrt(_unit(base, pos))
        pos += 1
        radii[j] = r
        if r < r_min:
            r_min = r
            serving = j

    d0 = math.sqrt(r_min * r_min + delta_h * delta_h)
    gain0, pos = _gamma_sum(base, pos, sig_shape)
    signal = power * gain0 * _loss(d0, exps, consts, brks)

    interference = 0.0
    for j in range(n):
        if j == serving:
            continue
        gain, pos = _gamma_sum(base, pos, int_shape)
        d = math.sqrt(radii[j] * radii[j] + delta_h * delta_h)
        interference += power * gain * _loss(d, exps, consts, brks)

    return signal / interference, d0, n_deg, n_empty, True


@njit(parallel=True, cache=True)
def run_trials(trials, first_trial, seed, mu, window, power, delta_h,
               sig_shape, int_shape, exps, consts, brks, max_attempts):
    sir = np.empty(trials)
    dist = np.empty(trials)
    n_deg = 0
    n_empty = 0
    n_failed = 0
    for t in prange(trials):
        base = _stream_base(seed, first_trial + t)
        s, d0, deg, emp, ok = _one_trial(
            base, mu, window, power, delta_h, sig_shape, int_shape,
            exps, consts, brks, max_attempts,
        )
        sir[t] = s
        dist[t] = d0
        n_deg += deg
        n_empty += emp
        if not ok:
            n_failed += 1
    return sir, dist, n_deg, n_empty, n_failed

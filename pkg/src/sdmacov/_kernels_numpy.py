"""Pure-numpy twin of the numba trial kernel.

Consumes the same substream positions as ``_kernels_numba`` (Poisson count,
then radii, then the serving gain, then interferer gains in base-station
order), so the two backends draw identical variates.  Per-base-station
quantities match the numba path bit for bit; the interference reduction uses
numpy's pairwise summation, so SIR values may differ from the numba loop in
the last few ulps.
"""

import math

import numpy as np

from ._rng import Stream, unit_vec


def _pow_neg_scalar(d, alpha):
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


def _pow_neg_vec(d, alpha):
    if alpha == 4.0:
        t = d * d
        return 1.0 / (t * t)
    if alpha == 3.0:
        return 1.0 / (d * d * d)
    if alpha == 2.5:
        return 1.0 / (d * d * np.sqrt(d))
    if alpha == 2.0:
        return 1.0 / (d * d)
    return d ** (-alpha)


def _loss_scalar(d, exps, consts, brks):
    n = int(np.searchsorted(brks, d, side="right"))
    return consts[n] * _pow_neg_scalar(d, exps[n])


def _loss_vec(d, exps, consts, brks):
    idx = np.searchsorted(brks, d, side="right")
    out = np.empty_like(d)
    for seg in range(len(exps)):
        mask = idx == seg
        if mask.any():
            out[mask] = consts[seg] * _pow_neg_vec(d[mask], exps[seg])
    return out


def run_trials(trials, first_trial, seed, mu, window, power, delta_h,
               sig_shape, int_shape, exps, consts, brks, max_attempts):
    sir = np.empty(trials)
    dist = np.empty(trials)
    n_deg = 0
    n_empty = 0
    n_failed = 0
    dh2 = delta_h * delta_h

    for t in range(trials):
        st = Stream(seed, first_trial + t)
        n = 0
        ok = False
        for _ in range(max_attempts):
            n = st.poisson(mu)
            if n >= 2:
                ok = True
                break
            if n == 1:
                n_deg += 1
            else:
                n_empty += 1
        if not ok:
            sir[t] = np.nan
            dist[t] = np.nan
            n_failed += 1
            continue

        radii = window * np.sqrt(st.uniforms(n))
        serving = int(np.argmin(radii))
        d0 = math.sqrt(radii[serving] ** 2 + dh2)

        gain0 = -np.log1p(-st.uniforms(sig_shape)).sum()
        signal = power * gain0 * _loss_scalar(d0, exps, consts, brks)

        u = unit_vec(st.base, st.pos, (n - 1) * int_shape)
        st.pos += (n - 1) * int_shape
        gains = (-np.log1p(-u)).reshape(n - 1, int_shape).sum(axis=1)
        d_int = np.sqrt(np.delete(radii, serving) ** 2 + dh2)
        interference = float(np.sum(power * gains * _loss_vec(d_int, exps, consts, brks)))

        sir[t] = signal / interference
        dist[t] = d0
    return sir, dist, n_deg, n_empty, n_failed

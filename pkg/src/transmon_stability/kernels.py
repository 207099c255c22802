"""Hot loops of the TLS simulator.

Each kernel has a numba loop form (``*_nb``) and a vectorised numpy form
(``*_np``); the public names dispatch on :data:`_accel.BACKEND`. Both forms
consume the same pre-drawn random arrays, so they agree to rounding.
"""

from __future__ import annotations

import numpy as np

from ._accel import BACKEND, njit


def lorentzian_rate_np(g, gamma, delta):
    """Relaxation rate (1/s) induced by a TLS of coupling g and linewidth gamma (Hz)."""
    return 4.0 * g * g * gamma / (gamma * gamma + 4.0 * delta * delta)


@njit
def rate_sum_nb(g, gamma, delta, background):
    total = background
    for j in range(g.shape[0]):
        total += 4.0 * g[j] * g[j] * gamma[j] / (gamma[j] * gamma[j] + 4.0 * delta[j] * delta[j])
    return total


def rate_sum_np(g, gamma, delta, background):
    return background + float(np.sum(lorentzian_rate_np(g, gamma, delta)))


@njit
def telegraph_rates_nb(rate_a, rate_b, state, p_flip, uniforms, background, first_fresh):
    """Evolve two-state switchers over ``uniforms.shape[0]`` samples.

    ``state`` is updated in place. Row ``k`` of ``uniforms`` decides the
    flips that happen just before sample ``k``; row 0 is skipped when
    ``first_fresh`` is true (the first sample of a trace uses the initial state).
    """
    m, n = uniforms.shape
    out = np.empty(m)
    for k in range(m):
        total = background
        for j in range(n):
            if (k > 0 or not first_fresh) and uniforms[k, j] < p_flip[j]:
                state[j] = 1 - state[j]
            if state[j] == 1:
                total += rate_b[j]
            else:
                total += rate_a[j]
        out[k] = total
    return out


def telegraph_rates_np(rate_a, rate_b, state, p_flip, uniforms, background, first_fresh):
    flips = uniforms < p_flip[None, :]
    if first_fresh and flips.shape[0]:
        flips[0, :] = False
    parity = np.cumsum(flips, axis=0, dtype=np.int64) & 1
    st = state[None, :] ^ parity
    out = background + np.where(st == 1, rate_b[None, :], rate_a[None, :]).sum(axis=1)
    if st.shape[0]:
        state[:] = st[-1]
    return out


@njit
def _reflect_nb(x, lo, hi):
    width = hi - lo
    if width <= 0.0:
        return lo
    y = (x - lo) % (2.0 * width)
    if y > width:
        y = 2.0 * width - y
    return lo + y


@njit
def diffusive_rates_nb(g, gamma, delta, step_sigma, normals, lo, hi, background, first_fresh):
    """Reflecting Gaussian random walk of the detunings; ``delta`` updated in place."""
    m, n = normals.shape
    out = np.empty(m)
    for k in range(m):
        total = background
        for j in range(n):
            if k > 0 or not first_fresh:
                delta[j] = _reflect_nb(delta[j] + step_sigma[j] * normals[k, j], lo, hi)
            d = delta[j]
            total += 4.0 * g[j] * g[j] * gamma[j] / (gamma[j] * gamma[j] + 4.0 * d * d)
        out[k] = total
    return out


def _reflect_np(x, lo, hi):
    width = hi - lo
    if width <= 0.0:
        return np.full_like(x, lo)
    y = np.mod(x - lo, 2.0 * width)
    y = np.where(y > width, 2.0 * width - y, y)
    return lo + y


def diffusive_rates_np(g, gamma, delta, step_sigma, normals, lo, hi, background, first_fresh):
    m = normals.shape[0]
    out = np.empty(m)
    cur = delta.copy()
    for k in range(m):
        if k > 0 or not first_fresh:
            cur = _reflect_np(cur + step_sigma * normals[k], lo, hi)
        out[k] = background + np.sum(lorentzian_rate_np(g, gamma, cur))
    delta[:] = cur
    return out


if BACKEND == "numba":
    rate_sum = rate_sum_nb
    telegraph_rates = telegraph_rates_nb
    diffusive_rates = diffusive_rates_nb
else:
    rate_sum = rate_sum_np
    telegraph_rates = telegraph_rates_np
    diffusive_rates = diffusive_rates_np

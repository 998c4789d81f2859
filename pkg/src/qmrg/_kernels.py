"""Compiled inner loops for the coupling flow.

All kernels work on Taylor coefficients c[k] = g^(k)/k! in place and release
the GIL, so independent flows can run on separate threads.
"""

import math

import numpy as np
from numba import njit

OK = 0
LOG_DOMAIN = 1


@njit(cache=True, nogil=True)
def _jet_log(c, inv_w2M, u, L):
    """L <- jet of log(1 + V''(x) * inv_w2M); returns 1 + u(0)."""
    t = c.shape[0] - 1
    for k in range(t + 1):
        u[k] = 0.0
    for k in range(t - 1):
        u[k] = (k + 2) * (k + 1) * c[k + 2] * inv_w2M
    a0 = 1.0 + u[0]
    if not a0 > 0.0:
        return a0
    L[0] = math.log1p(u[0])
    for k in range(1, t + 1):
        s = k * u[k]
        for j in range(1, k):
            s -= j * L[j] * u[k - j]
        L[k] = s / (k * a0)
    return a0


@njit(cache=True, nogil=True)
def _add_step(c, carry, L, weight, n_flow):
    # compensated (Kahan) accumulation for the constant term only
    y = L[0] * weight - carry[0]
    s = c[0] + y
    carry[0] = (s - c[0]) - y
    c[0] = s
    for k in range(1, n_flow):
        c[k] += L[k] * weight


@njit(cache=True, nogil=True)
def lattice_flow(c, carry, m_hi, m_lo, N, beta, M, hbar, n_flow, fail):
    """Apply the one-loop step for m = m_hi, m_hi-1, ..., m_lo+1.

    Only c[0..n_flow-1] are updated. On a log-domain violation the state is
    left at the failing mode; fail[0] receives m, fail[1] receives u(0).
    """
    t = c.shape[0] - 1
    u = np.zeros(t + 1)
    L = np.zeros(t + 1)
    eps = hbar * beta / (N + 1)
    inv_beta = 1.0 / beta
    for m in range(m_hi, m_lo, -1):
        s = math.sin(math.pi * m / (N + 1))
        w2 = 4.0 * s * s / (eps * eps)
        a0 = _jet_log(c, 1.0 / (w2 * M), u, L)
        if not a0 > 0.0:
            fail[0] = m
            fail[1] = a0 - 1.0
            return LOG_DOMAIN
        _add_step(c, carry, L, inv_beta, n_flow)
    return OK


@njit(cache=True, nogil=True)
def sweep_flow(c, carry, w2, weights, M, n_flow, fail):
    """Apply c += weights[i] * jet(log(1 + V''/(w2[i] M))) for i in order."""
    t = c.shape[0] - 1
    u = np.zeros(t + 1)
    L = np.zeros(t + 1)
    for i in range(w2.shape[0]):
        a0 = _jet_log(c, 1.0 / (w2[i] * M), u, L)
        if not a0 > 0.0:
            fail[0] = i
            fail[1] = a0 - 1.0
            return LOG_DOMAIN
        _add_step(c, carry, L, weights[i], n_flow)
    return OK


@njit(cache=True, nogil=True)
def frozen_lattice_sum(c0, acc, carry, m_hi, m_lo, N, beta, M, hbar, fail):
    """acc += sum_m (1/beta) jet(log(1 + V0''/(w_m^2 M))) with V0 held fixed."""
    t = c0.shape[0] - 1
    u = np.zeros(t + 1)
    L = np.zeros(t + 1)
    eps = hbar * beta / (N + 1)
    inv_beta = 1.0 / beta
    for m in range(m_hi, m_lo, -1):
        s = math.sin(math.pi * m / (N + 1))
        w2 = 4.0 * s * s / (eps * eps)
        a0 = _jet_log(c0, 1.0 / (w2 * M), u, L)
        if not a0 > 0.0:
            fail[0] = m
            fail[1] = a0 - 1.0
            return LOG_DOMAIN
        _add_step(acc, carry, L, inv_beta, t + 1)
    return OK

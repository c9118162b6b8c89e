"""Compiled inner loops for the ARMA likelihood."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def kalman_innovations(Y, T, R, P0):
    """Innovations filter for an ARMA model in Harvey's state-space form.

    The observation is the first state element with no measurement noise and
    the state noise has unit variance (the scale is handled by the caller).
    All columns of `Y` share the gain, so filtering a data column next to a
    column of ones yields what is needed to concentrate out the mean.

    Returns innovations V (n x m) and their scale-free variances F (n).
    """
    n, m = Y.shape
    r = T.shape[0]
    a = np.zeros((r, m))
    P = P0.copy()
    V = np.empty((n, m))
    F = np.empty(n)
    Pu = np.empty((r, r))
    au = np.empty((r, m))
    for t in range(n):
        f = P[0, 0]
        F[t] = f
        for c in range(m):
            V[t, c] = Y[t, c] - a[0, c]
        # measurement update
        for i in range(r):
            k = P[i, 0] / f
            for c in range(m):
                au[i, c] = a[i, c] + k * V[t, c]
            for j in range(r):
                Pu[i, j] = P[i, j] - P[i, 0] * P[0, j] / f
        # time update: a = T au, P = T Pu T' + R R'
        for i in range(r):
            for c in range(m):
                s = 0.0
                for l in range(r):
                    s += T[i, l] * au[l, c]
                a[i, c] = s
        for i in range(r):
            for j in range(r):
                s = 0.0
                for l in range(r):
                    tl = T[i, l]
                    if tl != 0.0:
                        for h in range(r):
                            s += tl * Pu[l, h] * T[j, h]
                P[i, j] = s + R[i] * R[j]
    return V, F


@njit(cache=True)
def css_residuals(z, ar, ma):
    """Conditional residuals, starting at t = p with pre-sample shocks at zero."""
    n = z.size
    p = ar.size
    q = ma.size
    e = np.zeros(n)
    for t in range(p, n):
        s = z[t]
        for i in range(p):
            s -= ar[i] * z[t - 1 - i]
        for j in range(q):
            if t - 1 - j >= p:
                s -= ma[j] * e[t - 1 - j]
        e[t] = s
    return e[p:]

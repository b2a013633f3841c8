"""
Compiled inner loops for the per-sample filter steps.

These mirror the reference NumPy code paths in :mod:`inekf.liegroup`,
:mod:`inekf.propagation` and :mod:`inekf.filter`; the tests check the two
against each other.
"""

import math

import numpy as np
from numba import njit

_SERIES_ANGLE = 0.1
_ORTHO_TOL = 1e-9


@njit(cache=True)
def skew(v):
    S = np.zeros((3, 3))
    S[0, 1] = -v[2]
    S[0, 2] = v[1]
    S[1, 0] = v[2]
    S[1, 2] = -v[0]
    S[2, 0] = -v[1]
    S[2, 1] = v[0]
    return S


@njit(cache=True)
def coefficients(theta):
    if theta < _SERIES_ANGLE:
        t2 = theta * theta
        t4 = t2 * t2
        t6 = t4 * t2
        t8 = t4 * t4
        c1 = 1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0 + t8 / 362880.0
        c2 = 0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0 + t8 / 3628800.0
        c3 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0 + t8 / 39916800.0
        c4 = 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0 - t6 / 3628800.0 + t8 / 479001600.0
        return c1, c2, c3, c4
    s = math.sin(theta)
    c = math.cos(theta)
    t2 = theta * theta
    return (s / theta, (1.0 - c) / t2, (theta - s) / (t2 * theta),
            (t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2))


@njit(cache=True)
def gammas(phi):
    theta = math.sqrt(phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2])
    c1, c2, c3, c4 = coefficients(theta)
    K = skew(phi)
    K2 = K @ K
    G0 = c1 * K + c2 * K2
    G1 = c2 * K + c3 * K2
    G2 = c3 * K + c4 * K2
    for i in range(3):
        G0[i, i] += 1.0
        G1[i, i] += 1.0
        G2[i, i] += 0.5
    return G0, G1, G2


@njit(cache=True)
def reorthonormalize(R):
    E = R.T @ R
    err = 0.0
    for i in range(3):
        for j in range(3):
            d = E[i, j] - (1.0 if i == j else 0.0)
            err += d * d
    if math.sqrt(err) <= _ORTHO_TOL:
        return R
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0.0:
        U[:, 2] *= -1.0
        Q = U @ Vt
    return Q


@njit(cache=True)
def block_adjoint(R, cols, n):
    """``block_diag(Ad_X, I)`` of size n."""
    k = cols.shape[1]
    T = np.eye(n)
    for b in range(k + 1):
        T[3 * b:3 * b + 3, 3 * b:3 * b + 3] = R
    for j in range(k):
        T[3 * (j + 1):3 * (j + 2), 0:3] = skew(cols[:, j].copy()) @ R
    return T


@njit(cache=True)
def propagate_step(R, cols, P, omega, accel, bias, has_bias, dt, g, Qc):
    """Covariance from the pre-step mean, then the mean; right-invariant frame."""
    n = P.shape[0]
    k = cols.shape[1]
    m = 3 * (k + 1)
    A = np.zeros((n, n))
    A[3:6, 0:3] = skew(g)
    for i in range(3):
        A[6 + i, 3 + i] = 1.0
    w = omega.copy()
    a = accel.copy()
    if has_bias:
        for i in range(3):
            w[i] -= bias[i]
            a[i] -= bias[3 + i]
        A[0:3, m:m + 3] = -R
        for j in range(k):
            A[3 * (j + 1):3 * (j + 2), m:m + 3] = -(skew(cols[:, j].copy()) @ R)
        A[3:6, m + 3:m + 6] = -R
    # A is nilpotent of degree <= 4, so the cubic series is exact
    Adt = A * dt
    A2 = Adt @ Adt
    A3 = A2 @ Adt
    Phi = np.eye(n) + Adt + 0.5 * A2 + A3 / 6.0
    T = block_adjoint(R, cols, n)
    PhiT = Phi.T.copy()
    Qd = Phi @ (Qc * dt) @ PhiT
    P_new = Phi @ P @ PhiT + T @ Qd @ T.T
    P_new = 0.5 * (P_new + P_new.T)

    G0, G1, G2 = gammas(w * dt)
    cols_new = cols.copy()
    v = cols[:, 0]
    p = cols[:, 1]
    RG1a = R @ (G1 @ a)
    RG2a = R @ (G2 @ a)
    for i in range(3):
        cols_new[i, 0] = v[i] + g[i] * dt + RG1a[i] * dt
        cols_new[i, 1] = p[i] + v[i] * dt + 0.5 * g[i] * dt * dt + RG2a[i] * dt * dt
    R_new = reorthonormalize(R @ G0)
    return R_new, cols_new, P_new


@njit(cache=True)
def cholesky_ok(P, floor):
    """True when ``P - floor I`` admits a Cholesky factorization."""
    n = P.shape[0]
    Lm = np.zeros((n, n))
    for j in range(n):
        s = P[j, j] - floor
        for q in range(j):
            s -= Lm[j, q] * Lm[j, q]
        if not s > 0.0:
            return False
        d = math.sqrt(s)
        Lm[j, j] = d
        for i in range(j + 1, n):
            t = P[i, j]
            for q in range(j):
                t -= Lm[i, q] * Lm[j, q]
            Lm[i, j] = t / d
    return True


@njit(cache=True)
def update_step(R, cols, P, z, H, N, left, cond_limit):
    """
    Gain, group correction and Joseph covariance.

    Returns ``(R, cols, P, delta, ok)``; ``ok`` is False when the innovation
    covariance is singular or ill-conditioned, in which case nothing changed.
    """
    n = P.shape[0]
    k = cols.shape[1]
    m = 3 * (k + 1)
    PHt = P @ H.T
    S = H @ PHt + N
    S = 0.5 * (S + S.T)
    wS, V = np.linalg.eigh(S)
    if not wS[0] > 0.0 or wS[-1] > cond_limit * wS[0]:
        return R, cols, P, np.zeros(n), False
    S_inv = (V / wS) @ V.T
    L = PHt @ S_inv
    delta = L @ z

    G0, G1, _ = gammas(delta[0:3].copy())
    dcols = np.empty((3, k))
    for j in range(k):
        dcols[:, j] = G1 @ delta[3 * (j + 1):3 * (j + 2)].copy()
    if left:
        R_new = R @ G0
        cols_new = R @ dcols + cols
    else:
        R_new = G0 @ R
        cols_new = G0 @ cols + dcols
    R_new = reorthonormalize(R_new)

    IKH = np.eye(n) - L @ H
    P_new = IKH @ P @ IKH.T + L @ N @ L.T
    P_new = 0.5 * (P_new + P_new.T)
    return R_new, cols_new, P_new, delta, True

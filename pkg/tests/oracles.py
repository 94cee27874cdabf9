"""Independent reference implementations used by the tests.

Everything here is written with explicit loops over grid indices and
directly evaluated formulas, sharing no code with the package beyond the
grid coordinates.
"""

import numpy as np


def grad_1d_loop(a, h):
    """Centered difference with second-order one-sided end rows."""
    n = len(a)
    out = np.empty(n)
    for p in range(n):
        if p == 0:
            out[p] = (-3 * a[0] + 4 * a[1] - a[2]) / (2 * h)
        elif p == n - 1:
            out[p] = (3 * a[n - 1] - 4 * a[n - 2] + a[n - 3]) / (2 * h)
        else:
            out[p] = (a[p + 1] - a[p - 1]) / (2 * h)
    return out


def second_1d_loop(a, h):
    n = len(a)
    out = np.empty(n)
    for p in range(n):
        if p == 0:
            out[p] = (2 * a[0] - 5 * a[1] + 4 * a[2] - a[3]) / h**2
        elif p == n - 1:
            out[p] = (2 * a[n - 1] - 5 * a[n - 2] + 4 * a[n - 3] - a[n - 4]) / h**2
        else:
            out[p] = (a[p + 1] - 2 * a[p] + a[p - 1]) / h**2
    return out


def periodic_grad_loop(a, h):
    n = len(a)
    return np.array([(a[(p + 1) % n] - a[p - 1]) / (2 * h) for p in range(n)])


def trapezoid_1d(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def velocity_coeffs_loop(V, v, h):
    """1D naive loops for c1, c2, d1, d2."""
    nv, r = V.shape
    w = trapezoid_1d(nv, h)
    c1 = np.zeros((r, r))
    c2 = np.zeros((r, r))
    d1 = np.zeros((r, r))
    d2 = np.zeros((r, r))
    for j in range(r):
        for l in range(r):
            g = grad_1d_loop(V[:, l], h)
            lap = second_1d_loop(V[:, l], h)
            for q in range(nv):
                c1[j, l] += w[q] * v[q] * V[q, j] * V[q, l]
                c2[j, l] += w[q] * v[q] ** 2 * V[q, j] * V[q, l]
                d1[j, l] += w[q] * V[q, j] * (lap[q] - v[q] * g[q])
                d2[j, l] += w[q] * V[q, j] * g[q]
    return c1, c2, d1, d2


def space_coeffs_loop(X, M1, M2, M3, E, h):
    """1D naive loops for cstar, cstarstar, cstar3, dstar, estar."""
    nx, r = X.shape
    out = {k: np.zeros((r, r)) for k in ("cstar", "cstarstar", "cstar3", "dstar", "estar")}
    for i in range(r):
        for k in range(r):
            g = periodic_grad_loop(X[:, k], h)
            for p in range(nx):
                xx = X[p, i] * X[p, k] * h
                out["cstar"][i, k] += xx * M1[p]
                out["cstarstar"][i, k] += xx * M2[p]
                out["cstar3"][i, k] += xx * M3[p]
                out["estar"][i, k] += xx * E[p]
                out["dstar"][i, k] += X[p, i] * g[p] * h
    return out


def k_matrices_loop(c1, c2, d1, d2, M1, M2, M3, E):
    """Per-point A1, A2 in 1D."""
    nx = len(M1)
    r = d1.shape[0]
    A1 = np.zeros((nx, r, r))
    A2 = np.zeros((nx, r, r))
    for p in range(nx):
        for j in range(r):
            for l in range(r):
                A1[p, j, l] = (j == l) * M1[p] + c1[j, l] * M2[p] + c2[j, l] * M3[p]
                A2[p, j, l] = d1[j, l] + E[p] * d2[j, l]
    return A1, A2


def s_tensors_loop(c1, c2, d1, d2, cs, css, cs3, ds, es):
    r = d1.shape[0]
    B1 = np.zeros((r, r, r, r))
    B2 = np.zeros((r, r, r, r))
    for i in range(r):
        for j in range(r):
            for k in range(r):
                for l in range(r):
                    ct = (j == l) * cs[i, k] + c1[j, l] * css[i, k] + c2[j, l] * cs3[i, k]
                    B1[i, j, k, l] = ds[i, k] * c1[j, l] + ct
                    B2[i, j, k, l] = (i == k) * d1[j, l] + es[i, k] * d2[j, l]
    return B1, B2


def weighted_mgs(A, w):
    """Modified Gram-Schmidt in the inner product sum(w * a * b)."""
    n, r = A.shape
    Q = A.astype(float).copy()
    R = np.zeros((r, r))
    for k in range(r):
        for i in range(k):
            R[i, k] = np.sum(w * Q[:, i] * Q[:, k])
            Q[:, k] -= R[i, k] * Q[:, i]
        R[k, k] = np.sqrt(np.sum(w * Q[:, k] ** 2))
        Q[:, k] /= R[k, k]
    return Q, R


def gaussian_convolution_direct(values, v, h, zeta):
    """ell(zeta) = sum_q trapezoid_q values_q exp(-(zeta - v_q)^2 / 2)."""
    w = trapezoid_1d(len(v), h)
    return np.array([np.sum(w * values * np.exp(-0.5 * (z - v) ** 2)) for z in zeta])


def fp_stencil_dense(e, v, h):
    """Dense 1D Fokker-Planck matrix from directly evaluated Gaussians.

    Row p: [M(p+1/2) g(p+1) - (M(p+1/2) + M(p-1/2)) g(p) + M(p-1/2) g(p-1)] / (M(p) h^2),
    with the outer half-node weights set to zero.
    """
    n = len(v)
    Mf = lambda s: np.exp(-0.5 * (s - e) ** 2)
    T = np.zeros((n, n))
    for p in range(n):
        mp = Mf(v[p] + h / 2) if p < n - 1 else 0.0
        mm = Mf(v[p] - h / 2) if p > 0 else 0.0
        M0 = Mf(v[p])
        if p < n - 1:
            T[p, p + 1] = mp / (M0 * h * h)
        if p > 0:
            T[p, p - 1] = mm / (M0 * h * h)
        T[p, p] = -(mp + mm) / (M0 * h * h)
    return T


def grad_dense(n, h):
    G = np.zeros((n, n))
    for p in range(n):
        e = np.zeros(n)
        e[p] = 1.0
        G[:, p] = grad_1d_loop(e, h)
    return G


def limited_step_loop(u, a, h, dt):
    """Scalar conservative Van Leer / Lax-Wendroff flux difference, loops only."""
    n = len(u)
    nu = a * dt / h
    F = np.zeros(n)
    for p in range(n):
        d = u[(p + 1) % n] - u[p]
        if a >= 0:
            d_up = u[p] - u[p - 1]
            FL = a * u[p]
        else:
            d_up = u[(p + 2) % n] - u[(p + 1) % n]
            FL = a * u[(p + 1) % n]
        if abs(d) > 1e-14 * np.max(np.abs(u)):
            th = d_up / d
            phi = (abs(th) + th) / (1 + abs(th))
        else:
            phi = 0.0
        F[p] = FL + 0.5 * phi * (np.sign(a) - nu) * a * d
    return np.array([(F[p] - F[p - 1]) / h for p in range(n)])


def lax_wendroff_loop(u, a, h, dt):
    """(F_{p+1/2} - F_{p-1/2}) / h with the unlimited Lax-Wendroff flux."""
    n = len(u)
    nu = a * dt / h
    F = np.array([0.5 * a * (u[p] + u[(p + 1) % n]) - 0.5 * nu * a * (u[(p + 1) % n] - u[p]) for p in range(n)])
    return np.array([(F[p] - F[p - 1]) / h for p in range(n)])

"""Flux-limited second-order transport in x.

The K equation carries the hyperbolic term ``sum_l c1_jl . grad_x K_l`` with
a symmetric flux matrix per axis.  Each axis is diagonalized, the scalar
characteristic fields are differenced with an upwind / Lax-Wendroff flux
blended by the Van Leer limiter, and the result is rotated back.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .mesh import Grid


class CFLWarning(RuntimeWarning):
    pass


@dataclass
class FluxEigensystem:
    T: np.ndarray  # (d, r, r); columns are eigenvectors
    lam: np.ndarray  # (d, r), ascending per axis


def eigendecompose_flux(c1: np.ndarray) -> FluxEigensystem:
    """Eigen-decompose each ``c1[:, :, m]`` after symmetrization.

    Eigenvalues ascend; each eigenvector is signed so that its first
    non-negligible component is positive.
    """
    d = c1.shape[2]
    r = c1.shape[0]
    T = np.empty((d, r, r))
    lam = np.empty((d, r))
    for m in range(d):
        a = 0.5 * (c1[:, :, m] + c1[:, :, m].T)
        w, q = np.linalg.eigh(a)
        for k in range(r):
            col = q[:, k]
            big = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
            if col[big[0]] < 0:
                q[:, k] = -col
        T[m], lam[m] = q, w
    return FluxEigensystem(T, lam)


def van_leer(theta):
    a = np.abs(theta)
    return (a + theta) / (1.0 + a)


def limited_flux_difference(u: np.ndarray, speed, h: float, dt: float, axis: int) -> np.ndarray:
    """``(F_{p+1/2} - F_{p-1/2}) / h`` for periodic ``u`` along ``axis``.

    ``speed`` is either a per-column speed broadcastable to ``u`` or a face
    speed array of ``u``'s shape, where entry ``p`` is the speed at face
    ``p + 1/2``.  The last axis of ``u`` indexes independent columns and is
    never the differencing axis.
    """
    a = np.broadcast_to(np.asarray(speed, dtype=float), u.shape)
    up = np.roll(u, -1, axis=axis)
    delta = up - u
    sgn = np.sign(a)
    upwind = np.where(a >= 0.0, np.roll(delta, 1, axis=axis), np.roll(delta, -1, axis=axis))
    red = tuple(i for i in range(u.ndim - 1))
    tiny = 1e-14 * np.max(np.abs(u), axis=red, keepdims=True)
    ok = np.abs(delta) > tiny
    theta = np.divide(upwind, delta, out=np.zeros_like(delta), where=ok)
    phi = np.where(ok, van_leer(theta), 0.0)
    F = 0.5 * a * (up + u) - 0.5 * np.abs(a) * delta
    F += 0.5 * phi * (sgn - a * dt / h) * a * delta
    return (F - np.roll(F, 1, axis=axis)) / h


def limited_derivative(khat: np.ndarray, lam, h: float, dt: float, axis: int = 0) -> np.ndarray:
    """Flux-limited approximation of ``lam * d khat / dx``.

    ``khat`` has the periodic axis ``axis`` and, optionally, trailing
    columns; ``lam`` broadcasts against the trailing columns.
    """
    khat = np.asarray(khat, dtype=float)
    squeeze = khat.ndim == 1
    if squeeze:
        khat = khat[:, None]
    lam = np.asarray(lam, dtype=float)
    out = limited_flux_difference(khat, lam, h, dt, axis)
    return out[:, 0] if squeeze else out


def check_cfl(speeds, grid: Grid, dt: float) -> float:
    """Largest CFL number ``|speed| dt / dx``; warns above 1."""
    cfl = float(np.max(np.abs(speeds)) * dt / min(grid.dx)) if np.size(speeds) else 0.0
    if cfl > 1.0:
        warnings.warn(f"CFL number {cfl:.3f} exceeds 1 in x-transport", CFLWarning, stacklevel=2)
    return cfl


def k_transport_rhs(K: np.ndarray, eig: FluxEigensystem, A1: np.ndarray, grid: Grid, dt: float) -> np.ndarray:
    """Explicit part of the K equation, ``-c1 . grad K - A1 K``; shape ``(nx, r)``."""
    r = K.shape[1]
    check_cfl(eig.lam, grid, dt)
    rhs = -np.einsum("pjl,pl->pj", A1, K)
    for m in range(grid.d):
        T = eig.T[m]
        khat = (K @ T).reshape(grid.x_shape + (r,))
        dk = limited_derivative(khat, eig.lam[m], grid.dx[m], dt, axis=m)
        rhs -= dk.reshape(grid.nx, r) @ T.T
    return rhs

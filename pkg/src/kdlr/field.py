"""Electric field: Poisson initialization, Ampere update, and the
field functionals entering the time derivative of the Maxwellian.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .mesh import Grid
from .stencils import periodic_gradient

log = logging.getLogger(__name__)


@dataclass
class FieldState:
    E: np.ndarray  # (nx, d)
    J: np.ndarray  # (nx, d)
    rho: np.ndarray  # (nx,)
    eta: np.ndarray  # (nx,)

    def copy(self) -> "FieldState":
        return FieldState(self.E.copy(), self.J.copy(), self.rho.copy(), self.eta.copy())


@dataclass
class FieldFunctionals:
    """Pointwise coefficients of ``(1/M)(dM/dt + v . grad_x M) = M1 + v.M2 + (v v):M3``."""

    M1: np.ndarray  # (nx,)
    M2: np.ndarray  # (nx, d)
    M3: np.ndarray  # (nx, d, d), M3[:, i, j] = d E_i / d x_j


def neutralize(rho: np.ndarray, eta: np.ndarray, grid: Grid, tol: float = 1e-10) -> np.ndarray:
    """Rescale the background so that ``rho - eta`` has zero mean."""
    total_rho, total_eta = rho.sum(), eta.sum()
    if abs(total_rho - total_eta) <= tol * max(abs(total_rho), 1.0):
        return eta
    if total_eta == 0.0:
        raise ValueError("background density integrates to zero; cannot restore neutrality")
    log.info("rescaling background by %.12g to restore charge neutrality", total_rho / total_eta)
    return eta * (total_rho / total_eta)


def divergence(E: np.ndarray, grid: Grid) -> np.ndarray:
    """Centered second-order divergence on the periodic grid."""
    out = np.zeros(grid.nx)
    for m in range(grid.d):
        out += periodic_gradient(E[:, m], grid.x_shape, grid.dx, m)
    return out


def solve_poisson(rho: np.ndarray, eta: np.ndarray, grid: Grid) -> np.ndarray:
    """Field ``E = -grad phi`` with ``-lap phi = rho - eta`` on the periodic grid.

    The solve is done in Fourier space with the symbol of the centered
    difference, ``sin(k h) / h``, so that :func:`divergence` of the result
    reproduces the (mean-free, non-Nyquist part of the) source to round-off.
    A non-neutral source is first corrected with :func:`neutralize`.
    """
    eta = neutralize(rho, eta, grid)
    src = (rho - eta).reshape(grid.x_shape)
    shat = np.fft.fftn(src)
    sig = []
    for m in range(grid.d):
        k = 2.0 * np.pi * np.fft.fftfreq(grid.nx_per_axis, d=grid.dx[m])
        s = np.sin(k * grid.dx[m]) / grid.dx[m]
        shape = [1] * grid.d
        shape[m] = -1
        sig.append(s.reshape(shape))
    denom = sum(s * s for s in sig)
    denom = np.broadcast_to(denom, grid.x_shape)
    ok = denom > 1e-12 * denom.max()
    phihat = np.zeros_like(shat)
    phihat[ok] = shat[ok] / denom[ok]
    E = np.empty((grid.nx, grid.d))
    for m in range(grid.d):
        E[:, m] = np.real(np.fft.ifftn(-1j * sig[m] * phihat)).ravel()
    return E


def ampere_step(E: np.ndarray, J: np.ndarray, dt: float) -> np.ndarray:
    return E - dt * J


def gauss_residual(E: np.ndarray, rho: np.ndarray, eta: np.ndarray, grid: Grid) -> float:
    """L1 norm of ``div E - (rho - eta)``."""
    return float(np.sum(np.abs(divergence(E, grid) - (rho - eta))) * grid.dx_vol)


def field_functionals(E: np.ndarray, J: np.ndarray, grid: Grid) -> FieldFunctionals:
    d = grid.d
    M1 = np.sum(E * J, axis=1)
    E2 = np.sum(E * E, axis=1)
    M2 = np.empty((grid.nx, d))
    M3 = np.empty((grid.nx, d, d))
    for j in range(d):
        M2[:, j] = -J[:, j] - 0.5 * periodic_gradient(E2, grid.x_shape, grid.dx, j)
        M3[:, :, j] = periodic_gradient(E, grid.x_shape, grid.dx, j)
    return FieldFunctionals(M1, M2, M3)

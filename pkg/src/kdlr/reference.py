"""Validation solvers: the full phase-space discretization and the limiting
drift-fluid system.

The full solver advances ``g = f / M`` on the whole ``(nx, nv)`` grid with the
same operators as the low-rank scheme: the limited transport stencil at each
velocity node (speed ``v``), the explicit Maxwellian-derivative term and the
implicit shifted Fokker-Planck stencil with the row's own field value.  The
state itself is stored as ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import solve_shifted_rows
from .field import ampere_step, field_functionals
from .mesh import Grid
from .moments import dense_moments, maxwellian
from .transport import check_cfl, limited_flux_difference


@dataclass
class FullTensorState:
    f: np.ndarray  # (nx, nv)
    E: np.ndarray  # (nx, d)

    def copy(self) -> "FullTensorState":
        return FullTensorState(self.f.copy(), self.E.copy())

    def mass(self, grid: Grid) -> float:
        return float(np.sum(self.f * grid.wv[None, :]) * grid.dx_vol)


@dataclass
class FluidState:
    rho: np.ndarray  # (nx,)
    E: np.ndarray  # (nx, d)

    def copy(self) -> "FluidState":
        return FluidState(self.rho.copy(), self.E.copy())

    def mass(self, grid: Grid) -> float:
        return float(np.sum(self.rho) * grid.dx_vol)


def x_transport(g: np.ndarray, grid: Grid, dt: float) -> np.ndarray:
    """``-v . grad_x g`` for every velocity column with the limited stencil."""
    check_cfl(grid.v, grid, dt)
    u = g.reshape(grid.x_shape + (grid.nv,))
    out = np.zeros_like(u)
    for m in range(grid.d):
        out -= limited_flux_difference(u, grid.v[:, m], grid.dx[m], dt, axis=m)
    return out.reshape(g.shape)


def maxwellian_rate(E: np.ndarray, J: np.ndarray, grid: Grid) -> np.ndarray:
    """Pointwise ``(1/M)(dM/dt + v . grad_x M)`` on the full grid, ``(nx, nv)``."""
    ff = field_functionals(E, J, grid)
    v = grid.v
    out = ff.M1[:, None] + ff.M2 @ v.T
    out += np.einsum("pmn,qm,qn->pq", ff.M3, v, v)
    return out


def full_tensor_step(
    state: FullTensorState,
    grid: Grid,
    dt: float,
    eps: float,
    tol: float = 1e-12,
) -> FullTensorState:
    """One IMEX step; the returned ``f`` is ``M(E_new) g_new``."""
    E = state.E
    M = maxwellian(E, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(M > 0.0, state.f / M, 0.0)
    _, J = dense_moments(state.f, grid)
    E_new = ampere_step(E, J, dt)
    rhs = g + dt * (x_transport(g, grid, dt) - maxwellian_rate(E, J, grid) * g)
    if np.isinf(eps):
        g_new = rhs
    else:
        g_new, _ = solve_shifted_rows(rhs, E, grid, dt / eps, tol=tol)
    return FullTensorState(maxwellian(E_new, grid) * g_new, E_new)


def fluid_step(state: FluidState, grid: Grid, dt: float) -> FluidState:
    """``rho' = rho - dt div(rho E)``, ``E' = E - dt rho E``.

    The density flux uses the limited conservative stencil with the face
    speed ``(E_p + E_{p+1}) / 2``.
    """
    rho, E = state.rho, state.E
    u = rho.reshape(grid.x_shape + (1,))
    div = np.zeros_like(u)
    for m in range(grid.d):
        e = E[:, m].reshape(grid.x_shape + (1,))
        face = 0.5 * (e + np.roll(e, -1, axis=m))
        div += limited_flux_difference(u, face, grid.dx[m], dt, axis=m)
    rho_new = rho - dt * div.reshape(rho.shape)
    return FluidState(rho_new, E - dt * rho[:, None] * E)

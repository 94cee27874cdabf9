"""Initial data for the standard test problems.

Each problem supplies the density used for the Poisson solve, the
background charge ``eta`` and a callable building ``f`` samples from the
initial field (only the local-equilibrium problem actually depends on it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .field import neutralize, solve_poisson
from .mesh import Grid
from .moments import dense_moments, maxwellian
from .state import LowRankState, init_from_samples

SQRT_2PI = np.sqrt(2.0 * np.pi)
# modified Bessel I0(1), normalizes exp(cos 2 pi x) on the unit interval
BESSEL_I0_1 = 1.2661


@dataclass
class InitialData:
    rho: np.ndarray  # (nx,)
    eta: np.ndarray  # (nx,)
    build_f: Callable[[np.ndarray], np.ndarray]  # E (nx, d) -> f (nx, nv)
    E: np.ndarray | None = None
    f: np.ndarray | None = None


def _from_samples(f: np.ndarray, eta: np.ndarray, grid: Grid) -> InitialData:
    rho, _ = dense_moments(f, grid)
    return InitialData(rho, eta, lambda E: f)


def counterstreaming(grid: Grid, speed: float = 1.5) -> InitialData:
    x = grid.x[:, 0]
    v = grid.v[:, 0]
    rho0 = SQRT_2PI * (2.0 + np.cos(2.0 * np.pi * x))
    eta = 2.0 * SQRT_2PI / BESSEL_I0_1 * np.exp(np.cos(2.0 * np.pi * x))
    beams = np.exp(-0.5 * (v - speed) ** 2) + np.exp(-0.5 * (v + speed) ** 2)
    f = rho0[:, None] / (2.0 * SQRT_2PI) * beams[None, :]
    return _from_samples(f, eta, grid)


def local_equilibrium(grid: Grid) -> InitialData:
    x = grid.x[:, 0]
    rho0 = 0.5 * SQRT_2PI * (2.0 + np.cos(2.0 * np.pi * x))
    eta = SQRT_2PI / BESSEL_I0_1 * np.exp(np.cos(2.0 * np.pi * x))
    return InitialData(rho0, eta, lambda E: rho0[:, None] * maxwellian(E, grid))


def bump_on_tail(grid: Grid, t_cold: float = 0.005, bump_speed: float = 1.5) -> InitialData:
    x = grid.x[:, 0]
    v = grid.v[:, 0]
    rho0 = 0.3 + np.exp(-((x - 0.3) ** 2) / 0.01)
    eta = 0.3 + np.exp(-((x - 0.6) ** 2) / 0.01)
    shape = np.exp(-0.5 * v**2) + np.exp(-0.5 * (v - bump_speed) ** 2 / t_cold)
    f = rho0[:, None] / SQRT_2PI * shape[None, :]
    return _from_samples(f, eta, grid)


def potential_hill(
    grid: Grid,
    center=(0.3, 0.3),
    variances=(0.006, 0.03),
    angle: float = np.pi / 4,
    drift=(0.5, 0.5),
    temperature: float = 0.01,
    band=(0.55, 0.7),
) -> InitialData:
    x = grid.x
    R = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    sigma = R @ np.diag(variances) @ R.T
    dxv = x - np.asarray(center)
    quad = np.einsum("pi,ij,pj->p", dxv, np.linalg.inv(sigma), dxv)
    rho0 = 0.1 + 0.0003 / (2.0 * np.pi * np.linalg.det(sigma)) * np.exp(-0.5 * quad)
    dv = grid.v - np.asarray(drift)
    vel = np.exp(-0.5 * np.sum(dv * dv, axis=1) / temperature) / (2.0 * np.pi * temperature)
    f = rho0[:, None] * vel[None, :]
    support = (x[:, 0] < band[0]) | (x[:, 0] > band[1])
    eta = support.astype(float)
    # constant on its support with total charge equal to the total mass
    rho, _ = dense_moments(f, grid)
    eta *= rho.sum() / eta.sum()
    return InitialData(rho, eta, lambda E: f)


def cold_beam(grid: Grid, drift=(4.0, 2.0), width: float = 0.5) -> InitialData:
    dv = grid.v - np.asarray(drift)
    vel = np.exp(-np.sum(dv * dv, axis=1) / width)
    f = np.broadcast_to(vel, (grid.nx, grid.nv)).copy()
    rho, _ = dense_moments(f, grid)
    return InitialData(rho, rho.copy(), lambda E: f)


PROBLEMS = {
    "counterstreaming": (counterstreaming, 1),
    "local_equilibrium": (local_equilibrium, 1),
    "bump_on_tail": (bump_on_tail, 1),
    "potential_hill_2d": (potential_hill, 2),
    "cold_beam_2d": (cold_beam, 2),
}


def prepare(data: InitialData, grid: Grid) -> InitialData:
    """Solve Poisson for the initial field and sample ``f`` from it."""
    data.eta = neutralize(data.rho, data.eta, grid)
    data.E = solve_poisson(data.rho, data.eta, grid)
    data.f = data.build_f(data.E)
    return data


def low_rank_initial(data: InitialData, r: int, grid: Grid) -> LowRankState:
    """Rank-``r`` factorization of ``g = f / M(E)`` from prepared data."""
    M = maxwellian(data.E, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(data.f > 0.0, data.f / M, 0.0)
    return init_from_samples(g, r, grid)

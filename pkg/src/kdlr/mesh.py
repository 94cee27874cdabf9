"""Uniform phase-space grids.

The spatial grid is periodic and stores no duplicated endpoint, so the node
count equals the cell count.  The velocity grid is a truncated box that
includes both endpoints.  Multi-dimensional arrays are flattened in C order,
so a 2D spatial field of shape ``(nx, nx)`` is stored as ``(nx * nx,)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class ConfigurationError(ValueError):
    """Raised for inconsistent grid or run parameters."""


def _per_axis(value, d: int, name: str) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.repeat(arr, d)
    if arr.size != d:
        raise ConfigurationError(f"{name} must have {d} entries, got {arr.size}")
    return tuple(float(a) for a in arr)


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True, eq=False)
class Grid:
    d: int
    x_lo: tuple[float, ...]
    x_hi: tuple[float, ...]
    nx_per_axis: int
    v_lo: tuple[float, ...]
    v_hi: tuple[float, ...]
    nv_per_axis: int
    dx: tuple[float, ...] = field(init=False)
    dv: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        dx = tuple((hi - lo) / self.nx_per_axis for lo, hi in zip(self.x_lo, self.x_hi))
        dv = tuple((hi - lo) / (self.nv_per_axis - 1) for lo, hi in zip(self.v_lo, self.v_hi))
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dv", dv)

    @property
    def nx(self) -> int:
        """Total number of spatial nodes."""
        return self.nx_per_axis**self.d

    @property
    def nv(self) -> int:
        """Total number of velocity nodes."""
        return self.nv_per_axis**self.d

    @property
    def x_shape(self) -> tuple[int, ...]:
        return (self.nx_per_axis,) * self.d

    @property
    def v_shape(self) -> tuple[int, ...]:
        return (self.nv_per_axis,) * self.d

    @property
    def dx_vol(self) -> float:
        return float(np.prod(self.dx))

    @cached_property
    def x_axes(self) -> tuple[np.ndarray, ...]:
        return tuple(
            lo + h * np.arange(self.nx_per_axis) for lo, h in zip(self.x_lo, self.dx)
        )

    @cached_property
    def v_axes(self) -> tuple[np.ndarray, ...]:
        axes = []
        for lo, hi, h in zip(self.v_lo, self.v_hi, self.dv):
            ax = lo + h * np.arange(self.nv_per_axis)
            ax[-1] = hi
            axes.append(ax)
        return tuple(axes)

    @cached_property
    def x(self) -> np.ndarray:
        """Spatial node coordinates, shape ``(nx, d)``."""
        mesh = np.meshgrid(*self.x_axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @cached_property
    def v(self) -> np.ndarray:
        """Velocity node coordinates, shape ``(nv, d)``."""
        mesh = np.meshgrid(*self.v_axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @cached_property
    def wx(self) -> np.ndarray:
        """Rectangle-rule quadrature weights on the periodic x-grid."""
        return np.full(self.nx, self.dx_vol)

    @cached_property
    def wv(self) -> np.ndarray:
        """Tensor-product trapezoid weights on the velocity grid."""
        w = np.ones(1)
        for h in self.dv:
            w = np.multiply.outer(w, trapezoid_weights(self.nv_per_axis, h)).ravel()
        return w

    def refines(self, coarse: "Grid") -> tuple[int, int]:
        """Integer refinement factors ``(kx, kv)`` of this grid over ``coarse``.

        The x-grid refines when ``nx = kx * nx_coarse``; the endpoint-inclusive
        v-grid refines when ``nv - 1 = kv * (nv_coarse - 1)``.
        """
        if (
            self.d != coarse.d
            or self.x_lo != coarse.x_lo
            or self.x_hi != coarse.x_hi
            or self.v_lo != coarse.v_lo
            or self.v_hi != coarse.v_hi
        ):
            raise ConfigurationError("grids cover different domains")
        kx, rx = divmod(self.nx_per_axis, coarse.nx_per_axis)
        kv, rv = divmod(self.nv_per_axis - 1, coarse.nv_per_axis - 1)
        if rx or rv or kx < 1 or kv < 1:
            raise ConfigurationError(
                f"grid ({self.nx_per_axis}, {self.nv_per_axis}) is not an integer "
                f"refinement of ({coarse.nx_per_axis}, {coarse.nv_per_axis})"
            )
        return kx, kv


def build_grid(
    d: int,
    x_bounds=(0.0, 1.0),
    nx_per_axis: int = 64,
    v_bounds=(-10.0, 10.0),
    nv_per_axis: int = 64,
) -> Grid:
    """Build a periodic-x, truncated-v tensor grid.

    ``x_bounds`` and ``v_bounds`` are ``(lo, hi)`` pairs whose entries may be
    scalars (shared by every axis) or length-``d`` sequences.
    """
    if d not in (1, 2):
        raise ConfigurationError(f"dimension must be 1 or 2, got {d}")
    if nx_per_axis < 4 or nv_per_axis < 4:
        raise ConfigurationError("need at least 4 points per axis")
    x_lo, x_hi = (_per_axis(b, d, "x bound") for b in x_bounds)
    v_lo, v_hi = (_per_axis(b, d, "v bound") for b in v_bounds)
    for lo, hi in zip(x_lo + v_lo, x_hi + v_hi):
        if not hi > lo:
            raise ConfigurationError(f"bounds must be ordered, got ({lo}, {hi})")
    return Grid(d, x_lo, x_hi, int(nx_per_axis), v_lo, v_hi, int(nv_per_axis))


def cfl_timestep(grid: Grid, v_max: float, cfl: float = 0.25) -> float:
    """Largest step with ``v_max * dt / dx <= cfl`` on every axis."""
    if not 0.0 < cfl <= 1.0:
        raise ConfigurationError("cfl must lie in (0, 1]")
    if v_max <= 0.0:
        raise ConfigurationError("v_max must be positive")
    return cfl * min(grid.dx) / v_max

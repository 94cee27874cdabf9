"""Error norms, convergence slopes and run histories."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .mesh import ConfigurationError, Grid
from .moments import dense_moments, maxwellian
from .state import LowRankState, reconstruct_f


def _refine_axis(a: np.ndarray, axis: int, k: int, periodic: bool) -> np.ndarray:
    """Linear interpolation onto a grid ``k`` times finer along ``axis``."""
    if k == 1:
        return a
    a = np.moveaxis(a, axis, 0)
    n = a.shape[0]
    n_fine = k * n if periodic else k * (n - 1) + 1
    pos = np.arange(n_fine) / k
    lo = np.floor(pos).astype(int)
    t = (pos - lo).reshape((-1,) + (1,) * (a.ndim - 1))
    if periodic:
        hi = (lo + 1) % n
    else:
        lo = np.minimum(lo, n - 1)
        hi = np.minimum(lo + 1, n - 1)
    out = (1.0 - t) * a[lo] + t * a[hi]
    return np.moveaxis(out, 0, axis)


def interpolate_to(f: np.ndarray, coarse: Grid, fine: Grid) -> np.ndarray:
    """Tensor-product linear interpolation of ``(nx, nv)`` samples onto ``fine``."""
    kx, kv = fine.refines(coarse)
    a = f.reshape(coarse.x_shape + coarse.v_shape)
    d = coarse.d
    for m in range(d):
        a = _refine_axis(a, m, kx, periodic=True)
    for m in range(d):
        a = _refine_axis(a, d + m, kv, periodic=False)
    return a.reshape(fine.nx, fine.nv)


def l1_norm(f: np.ndarray, grid: Grid) -> float:
    return float(np.sum(np.abs(f) * grid.wv[None, :]) * grid.dx_vol)


def l1_diff(fA: np.ndarray, gridA: Grid, fB: np.ndarray, gridB: Grid) -> float:
    """``||I fA - fB||_1`` on ``gridB``, ``I`` the linear interpolant.

    ``gridB`` must refine ``gridA`` by integer factors (or equal it);
    otherwise :class:`ConfigurationError` is raised.
    """
    return l1_norm(interpolate_to(fA, gridA, gridB) - fB, gridB)


def observed_order(errors, h) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``.

    Non-positive errors are dropped with a warning.
    """
    errors = np.asarray(errors, dtype=float)
    h = np.asarray(h, dtype=float)
    if errors.size != h.size:
        raise ValueError("errors and spacings differ in length")
    if errors.size < 3:
        raise ValueError("need at least three error values")
    ok = errors > 0.0
    if not ok.all():
        warnings.warn(f"dropping {int((~ok).sum())} non-positive error value(s)", RuntimeWarning, stacklevel=2)
    if ok.sum() < 2:
        raise ValueError("fewer than two positive error values")
    slope, _ = np.polyfit(np.log(h[ok]), np.log(errors[ok]), 1)
    return float(slope)


def maxwellian_distance(f, E: np.ndarray, grid: Grid) -> float:
    """``||f - rho M(E)||_1`` with ``rho`` the density of ``f``.

    ``f`` may be full samples or a :class:`LowRankState` of ``g = f / M``.
    """
    if isinstance(f, LowRankState):
        f = reconstruct_f(f, E, grid)
    rho, _ = dense_moments(f, grid)
    return l1_norm(f - rho[:, None] * maxwellian(E, grid), grid)


@dataclass
class RunHistory:
    t: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    gauss_res: list = field(default_factory=list)
    maxw_dist: list = field(default_factory=list)
    wall_ms: list = field(default_factory=list)

    def append(self, t, sigma, mass, gauss_res, maxw_dist, wall_ms) -> None:
        if self.t and not t > self.t[-1]:
            raise ValueError("time stamps must increase")
        self.t.append(float(t))
        self.sigma.append(np.asarray(sigma if sigma is not None else [], dtype=float))
        self.mass.append(float(mass))
        self.gauss_res.append(float(gauss_res))
        self.maxw_dist.append(float(maxw_dist))
        self.wall_ms.append(float(wall_ms))

    def __len__(self) -> int:
        return len(self.t)

    @property
    def rank(self) -> int:
        return len(self.sigma[0]) if self.sigma else 0

    def header(self) -> list[str]:
        return ["t"] + [f"sigma{i + 1}" for i in range(self.rank)] + ["mass", "gauss_res", "maxw_dist", "wall_ms"]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            for i in range(len(self)):
                vals = [self.t[i], *self.sigma[i], self.mass[i], self.gauss_res[i], self.maxw_dist[i], self.wall_ms[i]]
                w.writerow([f"{v:.17g}" for v in vals])


def read_history_csv(path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}

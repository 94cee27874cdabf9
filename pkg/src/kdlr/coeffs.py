"""Basis inner products feeding the K, S and L sub-steps.

Quadrature is the rectangle rule on the periodic x-grid and the trapezoid
rule on the v-grid.  Velocity derivatives use centered differences with
one-sided second-order rows at the velocity bounds; spatial derivatives are
periodic centered differences.

Index conventions (all numpy arrays):

* velocity tensors ``c1[j, l, m]``, ``c2[j, l, m, n]``, ``d1[j, l]``, ``d2[j, l, m]``
* space tensors ``cstar[i, k]``, ``cstarstar[i, k, m]``, ``cstar3[i, k, m, n]``,
  ``dstar[i, k, m]``, ``estar[i, k, m]``
* order-four tensors ``B[i, j, k, l]`` act as ``sum_kl B[i, j, k, l] S[k, l]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import FieldFunctionals
from .mesh import Grid
from .stencils import bounded_gradient, bounded_second_derivative, periodic_gradient


@dataclass
class VelocityCoeffs:
    c1: np.ndarray
    c2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


@dataclass
class SpaceCoeffs:
    cstar: np.ndarray
    cstarstar: np.ndarray
    cstar3: np.ndarray
    dstar: np.ndarray
    estar: np.ndarray


def velocity_inner_products(V: np.ndarray, grid: Grid) -> VelocityCoeffs:
    d, r = grid.d, V.shape[1]
    v = grid.v
    Vw = V * grid.wv[:, None]
    c1 = np.empty((r, r, d))
    c2 = np.empty((r, r, d, d))
    d2 = np.empty((r, r, d))
    drift = np.zeros_like(V)
    lap = np.zeros_like(V)
    for m in range(d):
        c1[:, :, m] = Vw.T @ (v[:, m, None] * V)
        for n in range(m, d):
            c2[:, :, m, n] = Vw.T @ ((v[:, m] * v[:, n])[:, None] * V)
            c2[:, :, n, m] = c2[:, :, m, n]
        grad = bounded_gradient(V, grid.v_shape, grid.dv, m)
        d2[:, :, m] = Vw.T @ grad
        drift += v[:, m, None] * grad
        lap += bounded_second_derivative(V, grid.v_shape, grid.dv, m)
    d1 = Vw.T @ (lap - drift)
    return VelocityCoeffs(c1, c2, d1, d2)


def k_matrices(vc: VelocityCoeffs, ff: FieldFunctionals, E: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise ``(nx, r, r)`` matrices of the explicit and stiff K terms."""
    r = vc.d1.shape[0]
    A1 = ff.M1[:, None, None] * np.eye(r)[None]
    A1 = A1 + np.einsum("jlm,pm->pjl", vc.c1, ff.M2)
    A1 = A1 + np.einsum("jlmn,pmn->pjl", vc.c2, ff.M3)
    A2 = vc.d1[None] + np.einsum("jlm,pm->pjl", vc.d2, E)
    return A1, A2


def space_inner_products(X: np.ndarray, ff: FieldFunctionals, E: np.ndarray, grid: Grid) -> SpaceCoeffs:
    d, r = grid.d, X.shape[1]
    Xw = X * grid.dx_vol
    cstar = Xw.T @ (ff.M1[:, None] * X)
    cstarstar = np.empty((r, r, d))
    cstar3 = np.empty((r, r, d, d))
    dstar = np.empty((r, r, d))
    estar = np.empty((r, r, d))
    for m in range(d):
        cstarstar[:, :, m] = Xw.T @ (ff.M2[:, m, None] * X)
        estar[:, :, m] = Xw.T @ (E[:, m, None] * X)
        dstar[:, :, m] = Xw.T @ periodic_gradient(X, grid.x_shape, grid.dx, m)
        for n in range(d):
            cstar3[:, :, m, n] = Xw.T @ (ff.M3[:, m, n, None] * X)
    return SpaceCoeffs(cstar, cstarstar, cstar3, dstar, estar)


def s_tensors(vc: VelocityCoeffs, sc: SpaceCoeffs) -> tuple[np.ndarray, np.ndarray]:
    r = vc.d1.shape[0]
    eye = np.eye(r)
    ctilde = (
        np.einsum("jl,ik->ijkl", eye, sc.cstar)
        + np.einsum("jlm,ikm->ijkl", vc.c1, sc.cstarstar)
        + np.einsum("jlmn,ikmn->ijkl", vc.c2, sc.cstar3)
    )
    B1 = np.einsum("ikm,jlm->ijkl", sc.dstar, vc.c1) + ctilde
    B2 = np.einsum("ik,jl->ijkl", eye, vc.d1) + np.einsum("ikm,jlm->ijkl", sc.estar, vc.d2)
    return B1, B2


def l_matrix(sc: SpaceCoeffs, grid: Grid) -> np.ndarray:
    """``chat[q, i, k] = cstar + v_q . cstarstar + (v_q v_q) : cstar3``."""
    v = grid.v
    chat = np.broadcast_to(sc.cstar, (grid.nv,) + sc.cstar.shape).copy()
    chat += np.einsum("qm,ikm->qik", v, sc.cstarstar)
    chat += np.einsum("qm,qn,ikmn->qik", v, v, sc.cstar3)
    return chat

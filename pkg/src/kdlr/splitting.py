"""One time step of the low-rank scheme.

The field is advanced first with the current of the incoming state, then the
factors go through the K, S and L sub-steps of the projector-splitting
integrator.  Stiff collision terms are implicit in K and L; the S sub-step is
explicit in every term, which makes the backward K flow and forward S flow
cancel exactly on spatially homogeneous data.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .coeffs import (
    SpaceCoeffs,
    VelocityCoeffs,
    k_matrices,
    l_matrix,
    s_tensors,
    space_inner_products,
    velocity_inner_products,
)
from .collision import solve_k_collision, solve_l_system
from .field import FieldFunctionals, FieldState, ampere_step, field_functionals, gauss_residual
from .mesh import Grid
from .moments import DEFAULT_INTERP_ORDER, macroscopic_moments
from .state import LowRankState, reorthonormalize, singular_values
from .transport import eigendecompose_flux, k_transport_rhs


@dataclass
class StepOptions:
    s_scheme: str = "forward_euler"  # or "imex" (diagnostic only)
    gmres_tol: float = 1e-10
    gmres_restart: int = 30
    gmres_maxiter: int = 400
    preconditioner: str = "exact"
    interp_order: int = DEFAULT_INTERP_ORDER
    refine: int | None = None


@dataclass
class StepReport:
    step: int
    wall_ms: dict = field(default_factory=dict)
    gmres_iterations: int = 0
    sigma: np.ndarray | None = None
    gauss_res: float = float("nan")
    mass: float = float("nan")

    def is_finite(self) -> bool:
        vals = [self.gauss_res, self.mass, *self.wall_ms.values()]
        return bool(np.all(np.isfinite(vals)) and np.all(np.isfinite(self.sigma)))


def make_field(state: LowRankState, E: np.ndarray, eta: np.ndarray, grid: Grid, options: StepOptions | None = None) -> FieldState:
    """Field record whose cached ``rho`` and ``J`` are the moments of ``state``."""
    options = options or StepOptions()
    rho, J = macroscopic_moments(state, E, grid, options.interp_order, options.refine)
    return FieldState(np.array(E, dtype=float), J, rho, np.asarray(eta, dtype=float))


def k_step(state: LowRankState, vc: VelocityCoeffs, ff: FieldFunctionals, E: np.ndarray, grid: Grid, dt: float, eps: float):
    """Advance ``K = X S`` and re-factor; returns ``(X1, S1)``."""
    A1, A2 = k_matrices(vc, ff, E)
    K = state.K()
    rhs = K + dt * k_transport_rhs(K, eigendecompose_flux(vc.c1), A1, grid, dt)
    K1 = solve_k_collision(rhs, A2, dt, eps)
    return reorthonormalize(K1, grid.dx_vol)


def s_step(S1: np.ndarray, B1: np.ndarray, B2: np.ndarray, dt: float, eps: float, scheme: str = "forward_euler") -> np.ndarray:
    """``S2 = S1 + dt B1:S1 - dt/eps B2:S1`` (explicit in both terms).

    ``scheme="imex"`` treats the ``B2`` term implicitly instead; it exists to
    demonstrate that doing so breaks the equilibrium cancellation.
    """
    explicit = S1 + dt * np.einsum("ijkl,kl->ij", B1, S1)
    if scheme == "forward_euler":
        return explicit - (dt / eps) * np.einsum("ijkl,kl->ij", B2, S1)
    if scheme == "imex":
        r = S1.shape[0]
        A = np.eye(r * r) + (dt / eps) * B2.reshape(r * r, r * r)
        return np.linalg.solve(A, explicit.ravel()).reshape(r, r)
    raise ValueError(f"unknown S scheme {scheme!r}")


def l_explicit_rhs(L: np.ndarray, sc: SpaceCoeffs, grid: Grid, dt: float) -> np.ndarray:
    """``L - dt sum_k (v . dstar_ik + chat_ik) L_k``; shapes ``(nv, r)``."""
    chat = l_matrix(sc, grid)
    flux = np.einsum("qm,ikm->qik", grid.v, sc.dstar) + chat
    return L - dt * np.einsum("qik,qk->qi", flux, L)


def l_step(S2: np.ndarray, state_V: np.ndarray, sc: SpaceCoeffs, grid: Grid, dt: float, eps: float, options: StepOptions | None = None):
    """Advance ``L_i = sum_j S2_ij V_j``; returns ``(V1, S_new, SolveInfo)``.

    With ``L1 = V1 R`` from the weighted QR, ``S_new = R.T`` so that
    ``L1_i = sum_j S_new_ij V1_j``.
    """
    options = options or StepOptions()
    L = state_V @ S2.T
    rhs = l_explicit_rhs(L, sc, grid, dt)
    L1, info = solve_l_system(
        rhs,
        sc.estar,
        grid,
        dt,
        eps,
        tol=options.gmres_tol,
        restart=options.gmres_restart,
        maxiter=options.gmres_maxiter,
        preconditioner=options.preconditioner,
    )
    V1, R = reorthonormalize(L1, grid.wv)
    return V1, R.T, info


def advance(
    state: LowRankState,
    fld: FieldState,
    grid: Grid,
    dt: float,
    eps: float,
    options: StepOptions | None = None,
    step: int = 0,
) -> tuple[LowRankState, FieldState, StepReport]:
    """One full step from ``(state, fld)`` at ``t_n`` to ``t_{n+1}``.

    ``fld.J`` must hold the current of ``state`` at ``fld.E`` (see
    :func:`make_field`); the returned field carries the moments of the new
    state so the next call can reuse them.
    """
    if dt <= 0.0:
        raise ValueError("time step must be positive")
    options = options or StepOptions()
    t0 = time.perf_counter()
    E, J = fld.E, fld.J
    E_new = ampere_step(E, J, dt)
    ff = field_functionals(E, J, grid)
    vc = velocity_inner_products(state.V, grid)
    t1 = time.perf_counter()
    X1, S1 = k_step(state, vc, ff, E, grid, dt, eps)
    t2 = time.perf_counter()
    sc = space_inner_products(X1, ff, E, grid)
    B1, B2 = s_tensors(vc, sc)
    S2 = s_step(S1, B1, B2, dt, eps, options.s_scheme)
    t3 = time.perf_counter()
    V1, S_new, info = l_step(S2, state.V, sc, grid, dt, eps, options)
    new_state = LowRankState(X1, S_new, V1)
    t4 = time.perf_counter()
    rho, J_new = macroscopic_moments(new_state, E_new, grid, options.interp_order, options.refine)
    t5 = time.perf_counter()
    new_field = FieldState(E_new, J_new, rho, fld.eta)
    wall = {
        "prep": 1e3 * (t1 - t0),
        "k": 1e3 * (t2 - t1),
        "s": 1e3 * (t3 - t2),
        "l": 1e3 * (t4 - t3),
        "moments": 1e3 * (t5 - t4),
        "total": 1e3 * (t5 - t0),
    }
    report = StepReport(
        step=step,
        wall_ms=wall,
        gmres_iterations=info.iterations,
        sigma=singular_values(new_state),
        gauss_res=gauss_residual(E_new, rho, fld.eta, grid),
        mass=float(np.sum(rho) * grid.dx_vol),
    )
    return new_state, new_field, report

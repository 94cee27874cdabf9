"""Implicit velocity-space operators of the K and L sub-steps.

The shifted Fokker-Planck operator acting on ``g = f / M`` is discretized in
flux form, axis by axis,

    (T g)_p = [M_{p+1/2} (g_{p+1} - g_p) - M_{p-1/2} (g_p - g_{p-1})] / (M_p dv^2)

with ``M`` the Maxwellian shifted by ``e`` and zero flux through the outer
half nodes.  ``M_p T`` is symmetric negative semidefinite, so the spectrum of
``T`` is real and non-positive.  Maxwellian ratios are formed in log space so
that the stencil stays finite far out in the tails.
"""

from __future__ import annotations

import logging
import warnings
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .krylov import SolveInfo, gmres, tridiagonal_solve
from .mesh import Grid
from .stencils import bounded_gradient, gradient_matrix_1d

log = logging.getLogger(__name__)

TAIL_STDS = 3.0


class SingularSystemError(np.linalg.LinAlgError):
    pass


def stencil_1d(e, nodes: np.ndarray, h: float):
    """Tridiagonal coefficients ``(lo, di, up)`` of ``T`` along one axis.

    ``e`` may be a scalar or an array of shifts; the result has shape
    ``e.shape + (n,)``.  Row ``p`` reads ``lo[p] g[p-1] + di[p] g[p] + up[p] g[p+1]``.
    """
    e = np.asarray(e, dtype=float)[..., None]
    z = nodes - e
    up = np.exp(-0.5 * z * h - h * h / 8.0) / (h * h)
    lo = np.exp(0.5 * z * h - h * h / 8.0) / (h * h)
    up = up.copy()
    lo = lo.copy()
    up[..., -1] = 0.0
    lo[..., 0] = 0.0
    return lo, -(lo + up), up


def _warn_tail(e, grid: Grid) -> None:
    e = np.atleast_1d(np.asarray(e, dtype=float))
    for m in range(grid.d):
        margin = min(grid.v_hi[m] - np.max(e[..., m]), np.min(e[..., m]) - grid.v_lo[m])
        if margin < TAIL_STDS:
            warnings.warn(
                f"shift lies within {TAIL_STDS:g} standard deviations of the velocity bound on axis {m}",
                RuntimeWarning,
                stacklevel=3,
            )
            return


def _tridiag_sparse(lo, di, up) -> sp.csr_matrix:
    return sp.diags([lo[1:], di, up[:-1]], [-1, 0, 1], format="csr")


def assemble_T(e, grid: Grid) -> sp.csr_matrix:
    """Sparse ``(nv, nv)`` matrix of the operator shifted by the field value ``e``."""
    e = np.atleast_1d(np.asarray(e, dtype=float))
    _warn_tail(e, grid)
    mats = []
    for m in range(grid.d):
        mats.append(_tridiag_sparse(*stencil_1d(e[m], grid.v_axes[m], grid.dv[m])))
    if grid.d == 1:
        return mats[0]
    n0, n1 = grid.v_shape
    return (sp.kron(mats[0], sp.identity(n1)) + sp.kron(sp.identity(n0), mats[1])).tocsr()


def assemble_U(e_ik, grid: Grid) -> sp.csr_matrix:
    """Sparse ``e_ik . grad_v`` with the bounded centered gradient."""
    e_ik = np.atleast_1d(np.asarray(e_ik, dtype=float))
    G = [gradient_matrix_1d(grid.nv_per_axis, h) for h in grid.dv]
    if grid.d == 1:
        return (e_ik[0] * G[0]).tocsr()
    n0, n1 = grid.v_shape
    return (e_ik[0] * sp.kron(G[0], sp.identity(n1)) + e_ik[1] * sp.kron(sp.identity(n0), G[1])).tocsr()


def _flux_apply(u: np.ndarray, lo: np.ndarray, up: np.ndarray, axis: int) -> np.ndarray:
    """``up (u[p+1] - u[p]) - lo (u[p] - u[p-1])`` along ``axis``.

    Written as a difference of fluxes so that constants map to exactly zero.
    ``lo[0]`` and ``up[-1]`` are never read (zero-flux closure).
    """
    n = u.shape[axis]
    head = (slice(None),) * axis + (slice(0, n - 1),)
    tail = (slice(None),) * axis + (slice(1, n),)
    jump = u[tail] - u[head]
    out = np.zeros(u.shape)
    out[head] = np.broadcast_to(up, u.shape)[head] * jump
    out[tail] -= np.broadcast_to(lo, u.shape)[tail] * jump
    return out


def apply_T(u: np.ndarray, e, grid: Grid) -> np.ndarray:
    """Matrix-free ``T(e) u`` for ``u`` of shape ``(nv,)`` or ``(nv, cols)``."""
    e = np.atleast_1d(np.asarray(e, dtype=float))
    squeeze = u.ndim == 1
    cols = 1 if squeeze else u.shape[1]
    b = u.reshape(grid.v_shape + (cols,))
    out = np.zeros_like(b)
    for m in range(grid.d):
        lo, _, up = stencil_1d(e[m], grid.v_axes[m], grid.dv[m])
        shape = [1] * (grid.d + 1)
        shape[m] = grid.nv_per_axis
        out += _flux_apply(b, lo.reshape(shape), up.reshape(shape), m)
    return out.reshape(u.shape)


def apply_T_rows(u: np.ndarray, coeffs) -> np.ndarray:
    """Apply per-row operators ``T(e_p)`` to ``u`` of shape ``(B,) + v_shape``.

    ``coeffs`` holds one ``(lo, di, up)`` triple per velocity axis, each of
    shape ``(B, n)``.
    """
    d = len(coeffs)
    out = np.zeros_like(u)
    for m, (lo, _, up) in enumerate(coeffs):
        shape = [lo.shape[0]] + [1] * d
        shape[m + 1] = lo.shape[1]
        out += _flux_apply(u, lo.reshape(shape), up.reshape(shape), m + 1)
    return out


def _solve_axis(lo, di, up, rhs, axis: int, d: int) -> np.ndarray:
    """Tridiagonal solve along velocity axis ``axis`` of ``rhs (B,) + v_shape``."""
    moved = np.moveaxis(rhs, axis + 1, -1)
    shape = [lo.shape[0]] + [1] * (d - 1) + [lo.shape[1]]
    x = tridiagonal_solve(lo.reshape(shape), di.reshape(shape), up.reshape(shape), moved)
    return np.moveaxis(x, -1, axis + 1)


def shifted_row_factors(E: np.ndarray, grid: Grid, c: float):
    """Per-row coefficients of ``I - c T(E_p)`` for every velocity axis."""
    out = []
    for m in range(grid.d):
        lo, di, up = stencil_1d(E[:, m], grid.v_axes[m], grid.dv[m])
        out.append((-c * lo, 1.0 - c * di, -c * up))
    return out


def solve_shifted_rows(rhs: np.ndarray, E: np.ndarray, grid: Grid, c: float, tol: float = 1e-12, maxiter: int = 200):
    """Solve ``(I - c T(E_p)) g_p = rhs_p`` for every row ``p``.

    ``rhs`` is ``(B, nv)``.  In 1D this is a direct tridiagonal solve.  In 2D
    the rows are solved with preconditioned conjugate gradients in the inner
    product weighted by ``M(E_p)``, in which the operator is symmetric; the
    preconditioner is the product of the two one-axis factors.
    Iteration stops on a normwise backward error below ``tol`` in that
    inner product.  Returns ``(g, iterations)``.
    """
    B = rhs.shape[0]
    factors = shifted_row_factors(E, grid, c)
    if grid.d == 1:
        return tridiagonal_solve(*factors[0], rhs), 1
    shape = (B,) + grid.v_shape
    b = rhs.reshape(shape)
    coeffs = [(lo, di, up) for lo, di, up in (stencil_1d(E[:, m], grid.v_axes[m], grid.dv[m]) for m in range(grid.d))]

    def A(u):
        return u - c * apply_T_rows(u, coeffs)

    def P(u):
        for m in range(grid.d):
            u = _solve_axis(*factors[m], u, m, grid.d)
        return u

    w = np.ones(shape)
    for m in range(grid.d):
        z = grid.v_axes[m][None, :] - E[:, m, None]
        wm = np.exp(-0.5 * z * z)
        s = [B] + [1] * grid.d
        s[m + 1] = grid.nv_per_axis
        w = w * wm.reshape(s)
    axes = tuple(range(1, grid.d + 1))

    def dot(a, bb):
        return np.sum(w * a * bb, axis=axes)

    x = P(b)
    r = b - A(x)
    z = P(r)
    p = z.copy()
    rz = dot(r, z)
    bnorm = np.sqrt(dot(b, b))
    # normwise backward-error test; the operator norm grows like c / dv^2
    anorm = 1.0 + c * sum(2.0 * np.max(np.abs(co[1]), axis=1) for co in coeffs)
    expand = (slice(None),) + (None,) * grid.d
    it = 0
    for it in range(1, maxiter + 1):
        if np.all(np.sqrt(dot(r, r)) <= tol * (bnorm + anorm * np.sqrt(dot(x, x)))):
            it -= 1
            break
        Ap = A(p)
        pAp = dot(p, Ap)
        alpha = np.divide(rz, pAp, out=np.zeros_like(rz), where=pAp > 0)
        x += alpha[expand] * p
        r -= alpha[expand] * Ap
        z = P(r)
        rz_new = dot(r, z)
        beta = np.divide(rz_new, rz, out=np.zeros_like(rz), where=rz > 0)
        p = z + beta[expand] * p
        rz = rz_new
    else:
        raise RuntimeError(f"row solver did not converge in {maxiter} iterations")
    return x.reshape(B, grid.nv), it


def solve_k_collision(rhs: np.ndarray, A2: np.ndarray, dt: float, eps: float) -> np.ndarray:
    """Pointwise ``(I - dt/eps A2(x)) K(x) = rhs(x)``; shapes ``(nx, r)`` and ``(nx, r, r)``."""
    nx, r = rhs.shape
    mats = np.eye(r)[None] - (dt / eps) * A2
    try:
        return np.linalg.solve(mats, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        det = np.abs(np.linalg.det(mats))
        p = int(np.argmin(det))
        raise SingularSystemError(f"K collision system is singular at x index {p}") from None


@lru_cache(maxsize=16)
def _block_preconditioner(grid: Grid, c: float, kind: str):
    """Factorization of ``I - c T(0)`` used for every diagonal block."""
    if grid.d == 1 or kind == "factored":
        bands = []
        for m in range(grid.d):
            lo, di, up = stencil_1d(0.0, grid.v_axes[m], grid.dv[m])
            ab = np.zeros((3, grid.nv_per_axis))
            ab[0, 1:] = -c * up[:-1]
            ab[1] = 1.0 - c * di
            ab[2, :-1] = -c * lo[1:]
            bands.append(ab)
        n = grid.nv_per_axis

        def solve(Y):
            # Y: (nv, cols)
            cols = Y.shape[1]
            if grid.d == 1:
                return sla.solve_banded((1, 1), bands[0], Y)
            Z = Y.reshape(n, n * cols)
            Z = sla.solve_banded((1, 1), bands[0], Z).reshape(n, n, cols)
            Z = np.moveaxis(Z, 1, 0).reshape(n, n * cols)
            Z = sla.solve_banded((1, 1), bands[1], Z).reshape(n, n, cols)
            return np.moveaxis(Z, 0, 1).reshape(n * n, cols)

        return solve
    lu = sp.linalg.splu((sp.identity(grid.nv) - c * assemble_T(np.zeros(grid.d), grid)).tocsc())
    return lu.solve


def l_system_matrix(estar: np.ndarray, grid: Grid, dt: float, eps: float) -> sp.csr_matrix:
    """Assembled block matrix of the L system (reference and testing).

    Row block ``i`` holds ``L_i - dt/eps (T(e_ii) L_i + sum_{k != i} U_ik L_k)``;
    unknowns are ordered block by block, ``x = L.T.ravel()``.
    """
    r = estar.shape[0]
    c = dt / eps
    eye = sp.identity(grid.nv, format="csr")
    blocks = [[None] * r for _ in range(r)]
    for i in range(r):
        blocks[i][i] = eye - c * assemble_T(estar[i, i], grid)
        for k in range(r):
            if k != i:
                blocks[i][k] = -c * assemble_U(estar[i, k], grid)
    return sp.bmat(blocks, format="csr")


def l_operator(L: np.ndarray, estar: np.ndarray, grid: Grid, c: float) -> np.ndarray:
    """Matrix-free action of the L system on ``L (nv, r)``."""
    r = L.shape[1]
    diag = estar[np.arange(r), np.arange(r)]  # (r, d)
    coeffs = [stencil_1d(diag[:, m], grid.v_axes[m], grid.dv[m]) for m in range(grid.d)]
    rows = L.T.reshape((r,) + grid.v_shape)
    out = L - c * apply_T_rows(rows, coeffs).reshape(r, grid.nv).T
    off = estar * (1.0 - np.eye(r))[:, :, None]
    for m in range(grid.d):
        grad = bounded_gradient(L, grid.v_shape, grid.dv, m)
        out -= c * grad @ off[:, :, m].T
    return out


def l_operator_norm(estar: np.ndarray, grid: Grid, c: float) -> float:
    """Cheap upper bound of the 2-norm of the L system matrix.

    Uses ``||A||_2 <= sqrt(||A||_1 ||A||_inf)`` with per-block row and column
    sums of the one-axis stencils.
    """
    r = estar.shape[0]
    rows = np.zeros(r)
    cols = np.zeros(r)
    for i in range(r):
        t = 0.0
        for m in range(grid.d):
            lo, di, up = stencil_1d(estar[i, i, m], grid.v_axes[m], grid.dv[m])
            t += 2.0 * np.max(np.abs(di))
        rows[i] += 1.0 + c * t
        cols[i] += 1.0 + c * t
        for k in range(r):
            if k != i:
                u = c * np.sum(np.abs(estar[i, k])) * 2.0 / min(grid.dv)
                rows[i] += u
                cols[k] += u
    return float(np.sqrt(rows.max() * cols.max()))


def solve_l_system(
    rhs: np.ndarray,
    estar: np.ndarray,
    grid: Grid,
    dt: float,
    eps: float,
    tol: float = 1e-10,
    restart: int = 30,
    maxiter: int = 400,
    preconditioner: str = "exact",
) -> tuple[np.ndarray, SolveInfo]:
    """Solve the coupled implicit L system for ``L (nv, r)`` with GMRES.

    The preconditioner applies ``(I - dt/eps T(0))^{-1}`` to every block;
    ``preconditioner`` selects ``"exact"`` (banded solve in 1D, sparse LU in
    2D), ``"factored"`` (product of one-axis banded solves, cheaper but weak
    for large ``dt/eps`` in 2D) or ``"none"``.  The iteration starts from
    ``rhs``, which the operator leaves unchanged on equilibrium data.  Raises
    :class:`kdlr.krylov.ConvergenceError` on failure.
    """
    nv, r = rhs.shape
    c = dt / eps
    for k in range(r):
        _warn_tail(estar[k, k], grid)
    if preconditioner == "none":
        psolve = None
    else:
        block = _block_preconditioner(grid, float(c), preconditioner)

        def psolve(z):
            return block(z.reshape(r, nv).T).T.ravel()

    def matvec(z):
        return l_operator(z.reshape(r, nv).T, estar, grid, c).T.ravel()

    x, info = gmres(
        matvec,
        rhs.T.ravel(),
        psolve,
        tol=tol,
        restart=restart,
        maxiter=maxiter,
        anorm=l_operator_norm(estar, grid, c),
        x0=rhs.T.ravel(),
    )
    return x.reshape(r, nv).T, info

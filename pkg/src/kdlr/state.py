"""Low-rank container for the Maxwellian quotient ``g = f / M``.

The factors are stored with continuum normalization: columns of ``X`` are
orthonormal under the rectangle rule on the periodic x-grid, columns of ``V``
under the trapezoid rule on the v-grid.  Then ``g ~= X @ S @ V.T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Grid
from .moments import maxwellian


@dataclass
class LowRankState:
    X: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def r(self) -> int:
        return self.S.shape[0]

    def K(self) -> np.ndarray:
        """Spatial auxiliary basis, ``K_j = sum_i X_i S_ij``."""
        return self.X @ self.S

    def L(self) -> np.ndarray:
        """Velocity auxiliary basis, ``L_i = sum_j S_ij V_j``."""
        return self.V @ self.S.T

    def g(self) -> np.ndarray:
        return self.X @ self.S @ self.V.T

    def copy(self) -> "LowRankState":
        return LowRankState(self.X.copy(), self.S.copy(), self.V.copy())

    def orthonormality_residual(self, grid: Grid) -> tuple[float, float]:
        """Max-norm deviation of both factor Gram matrices from the identity."""
        eye = np.eye(self.r)
        gx = (self.X * grid.wx[:, None]).T @ self.X
        gv = (self.V * grid.wv[:, None]).T @ self.V
        return float(np.abs(gx - eye).max()), float(np.abs(gv - eye).max())


def reorthonormalize(A: np.ndarray, weight) -> tuple[np.ndarray, np.ndarray]:
    """Weighted thin QR, ``A = Q @ R`` with ``Q.T @ diag(w) @ Q = I``.

    ``weight`` is a scalar or a per-row quadrature weight.  The diagonal of
    ``R`` is made non-negative.  For rank-deficient input the Householder
    factorization still returns an orthonormal ``Q``; the corresponding rows
    of ``R`` are zero to round-off.
    """
    sw = np.sqrt(np.broadcast_to(np.asarray(weight, dtype=float), (A.shape[0],)))
    Q, R = np.linalg.qr(A * sw[:, None])
    sign = np.where(np.diag(R) < 0.0, -1.0, 1.0)
    Q *= sign
    R *= sign[:, None]
    return Q / sw[:, None], R


def _gram_schmidt_append(basis: np.ndarray, candidates: np.ndarray, w: np.ndarray, need: int):
    """Extend ``basis`` by ``need`` w-orthonormal vectors drawn from ``candidates``."""
    cols = [basis[:, k] for k in range(basis.shape[1])]
    added = []
    for c in candidates.T:
        u = c.astype(float).copy()
        norm0 = np.sqrt(np.sum(w * u * u))
        if norm0 == 0.0:
            continue
        for _ in range(2):
            for q in cols + added:
                u -= np.sum(w * q * u) * q
        norm = np.sqrt(np.sum(w * u * u))
        if norm < 1e-8 * norm0:
            continue
        added.append(u / norm)
        if len(added) == need:
            break
    if len(added) < need:
        raise ValueError("could not complete the basis from the candidate set")
    return np.column_stack(cols + added)


def smooth_x_candidates(grid: Grid, count: int) -> np.ndarray:
    """Low Fourier modes on the periodic box, ordered by wavenumber."""
    L = np.array(grid.x_hi) - np.array(grid.x_lo)
    modes = []
    kmax = int(np.ceil(count ** (1.0 / grid.d))) + 1
    ks = np.stack(np.meshgrid(*[np.arange(-kmax, kmax + 1)] * grid.d, indexing="ij"), -1)
    ks = ks.reshape(-1, grid.d)
    ks = ks[np.argsort(np.abs(ks).sum(1), kind="stable")]
    for k in ks:
        phase = 2.0 * np.pi * ((grid.x - np.array(grid.x_lo)) / L) @ k
        modes.append(np.cos(phase))
        modes.append(np.sin(phase))
    return np.column_stack(modes)


def smooth_v_candidates(grid: Grid, count: int) -> np.ndarray:
    """Tensor Legendre polynomials on the velocity box, ordered by degree."""
    lo, hi = np.array(grid.v_lo), np.array(grid.v_hi)
    s = (2.0 * grid.v - (lo + hi)) / (hi - lo)
    nmax = count + 2
    per_axis = [np.polynomial.legendre.legvander(s[:, m], nmax) for m in range(grid.d)]
    degs = np.stack(np.meshgrid(*[np.arange(nmax + 1)] * grid.d, indexing="ij"), -1)
    degs = degs.reshape(-1, grid.d)
    degs = degs[np.argsort(degs.sum(1), kind="stable")]
    cols = []
    for dg in degs[: 4 * count + 4]:
        c = np.ones(grid.nv)
        for m in range(grid.d):
            c = c * per_axis[m][:, dg[m]]
        cols.append(c)
    return np.column_stack(cols)


def init_from_samples(g0: np.ndarray, r: int, grid: Grid, zero_tol: float = 1e-12) -> LowRankState:
    """Best rank-``r`` factorization of sampled ``g0`` (shape ``(nx, nv)``).

    Uses the SVD of the quadrature-weighted sample matrix so that the
    truncation is optimal in the discrete L2 norm.  Singular directions whose
    singular value is below ``zero_tol`` relative to the largest are replaced
    by smooth orthonormal completions (Fourier modes in x, Legendre
    polynomials in v) carrying an exactly zero singular value.
    """
    nx, nv = g0.shape
    if r < 1 or r > min(nx, nv):
        raise ValueError(f"rank {r} must lie in [1, {min(nx, nv)}]")
    sx, sv = np.sqrt(grid.wx), np.sqrt(grid.wv)
    U, s, Vt = np.linalg.svd(sx[:, None] * g0 * sv[None, :], full_matrices=False)
    s = s[:r].copy()
    X = U[:, :r] / sx[:, None]
    V = Vt[:r].T / sv[:, None]
    keep = int(np.count_nonzero(s > zero_tol * max(s[0], np.finfo(float).tiny))) if s[0] > 0 else 0
    if keep < r:
        need = r - keep
        X = _gram_schmidt_append(X[:, :keep], smooth_x_candidates(grid, r), grid.wx, need)
        V = _gram_schmidt_append(V[:, :keep], smooth_v_candidates(grid, r), grid.wv, need)
        s[keep:] = 0.0
    return LowRankState(X, np.diag(s), V)


def reconstruct_f(state: LowRankState, E: np.ndarray, grid: Grid) -> np.ndarray:
    """Sample ``f = M(E) * X S V^T`` on the full ``(nx, nv)`` grid."""
    return maxwellian(E, grid) * state.g()


def singular_values(state: LowRankState) -> np.ndarray:
    return np.linalg.svd(state.S, compute_uv=False)

"""Second-order finite-difference stencils shared by several modules.

All functions take arrays whose leading axis is a flattened grid (x or v)
and an arbitrary number of trailing columns.
"""

import numpy as np


def periodic_gradient(a: np.ndarray, shape: tuple[int, ...], h, axis: int) -> np.ndarray:
    """Centered periodic difference along one spatial axis."""
    tail = a.shape[1:]
    b = a.reshape(shape + tail)
    out = (np.roll(b, -1, axis=axis) - np.roll(b, 1, axis=axis)) / (2.0 * h[axis])
    return out.reshape(a.shape)


def _move(a, shape, axis):
    tail = a.shape[1:]
    return np.moveaxis(a.reshape(shape + tail), axis, 0), tail


def bounded_gradient(a: np.ndarray, shape: tuple[int, ...], h, axis: int) -> np.ndarray:
    """Centered difference with one-sided second-order closures at both ends."""
    b, _ = _move(a, shape, axis)
    hh = h[axis]
    out = np.empty_like(b)
    out[1:-1] = (b[2:] - b[:-2]) / (2.0 * hh)
    out[0] = (-3.0 * b[0] + 4.0 * b[1] - b[2]) / (2.0 * hh)
    out[-1] = (3.0 * b[-1] - 4.0 * b[-2] + b[-3]) / (2.0 * hh)
    return np.moveaxis(out, 0, axis).reshape(a.shape)


def bounded_second_derivative(a: np.ndarray, shape: tuple[int, ...], h, axis: int) -> np.ndarray:
    """Three-point second difference; four-point one-sided rows at the ends."""
    b, _ = _move(a, shape, axis)
    h2 = h[axis] ** 2
    out = np.empty_like(b)
    out[1:-1] = (b[2:] - 2.0 * b[1:-1] + b[:-2]) / h2
    out[0] = (2.0 * b[0] - 5.0 * b[1] + 4.0 * b[2] - b[3]) / h2
    out[-1] = (2.0 * b[-1] - 5.0 * b[-2] + 4.0 * b[-3] - b[-4]) / h2
    return np.moveaxis(out, 0, axis).reshape(a.shape)


def gradient_matrix_1d(n: int, h: float):
    """Sparse matrix of :func:`bounded_gradient` on one axis."""
    from scipy import sparse

    rows, cols, vals = [], [], []
    for p in range(1, n - 1):
        rows += [p, p]
        cols += [p - 1, p + 1]
        vals += [-1.0, 1.0]
    rows += [0, 0, 0, n - 1, n - 1, n - 1]
    cols += [0, 1, 2, n - 1, n - 2, n - 3]
    vals += [-3.0, 4.0, -1.0, 3.0, -4.0, 1.0]
    return sparse.csr_matrix((np.array(vals) / (2.0 * h), (rows, cols)), shape=(n, n))

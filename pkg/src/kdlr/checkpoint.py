"""Binary checkpoints.

Layout (little-endian): magic ``b"KDLR"``, ``u32`` version, then ``u64``
``d, Nx, Nv`` and, for low-rank files, ``r``.  The header is followed by the
payload as row-major float64: ``X (Nx, r)``, ``S (r, r)``, ``V (Nv, r)`` for a
low-rank state, or ``f (Nx, Nv)`` for a full phase-space state.  ``Nx`` and
``Nv`` are total node counts.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .state import LowRankState

MAGIC = b"KDLR"
VERSION = 1
_F64 = np.dtype("<f8")


class CheckpointError(ValueError):
    pass


def _write(path, ints, arrays) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack(f"<{len(ints)}Q", *ints))
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype=_F64).tobytes())


def _read_header(buf: bytes, count: int) -> tuple[int, ...]:
    if buf[:4] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    return struct.unpack_from(f"<{count}Q", buf, 8)


def _take(buf: bytes, offset: int, shape) -> tuple[np.ndarray, int]:
    n = int(np.prod(shape))
    end = offset + 8 * n
    if end > len(buf):
        raise CheckpointError("checkpoint payload is truncated")
    return np.frombuffer(buf, dtype=_F64, count=n, offset=offset).reshape(shape).astype(float), end


def save_low_rank(path, state: LowRankState, d: int) -> None:
    nx, r = state.X.shape
    nv = state.V.shape[0]
    _write(path, (d, nx, nv, r), (state.X, state.S, state.V))


def load_low_rank(path) -> tuple[LowRankState, int]:
    buf = Path(path).read_bytes()
    d, nx, nv, r = _read_header(buf, 4)
    off = 8 + 4 * 8
    X, off = _take(buf, off, (nx, r))
    S, off = _take(buf, off, (r, r))
    V, off = _take(buf, off, (nv, r))
    if off != len(buf):
        raise CheckpointError("trailing bytes after payload")
    return LowRankState(X, S, V), d


def save_full(path, f: np.ndarray, d: int) -> None:
    nx, nv = f.shape
    _write(path, (d, nx, nv), (f,))


def load_full(path) -> tuple[np.ndarray, int]:
    buf = Path(path).read_bytes()
    d, nx, nv = _read_header(buf, 3)
    f, off = _take(buf, 8 + 3 * 8, (nx, nv))
    if off != len(buf):
        raise CheckpointError("trailing bytes after payload")
    return f, d

"""Small matrix helpers that broadcast over leading batch axes."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def dag(m):
    """Conjugate transpose of the last two axes."""
    return np.conj(np.swapaxes(m, -1, -2))


def trace_free(m):
    r = m.shape[-1]
    tr = np.trace(m, axis1=-2, axis2=-1)
    return m - (tr / r)[..., None, None] * np.eye(r)


def comm(a, b):
    return a @ b - b @ a


def fro(m) -> float:
    return float(np.linalg.norm(np.asarray(m).ravel()))


@lru_cache(maxsize=None)
def trace_free_basis(r: int) -> np.ndarray:
    """Frobenius-orthonormal real basis of trace-free r x r matrices.

    Order: off-diagonal units E_pq (p != q) row-major, then the diagonal
    matrices (E_11 + ... + E_kk - k E_{k+1,k+1}) / sqrt(k(k+1)), k = 1..r-1.
    Returned array has shape (r*r - 1, r, r) and is read-only.
    """
    out = []
    for p in range(r):
        for q in range(r):
            if p != q:
                e = np.zeros((r, r))
                e[p, q] = 1.0
                out.append(e)
    for k in range(1, r):
        d = np.zeros(r)
        d[:k] = 1.0
        d[k] = -float(k)
        out.append(np.diag(d) / np.sqrt(k * (k + 1)))
    basis = np.array(out, dtype=float).reshape(r * r - 1, r, r)
    basis.setflags(write=False)
    return basis


def numerical_rank(m: np.ndarray, rtol: float | None = None) -> tuple[int, float, np.ndarray]:
    """Rank by singular-value cutoff, with the gap ratio at the cutoff.

    Default cutoff is max(shape) * eps * s_max.  The gap is s_kept_min /
    s_dropped_max (inf when nothing is dropped, 0 for the zero matrix).
    """
    m = np.atleast_2d(np.asarray(m))
    if m.size == 0:
        return 0, float("inf"), np.zeros(0)
    s = np.linalg.svd(m, compute_uv=False)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return 0, 0.0, s
    if rtol is None:
        rtol = max(m.shape) * np.finfo(float).eps
    rank = int(np.sum(s > rtol * smax))
    if rank == s.size:
        gap = float("inf")
    elif s[rank] == 0.0:
        gap = float("inf")
    else:
        gap = float(s[rank - 1] / s[rank])
    return rank, gap, s


def null_space(m: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel given a known rank."""
    _, _, vh = np.linalg.svd(m)
    return vh[rank:].conj().T

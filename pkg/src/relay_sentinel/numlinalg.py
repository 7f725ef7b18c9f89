"""Numerical rank, RREF, null-space bases, and orthogonal projectors.

All tolerances are explicit. Null-space bases are L1-normalized (with a
positive leading entry) so the extremal-element bounds used elsewhere in the
package apply to them directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RrefResult",
    "rank",
    "rref",
    "left_nullspace_basis",
    "right_nullspace_basis",
    "row_space_projector",
    "column_space_projector",
]

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class RrefResult:
    """Row-reduced echelon form with pivots moved to the leading columns.

    `reduced[:rank, :rank]` is the identity; `column_permutation[k]` is the
    original column index now sitting at position k.
    """

    reduced: np.ndarray
    column_permutation: np.ndarray
    rank: int


def rank(m: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above tol * max(1, largest singular value)."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.count_nonzero(s > tol * max(1.0, float(s[0]))))


def rref(m: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> RrefResult:
    """Gauss-Jordan with partial row pivoting and column swaps.

    Columns are permuted (only when necessary) so that pivots occupy the
    leading columns; entries below the tolerance are zeroed in the result.
    """
    a = np.array(m, dtype=float)
    rows, cols = a.shape
    perm = np.arange(cols)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    r = 0
    while r < rows and r < cols:
        pivot = None
        for c in range(r, cols):
            i = int(np.argmax(np.abs(a[r:, c]))) + r
            if abs(a[i, c]) > tol * scale:
                pivot = (i, c)
                break
        if pivot is None:
            break
        i, c = pivot
        if c != r:
            a[:, [r, c]] = a[:, [c, r]]
            perm[[r, c]] = perm[[c, r]]
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] /= a[r, r]
        others = np.arange(rows) != r
        a[others] -= np.outer(a[others, r], a[r])
        r += 1
    a[np.abs(a) < tol * scale] = 0.0
    return RrefResult(reduced=a, column_permutation=perm, rank=r)


def _normalize_sign_rows(basis: np.ndarray) -> np.ndarray:
    """L1-normalize each row and flip signs so the first sizable entry is positive."""
    out = np.array(basis, dtype=float)
    for i in range(out.shape[0]):
        norm = np.abs(out[i]).sum()
        if norm > 0:
            out[i] /= norm
        nz = np.nonzero(np.abs(out[i]) > 1e-12)[0]
        if nz.size and out[i, nz[0]] < 0:
            out[i] = -out[i]
    return out


def left_nullspace_basis(a: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Rows spanning {v : v @ a = 0}; row count = rows(a) - rank(a)."""
    a = np.asarray(a, dtype=float)
    u, s, _ = np.linalg.svd(a)
    cutoff = tol * max(1.0, float(s[0]) if s.size else 0.0)
    r = int(np.count_nonzero(s > cutoff))
    return _normalize_sign_rows(u[:, r:].T)


def right_nullspace_basis(b: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Columns spanning {w : b @ w = 0}; column count = cols(b) - rank(b)."""
    b = np.asarray(b, dtype=float)
    _, s, vt = np.linalg.svd(b)
    cutoff = tol * max(1.0, float(s[0]) if s.size else 0.0)
    r = int(np.count_nonzero(s > cutoff))
    return _normalize_sign_rows(vt[r:, :]).T


def row_space_projector(a: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthogonal projector onto the row space of a (square, cols(a)-sized)."""
    a = np.asarray(a, dtype=float)
    _, s, vt = np.linalg.svd(a)
    cutoff = tol * max(1.0, float(s[0]) if s.size else 0.0)
    r = int(np.count_nonzero(s > cutoff))
    p = vt[:r].T @ vt[:r]
    return (p + p.T) / 2.0


def column_space_projector(b: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthogonal projector onto the column space of b (square, rows(b)-sized)."""
    b = np.asarray(b, dtype=float)
    u, s, _ = np.linalg.svd(b)
    cutoff = tol * max(1.0, float(s[0]) if s.size else 0.0)
    r = int(np.count_nonzero(s > cutoff))
    p = u[:, :r] @ u[:, :r].T
    return (p + p.T) / 2.0

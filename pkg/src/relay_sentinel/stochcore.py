"""Stochastic-matrix and vector primitives.

Conventions used throughout the package:

- every stochastic matrix is COLUMN-stochastic: entry (i, j) is the
  conditional probability P(output_i | input_j), so each column sums to 1;
- vector/matrix norms written ``l1`` are entrywise sums of absolute values;
- all indices are zero-based;
- the default numeric tolerance for predicates is 1e-9, overridable per call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lpkernel import LpProblem, LpStatus, solve_lp

__all__ = [
    "DEFAULT_TOL",
    "ChannelConstants",
    "l1_norm",
    "is_column_stochastic",
    "is_normalized",
    "is_balanced",
    "is_polarized",
    "is_double_polarized",
    "is_diagonal_polarized",
    "channel_constants",
    "a_tilde",
    "epsilon_s_max",
    "is_epsilon_dependent",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ChannelConstants:
    """Scalar constants attached to an uplink channel matrix.

    ``a_big_min`` is the smallest row sum of the channel matrix; ``a_min``
    and ``b_min`` are the derived floor constants used by the detection
    guarantees (both strictly inside (0, 1)).
    """

    a_big_min: float
    a_min: float
    b_min: float
    u_size: int
    x1_size: int
    y1_size: int


def l1_norm(m: np.ndarray) -> float:
    """Sum of absolute values of all entries (works for vectors too)."""
    return float(np.abs(np.asarray(m, dtype=float)).sum())


def is_column_stochastic(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """Entries within [0, 1] and every column summing to 1, all within tol."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.size == 0:
        return False
    if (m < -tol).any() or (m > 1.0 + tol).any():
        return False
    return bool(np.abs(m.sum(axis=0) - 1.0).max() <= tol)


def is_normalized(v: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return abs(l1_norm(v) - 1.0) <= tol


def is_balanced(v: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return abs(float(np.asarray(v, dtype=float).sum())) <= tol


def _check_polar_params(b: float, eps: float) -> None:
    if b < 0 or eps < 0 or eps > b:
        raise ValueError(f"need 0 <= eps <= b, got b={b}, eps={eps}")


def is_polarized(
    v: np.ndarray, b: float, eps: float, j: int, tol: float = DEFAULT_TOL
) -> bool:
    """True iff v[j] >= b and every other entry is <= eps (within tol)."""
    _check_polar_params(b, eps)
    v = np.asarray(v, dtype=float)
    if v[j] < b - tol:
        return False
    rest = np.delete(v, j)
    return bool((rest <= eps + tol).all())


def is_double_polarized(
    v: np.ndarray, b: float, eps: float, j: int, k: int, tol: float = DEFAULT_TOL
) -> bool:
    """True iff v[j] >= b, v[k] <= -b, and all other entries are in [-eps, eps]."""
    _check_polar_params(b, eps)
    v = np.asarray(v, dtype=float)
    if j == k:
        raise ValueError("pole indices must differ")
    if v[j] < b - tol or v[k] > -b + tol:
        return False
    rest = np.delete(v, [j, k])
    return bool((np.abs(rest) <= eps + tol).all())


def is_diagonal_polarized(
    m: np.ndarray, b: float, eps: float, tol: float = DEFAULT_TOL
) -> bool:
    """Polarized n x u matrix whose leading n x n block is diagonal.

    Requires diag >= b, exact zeros (within tol) off the diagonal inside the
    leading square block, and every entry beyond column n at most eps.
    """
    _check_polar_params(b, eps)
    m = np.atleast_2d(np.asarray(m, dtype=float))
    n, u = m.shape
    if n > u:
        raise ValueError(f"matrix has more rows ({n}) than columns ({u})")
    diag = np.diag(m[:, :n])
    if (diag < b - tol).any():
        return False
    block = m[:, :n].copy()
    np.fill_diagonal(block, 0.0)
    if (np.abs(block) > tol).any():
        return False
    return bool((m[:, n:] <= eps + tol).all())


def channel_constants(a: np.ndarray, y1_size: int) -> ChannelConstants:
    """Floor constants for an uplink channel matrix with no all-zero row."""
    a = np.asarray(a, dtype=float)
    u_size, x1_size = a.shape
    row_sums = a.sum(axis=1)
    a_big_min = float(row_sums.min())
    if a_big_min <= 0.0:
        raise ValueError("channel matrix has an all-zero row")
    a_min = a_big_min / (u_size * (x1_size + a_big_min))
    b_min = 1.0 / (u_size * (y1_size + 1))
    return ChannelConstants(
        a_big_min=a_big_min,
        a_min=a_min,
        b_min=b_min,
        u_size=u_size,
        x1_size=x1_size,
        y1_size=y1_size,
    )


def a_tilde(a_min: float, n: int) -> float:
    """Closed form a_min^2 / (1 + n / a_min)."""
    return a_min**2 / (1.0 + n / a_min)


def epsilon_s_max(a_min: float, u_size: int) -> float:
    """Upper limit for the dependence slack, minimized over block sizes."""
    best = np.inf
    for n in range(1, u_size):
        at = a_tilde(a_min, n)
        denom = (
            a_min**2 * (1.0 + (a_min * at / 2.0) ** n)
            + n * (1.0 + a_min) * at**2 / 2.0
            + a_min * at
        )
        best = min(best, a_min**2 * at / denom)
    return float(best)


def is_epsilon_dependent(
    v: np.ndarray, basis_rows: np.ndarray, eps_s: float
) -> bool:
    """True iff min over coefficients c of l1(v - c @ basis_rows) <= eps_s.

    The minimum is computed exactly as a linear program: free coefficients c
    and per-entry absolute-value bounds t with t >= +/-(v - c @ basis_rows).
    """
    v = np.asarray(v, dtype=float).ravel()
    basis = np.atleast_2d(np.asarray(basis_rows, dtype=float))
    n_basis, dim = basis.shape
    if dim != v.size:
        raise ValueError("basis rows and vector have different lengths")
    # variables: c (n_basis, free), t (dim, >= 0)
    n_vars = n_basis + dim
    objective = np.concatenate([np.zeros(n_basis), np.ones(dim)])
    a_ub = np.zeros((2 * dim, n_vars))
    b_ub = np.zeros(2 * dim)
    # v_j - sum_i c_i basis[i, j] <= t_j   and   -(...) <= t_j
    a_ub[:dim, :n_basis] = -basis.T
    a_ub[:dim, n_basis:] = -np.eye(dim)
    b_ub[:dim] = -v
    a_ub[dim:, :n_basis] = basis.T
    a_ub[dim:, n_basis:] = -np.eye(dim)
    b_ub[dim:] = v
    bounds = [(None, None)] * n_basis + [(0.0, None)] * dim
    outcome = solve_lp(
        LpProblem(objective=objective, a_ub=a_ub, b_ub=b_ub, bounds=bounds)
    )
    if outcome.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"dependence LP ended with status {outcome.status}")
    return outcome.value <= eps_s + 1e-9

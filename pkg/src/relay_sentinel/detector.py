"""Maliciousness detection from one source node's transmit/receive traces.

Pipeline: conditional histogram of (y1 | x1) -> worst-case attack-channel
estimate over the feasibility set G_mu -> decision statistic
D = l1(phi_hat - I) thresholded at delta.

The estimator solves a single LP. For a column-stochastic candidate phi the
distance to identity is l1(phi - I) = 2(|U| - trace(phi)) exactly (diagonal
deficits are 1 - phi_jj and off-diagonal entries are nonnegative), so
minimizing the trace maximizes the distance. Membership in G_mu means some
column-stochastic gamma_tilde reproduces the candidate after projection
(B phi A = Pi_B gamma_tilde Pi_A) while staying within mu of the observed
histogram in projected l1 distance.

Row-major vectorization is used throughout, with the identity
vec(B X A) = kron(B, A.T) @ vec(X).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lpkernel import LpFailure, LpProblem, LpStatus, solve_lp
from .numlinalg import column_space_projector, row_space_projector
from .stochcore import is_column_stochastic, l1_norm

__all__ = [
    "DetectorConfig",
    "DetectionReport",
    "conditional_histogram",
    "estimate_attack",
    "g_mu_residual",
    "decision_statistic",
    "detect",
    "run_detection",
]


@dataclass(frozen=True)
class DetectorConfig:
    """Observation channel (A, B), estimator slack mu, and threshold delta."""

    a: np.ndarray
    b: np.ndarray
    mu: float
    delta: float
    tol: float = 1e-9

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not is_column_stochastic(a, self.tol):
            raise ValueError("uplink matrix A is not column-stochastic")
        if not is_column_stochastic(b, self.tol):
            raise ValueError("downlink matrix B is not column-stochastic")
        if b.shape[1] != a.shape[0]:
            raise ValueError("A and B disagree on the relay alphabet size")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class DetectionReport:
    """Everything one detection run produced.

    ``residual`` is the projected l1 distance between the estimator's own
    reconstruction and the observed histogram — a membership witness for
    G_mu, always <= mu when ``feasible`` (0.0 otherwise).
    """

    gamma_hat: np.ndarray
    phi_hat: np.ndarray
    statistic: float
    feasible: bool
    verdict: str
    unseen_x1_columns: list = field(default_factory=list)
    residual: float = 0.0


def conditional_histogram(
    x1_trace: np.ndarray, y1_trace: np.ndarray, x1_size: int, y1_size: int
) -> np.ndarray:
    """Empirical conditional frequency of y1 given x1, column-stochastic.

    Columns of x1 symbols that never occurred are filled uniformly (the
    maximum-entropy neutral choice); run_detection reports their indices.
    """
    x1_trace = np.asarray(x1_trace)
    y1_trace = np.asarray(y1_trace)
    if x1_trace.size != y1_trace.size:
        raise ValueError("trace lengths differ")
    if x1_trace.size == 0:
        raise ValueError("empty traces")
    counts = np.bincount(
        y1_trace * x1_size + x1_trace, minlength=y1_size * x1_size
    ).reshape(y1_size, x1_size).astype(float)
    totals = counts.sum(axis=0)
    seen = totals > 0
    gamma_hat = np.full((y1_size, x1_size), 1.0 / y1_size)
    gamma_hat[:, seen] = counts[:, seen] / totals[seen]
    return gamma_hat


def _estimator_problem(
    gamma_hat: np.ndarray, a: np.ndarray, b: np.ndarray, mu: float
) -> LpProblem:
    u = a.shape[0]
    y1, x1 = b.shape[0], a.shape[1]
    pi_b = column_space_projector(b)
    pi_a = row_space_projector(a)
    n_phi, n_g = u * u, y1 * x1
    n = n_phi + 2 * n_g  # phi, gamma_tilde, slack t

    objective = np.zeros(n)
    objective[np.arange(u) * u + np.arange(u)] = 1.0  # minimize trace(phi)

    reach = np.kron(b, a.T)  # vec(B phi A)
    project = np.kron(pi_b, pi_a.T)  # vec(Pi_B gamma Pi_A)
    target = (pi_b @ gamma_hat @ pi_a).ravel()

    a_eq = np.zeros((u + x1 + n_g, n))
    b_eq = np.zeros(u + x1 + n_g)
    a_eq[:u, :n_phi] = np.kron(np.ones((1, u)), np.eye(u))  # phi column sums
    b_eq[:u] = 1.0
    a_eq[u : u + x1, n_phi : n_phi + n_g] = np.kron(
        np.ones((1, y1)), np.eye(x1)
    )  # gamma_tilde column sums
    b_eq[u : u + x1] = 1.0
    a_eq[u + x1 :, :n_phi] = reach
    a_eq[u + x1 :, n_phi : n_phi + n_g] = -project

    a_ub = np.zeros((2 * n_g + 1, n))
    b_ub = np.zeros(2 * n_g + 1)
    a_ub[:n_g, n_phi : n_phi + n_g] = project
    a_ub[:n_g, n_phi + n_g :] = -np.eye(n_g)
    b_ub[:n_g] = target
    a_ub[n_g : 2 * n_g, n_phi : n_phi + n_g] = -project
    a_ub[n_g : 2 * n_g, n_phi + n_g :] = -np.eye(n_g)
    b_ub[n_g : 2 * n_g] = -target
    a_ub[-1, n_phi + n_g :] = 1.0
    b_ub[-1] = mu

    return LpProblem(objective=objective, a_eq=a_eq, b_eq=b_eq, a_ub=a_ub, b_ub=b_ub)


def _solve_estimator(gamma_hat, a, b, mu):
    """Returns (phi_hat, gamma_tilde, feasible)."""
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    u = a.shape[0]
    outcome = solve_lp(_estimator_problem(gamma_hat, a, b, mu))
    if outcome.status is LpStatus.INFEASIBLE:
        return np.eye(u), None, False
    if outcome.status is not LpStatus.OPTIMAL:
        raise LpFailure(f"estimator LP ended with status {outcome.status}")
    n_phi = u * u
    n_g = b.shape[0] * a.shape[1]
    phi_hat = outcome.solution[:n_phi].reshape(u, u)
    gamma_tilde = outcome.solution[n_phi : n_phi + n_g].reshape(b.shape[0], -1)
    return phi_hat, gamma_tilde, True


def estimate_attack(
    gamma_hat: np.ndarray, a: np.ndarray, b: np.ndarray, mu: float
) -> tuple[np.ndarray, bool]:
    """Worst-case (farthest-from-identity) attack channel consistent with G_mu.

    Returns (identity, False) when the feasibility set is empty.
    """
    phi_hat, _, feasible = _solve_estimator(gamma_hat, a, b, mu)
    return phi_hat, feasible


def g_mu_residual(
    phi_hat: np.ndarray, gamma_hat: np.ndarray, a: np.ndarray, b: np.ndarray
) -> float:
    """Smallest projected-l1 histogram slack that admits phi_hat into G_mu.

    Solves min l1(Pi_B (gamma_tilde - gamma_hat) Pi_A) over column-stochastic
    gamma_tilde with B phi_hat A = Pi_B gamma_tilde Pi_A; returns +inf when
    no gamma_tilde reproduces phi_hat at all.
    """
    phi_hat = np.asarray(phi_hat, dtype=float)
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    y1, x1 = b.shape[0], a.shape[1]
    pi_b = column_space_projector(b)
    pi_a = row_space_projector(a)
    n_g = y1 * x1
    project = np.kron(pi_b, pi_a.T)
    target = (pi_b @ gamma_hat @ pi_a).ravel()
    reach = (b @ phi_hat @ a).ravel()

    objective = np.concatenate([np.zeros(n_g), np.ones(n_g)])
    a_eq = np.zeros((x1 + n_g, 2 * n_g))
    b_eq = np.concatenate([np.ones(x1), reach])
    a_eq[:x1, :n_g] = np.kron(np.ones((1, y1)), np.eye(x1))
    a_eq[x1:, :n_g] = project
    a_ub = np.zeros((2 * n_g, 2 * n_g))
    a_ub[:n_g, :n_g] = project
    a_ub[:n_g, n_g:] = -np.eye(n_g)
    a_ub[n_g:, :n_g] = -project
    a_ub[n_g:, n_g:] = -np.eye(n_g)
    b_ub = np.concatenate([target, -target])

    outcome = solve_lp(
        LpProblem(objective=objective, a_eq=a_eq, b_eq=b_eq, a_ub=a_ub, b_ub=b_ub)
    )
    if outcome.status is LpStatus.INFEASIBLE:
        return float("inf")
    if outcome.status is not LpStatus.OPTIMAL:
        raise LpFailure(f"membership LP ended with status {outcome.status}")
    return float(outcome.value)


def decision_statistic(phi_hat: np.ndarray) -> float:
    """l1 distance of the estimated attack channel from the identity."""
    return l1_norm(np.asarray(phi_hat, dtype=float) - np.eye(phi_hat.shape[0]))


def detect(statistic: float, delta: float) -> str:
    """'malicious' iff the statistic strictly exceeds the threshold."""
    return "malicious" if statistic > delta else "clean"


def run_detection(
    config: DetectorConfig, x1_trace: np.ndarray, y1_trace: np.ndarray
) -> DetectionReport:
    """Histogram -> estimator -> statistic -> verdict, with diagnostics."""
    x1_size = config.a.shape[1]
    y1_size = config.b.shape[0]
    x1_trace = np.asarray(x1_trace)
    gamma_hat = conditional_histogram(x1_trace, y1_trace, x1_size, y1_size)
    seen = np.zeros(x1_size, dtype=bool)
    seen[np.unique(x1_trace)] = True
    unseen = np.nonzero(~seen)[0].tolist()
    phi_hat, gamma_tilde, feasible = _solve_estimator(
        gamma_hat, config.a, config.b, config.mu
    )
    if feasible:
        pi_b = column_space_projector(config.b)
        pi_a = row_space_projector(config.a)
        residual = l1_norm(pi_b @ (gamma_tilde - gamma_hat) @ pi_a)
        statistic = decision_statistic(phi_hat)
    else:
        residual = 0.0
        statistic = 0.0
    return DetectionReport(
        gamma_hat=gamma_hat,
        phi_hat=phi_hat,
        statistic=statistic,
        feasible=feasible,
        verdict=detect(statistic, config.delta),
        unseen_x1_columns=unseen,
        residual=residual,
    )

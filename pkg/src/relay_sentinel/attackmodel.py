"""Relay manipulation maps and ground-truth attack-channel extraction.

Three attack families are shipped:

- identity: the honest relay, v = u;
- iid: each symbol is independently resampled from column u_n of a
  column-stochastic matrix phi;
- gated: the whole block is either passed through untouched or manipulated
  i.i.d., depending on whether the parity of the sum of (zero-based) symbol
  indices over the block matches the gate. The block-level decision is
  causal because the relay observes the full uplink block before it starts
  broadcasting.

The ground-truth attack channel of a (u, v) trace pair is the conditional
frequency matrix phi_n[i, j] = #(v=i, u=j) / #(u=j). Columns of symbols
that never occurred carry no evidence and default to identity columns,
flagged in ``observed_mask``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channelmodel import sample_columns
from .stochcore import is_column_stochastic, l1_norm

__all__ = [
    "AttackSpec",
    "AttackChannel",
    "apply_attack",
    "extract_attack_channel",
    "truth_statistic",
]

_KINDS = ("identity", "iid", "gated")
_PARITIES = ("even", "odd")


@dataclass(frozen=True)
class AttackSpec:
    """One of the shipped relay strategies; build via the factory methods."""

    kind: str
    phi: np.ndarray | None = None
    gate_parity: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.kind != "identity":
            phi = np.asarray(self.phi, dtype=float)
            if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
                raise ValueError("attack matrix must be square")
            if not is_column_stochastic(phi, 1e-9):
                raise ValueError("attack matrix must be column-stochastic")
            object.__setattr__(self, "phi", phi)
        if self.kind == "gated" and self.gate_parity not in _PARITIES:
            raise ValueError(f"gate parity must be one of {_PARITIES}")

    @staticmethod
    def identity() -> "AttackSpec":
        return AttackSpec(kind="identity")

    @staticmethod
    def iid(phi: np.ndarray) -> "AttackSpec":
        return AttackSpec(kind="iid", phi=phi)

    @staticmethod
    def gated(phi: np.ndarray, gate_parity: str) -> "AttackSpec":
        return AttackSpec(kind="gated", phi=phi, gate_parity=gate_parity)


@dataclass(frozen=True)
class AttackChannel:
    """Empirical |U| x |U| attack channel with per-symbol observation flags."""

    phi_n: np.ndarray
    observed_mask: np.ndarray


def apply_attack(
    spec: AttackSpec, u_trace: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Map a relay-input block to the relay-output block."""
    u_trace = np.asarray(u_trace)
    if u_trace.size == 0:
        raise ValueError("empty relay-input trace")
    if spec.kind == "identity":
        return u_trace.copy()
    if spec.kind == "iid":
        return sample_columns(spec.phi, u_trace, rng.random(u_trace.size))
    parity = "even" if int(u_trace.sum()) % 2 == 0 else "odd"
    if parity == spec.gate_parity:
        return sample_columns(spec.phi, u_trace, rng.random(u_trace.size))
    return u_trace.copy()


def extract_attack_channel(
    u_trace: np.ndarray, v_trace: np.ndarray, u_size: int | None = None
) -> AttackChannel:
    """Conditional frequency of v given u; identity columns where u never occurred."""
    u_trace = np.asarray(u_trace)
    v_trace = np.asarray(v_trace)
    if u_trace.size != v_trace.size:
        raise ValueError("trace lengths differ")
    if u_trace.size == 0:
        raise ValueError("empty traces")
    if u_size is None:
        u_size = int(max(u_trace.max(), v_trace.max())) + 1
    counts = np.bincount(
        v_trace * u_size + u_trace, minlength=u_size * u_size
    ).reshape(u_size, u_size).astype(float)
    column_totals = counts.sum(axis=0)
    observed = column_totals > 0
    phi_n = np.eye(u_size)
    phi_n[:, observed] = counts[:, observed] / column_totals[observed]
    return AttackChannel(phi_n=phi_n, observed_mask=observed)


def truth_statistic(ac: AttackChannel) -> float:
    """Entrywise L1 distance of the empirical attack channel from identity."""
    return l1_norm(ac.phi_n - np.eye(ac.phi_n.shape[0]))

"""Seeded Monte Carlo experiments over the relay detection pipeline.

A :class:`Scenario` bundles the two source distributions, the multiple
access model, the downlink marginal ``B``, a relay manipulation, and the
detector parameters.  Each trial derives its own RNG stream from
``(master_seed, trial_index)``, simulates uplink -> manipulation ->
downlink, and records both the detector's decision statistic and the
ground-truth deviation of the realized symbol-substitution channel, so
the two can be compared trial by trial.  Results depend only on the
scenario and the trial index, never on execution order, which makes
experiments safe to parallelize and bitwise reproducible.

``preset`` exposes the named example scenarios used throughout the test
suite: a binary adder with an ideal downlink observed at three trace
lengths, its parity-gated variant, and two ternary-adder setups with
noisy five-symbol downlinks (one certifiably manipulable).
"""

from dataclasses import dataclass

import numpy as np

from .attackmodel import (
    AttackSpec,
    apply_attack,
    extract_attack_channel,
    truth_statistic,
)
from .channelmodel import (
    MacModel,
    marginalize_mac,
    simulate_downlink,
    simulate_uplink,
    validate_pmf,
)
from .detector import DetectorConfig, run_detection
from .stochcore import is_column_stochastic

__all__ = [
    "DESK_TRIALS",
    "FULL_TRIALS",
    "Scenario",
    "TrialResult",
    "empirical_cdf",
    "error_rates",
    "ks_statistic",
    "preset",
    "preset_curves",
    "run_experiment",
    "run_trial",
    "trial_traces",
]

DESK_TRIALS = 300
FULL_TRIALS = 5000

_MASTER_SEED = 20240501


@dataclass(frozen=True)
class Scenario:
    """One fully specified experiment: channels, manipulation, detector."""

    p1: np.ndarray
    p2: np.ndarray
    mac: MacModel
    b: np.ndarray
    attack: AttackSpec
    n: int
    mu: float
    delta: float
    trials: int
    master_seed: int

    def __post_init__(self):
        object.__setattr__(self, "p1", validate_pmf(np.asarray(self.p1, dtype=float)))
        object.__setattr__(self, "p2", validate_pmf(np.asarray(self.p2, dtype=float)))
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "b", b)
        if self.p1.size != self.mac.x1_size:
            raise ValueError("p1 length does not match the first source alphabet")
        if self.p2.size != self.mac.x2_size:
            raise ValueError("p2 length does not match the second source alphabet")
        if b.ndim != 2 or b.shape[1] != self.mac.u_size:
            raise ValueError("B must have one column per relay symbol")
        if not is_column_stochastic(b):
            raise ValueError("B is not column-stochastic")
        if self.attack.phi is not None and self.attack.phi.shape != (
            self.mac.u_size,
            self.mac.u_size,
        ):
            raise ValueError("attack map size does not match the relay alphabet")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError("n must be a positive integer")
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ValueError("trials must be a positive integer")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not (isinstance(self.master_seed, int) and self.master_seed >= 0):
            raise ValueError("master_seed must be a non-negative integer")

    def uplink_matrix(self) -> np.ndarray:
        """Observation matrix A seen from source 1 (u given x1)."""
        return marginalize_mac(self.mac, self.p2)


@dataclass(frozen=True)
class TrialResult:
    """Per-trial outcome: decision statistic vs ground-truth deviation."""

    trial_index: int
    statistic: float
    truth_stat: float
    feasible: bool
    seed_used: int
    changed_fraction: float

    def __post_init__(self):
        if self.trial_index < 0:
            raise ValueError("trial_index must be non-negative")
        for label, value in (
            ("statistic", self.statistic),
            ("truth_stat", self.truth_stat),
        ):
            if not (np.isfinite(value) and value >= 0.0):
                raise ValueError(f"{label} must be finite and non-negative")
        if not 0.0 <= self.changed_fraction <= 1.0:
            raise ValueError("changed_fraction must lie in [0, 1]")


def _trial_seed_sequence(scenario: Scenario, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(scenario.master_seed, spawn_key=(trial_index,))


def _simulate_trial(scenario: Scenario, trial_index: int):
    """Regenerate one trial's traces: (x1, y1, u, v, seed_used)."""
    if not (isinstance(trial_index, int) and trial_index >= 0):
        raise ValueError("trial_index must be a non-negative integer")
    seed_seq = _trial_seed_sequence(scenario, trial_index)
    seed_used = int(seed_seq.generate_state(1)[0])
    rng = np.random.default_rng(seed_seq)
    x1, _x2, u = simulate_uplink(scenario.mac, scenario.p1, scenario.p2, scenario.n, rng)
    v = apply_attack(scenario.attack, u, rng)
    y1 = simulate_downlink(scenario.b, v, rng)
    return x1, y1, u, v, seed_used


def trial_traces(
    scenario: Scenario, trial_index: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """The (x1, y1, u, v) symbol traces of one seeded trial."""
    x1, y1, u, v, _ = _simulate_trial(scenario, trial_index)
    return x1, y1, u, v


def run_trial(scenario: Scenario, trial_index: int) -> TrialResult:
    """Simulate one seeded trial and run the detector on its traces.

    The RNG stream is derived from ``(master_seed, trial_index)`` alone,
    so repeated calls with the same arguments reproduce the same result
    exactly.
    """
    x1, y1, u, v, seed_used = _simulate_trial(scenario, trial_index)
    truth_stat = truth_statistic(extract_attack_channel(u, v, scenario.mac.u_size))
    config = DetectorConfig(
        a=scenario.uplink_matrix(), b=scenario.b, mu=scenario.mu, delta=scenario.delta
    )
    report = run_detection(config, x1, y1)
    return TrialResult(
        trial_index=trial_index,
        statistic=report.statistic,
        truth_stat=truth_stat,
        feasible=report.feasible,
        seed_used=seed_used,
        changed_fraction=float(np.mean(u != v)),
    )


def run_experiment(scenario: Scenario) -> list[TrialResult]:
    """Run all trials of a scenario, returned in trial-index order."""
    return [run_trial(scenario, index) for index in range(scenario.trials)]


def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Sorted sample values paired with cumulative fractions i/n."""
    sample = np.asarray(values, dtype=float)
    if sample.size == 0:
        raise ValueError("empirical_cdf needs at least one value")
    ordered = np.sort(sample)
    fractions = np.arange(1, ordered.size + 1, dtype=float) / ordered.size
    return ordered, fractions


def error_rates(null_stats, alt_stats, delta: float) -> tuple[float, float]:
    """False-alarm and miss fractions of two statistic samples at ``delta``.

    A null-sample value strictly above ``delta`` counts as a false alarm;
    an alternative-sample value at or below ``delta`` counts as a miss.
    """
    null_sample = np.asarray(null_stats, dtype=float)
    alt_sample = np.asarray(alt_stats, dtype=float)
    if null_sample.size == 0 or alt_sample.size == 0:
        raise ValueError("error_rates needs non-empty samples on both sides")
    false_alarm = float(np.mean(null_sample > delta))
    miss = float(np.mean(alt_sample <= delta))
    return false_alarm, miss


def ks_statistic(sample_a, sample_b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_statistic needs non-empty samples on both sides")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


# ---------- preset scenarios ----------

# Binary-adder example: two uniform binary sources, relay alphabet
# {0,1,2}, ideal downlink.  The malicious maps switch about 1% of the
# relay symbols, from blatant (phi2, every switch possible) to cautious
# (phi4, only switches neither source can recognize from one symbol).
_BINARY_PHI = {
    "phi2": np.array(
        [[0.99, 0.005, 0.005], [0.005, 0.99, 0.005], [0.005, 0.005, 0.99]]
    ),
    "phi3": np.array([[0.99, 0.005, 0.0], [0.01, 0.99, 0.01], [0.0, 0.005, 0.99]]),
    "phi4": np.array([[0.99, 0.0, 0.0], [0.01, 1.0, 0.01], [0.0, 0.0, 0.99]]),
}

# Ternary-adder example: relay alphabet {0,..,4} and a noisy downlink
# whose 4x5 marginal keeps the channel certifiably non-manipulable.
_TERNARY_B = np.array(
    [
        [1.0, 0.5, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.7, 0.0, 0.0],
        [0.0, 0.0, 0.3, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.5, 1.0],
    ]
)

_TERNARY_PHI = {
    "phi2": np.array(
        [
            [0.99, 0.0025, 0.0025, 0.0025, 0.0025],
            [0.0025, 0.99, 0.0025, 0.0025, 0.0025],
            [0.0025, 0.0025, 0.99, 0.0025, 0.0025],
            [0.0025, 0.0025, 0.0025, 0.99, 0.0025],
            [0.0025, 0.0025, 0.0025, 0.0025, 0.99],
        ]
    ),
    "phi3": np.array(
        [
            [0.99, 0.01 / 3, 0.0025, 0.0, 0.0],
            [0.005, 0.99, 0.0025, 0.01 / 3, 0.0],
            [0.005, 0.01 / 3, 0.99, 0.01 / 3, 0.005],
            [0.0, 0.01 / 3, 0.0025, 0.99, 0.005],
            [0.0, 0.0, 0.0025, 0.01 / 3, 0.99],
        ]
    ),
    "phi4": np.array(
        [
            [0.985, 0.0, 0.0, 0.0, 0.0],
            [0.0075, 0.985, 0.0, 0.0, 0.0],
            [0.0075, 0.015, 1.0, 0.015, 0.0075],
            [0.0, 0.0, 0.0, 0.985, 0.0075],
            [0.0, 0.0, 0.0, 0.0, 0.985],
        ]
    ),
}

# Same ternary uplink with a square downlink marginal that admits a
# feasible deviation: substituting symbols 1<->3 and 2<->4 leaves the
# observed statistics of both sources exactly unchanged.
_SQUARE_B = np.array(
    [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.0, 0.3, 0.2],
        [0.0, 0.0, 0.5, 0.2, 0.3],
        [0.0, 0.3, 0.2, 0.5, 0.0],
        [0.0, 0.2, 0.3, 0.0, 0.5],
    ]
)

_SQUARE_DEVIATION = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, -1.0],
        [0.0, -1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0, 1.0],
    ]
)

_SQUARE_PHI2 = np.eye(5) - _SQUARE_DEVIATION

# n, mu, delta per preset name
_PRESET_PARAMS = {
    "fig3a": (1_000, 0.2, 0.065),
    "fig3b": (10_000, 0.1, 0.065),
    "fig3c": (100_000, 0.05, 0.004),
    "fig3d": (100_000, 0.01, 0.07),
    "fig5a": (100_000, 0.05, 0.07),
    "fig5b": (100_000, 0.05, 0.07),
}

# the curve a bare preset() call returns: the headline malicious case
_PRESET_HEADLINE = {
    "fig3a": "phi2",
    "fig3b": "phi2",
    "fig3c": "phi2",
    "fig3d": "phi4",
    "fig5a": "phi2",
    "fig5b": "phi2",
}


def _preset_attacks(name: str) -> dict[str, AttackSpec]:
    if name == "fig3d":
        return {"phi1": AttackSpec.identity()} | {
            label: AttackSpec.gated(phi, "even") for label, phi in _BINARY_PHI.items()
        }
    if name.startswith("fig3"):
        return {"phi1": AttackSpec.identity()} | {
            label: AttackSpec.iid(phi) for label, phi in _BINARY_PHI.items()
        }
    if name == "fig5a":
        return {"phi1": AttackSpec.identity()} | {
            label: AttackSpec.iid(phi) for label, phi in _TERNARY_PHI.items()
        }
    return {
        "clean": AttackSpec.identity(),
        "phi2": AttackSpec.iid(_SQUARE_PHI2),
    }


def preset_curves(name: str, full_scale: bool = False) -> dict[str, Scenario]:
    """All curves of a named preset: one scenario per manipulation map.

    ``full_scale`` switches from the 300-trial desk default to the
    5000-trial count used for the reference result figures.
    """
    if name not in _PRESET_PARAMS:
        raise ValueError(f"unknown preset {name!r}")
    n, mu, delta = _PRESET_PARAMS[name]
    trials = FULL_TRIALS if full_scale else DESK_TRIALS
    if name.startswith("fig3"):
        sources = (np.array([0.5, 0.5]), np.array([0.5, 0.5]))
        mac = MacModel.adder(2, 2)
        b = np.eye(3)
    else:
        sources = (np.full(3, 1 / 3), np.full(3, 1 / 3))
        mac = MacModel.adder(3, 3)
        b = _TERNARY_B if name == "fig5a" else _SQUARE_B
    return {
        label: Scenario(
            p1=sources[0],
            p2=sources[1],
            mac=mac,
            b=b,
            attack=attack,
            n=n,
            mu=mu,
            delta=delta,
            trials=trials,
            master_seed=_MASTER_SEED,
        )
        for label, attack in _preset_attacks(name).items()
    }


def preset(name: str, full_scale: bool = False) -> Scenario:
    """The headline scenario of a named preset (its main malicious curve)."""
    return preset_curves(name, full_scale)[_PRESET_HEADLINE[name]]

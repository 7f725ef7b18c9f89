"""Tests for the seeded Monte Carlo experiment harness.

Oracles: identity attacks leave traces untouched (truth_stat and
changed_fraction exactly zero); an i.i.d. 1%-switch attack at N=10^5
concentrates the per-trace deviation near its generating value 0.06 and
the changed-symbol fraction near 0.01; CDF/error-rate/KS helpers are
checked against tiny hand-computed samples.
"""

import numpy as np
import pytest

from conftest import counter_upsilon
from relay_sentinel.attackmodel import AttackSpec
from relay_sentinel.channelmodel import MacModel
from relay_sentinel.harness import (
    DESK_TRIALS,
    FULL_TRIALS,
    Scenario,
    TrialResult,
    empirical_cdf,
    error_rates,
    ks_statistic,
    preset,
    preset_curves,
    run_experiment,
    run_trial,
    trial_traces,
)


def binary_adder_scenario(**overrides):
    base = dict(
        p1=np.array([0.5, 0.5]),
        p2=np.array([0.5, 0.5]),
        mac=MacModel.adder(2, 2),
        b=np.eye(3),
        attack=AttackSpec.identity(),
        n=1_000,
        mu=0.2,
        delta=0.065,
        trials=3,
        master_seed=20240501,
    )
    base.update(overrides)
    return Scenario(**base)


# ---------- Scenario / TrialResult validation ----------


def test_scenario_rejects_bad_counts():
    with pytest.raises(ValueError):
        binary_adder_scenario(n=0)
    with pytest.raises(ValueError):
        binary_adder_scenario(trials=0)
    with pytest.raises(ValueError):
        binary_adder_scenario(mu=0.0)
    with pytest.raises(ValueError):
        binary_adder_scenario(mu=-0.1)


def test_scenario_rejects_bad_ingredients():
    with pytest.raises(ValueError):
        binary_adder_scenario(p1=np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        binary_adder_scenario(p2=np.array([0.25, 0.25, 0.5]))
    bad_b = np.eye(3)
    bad_b[0, 0] = 0.9
    with pytest.raises(ValueError):
        binary_adder_scenario(b=bad_b)
    with pytest.raises(ValueError):
        binary_adder_scenario(b=np.eye(4))
    with pytest.raises(ValueError):
        binary_adder_scenario(attack=AttackSpec.iid(np.eye(4)))


def test_trial_result_validates():
    good = dict(
        trial_index=0,
        statistic=0.1,
        truth_stat=0.0,
        feasible=True,
        seed_used=7,
        changed_fraction=0.0,
    )
    TrialResult(**good)
    with pytest.raises(ValueError):
        TrialResult(**{**good, "statistic": -0.1})
    with pytest.raises(ValueError):
        TrialResult(**{**good, "statistic": float("nan")})
    with pytest.raises(ValueError):
        TrialResult(**{**good, "truth_stat": -1e-3})
    with pytest.raises(ValueError):
        TrialResult(**{**good, "changed_fraction": 1.5})
    with pytest.raises(ValueError):
        TrialResult(**{**good, "trial_index": -1})


# ---------- run_trial ----------


def test_run_trial_identity_attack():
    result = run_trial(binary_adder_scenario(), 5)
    assert result.trial_index == 5
    assert result.truth_stat == 0.0
    assert result.changed_fraction == 0.0
    assert np.isfinite(result.statistic) and result.statistic >= 0.0
    assert result.feasible is True
    assert isinstance(result.seed_used, int) and result.seed_used >= 0


def test_run_trial_rejects_bad_index():
    with pytest.raises(ValueError):
        run_trial(binary_adder_scenario(), -1)


def test_run_trial_is_deterministic():
    scenario = binary_adder_scenario(
        attack=AttackSpec.iid(
            np.array(
                [[0.99, 0.005, 0.005], [0.005, 0.99, 0.005], [0.005, 0.005, 0.99]]
            )
        )
    )
    assert run_trial(scenario, 2) == run_trial(scenario, 2)


def test_run_trial_streams_differ_by_index():
    scenario = binary_adder_scenario(
        attack=AttackSpec.iid(
            np.array(
                [[0.99, 0.005, 0.005], [0.005, 0.99, 0.005], [0.005, 0.005, 0.99]]
            )
        )
    )
    first, second = run_trial(scenario, 0), run_trial(scenario, 1)
    assert first.seed_used != second.seed_used
    assert first != second


def test_run_trial_iid_attack_concentrates(motivating_phis):
    # A 1%-switch map has total deviation 0.06 from the identity; at
    # N=10^5 the per-trace deviation and the changed-symbol fraction
    # concentrate tightly around their generating values.
    scenario = binary_adder_scenario(
        attack=AttackSpec.iid(motivating_phis[2]), n=100_000, mu=0.05, delta=0.004
    )
    result = run_trial(scenario, 0)
    assert abs(result.truth_stat - 0.06) <= 0.015
    assert abs(result.changed_fraction - 0.01) <= 0.005
    assert result.feasible is True


# ---------- run_experiment ----------


def test_run_experiment_ordering_and_determinism():
    scenario = binary_adder_scenario(trials=4, n=500)
    results = run_experiment(scenario)
    assert [r.trial_index for r in results] == [0, 1, 2, 3]
    assert results == [run_trial(scenario, i) for i in range(4)]
    assert results == run_experiment(scenario)
    # execution order is immaterial: each trial depends only on its index
    assert list(reversed([run_trial(scenario, i) for i in (3, 2, 1, 0)])) == results


def test_trial_traces_match_run_trial(motivating_phis):
    scenario = binary_adder_scenario(attack=AttackSpec.iid(motivating_phis[2]), n=800)
    x1, y1, u, v = trial_traces(scenario, 3)
    result = run_trial(scenario, 3)
    assert x1.shape == y1.shape == u.shape == v.shape == (800,)
    assert float(np.mean(u != v)) == result.changed_fraction
    # traces regenerate identically
    again = trial_traces(scenario, 3)
    assert all(np.array_equal(first, second) for first, second in zip((x1, y1, u, v), again))


def test_clean_trials_stay_feasible():
    scenario = binary_adder_scenario(trials=60)
    results = run_experiment(scenario)
    assert all(r.feasible for r in results)
    assert all(r.truth_stat == 0.0 for r in results)


# ---------- aggregation helpers ----------


def test_empirical_cdf_sorts_and_fractions():
    values, fractions = empirical_cdf([0.1, 0.3, 0.2])
    assert np.allclose(values, [0.1, 0.2, 0.3])
    assert np.allclose(fractions, [1 / 3, 2 / 3, 1.0])
    # cumulative fraction at 0.2 is 2/3
    assert fractions[np.searchsorted(values, 0.2, side="right") - 1] == pytest.approx(
        2 / 3
    )
    with pytest.raises(ValueError):
        empirical_cdf([])


def test_error_rates_counts_threshold_crossings():
    assert error_rates([0.0, 0.0, 0.0], [0.07], 0.01) == (0.0, 0.0)
    assert error_rates([0.0], [0.07, 0.07], 0.065) == (0.0, 0.0)
    false_alarm, miss = error_rates([0.0, 0.1], [0.0, 0.1], 0.05)
    assert false_alarm == pytest.approx(0.5)
    assert miss == pytest.approx(0.5)
    # boundary: D equal to the threshold is not an alarm
    assert error_rates([0.05], [0.05], 0.05) == (0.0, 1.0)
    with pytest.raises(ValueError):
        error_rates([], [0.1], 0.05)
    with pytest.raises(ValueError):
        error_rates([0.1], [], 0.05)


def test_ks_statistic_hand_cases():
    assert ks_statistic([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    assert ks_statistic([0.0, 0.0], [1.0, 1.0]) == 1.0
    # F_a jumps to 1/2 at 0 and to 1 at 1; F_b jumps to 1 at 0.5
    assert ks_statistic([0.0, 1.0], [0.5]) == pytest.approx(0.5)
    assert ks_statistic([0.5], [0.0, 1.0]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ks_statistic([], [1.0])


# ---------- presets ----------


def test_preset_parameters():
    expected = {
        "fig3a": (1_000, 0.2, 0.065),
        "fig3b": (10_000, 0.1, 0.065),
        "fig3c": (100_000, 0.05, 0.004),
        "fig3d": (100_000, 0.01, 0.07),
        "fig5a": (100_000, 0.05, 0.07),
        "fig5b": (100_000, 0.05, 0.07),
    }
    seeds = set()
    for name, (n, mu, delta) in expected.items():
        scenario = preset(name)
        assert scenario.n == n, name
        assert scenario.mu == pytest.approx(mu), name
        assert scenario.delta == pytest.approx(delta), name
        assert scenario.trials == DESK_TRIALS
        seeds.add(scenario.master_seed)
    assert len(seeds) == 1  # one shared master seed across presets
    assert preset("fig3b", full_scale=True).trials == FULL_TRIALS
    with pytest.raises(ValueError):
        preset("fig9z")


def test_preset_channels(higher_b, counter_b):
    fig3a = preset("fig3a")
    assert np.array_equal(fig3a.b, np.eye(3))
    assert fig3a.mac.u_size == 3
    assert np.allclose(fig3a.p1, [0.5, 0.5]) and np.allclose(fig3a.p2, [0.5, 0.5])
    fig5a = preset("fig5a")
    assert np.allclose(fig5a.b, higher_b)
    assert fig5a.mac.u_size == 5
    assert np.allclose(fig5a.p1, np.full(3, 1 / 3))
    fig5b = preset("fig5b")
    assert np.allclose(fig5b.b, counter_b)


def test_preset_attacks(motivating_phis, higher_phis):
    assert preset("fig3b").attack.kind == "iid"
    assert np.allclose(preset("fig3b").attack.phi, motivating_phis[2])
    fig3d = preset("fig3d")
    assert fig3d.attack.kind == "gated"
    assert fig3d.attack.gate_parity == "even"
    assert np.allclose(fig3d.attack.phi, motivating_phis[4])
    assert np.allclose(preset("fig5a").attack.phi, higher_phis[2])
    fig5b = preset("fig5b")
    assert fig5b.attack.kind == "iid"
    assert np.allclose(fig5b.attack.phi, np.eye(5) - counter_upsilon(1.0))


def test_preset_curves_families(motivating_phis, higher_phis):
    curves = preset_curves("fig3c")
    assert list(curves) == ["phi1", "phi2", "phi3", "phi4"]
    assert curves["phi1"].attack.kind == "identity"
    assert np.allclose(curves["phi3"].attack.phi, motivating_phis[3])
    base = preset("fig3c")
    for scenario in curves.values():
        assert (scenario.n, scenario.mu, scenario.delta) == (
            base.n,
            base.mu,
            base.delta,
        )
        assert scenario.trials == base.trials
        assert scenario.master_seed == base.master_seed

    gated = preset_curves("fig3d")
    assert list(gated) == ["phi1", "phi2", "phi3", "phi4"]
    assert gated["phi1"].attack.kind == "identity"
    for label in ("phi2", "phi3", "phi4"):
        assert gated[label].attack.kind == "gated"
        assert gated[label].attack.gate_parity == "even"

    higher = preset_curves("fig5a")
    assert list(higher) == ["phi1", "phi2", "phi3", "phi4"]
    assert np.allclose(higher["phi4"].attack.phi, higher_phis[4])

    counter = preset_curves("fig5b")
    assert list(counter) == ["clean", "phi2"]
    assert counter["clean"].attack.kind == "identity"
    assert np.allclose(counter["phi2"].attack.phi, np.eye(5) - counter_upsilon(1.0))

    assert preset_curves("fig3a", full_scale=True)["phi1"].trials == FULL_TRIALS
    with pytest.raises(ValueError):
        preset_curves("fig4x")


def test_gated_preset_produces_both_modes():
    # the gate keys on the parity of each realized relay trace, so across
    # trials some traces pass through untouched and some are manipulated
    scenario = preset("fig3d")
    scenario = Scenario(
        p1=scenario.p1,
        p2=scenario.p2,
        mac=scenario.mac,
        b=scenario.b,
        attack=scenario.attack,
        n=2_000,
        mu=scenario.mu,
        delta=scenario.delta,
        trials=8,
        master_seed=scenario.master_seed,
    )
    changed = [run_trial(scenario, i).changed_fraction for i in range(8)]
    assert any(c == 0.0 for c in changed)
    assert any(c > 0.0 for c in changed)
    assert all(c == 0.0 or c < 0.02 for c in changed)

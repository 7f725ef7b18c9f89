"""Command-line surface: scenario files, trace files, and result tables.

Commands
--------
``certify``    decide whether an observation channel admits undetectable
               symbol substitution, printing a JSON report.
``simulate``   run a seeded Monte Carlo experiment to a results CSV,
               optionally emitting per-trial symbol traces.
``detect``     run the trace detector on a recorded source-side trace.
``reproduce``  write the empirical-CDF tables of a named preset, one CSV
               per manipulation curve, plus an error-rate summary.

Exit codes: 0 = clean / non-manipulable, 2 = malicious / manipulable,
1 = any error (bad usage, unreadable files, invalid documents).  The
environment variable ``RELAY_SENTINEL_SEED`` overrides the master seed
of whatever scenario a command runs.

Scenario documents are JSON with keys ``sources`` (``p1``, ``p2``),
``mac`` (``{"type": "adder"}`` or ``{"type": "table", "u_size": n,
"table": [[...]]}``), ``bc_marginal`` (row-major matrix, one column per
relay symbol), ``attack`` (``identity`` | ``iid`` | ``gated``), and
``sim`` (``N``, ``trials``, ``mu``, ``delta``, ``seed``).  Trace files
are CSV with header ``n,x1,y1`` (source side) or ``n,u,v`` (relay side),
zero-based symbol indices, and ``#``-prefixed metadata lines.
"""

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .attackmodel import AttackSpec
from .channelmodel import MacModel, marginalize_mac
from .detector import DetectorConfig, run_detection
from .harness import (
    Scenario,
    empirical_cdf,
    error_rates,
    preset_curves,
    run_experiment,
    trial_traces,
)
from .manipulability import CertificationFailure, ConsistencyFailure, certify

__all__ = [
    "main",
    "scenario_document",
    "scenario_from_document",
    "scenario_hash",
]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FLAGGED = 2

_TOL = 1e-9


class ScenarioFileError(ValueError):
    """Invalid scenario/trace document; the message names the bad key."""


class _UsageError(Exception):
    pass


# ---------- document loading ----------


def _get(mapping, key, path=""):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ScenarioFileError(f"{path}{key}: missing")
    return mapping[key]


def _pmf(value, path):
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ScenarioFileError(f"{path}: expected a non-empty list of probabilities")
    if (arr < -_TOL).any() or abs(arr.sum() - 1.0) > 1e-6:
        raise ScenarioFileError(f"{path}: entries must be non-negative and sum to 1")
    return arr


def _matrix(value, path):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioFileError(f"{path}: expected a matrix of numbers") from None
    if arr.ndim != 2 or arr.size == 0:
        raise ScenarioFileError(f"{path}: expected a non-empty list of equal-length rows")
    return arr


def _check_column_stochastic(mat, path):
    negatives = np.argwhere(mat < -_TOL)
    if negatives.size:
        i, j = negatives[0]
        raise ScenarioFileError(f"{path}[{i}][{j}]: negative entry {mat[i, j]}")
    sums = mat.sum(axis=0)
    bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-6)
    if bad.size:
        j = bad[0]
        raise ScenarioFileError(
            f"{path}[.][{j}]: column sums to {sums[j]}, expected 1"
        )


def _count(value, path, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ScenarioFileError(f"{path}: expected an integer >= {minimum}")
    return value


def _positive_real(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFileError(f"{path}: expected a positive number")
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise ScenarioFileError(f"{path}: expected a positive number")
    return value


def load_channel(doc):
    """(p1, p2, mac, b) from a scenario/channel document."""
    sources = _get(doc, "sources")
    p1 = _pmf(_get(sources, "p1", "sources."), "sources.p1")
    p2 = _pmf(_get(sources, "p2", "sources."), "sources.p2")
    mac_doc = _get(doc, "mac")
    mac_type = _get(mac_doc, "type", "mac.")
    if mac_type == "adder":
        mac = MacModel.adder(p1.size, p2.size)
    elif mac_type == "table":
        u_size = _count(_get(mac_doc, "u_size", "mac."), "mac.u_size")
        table = _matrix(_get(mac_doc, "table", "mac."), "mac.table")
        if table.shape[0] != u_size:
            raise ScenarioFileError(
                f"mac.table: has {table.shape[0]} rows, u_size says {u_size}"
            )
        _check_column_stochastic(table, "mac.table")
        try:
            mac = MacModel.from_table(table, p1.size, p2.size)
        except ValueError as exc:
            raise ScenarioFileError(f"mac.table: {exc}") from None
    else:
        raise ScenarioFileError(f"mac.type: unknown type {mac_type!r}")
    b = _matrix(_get(doc, "bc_marginal"), "bc_marginal")
    _check_column_stochastic(b, "bc_marginal")
    if b.shape[1] != mac.u_size:
        raise ScenarioFileError(
            f"bc_marginal: has {b.shape[1]} columns, expected one per relay symbol"
            f" ({mac.u_size})"
        )
    return p1, p2, mac, b


def _load_attack(doc, u_size):
    attack_doc = _get(doc, "attack")
    attack_type = _get(attack_doc, "type", "attack.")
    if attack_type == "identity":
        return AttackSpec.identity()
    if attack_type not in ("iid", "gated"):
        raise ScenarioFileError(f"attack.type: unknown type {attack_type!r}")
    phi = _matrix(_get(attack_doc, "phi", "attack."), "attack.phi")
    if phi.shape != (u_size, u_size):
        raise ScenarioFileError(
            f"attack.phi: expected a {u_size}x{u_size} matrix, got {phi.shape[0]}x{phi.shape[1]}"
        )
    _check_column_stochastic(phi, "attack.phi")
    if attack_type == "iid":
        return AttackSpec.iid(phi)
    gate = _get(attack_doc, "gate", "attack.")
    if gate not in ("even", "odd"):
        raise ScenarioFileError(f"attack.gate: expected 'even' or 'odd', got {gate!r}")
    return AttackSpec.gated(phi, gate)


def scenario_from_document(doc, *, seed_override=None, trials_override=None) -> Scenario:
    """Validate a scenario document into a Scenario."""
    p1, p2, mac, b = load_channel(doc)
    attack = _load_attack(doc, mac.u_size)
    sim = _get(doc, "sim")
    n = _count(_get(sim, "N", "sim."), "sim.N")
    trials = _count(_get(sim, "trials", "sim."), "sim.trials")
    mu = _positive_real(_get(sim, "mu", "sim."), "sim.mu")
    delta = _positive_real(_get(sim, "delta", "sim."), "sim.delta")
    seed = _count(_get(sim, "seed", "sim."), "sim.seed", minimum=0)
    if seed_override is not None:
        seed = seed_override
    if trials_override is not None:
        trials = trials_override
    return Scenario(
        p1=p1,
        p2=p2,
        mac=mac,
        b=b,
        attack=attack,
        n=n,
        mu=mu,
        delta=delta,
        trials=trials,
        master_seed=seed,
    )


def scenario_document(scenario: Scenario) -> dict:
    """Canonical JSON-ready document for a Scenario (round-trips exactly)."""
    attack = {"type": scenario.attack.kind}
    if scenario.attack.phi is not None:
        attack["phi"] = scenario.attack.phi.tolist()
    if scenario.attack.gate_parity is not None:
        attack["gate"] = scenario.attack.gate_parity
    return {
        "sources": {"p1": scenario.p1.tolist(), "p2": scenario.p2.tolist()},
        "mac": {
            "type": "table",
            "u_size": scenario.mac.u_size,
            "table": scenario.mac.table.tolist(),
        },
        "bc_marginal": scenario.b.tolist(),
        "attack": attack,
        "sim": {
            "N": scenario.n,
            "trials": scenario.trials,
            "mu": scenario.mu,
            "delta": scenario.delta,
            "seed": scenario.master_seed,
        },
    }


def scenario_hash(scenario: Scenario) -> str:
    """SHA-256 of the canonical scenario document."""
    canonical = json.dumps(
        scenario_document(scenario), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode()).hexdigest()


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioFileError(f"{path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"{path}: not valid JSON ({exc})") from None


# ---------- trace files ----------


def read_trace(path):
    """(metadata, header tuple, (first column, second column)) of a trace CSV."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ScenarioFileError(f"{path}: {exc.strerror or exc}") from None
    metadata = {}
    header = None
    rows = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                metadata[key.strip()] = value.strip()
            continue
        if header is None:
            header = tuple(part.strip() for part in line.split(","))
            continue
        rows.append(line.split(","))
    if header not in (("n", "x1", "y1"), ("n", "u", "v")):
        raise ScenarioFileError("trace: header must be 'n,x1,y1' or 'n,u,v'")
    if not rows:
        raise ScenarioFileError("trace: no data rows")
    try:
        data = np.array(rows, dtype=int)
    except ValueError:
        raise ScenarioFileError("trace: rows must be comma-separated integers") from None
    if data.shape[1] != 3:
        raise ScenarioFileError("trace: every row needs exactly three fields")
    if not np.array_equal(data[:, 0], np.arange(data.shape[0])):
        raise ScenarioFileError("trace: n must be contiguous from 0")
    if (data[:, 1:] < 0).any():
        raise ScenarioFileError("trace: symbol indices must be non-negative")
    return metadata, header, (data[:, 1], data[:, 2])


def _write_csv(path, metadata, header, rows):
    lines = [f"# {key} = {value}" for key, value in metadata]
    lines.append(header)
    lines.extend(rows)
    Path(path).write_text("\n".join(lines) + "\n")


def _tool_metadata():
    return [("tool", f"relay-sentinel {__version__}"), ("rng", "PCG64")]


def _write_trial_traces(directory, scenario, results):
    os.makedirs(directory, exist_ok=True)
    digest = scenario_hash(scenario)
    x1_size = scenario.mac.x1_size
    y1_size = scenario.b.shape[0]
    u_size = scenario.mac.u_size
    for result in results:
        x1, y1, u, v = trial_traces(scenario, result.trial_index)
        shared = _tool_metadata() + [
            ("scenario_hash", digest),
            ("trial", result.trial_index),
            ("seed", result.seed_used),
        ]
        stem = f"trace_{result.trial_index:04d}"
        _write_csv(
            Path(directory) / f"{stem}_source.csv",
            shared + [("x1_size", x1_size), ("y1_size", y1_size)],
            "n,x1,y1",
            (f"{i},{a},{b}" for i, (a, b) in enumerate(zip(x1.tolist(), y1.tolist()))),
        )
        _write_csv(
            Path(directory) / f"{stem}_relay.csv",
            shared + [("u_size", u_size)],
            "n,u,v",
            (f"{i},{a},{b}" for i, (a, b) in enumerate(zip(u.tolist(), v.tolist()))),
        )


# ---------- commands ----------


def _cmd_certify(args):
    doc = _read_json(args.channel_file)
    _p1, p2, mac, b = load_channel(doc)
    a = marginalize_mac(mac, p2)
    verdict = certify(a, b)
    report = {
        "manipulable": verdict.manipulable,
        "lp_value": verdict.lp_optimal_value,
        "method": verdict.method,
    }
    if verdict.witness is not None:
        report["witness"] = verdict.witness.tolist()
    if verdict.induced_attack is not None:
        report["induced_attack"] = verdict.induced_attack.tolist()
    print(json.dumps(report, indent=2))
    return EXIT_FLAGGED if verdict.manipulable else EXIT_OK


def _env_seed():
    raw = os.environ.get("RELAY_SENTINEL_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ScenarioFileError(
            f"RELAY_SENTINEL_SEED must be an integer, got {raw!r}"
        ) from None


def _scenario_for_simulate(args):
    seed_override = _env_seed()
    if (args.scenario_file is None) == (args.preset is None):
        raise _UsageError("provide exactly one of a scenario file or --preset")
    if args.preset is not None:
        try:
            curves = preset_curves(args.preset, full_scale=args.full_scale)
        except ValueError as exc:
            raise ScenarioFileError(str(exc)) from None
        label = "phi2" if "phi2" in curves else next(iter(curves))
        scenario = curves[label]
        overrides = {}
        if seed_override is not None:
            overrides["master_seed"] = seed_override
        if args.trials is not None:
            overrides["trials"] = args.trials
        if overrides:
            scenario = dataclasses.replace(scenario, **overrides)
        return scenario
    doc = _read_json(args.scenario_file)
    return scenario_from_document(
        doc, seed_override=seed_override, trials_override=args.trials
    )


def _simulate_metadata(args, scenario):
    metadata = _tool_metadata()
    if args.preset is not None:
        metadata.append(("preset", args.preset))
    metadata.extend(
        [
            ("scenario_hash", scenario_hash(scenario)),
            ("master_seed", scenario.master_seed),
            ("n", scenario.n),
            ("trials", scenario.trials),
        ]
    )
    return metadata


def _cmd_simulate(args):
    scenario = _scenario_for_simulate(args)
    results = run_experiment(scenario)
    rows = [
        f"{r.trial_index},{r.statistic!r},{r.truth_stat!r},"
        f"{'true' if r.feasible else 'false'},{r.seed_used}"
        for r in results
    ]
    _write_csv(
        args.output,
        _simulate_metadata(args, scenario),
        "trial,D,truth_stat,feasible,seed",
        rows,
    )
    if args.emit_trace is not None:
        _write_trial_traces(args.emit_trace, scenario, results)
    return EXIT_OK


def _cmd_detect(args):
    doc = _read_json(args.channel_file)
    _p1, p2, mac, b = load_channel(doc)
    sim = _get(doc, "sim")
    mu = _positive_real(_get(sim, "mu", "sim."), "sim.mu")
    delta = _positive_real(_get(sim, "delta", "sim."), "sim.delta")
    a = marginalize_mac(mac, p2)

    metadata, header, (x1, y1) = read_trace(args.trace_file)
    if header != ("n", "x1", "y1"):
        raise ScenarioFileError(
            "trace: detection needs a source-side trace with header n,x1,y1"
        )
    x1_size, y1_size = a.shape[1], b.shape[0]
    for key, size in (("x1_size", x1_size), ("y1_size", y1_size)):
        declared = metadata.get(key)
        if declared is not None and int(declared) != size:
            raise ScenarioFileError(
                f"trace: declared {key} = {declared} does not match the channel's"
                f" alphabet size {size}"
            )
    if int(x1.max()) >= x1_size or int(y1.max()) >= y1_size:
        raise ScenarioFileError(
            "trace: symbol indices exceed the channel's alphabet sizes"
        )

    report = run_detection(DetectorConfig(a=a, b=b, mu=mu, delta=delta), x1, y1)
    print(
        json.dumps(
            {
                "statistic": report.statistic,
                "verdict": report.verdict,
                "feasible": report.feasible,
                "gamma_hat": report.gamma_hat.tolist(),
                "phi_hat": report.phi_hat.tolist(),
            },
            indent=2,
        )
    )
    return EXIT_FLAGGED if report.verdict == "malicious" else EXIT_OK


def _cmd_reproduce(args):
    try:
        curves = preset_curves(args.figure, full_scale=args.full_scale)
    except ValueError as exc:
        raise ScenarioFileError(str(exc)) from None
    seed_override = _env_seed()
    overrides = {}
    if seed_override is not None:
        overrides["master_seed"] = seed_override
    if args.trials is not None:
        overrides["trials"] = args.trials
    if overrides:
        curves = {
            label: dataclasses.replace(scenario, **overrides)
            for label, scenario in curves.items()
        }
    os.makedirs(args.output_dir, exist_ok=True)

    statistics = {}
    delta = None
    for label, scenario in curves.items():
        results = run_experiment(scenario)
        statistics[label] = [r.statistic for r in results]
        values, fractions = empirical_cdf(statistics[label])
        metadata = _tool_metadata() + [
            ("preset", args.figure),
            ("curve", label),
            ("scenario_hash", scenario_hash(scenario)),
            ("master_seed", scenario.master_seed),
            ("n", scenario.n),
            ("mu", scenario.mu),
            ("delta", scenario.delta),
            ("trials", scenario.trials),
        ]
        rows = [
            f"{value!r},{fraction!r}"
            for value, fraction in zip(values.tolist(), fractions.tolist())
        ]
        _write_csv(
            Path(args.output_dir) / f"{args.figure}_{label}.csv",
            metadata,
            "value,cum_fraction",
            rows,
        )
        delta = scenario.delta

    null_label = "clean" if "clean" in statistics else "phi1"
    summary_rows = []
    for label, stats in statistics.items():
        if label == null_label:
            continue
        false_alarm, miss = error_rates(statistics[null_label], stats, delta)
        summary_rows.append(f"{label},{delta!r},{false_alarm!r},{miss!r}")
    summary_metadata = _tool_metadata() + [
        ("preset", args.figure),
        ("null_curve", null_label),
        ("trials", next(iter(curves.values())).trials),
    ]
    _write_csv(
        Path(args.output_dir) / f"{args.figure}_error_rates.csv",
        summary_metadata,
        "curve,delta,false_alarm,miss",
        summary_rows,
    )
    return EXIT_OK


# ---------- argument parsing ----------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(
        prog="relay-sentinel",
        description="Certify, simulate, and detect relay symbol manipulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    certify_parser = sub.add_parser(
        "certify", help="decide whether a channel admits undetectable manipulation"
    )
    certify_parser.add_argument("channel_file")
    certify_parser.set_defaults(func=_cmd_certify)

    simulate_parser = sub.add_parser(
        "simulate", help="run a seeded Monte Carlo experiment to a results CSV"
    )
    simulate_parser.add_argument("scenario_file", nargs="?")
    simulate_parser.add_argument("--preset", help="named preset scenario")
    simulate_parser.add_argument("--trials", type=int, help="override the trial count")
    simulate_parser.add_argument(
        "--full-scale",
        action="store_true",
        help="use the 5000-trial preset count instead of 300",
    )
    simulate_parser.add_argument(
        "--emit-trace", metavar="DIR", help="also write per-trial symbol traces"
    )
    simulate_parser.add_argument("-o", "--output", required=True)
    simulate_parser.set_defaults(func=_cmd_simulate)

    detect_parser = sub.add_parser(
        "detect", help="run the detector on a recorded source-side trace"
    )
    detect_parser.add_argument("channel_file")
    detect_parser.add_argument("trace_file")
    detect_parser.set_defaults(func=_cmd_detect)

    reproduce_parser = sub.add_parser(
        "reproduce", help="write the CDF tables of a named preset"
    )
    reproduce_parser.add_argument("figure")
    reproduce_parser.add_argument("--trials", type=int, help="override the trial count")
    reproduce_parser.add_argument(
        "--full-scale",
        action="store_true",
        help="use the 5000-trial preset count instead of 300",
    )
    reproduce_parser.add_argument("-o", "--output-dir", required=True)
    reproduce_parser.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError, CertificationFailure, ConsistencyFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

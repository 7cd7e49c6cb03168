"""Command-line experiment harness.

Wires objectives, neighborhoods, policies, analyses, and solvers into
reproducible runs: every command writes machine-readable outputs plus a
manifest.ini holding the full resolved configuration, seeds, and artifact
version.  Rerunning a command with ``--config <manifest.ini>`` reproduces
the outputs byte for byte.

Exit codes: 0 success, 1 usage/config error, 2 inconclusive analysis,
3 resource limit.
"""

from __future__ import annotations

import argparse
import configparser
import io
import os
import sys
from pathlib import Path

from . import __version__
from .coefficients import (classify, convergence_coefficient, convergence_trace,
                           partition_moves)
from .exact_solver import (evaluate_nonstationary, evaluate_stationary, freeze,
                           value_iteration)
from .objectives import parse_objective
from .policies import parse_policy
from .search_space import LocalSearchMdp, ResourceLimitError, parse_criterion
from .serialize import atomic_write_text, csv_text, dumps_json, dumps_json_line
from .simulator import (best_so_far_curve, generate_records, derive_seed,
                        summarize_records)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INCONCLUSIVE = 2
EXIT_RESOURCE = 3

OUTPUT_DIR_ENV = "LSMDP_OUT"
_FORMATS = ("csv", "json", "both")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; remap onto this CLI's contract.
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lsmdp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, policy="single"):
        p.add_argument("--config", help="INI file; [run] keys supply defaults, flags override")
        p.add_argument("--objective",
                       help="objective descriptor: onemax:n=8 | leading_ones:n=8 | "
                            "trap:n=8,k=4 | nk:n=12,k=3,seed=7 | maxsat:path=f.cnf "
                            "(bit b holds CNF variable b+1)")
        p.add_argument("--neighborhood", help="neighborhood descriptor (default hamming:1)")
        p.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./lsmdp_out)")
        p.add_argument("--format", help="output formats: csv | json | both (default both)")
        if policy == "single":
            p.add_argument("--policy",
                           help="policy descriptor: hc | hc:literal | sa:T0=10,rate=0.9 | "
                                "walk | metropolis:T=1")
        elif policy == "multi":
            p.add_argument("--policy", action="append",
                           help="policy descriptor (repeatable)")

    p = sub.add_parser("classify", help="orientation classification of a policy")
    common(p)
    p.add_argument("--horizon", help="series truncation horizon (default 200)")
    p.add_argument("--tail-tolerance", help="geometric tail bound for convergence (default 1e-9)")
    p.add_argument("--reachable-from", help="restrict the sweep to states reachable from this start")

    p = sub.add_parser("gamma", help="per-state convergence coefficient table")
    common(p)
    p.add_argument("--start", help="also trace a trajectory from this state (needs --policy)")
    p.add_argument("--t-max", help="trace length (default 50)")
    p.add_argument("--seed", help="trace RNG seed (default 0)")

    p = sub.add_parser("value", help="policy evaluation vs optimal values")
    common(p)
    p.add_argument("--discount", help="discount factor (default 0.9)")
    p.add_argument("--horizon", help="evaluation horizon for nonstationary policies (default 200)")

    p = sub.add_parser("simulate", help="seeded Monte-Carlo rollouts")
    common(p)
    _sim_options(p)

    p = sub.add_parser("compare", help="rollouts for several policies on one objective")
    common(p, policy="multi")
    _sim_options(p)

    return parser


def _sim_options(p):
    p.add_argument("--start", help="fixed start state (int) or 'uniform' (default uniform)")
    p.add_argument("--horizon", help="steps per trajectory (default 1000)")
    p.add_argument("--seeds", help="number of seeded trajectories (default 100)")
    p.add_argument("--base-seed", help="root seed for trajectory derivation (default 0)")
    p.add_argument("--bucket-width", help="time bucket width for the diagnostics (default 1)")
    p.add_argument("--emit-trajectories", action="store_true", default=None,
                   help="also stream trajectories to trajectories.jsonl")


def _load_config(path: str) -> dict[str, str]:
    cfg = configparser.ConfigParser()
    cfg.optionxform = str
    if not Path(path).is_file():
        raise UsageError(f"config file not found: {path}")
    cfg.read(path, encoding="utf-8")
    if "run" not in cfg:
        raise UsageError(f"config file {path} has no [run] section")
    return dict(cfg["run"])


def _resolve(args, defaults: dict[str, str | None]) -> dict[str, str]:
    """Merge CLI flags over config-file keys over defaults; a None default
    marks a required option."""
    config_values = _load_config(args.config) if args.config else {}
    resolved = {}
    for key, default in defaults.items():
        attr = key.replace("-", "_")
        cli_value = getattr(args, attr, None)
        if isinstance(cli_value, bool):
            cli_value = "true" if cli_value else "false"
        value = cli_value if cli_value is not None else config_values.get(key, default)
        if value is None:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")
        resolved[key] = str(value)
    return resolved


def _int_opt(resolved, key):
    try:
        return int(resolved[key])
    except ValueError:
        raise UsageError(f"option {key} must be an integer, got {resolved[key]!r}") from None


def _float_opt(resolved, key):
    try:
        return float(resolved[key])
    except ValueError:
        raise UsageError(f"option {key} must be a number, got {resolved[key]!r}") from None


def _formats(resolved) -> set[str]:
    fmt = resolved["format"]
    if fmt not in _FORMATS:
        raise UsageError(f"unknown format {fmt!r}, expected one of {', '.join(_FORMATS)}")
    return {"csv", "json"} if fmt == "both" else {fmt}


def _outdir(resolved) -> Path:
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _default_out() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, "lsmdp_out")


def _build_mdp(resolved) -> LocalSearchMdp:
    objective = parse_objective(resolved["objective"])
    criterion = parse_criterion(resolved["neighborhood"])
    return LocalSearchMdp(objective, criterion)


def _write_manifest(outdir: Path, command: str, resolved: dict[str, str]) -> None:
    cfg = configparser.ConfigParser()
    cfg.optionxform = str
    cfg["meta"] = {"artifact_version": __version__, "command": command}
    cfg["run"] = dict(sorted(resolved.items()))
    buf = io.StringIO()
    cfg.write(buf)
    atomic_write_text(outdir / "manifest.ini", buf.getvalue())


def _reachable_states(mdp: LocalSearchMdp, start: int) -> list[int]:
    mdp.check_state(start)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for i in frontier:
            for j in mdp.neighbors(i):
                if j not in seen:
                    seen.add(j)
                    nxt.append(j)
        frontier = nxt
    return sorted(seen)


def cmd_classify(args) -> int:
    resolved = _resolve(args, {
        "objective": None,
        "neighborhood": "hamming:1",
        "policy": None,
        "horizon": "200",
        "tail_tolerance": "1e-9",
        "reachable_from": "",
        "format": "both",
        "out": _default_out(),
    })
    formats = _formats(resolved)
    mdp = _build_mdp(resolved)
    policy = parse_policy(resolved["policy"])
    states = None
    if resolved["reachable_from"]:
        states = _reachable_states(mdp, _int_opt(resolved, "reachable_from"))
    report = classify(policy, mdp, horizon=_int_opt(resolved, "horizon"),
                      tail_tolerance=_float_opt(resolved, "tail_tolerance"), states=states)
    outdir = _outdir(resolved)
    if "json" in formats:
        atomic_write_text(outdir / "report.json", dumps_json(report.to_json_dict()))
    if "csv" in formats:
        atomic_write_text(outdir / "report.csv",
                          csv_text(report.CSV_HEADER, report.csv_rows()))
    _write_manifest(outdir, "classify", resolved)
    print(report.classification.describe())
    return EXIT_INCONCLUSIVE if report.classification.kind == "inconclusive" else EXIT_OK


def cmd_gamma(args) -> int:
    resolved = _resolve(args, {
        "objective": None,
        "neighborhood": "hamming:1",
        "policy": "",
        "start": "",
        "t_max": "50",
        "seed": "0",
        "format": "both",
        "out": _default_out(),
    })
    formats = _formats(resolved)
    mdp = _build_mdp(resolved)
    if mdp.n > 20:
        raise ResourceLimitError(f"per-state table is capped at n <= 20, got n={mdp.n}")
    rows = []
    table = {}
    for i in range(mdp.num_states):
        part = partition_moves(mdp, i)
        gamma = convergence_coefficient(mdp, i)
        local_max = not part.improving
        rows.append((i, mdp.value(i), len(part.improving), len(part.non_improving),
                     gamma, local_max))
        table[str(i)] = {"f": mdp.value(i), "improving": len(part.improving),
                         "non_improving": len(part.non_improving), "gamma": gamma,
                         "local_max": local_max}
    outdir = _outdir(resolved)
    header = ("state", "f", "improving", "non_improving", "gamma", "local_max")
    if "csv" in formats:
        atomic_write_text(outdir / "gamma.csv", csv_text(header, rows))
    payload = {"states": table}
    if resolved["policy"] and resolved["start"]:
        import numpy as np

        policy = parse_policy(resolved["policy"])
        rng = np.random.default_rng(_int_opt(resolved, "seed"))
        trace = convergence_trace(policy, mdp, _int_opt(resolved, "start"),
                                  _int_opt(resolved, "t_max"), rng)
        payload["trace"] = {"states": list(trace.states), "gamma": list(trace.values),
                            "first_zero": trace.first_zero,
                            "seed": _int_opt(resolved, "seed")}
        if "csv" in formats:
            trace_rows = [(t, s, g) for t, (s, g) in enumerate(zip(trace.states, trace.values))]
            atomic_write_text(outdir / "trace.csv",
                              csv_text(("t", "state", "gamma"), trace_rows))
        print(f"trace first_zero={trace.first_zero}")
    else:
        local_maxima = sum(1 for row in rows if row[5])
        print(f"{local_maxima} local maxima over {mdp.num_states} states")
    if "json" in formats:
        atomic_write_text(outdir / "gamma.json", dumps_json(payload))
    _write_manifest(outdir, "gamma", resolved)
    return EXIT_OK


def cmd_value(args) -> int:
    resolved = _resolve(args, {
        "objective": None,
        "neighborhood": "hamming:1",
        "policy": None,
        "discount": "0.9",
        "horizon": "200",
        "format": "both",
        "out": _default_out(),
    })
    formats = _formats(resolved)
    mdp = _build_mdp(resolved)
    policy = parse_policy(resolved["policy"])
    discount = _float_opt(resolved, "discount")
    if policy.stationary:
        policy_values = evaluate_stationary(freeze(policy, mdp, 0), discount)
    else:
        policy_values = evaluate_nonstationary(policy, mdp, _int_opt(resolved, "horizon"),
                                               discount)
    optimal_values, greedy = value_iteration(mdp, discount)
    rows = []
    for i in range(mdp.num_states):
        vp = float(policy_values.v[i])
        vo = float(optimal_values.v[i])
        rows.append((i, mdp.value(i), vp, vo, vo - vp))
    outdir = _outdir(resolved)
    if "csv" in formats:
        atomic_write_text(outdir / "value.csv",
                          csv_text(("state", "f", "v_policy", "v_optimal", "gap"), rows))
        greedy_rows = [(i, move.dst if move is not None else i) for i, move in greedy.items()]
        atomic_write_text(outdir / "greedy.csv",
                          csv_text(("state", "next_state"), greedy_rows))
    if "json" in formats:
        atomic_write_text(outdir / "value.json", dumps_json({
            "policy": policy_values.to_json_dict(),
            "optimal": optimal_values.to_json_dict(),
            "greedy": {str(i): (list(m) if m is not None else None) for i, m in greedy.items()},
        }))
    _write_manifest(outdir, "value", resolved)
    worst_gap = max(row[4] for row in rows)
    print(f"max optimality gap {worst_gap!r}")
    return EXIT_OK


_SIM_DEFAULTS = {
    "objective": None,
    "neighborhood": "hamming:1",
    "start": "uniform",
    "horizon": "1000",
    "seeds": "100",
    "base_seed": "0",
    "bucket_width": "1",
    "emit_trajectories": "false",
    "format": "both",
    "out": _default_out,
}


def _sim_resolved(args, multi_policy: bool) -> dict[str, str]:
    defaults = {key: (value() if callable(value) else value)
                for key, value in _SIM_DEFAULTS.items()}
    if not multi_policy:
        defaults["policy"] = None
    resolved = _resolve(args, defaults)
    if multi_policy:
        config_values = _load_config(args.config) if args.config else {}
        cli_policies = getattr(args, "policy", None)
        if cli_policies:
            policies = list(cli_policies)
        else:
            keyed = sorted((k, v) for k, v in config_values.items() if k.startswith("policy_"))
            policies = [v for _, v in keyed]
        if not policies:
            raise UsageError("missing required option --policy")
        for idx, descriptor in enumerate(policies):
            resolved[f"policy_{idx}"] = descriptor
    return resolved


def _sim_params(resolved):
    start_rule = resolved["start"]
    if start_rule != "uniform":
        try:
            start_rule = int(start_rule)
        except ValueError:
            raise UsageError(f"start must be an int state or 'uniform', got {start_rule!r}") from None
    return (start_rule, _int_opt(resolved, "horizon"), _int_opt(resolved, "seeds"),
            _int_opt(resolved, "base_seed"), _int_opt(resolved, "bucket_width"))


def _write_sim_outputs(outdir, formats, mdp, named_runs, horizon, bucket_width, emit):
    """named_runs: list of (descriptor, records, summary)."""
    summary_rows = [(descriptor,) + summary.csv_row() for descriptor, _, summary in named_runs]
    if "csv" in formats:
        header = ("policy",) + named_runs[0][2].CSV_HEADER
        atomic_write_text(outdir / "summary.csv", csv_text(header, summary_rows))
        best_rows = []
        explore_rows = []
        for descriptor, records, summary in named_runs:
            means, quartiles = best_so_far_curve(records, horizon)
            for t, mean in enumerate(means):
                best_rows.append((descriptor, t, mean, quartiles["p25"][t],
                                  quartiles["p50"][t], quartiles["p75"][t]))
            for b, (frac, ratio) in enumerate(zip(summary.exploration_fraction,
                                                  summary.exploration_ratio)):
                explore_rows.append((descriptor, b, b * bucket_width,
                                     min(horizon, (b + 1) * bucket_width) - 1, frac, ratio))
        atomic_write_text(outdir / "plot_best.csv",
                          csv_text(("policy", "t", "mean", "p25", "p50", "p75"), best_rows))
        atomic_write_text(outdir / "plot_explore.csv",
                          csv_text(("policy", "bucket", "t_lo", "t_hi",
                                    "exploration_fraction", "exploration_ratio"),
                                   explore_rows))
        seed_rows = []
        for descriptor, records, _ in named_runs:
            for index, record in enumerate(records):
                seed_rows.append((descriptor, index, record.seed, record.start))
        atomic_write_text(outdir / "seeds.csv",
                          csv_text(("policy", "index", "seed", "start"), seed_rows))
    if "json" in formats:
        atomic_write_text(outdir / "summary.json", dumps_json(
            {descriptor: summary.to_json_dict() for descriptor, _, summary in named_runs}))
    if emit:
        lines = []
        for descriptor, records, _ in named_runs:
            for record in records:
                payload = record.to_json_dict()
                payload["policy"] = descriptor
                lines.append(dumps_json_line(payload))
        atomic_write_text(outdir / "trajectories.jsonl", "".join(lines))


def cmd_simulate(args) -> int:
    resolved = _sim_resolved(args, multi_policy=False)
    formats = _formats(resolved)
    mdp = _build_mdp(resolved)
    policy = parse_policy(resolved["policy"])
    start_rule, horizon, seeds, base_seed, bucket_width = _sim_params(resolved)
    records = generate_records(policy, mdp, start_rule, horizon, seeds, base_seed)
    summary = summarize_records(records, horizon, bucket_width, mdp.objective.known_optimum)
    outdir = _outdir(resolved)
    emit = resolved["emit_trajectories"] == "true"
    _write_sim_outputs(outdir, formats, mdp, [(resolved["policy"], records, summary)],
                       horizon, bucket_width, emit)
    _write_manifest(outdir, "simulate", resolved)
    print(f"hit_rate={summary.hit_rate!r} best_final_mean={summary.best_final_mean!r}")
    return EXIT_OK


def cmd_compare(args) -> int:
    resolved = _sim_resolved(args, multi_policy=True)
    formats = _formats(resolved)
    mdp = _build_mdp(resolved)
    start_rule, horizon, seeds, base_seed, bucket_width = _sim_params(resolved)
    descriptors = [resolved[k] for k in sorted(resolved) if k.startswith("policy_")]
    named_runs = []
    for descriptor in descriptors:
        policy = parse_policy(descriptor)
        records = generate_records(policy, mdp, start_rule, horizon, seeds, base_seed)
        summary = summarize_records(records, horizon, bucket_width,
                                    mdp.objective.known_optimum)
        named_runs.append((descriptor, records, summary))
    outdir = _outdir(resolved)
    emit = resolved["emit_trajectories"] == "true"
    _write_sim_outputs(outdir, formats, mdp, named_runs, horizon, bucket_width, emit)
    _write_manifest(outdir, "compare", resolved)
    for descriptor, _, summary in named_runs:
        print(f"{descriptor}: hit_rate={summary.hit_rate!r} "
              f"best_final_mean={summary.best_final_mean!r}")
    return EXIT_OK


_COMMANDS = {
    "classify": cmd_classify,
    "gamma": cmd_gamma,
    "value": cmd_value,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands::

    simulate         Monte Carlo logical error rates -> CSV + manifest
    threshold        crossing estimate from result CSVs
    verify-flags     exhaustive flag-property checks of every face circuit
    verify-distance  exhaustive or sampled code-capacity distance check
    dump-lattice     lattice / dual-lattice JSON (optionally the circuit)
    dump-graph       space-time matching graph with weights as JSON
    edge-weights     fault-enumerated edge coefficients and the reference-coefficient comparison

Run ``tricolor <subcommand> -h`` for the options of each.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .decoder import VARIANTS
from .harness import (
    FLAG_SCHEMES,
    ExperimentConfig,
    estimate_threshold,
    exhaustive_distance_check,
    read_results,
    run_montecarlo,
    sampled_distance_check,
    verify_flags,
)
from .sim import CAPACITY, CIRCUIT


def parse_rates(text: str) -> list[float]:
    """``0.1,0.12`` or ``start:stop:step`` (stop included) -> list of rates."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            a, b, s = (float(x) for x in part.split(":"))
            n = int(round((b - a) / s))
            out += [round(a + k * s, 12) for k in range(n + 1)]
        else:
            out.append(float(part))
    if not out:
        raise argparse.ArgumentTypeError(f"no rates in {text!r}")
    return out


def _distances(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file mirroring ExperimentConfig; flags override it")
    p.add_argument("--distance", type=_distances, help="comma-separated odd distances, e.g. 5,7,9")
    p.add_argument("--p", type=parse_rates, help="rates: list '0.1,0.11' or range 'start:stop:step'")
    p.add_argument("--trials", type=int)
    p.add_argument("--noise", choices=(CAPACITY, CIRCUIT))
    p.add_argument("--decoder", choices=VARIANTS)
    p.add_argument("--flag-scheme", choices=FLAG_SCHEMES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--rounds", type=int, help="syndrome rounds T (default d + 1)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--chunk", type=int, help="trials per independently seeded chunk")
    p.add_argument("--out", help="output base path; writes <out>.csv and <out>.manifest.json")


def config_from_args(args) -> ExperimentConfig:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    over = {
        "distances": args.distance, "ps": args.p, "trials": args.trials, "noise": args.noise,
        "decoder": args.decoder, "flag_scheme": args.flag_scheme, "alpha": args.alpha,
        "rounds": args.rounds, "seed": args.seed, "workers": args.workers, "chunk": args.chunk,
        "out": args.out,
    }
    data.update({k: v for k, v in over.items() if v is not None})
    return ExperimentConfig.from_json(data)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = config_from_args(args)
    if args.trace:
        _emit(json.dumps(trace_trials(cfg, args.trace_shots), indent=1), args.trace)
    total = len(cfg.distances) * len(cfg.ps) * cfg.trials
    done = [0]

    def progress(d, pi, shots):
        done[0] += shots
        if args.progress:
            print(f"\r{done[0]}/{total} trials", end="", file=sys.stderr, flush=True)

    rows = run_montecarlo(cfg, progress)
    if args.progress:
        print(file=sys.stderr)
    if not cfg.out:
        from .harness import CSV_COLUMNS

        sys.stdout.write(",".join(CSV_COLUMNS) + "\n")
        for r in rows:
            sys.stdout.write(",".join(str(r[k]) for k in CSV_COLUMNS) + "\n")
    else:
        print(f"wrote {Path(cfg.out).with_suffix('.csv')}", file=sys.stderr)
    return 0


def trace_trials(cfg: ExperimentConfig, shots: int) -> list[dict]:
    """Decoder traces (pairings, components, lifts) of the first shots of every point."""
    from .harness import CapacityRunner, CircuitRunner

    out = []
    for d in cfg.distances:
        for pi, p in enumerate(cfg.ps):
            rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(d, pi, 0)))
            if cfg.noise == CAPACITY:
                run = CapacityRunner(d, p, cfg.decoder)
                from .sim import sample_code_capacity

                x, z = sample_code_capacity(run.dual, p, rng, shots)
                h = run.dual.lattice.check_matrix
                for i in range(shots):
                    for kind, err in (("X", x[i]), ("Z", z[i])):
                        res = run.decoder.decode(np.flatnonzero((h @ err) & 1))
                        out.append({"distance": d, "p": p, "shot": i, "error_type": kind,
                                    "error": np.flatnonzero(err).tolist(), "trace": res.to_json()})
            else:
                run = CircuitRunner(d, p, cfg.rounds_for(d), cfg.decoder, cfg.flag_scheme, cfg.alpha)
                batch = run.experiment.sample(shots, p, rng)
                for i in range(shots):
                    syn = {b: v[i].copy() for b, v in batch.syndrome.items()}
                    flg = {b: v[i] for b, v in batch.flags.items()}
                    rx, rz = batch.residual_x[i].copy(), batch.residual_z[i].copy()
                    if cfg.flag_scheme == "direct":
                        run.apply_direct(syn, flg, rx, rz)
                    for stack in ("X", "Z"):
                        ev = syn[stack][1:] ^ syn[stack][:-1]
                        res = run.decoders[stack].decode(ev, flg, run.flag_face)
                        out.append({"distance": d, "p": p, "shot": i, "stack": stack,
                                    "events": [list(map(int, e)) for e in zip(*np.nonzero(ev))],
                                    "trace": res.to_json()})
    return out


def cmd_threshold(args) -> int:
    rows = []
    for path in args.results:
        rows += read_results(path)
    if not rows:
        print("no rows", file=sys.stderr)
        return 1
    out = {}
    for basis in sorted({r["basis"] for r in rows}):
        est = estimate_threshold(rows, basis)
        out[basis] = {
            "threshold": est.value, "low": est.low, "high": est.high, "crossings": est.crossings,
            "status": "ok" if est.value is not None else "no crossing in range",
        }
    _emit(json.dumps(out, indent=1), args.out)
    return 0


def cmd_verify_flags(args) -> int:
    rows = verify_flags(args.distance)
    ok = all(
        r["one_flag"] and (r["weight"] == 4 or r["two_flag"]) and r["max_residual_1"] <= 2
        and (r["weight"] == 4 or r["max_residual_2"] <= 3) and r["direct_table_matches_reference"] is not False
        for r in rows
    )
    _emit(json.dumps({"distance": args.distance, "pass": ok, "circuits": rows}, indent=1), args.out)
    return 0 if ok else 1


def cmd_verify_distance(args) -> int:
    if args.samples:
        rng = np.random.default_rng(args.seed)
        rep = sampled_distance_check(args.distance, args.weight, args.samples, rng, args.decoder)
    else:
        rep = exhaustive_distance_check(args.distance, args.max_weight, args.decoder, paulis=args.paulis)
    out = {
        "distance": rep.distance, "decoder": rep.variant,
        "mode": "sampled" if args.samples else ("exhaustive-pauli" if args.paulis else "exhaustive-x"),
        "checked": rep.checked, "failures": rep.failures, "examples": rep.examples,
        "min_failing_weight": rep.min_failing_weight(),
        "pass": rep.min_failing_weight() is None,
    }
    _emit(json.dumps(out, indent=1), args.out)
    return 0


def cmd_dump_lattice(args) -> int:
    from .harness import _dual, _schedule

    if args.circuit:
        from .circuit import build_memory_circuit, build_round_schedule

        sched = _schedule(args.distance)
        if args.rounds:
            circ, _ = build_memory_circuit(sched, args.rounds)
            circs = [circ]
        else:
            circs = [build_round_schedule(sched, b) for b in "XZ"]
        if args.circuit == "json":
            text = json.dumps([c.to_json() for c in circs], indent=1)
        else:
            text = "\n".join(c.dumps() for c in circs)
    else:
        text = _dual(args.distance).dumps()
    _emit(text, args.out)
    return 0


def cmd_dump_graph(args) -> int:
    from .graph import build_spacetime_graph, compute_edge_weights, dumps_graph
    from .harness import _catalog

    cat = _catalog(args.distance)
    rounds = args.rounds or args.distance + 1
    diag = sorted(cat.diagonal[(args.stack, args.pair)])
    st = build_spacetime_graph(cat.graphs[args.pair], rounds, diag)
    w = compute_edge_weights(st, cat, args.p, args.stack)
    _emit(dumps_graph(st, w), args.out)
    return 0


def cmd_edge_weights(args) -> int:
    from .circuit import CNOT
    from .graph import (
        REFERENCE_COLUMNS,
        coefficient_csv,
        coefficient_rows,
        enumerate_edges,
        single_pair_diagonals,
        table_csv,
        reference_rows,
    )
    from .harness import _catalog, _schedule

    cat = _catalog(args.distance)
    blind = enumerate_edges(_schedule(args.distance), ignore_flags=True)
    rows = (reference_rows(cat, None, "flag-aware-all-gates")
            + reference_rows(blind, {CNOT}, "flag-blind-cnot"))
    _emit(table_csv(rows, REFERENCE_COLUMNS), args.out)
    if args.coefficients:
        _emit(coefficient_csv(coefficient_rows(cat)), args.coefficients)
    eg = single_pair_diagonals(blind)
    if eg:
        print(f"p_eG witness: {len(eg)} diagonal edges with polynomial {eg[0][3]}", file=sys.stderr)
    hit = sum(r["present"] for r in rows if r["model"] == "flag-blind-cnot")
    print(f"flag-blind CNOT model: {hit}/{len(rows) // 2} reference entries present", file=sys.stderr)
    return 0


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tricolor", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"tricolor {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo logical error rates")
    _experiment_args(p)
    p.add_argument("--trace", metavar="FILE", help="also write decoder traces of the first shots as JSON")
    p.add_argument("--trace-shots", type=int, default=1)
    p.add_argument("--progress", action="store_true", help="report progress on stderr")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("threshold", help="crossing estimate from result CSVs")
    p.add_argument("results", nargs="+", help="CSV files written by simulate")
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("verify-flags", help="flag-property checks of every face circuit")
    p.add_argument("--distance", type=int, default=7)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_flags)

    p = sub.add_parser("verify-distance", help="code-capacity distance check")
    p.add_argument("--distance", type=int, default=5)
    p.add_argument("--max-weight", type=int, default=2)
    p.add_argument("--decoder", choices=VARIANTS, default="adapted")
    p.add_argument("--paulis", action="store_true", help="enumerate X, Y and Z (default: X only, equivalent)")
    p.add_argument("--samples", type=int, default=0, help="sample this many errors of --weight instead")
    p.add_argument("--weight", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_distance)

    p = sub.add_parser("dump-lattice", help="lattice JSON or circuit listing")
    p.add_argument("--distance", type=int, default=5)
    p.add_argument("--circuit", choices=("json", "text"), help="dump the syndrome circuit instead")
    p.add_argument("--rounds", type=int, help="with --circuit: full memory circuit of this many rounds")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_lattice)

    p = sub.add_parser("dump-graph", help="space-time matching graph JSON")
    p.add_argument("--distance", type=int, default=5)
    p.add_argument("--pair", choices=("RG", "RB", "GB"), default="RG")
    p.add_argument("--stack", choices=("X", "Z"), default="X")
    p.add_argument("--rounds", type=int)
    p.add_argument("--p", type=float, default=1e-3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_graph)

    p = sub.add_parser("edge-weights", help="reference edge-coefficient comparison CSV")
    p.add_argument("--distance", type=int, default=7)
    p.add_argument("--coefficients", metavar="FILE", help="also write every edge's coefficient as CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_edge_weights)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"tricolor: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

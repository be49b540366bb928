"""Command-line interface: ``mavrp generate | solve | bench``.

Exit codes: 0 on success, 1 when a solution fails validation or a bench
run fails, 2 on bad input (unreadable instance, config or suite).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .bench import ALGORITHMS, run_bench, solve, write_reports
from .config import ConfigError, load_config, load_suite
from .construct import InfeasibleInstanceError
from .instance import InstanceError, format_instance, generate, read_instance
from .solution import validate, write_solution

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INPUT = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mavrp", description="Multi-depot, multi-trip routing with backhauls.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a random instance")
    g.add_argument("--geo", default="R")
    g.add_argument("-d", "--depots", type=int, default=2)
    g.add_argument("-a", "--vehicles", type=int, default=2)
    g.add_argument("-m", "--linehauls", type=int, default=5)
    g.add_argument("-n", "--backhauls", type=int, default=7)
    g.add_argument("--q-min", type=int, default=1)
    g.add_argument("--q-max", type=int, default=3)
    g.add_argument("--capacity", type=int, default=6)
    g.add_argument("--t-max", type=int, default=10)
    g.add_argument("--map-side", type=float, default=30.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", help="instance file to write (default: stdout)")

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("instance")
    s.add_argument("--algo", choices=ALGORITHMS, default="ahgslns")
    s.add_argument("--config", help="run config (YAML)")
    s.add_argument("--seed", type=int, help="overrides the config and MAVRP_SEED")
    s.add_argument("--workers", type=int, help="overrides the config and MAVRP_WORKERS")
    s.add_argument("--dump-solution", metavar="PATH", help="write the solution file here")
    s.add_argument("--trace", metavar="PATH", help="write the evolution trace (JSON lines, ahgslns only)")
    s.add_argument("--out", metavar="PATH", help="write the JSON summary here instead of stdout")

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True)
    b.add_argument("--runs", type=int, help="runs per instance and variant (default: from the suite)")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--config", help="base run config (YAML)")
    b.add_argument("--workers", type=int, help="parallel runs (default: config / MAVRP_WORKERS)")
    b.add_argument("--trace", metavar="DIR", help="write one evolution trace per population run here")
    return p


def _generate(args) -> int:
    inst = generate(
        args.geo,
        args.depots,
        args.vehicles,
        args.linehauls,
        args.backhauls,
        (args.q_min, args.q_max),
        args.seed,
        capacity=args.capacity,
        t_max=args.t_max,
        map_side=args.map_side,
    )
    text = format_instance(inst)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _solve(args) -> int:
    inst = read_instance(args.instance)
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    out = solve(inst, args.algo, cfg)
    violations = validate(out.solution, inst)
    summary = {
        "instance": inst.name,
        "algo": args.algo,
        "seed": cfg.seed,
        "fingerprint": cfg.fingerprint(),
        "makespan": out.cost,
        "feasible": not violations,
    }
    if out.proven is not None:
        summary["proven"] = out.proven
        summary["nodes"] = out.nodes
    if violations:
        summary["violations"] = [str(v) for v in violations]
    if args.dump_solution:
        write_solution(out.solution, args.dump_solution, inst)
    if args.trace and out.trace is not None:
        out.trace.write(args.trace)
    text = json.dumps(summary, indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_INVALID if violations else EXIT_OK


def _bench(args) -> int:
    suite = load_suite(args.suite)
    base = load_config(args.config)
    workers = args.workers if args.workers is not None else base.workers
    on_trace = None
    if args.trace:
        trace_dir = Path(args.trace)
        trace_dir.mkdir(parents=True, exist_ok=True)

        def on_trace(inst, variant, seed, trace):
            trace.write(trace_dir / f"{inst.name}.{variant}.{seed}.jsonl")

    result = run_bench(suite, runs=args.runs, base=base, workers=workers, on_trace=on_trace)
    write_reports(result, args.out)
    failed = sum(len(r.failures) for r in result.reports)
    if failed:
        print(f"{failed} run(s) failed; see {Path(args.out) / 'report.json'}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    handlers = {"generate": _generate, "solve": _solve, "bench": _bench}
    try:
        return handlers[args.command](args)
    except (InstanceError, ConfigError, OSError) as exc:
        print(f"mavrp: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleInstanceError, ValueError) as exc:
        print(f"mavrp: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

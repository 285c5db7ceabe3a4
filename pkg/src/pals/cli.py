"""Command line interface: run / table / curves / validate / problems."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .problems import PROBLEM_NAMES, get_problem


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pals", description="Benchmark harness for noisy bi-objective "
        "optimization on a finite grid.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a benchmark experiment")
    p_run.add_argument("--config", required=True, help="INI experiment config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--jobs", type=int, default=None,
                       help="parallel worker count (output is identical)")
    p_run.add_argument("--profile", choices=sorted(bench.PROFILES),
                       default=None, help="replication/budget preset")
    p_run.add_argument("--seed", type=int, default=None, help="master seed")

    p_table = sub.add_parser("table", help="summarize final errors per method")
    p_table.add_argument("--results", default="results",
                         help="directory holding results.csv")
    p_table.add_argument("--out", default=None, help="also write a CSV here")

    p_curves = sub.add_parser("curves",
                              help="mean error per iteration, per method")
    p_curves.add_argument("--results", default="results")
    p_curves.add_argument("--problem", required=True)
    p_curves.add_argument("--metric", choices=("V_d", "M"), default="V_d")
    p_curves.add_argument("--methods", default="",
                          help="comma separated subset (default: all)")
    p_curves.add_argument("--out", default=None, help="write CSV here")

    sub.add_parser("validate", help="fast invariant self-checks")

    p_prob = sub.add_parser("problems", help="inspect benchmark problems")
    prob_sub = p_prob.add_subparsers(dest="problems_command", required=True)
    prob_sub.add_parser("list", help="names and Pareto-set sizes")
    p_truth = prob_sub.add_parser("truth",
                                  help="grid, objectives and ground truth as CSV")
    p_truth.add_argument("name", choices=PROBLEM_NAMES)
    p_truth.add_argument("--out", default=None, help="write CSV here")
    return parser


def _cmd_run(args) -> int:
    try:
        config = bench.load_config(args.config, profile=args.profile)
    except (OSError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    updates = {}
    if args.out is not None:
        updates["out_dir"] = Path(args.out)
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if updates:
        from dataclasses import replace
        config = replace(config, **updates)

    total = (len(config.problems) * len(config.methods)
             * config.replications)
    done = [0]

    def progress(key):
        done[0] += 1
        print("[%d/%d] %s %s rep %d" % (done[0], total, *key), flush=True)

    rows, failures = bench.run_experiment(config, progress=progress)
    print(f"wrote {len(rows)} rows to {Path(config.out_dir) / 'results.csv'}")
    for key, err in failures:
        print(f"FAILED run {key}: {err}", file=sys.stderr)
    return 1 if failures else 0


def _cmd_table(args) -> int:
    methods, table = bench.summary_table(args.results)
    print(bench.format_table(methods, table))
    if args.out:
        header, rows = bench.table_rows_for_csv(methods, table)
        bench.write_csv(Path(args.out), header, rows)
        print(f"wrote {args.out}")
    return 0


def _cmd_curves(args) -> int:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    header, rows = bench.curves(args.results, args.problem, args.metric,
                                methods)
    if args.out:
        bench.write_csv(Path(args.out), header, rows)
        print(f"wrote {args.out}")
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(bench._format_cell(v) for v in row))
    return 0


def _cmd_problems(args) -> int:
    if args.problems_command == "list":
        print("name,pareto_set_size")
        for name in PROBLEM_NAMES:
            print(f"{name},{len(get_problem(name).pareto_set)}")
        return 0
    problem = get_problem(args.name)
    truth = set(int(i) for i in problem.pareto_set)
    header = ("index", "x1", "x2", "obj1", "obj2", "is_pareto")
    rows = []
    for i, (pt, val) in enumerate(zip(problem.grid.points, problem.values)):
        rows.append((i, pt[0], pt[1], val[0], val[1], int(i in truth)))
    if args.out:
        bench.write_csv(Path(args.out), header, rows)
        print(f"wrote {args.out}")
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(bench._format_cell(v) for v in row))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "table":
        return _cmd_table(args)
    if args.command == "curves":
        return _cmd_curves(args)
    if args.command == "validate":
        return 0 if bench.validate() else 1
    if args.command == "problems":
        return _cmd_problems(args)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())

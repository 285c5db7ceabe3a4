"""Experiment orchestration: configs, seeded replications, CSV emission.

A benchmark experiment is a grid of (problem, method, replication) runs.
Per-run seeds are derived from the master seed and the run coordinates, so
adding problems or methods never perturbs existing runs, and the aggregated
CSV is a deterministic function of (config, master seed) regardless of the
parallelism degree: results are merged and written in sorted order.
"""

from __future__ import annotations

import configparser
import csv
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .drivers import ALGORITHMS, RunConfig, RunRecord, run
from .problems import PROBLEM_NAMES, get_problem

RESULT_COLUMNS = ("problem", "method", "replication", "iteration",
                  "evaluations_used", "V_d", "M", "P_size", "N_size",
                  "U_size", "selected_index", "wall_time")

# Known deviation from the published table: the printed g1 objectives give
# a 19-point Pareto set, not 136.  validate() checks self-consistency
# against what the shipped formulas actually produce.
EXPECTED_CARDINALITIES = {"g1": 19, "g2": 10, "g3": 12, "g4": 7, "g5": 60,
                          "g6": 22, "g7": 67, "g8": 63, "g9": 36}
PUBLISHED_CARDINALITIES = {"g1": 136, "g2": 10, "g3": 12, "g4": 7, "g5": 60,
                           "g6": 22, "g7": 67, "g8": 63, "g9": 36}

PROFILES = {
    "desk": {"replications": 50, "budget": 10000, "batch_size": 200},
    "paper": {"replications": 200, "budget": 50000, "batch_size": 200},
}


@dataclass
class ExperimentConfig:
    problems: tuple[str, ...] = PROBLEM_NAMES
    methods: tuple[str, ...] = ("PRS", "CoRS", "ParEGO-EIm", "PALS")
    replications: int = 50
    master_seed: int = 0
    out_dir: Path = Path("results")
    jobs: int = 1
    method_overrides: dict = field(default_factory=dict)
    run_defaults: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        for p in self.problems:
            if p not in PROBLEM_NAMES:
                raise ValueError(f"unknown problem {p!r}")
        for m in self.methods:
            if m not in ALGORITHMS:
                raise ValueError(f"unknown method {m!r}")

    def run_config(self, method: str) -> RunConfig:
        kwargs = dict(self.run_defaults)
        kwargs.update(self.method_overrides.get(method, {}))
        kwargs["algorithm"] = method
        return RunConfig(**kwargs)


def _parse_value(text: str):
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


_RUNCONFIG_FIELDS = {f.name for f in fields(RunConfig)} - {"algorithm"}


def load_config(path, profile: str | None = None) -> ExperimentConfig:
    """Read an experiment config from a flat INI file.

    The ``[experiment]`` section holds the grid (problems, methods,
    replications, seed, out, jobs, profile); ``[method:NAME]`` sections hold
    RunConfig overrides for one method.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(path)
    if "experiment" not in parser:
        raise ValueError("config is missing the [experiment] section")
    exp = parser["experiment"]
    profile = profile or exp.get("profile", "desk")
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    prof = PROFILES[profile]

    def csv_list(key, default):
        raw = exp.get(key)
        if raw is None:
            return default
        return tuple(s.strip() for s in raw.split(",") if s.strip())

    run_defaults = {"budget": prof["budget"], "batch_size": prof["batch_size"]}
    for key in exp:
        if key in _RUNCONFIG_FIELDS:
            run_defaults[key] = _parse_value(exp[key])

    overrides = {}
    for section in parser.sections():
        if not section.startswith("method:"):
            continue
        method = section.split(":", 1)[1]
        opts = {}
        for key, val in parser[section].items():
            if key not in _RUNCONFIG_FIELDS:
                raise ValueError(f"unknown RunConfig option {key!r} in [{section}]")
            opts[key] = _parse_value(val)
        overrides[method] = opts

    return ExperimentConfig(
        problems=csv_list("problems", PROBLEM_NAMES),
        methods=csv_list("methods", ("PRS", "CoRS", "ParEGO-EIm", "PALS")),
        replications=exp.getint("replications", prof["replications"]),
        master_seed=exp.getint("seed", 0),
        out_dir=Path(exp.get("out", "results")),
        jobs=exp.getint("jobs", 1),
        method_overrides=overrides,
        run_defaults=run_defaults)


def derive_seed(master_seed: int, problem: str, method: str,
                replication: int) -> int:
    """Stable per-run seed: adding methods never perturbs existing runs."""
    entropy = [int(master_seed), zlib.crc32(problem.encode()),
               zlib.crc32(method.encode()), int(replication)]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def record_to_rows(record: RunRecord, replication: int) -> list[tuple]:
    rows = []
    for it in record.iterations:
        rows.append((record.problem, record.algorithm, replication,
                     it.iteration, it.evaluations_used, it.vd, it.m,
                     it.n_pareto, it.n_dominated, it.n_unclassified,
                     it.selected, np.nan))
    return rows


def _format_cell(value) -> str:
    if isinstance(value, float):
        return "%.9g" % value
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


def _execute_one(task):
    problem_name, method, replication, config, seed = task
    try:
        t0 = time.perf_counter()
        record = run(get_problem(problem_name), config, seed)
        wall = time.perf_counter() - t0
    except Exception as exc:  # run failure: record, keep going
        return exc
    rows = record_to_rows(record, replication)
    rows = [row[:-1] + (wall / max(len(rows), 1),) for row in rows]
    return (problem_name, method, replication), rows, record.termination


def run_experiment(config: ExperimentConfig, progress=None):
    """Execute the full run grid; returns (rows, failures).

    Writes one trace CSV per run plus the aggregated ``results.csv``.
    Scheduling order never affects the output: rows are sorted before
    emission.
    """
    tasks = []
    for problem in config.problems:
        for method in config.methods:
            rc = config.run_config(method)
            for rep in range(config.replications):
                seed = derive_seed(config.master_seed, problem, method, rep)
                tasks.append((problem, method, rep, rc, seed))

    all_rows = []
    failures = []
    out = Path(config.out_dir)

    def consume(task, outcome):
        key = task[:3]
        if isinstance(outcome, Exception):
            failures.append((key, repr(outcome)))
            return
        _, rows, _ = outcome
        all_rows.extend(rows)
        trace = out / "traces" / ("%s_%s_%03d.csv" % key)
        write_csv(trace, RESULT_COLUMNS, rows)
        if progress is not None:
            progress(key)

    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = pool.map(_execute_one, tasks)
            for task, outcome in zip(tasks, outcomes):
                consume(task, outcome)
    else:
        for task in tasks:
            consume(task, _execute_one(task))

    all_rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    write_csv(out / "results.csv", RESULT_COLUMNS, all_rows)
    return all_rows, failures


def read_results(results_dir) -> list[dict]:
    path = Path(results_dir) / "results.csv"
    if not path.exists():
        raise FileNotFoundError(f"no results.csv under {results_dir}")
    rows = []
    with open(path, newline="") as fh:
        int_cols = ("replication", "iteration", "evaluations_used",
                    "P_size", "N_size", "U_size", "selected_index")
        for rec in csv.DictReader(fh):
            for col in int_cols:
                rec[col] = int(rec[col])
            for col in ("V_d", "M", "wall_time"):
                rec[col] = float(rec[col])
            rows.append(rec)
    if not rows:
        raise ValueError("empty results file")
    return rows


def summary_table(results_dir):
    """Final-iteration V_d and M averaged over replications, in percent.

    Returns (methods, rows) where each row is a dict with per-method raw
    and percent averages plus best / within-10%-of-best flags.
    """
    records = read_results(results_dir)
    finals = {}
    for rec in records:
        key = (rec["problem"], rec["method"], rec["replication"])
        if key not in finals or rec["iteration"] > finals[key]["iteration"]:
            finals[key] = rec

    methods = list(dict.fromkeys(r["method"] for r in records))
    problems = sorted({r["problem"] for r in records})
    table = []
    for problem in problems:
        row = {"problem": problem, "cells": {}}
        for method in methods:
            vals = [(f["V_d"], f["M"]) for k, f in finals.items()
                    if k[0] == problem and k[1] == method]
            if not vals:
                continue
            vd = float(np.mean([v[0] for v in vals]))
            m = float(np.mean([v[1] for v in vals]))
            row["cells"][method] = {"V_d": vd, "M": m,
                                    "V_d_pct": 100 * vd, "M_pct": 100 * m}
        for metric in ("V_d", "M"):
            present = [m for m in methods if m in row["cells"]]
            best = min(present, key=lambda m: row["cells"][m][metric])
            best_val = row["cells"][best][metric]
            for m in present:
                cell = row["cells"][m]
                cell[f"{metric}_best"] = m == best
                cell[f"{metric}_near"] = (m != best and
                                          cell[metric] <= 1.1 * best_val)
        table.append(row)
    return methods, table


def format_table(methods, table) -> str:
    """Aligned text rendering; * marks the best, + within 10% of it."""
    lines = []
    header = ["problem"]
    for m in methods:
        header += [f"{m}:V_d%", f"{m}:M%"]
    widths = [max(12, len(h)) for h in header]
    lines.append("  ".join(h.rjust(w) for h, w in zip(header, widths)))
    for row in table:
        cells = [row["problem"]]
        for m in methods:
            c = row["cells"].get(m)
            if c is None:
                cells += ["-", "-"]
                continue
            for metric in ("V_d", "M"):
                flag = "*" if c[f"{metric}_best"] else ("+" if c[f"{metric}_near"] else "")
                cells.append("%.3f%s" % (c[f"{metric}_pct"], flag))
        lines.append("  ".join(c.rjust(w) for c, w in zip(cells, widths)))
    return "\n".join(lines)


def table_rows_for_csv(methods, table):
    header = ["problem"]
    for m in methods:
        header += [f"{m}_V_d", f"{m}_V_d_pct", f"{m}_V_d_best", f"{m}_V_d_near",
                   f"{m}_M", f"{m}_M_pct", f"{m}_M_best", f"{m}_M_near"]
    rows = []
    for row in table:
        out = [row["problem"]]
        for m in methods:
            c = row["cells"].get(m)
            if c is None:
                out += [""] * 8
            else:
                out += [c["V_d"], c["V_d_pct"], c["V_d_best"], c["V_d_near"],
                        c["M"], c["M_pct"], c["M_best"], c["M_near"]]
        rows.append(tuple(out))
    return header, rows


def curves(results_dir, problem: str, metric: str, methods=()):
    """Per-iteration metric averaged over replications, per method."""
    if metric not in ("V_d", "M"):
        raise ValueError(f"unknown metric {metric!r}")
    records = [r for r in read_results(results_dir) if r["problem"] == problem]
    if methods:
        records = [r for r in records if r["method"] in methods]
    acc = {}
    for rec in records:
        acc.setdefault((rec["method"], rec["iteration"]), []).append(rec[metric])
    rows = [(method, it, float(np.mean(vals)))
            for (method, it), vals in sorted(acc.items())]
    return ("method", "iteration", f"mean_{metric}"), rows


def validate(report=print) -> bool:
    """Fast invariant suite; prints one pass/fail line per check."""
    from . import metrics as met
    from .drivers import beta_fixed, beta_increasing
    from . import gp as gpmod

    ok = True

    def check(name, passed, note=""):
        nonlocal ok
        ok &= bool(passed)
        line = f"[{'PASS' if passed else 'FAIL'}] {name}"
        if note:
            line += f"  ({note})"
        report(line)

    for name, want in EXPECTED_CARDINALITIES.items():
        got = len(get_problem(name).pareto_set)
        note = ""
        if PUBLISHED_CARDINALITIES[name] != want:
            note = (f"published value {PUBLISHED_CARDINALITIES[name]} is not "
                    f"reproducible from the printed formulas; frozen at {want}")
        check(f"pareto cardinality {name} == {want}", got == want, note)

    check("beta_fixed(0.5) == 0.45494 +- 1e-4",
          abs(beta_fixed(0.5) - 0.45494) < 1e-4)
    check("beta_increasing(1, 2, 441, 0.05) == 20.551 +- 1e-2",
          abs(beta_increasing(1, 2, 441, 0.05) - 20.551) < 1e-2)

    vd = met.symmetric_difference_volume([(0.0, 0.0)], [(0.1, 0.1)])
    check("symmetric difference hand case == 0.21", abs(vd - 0.21) < 1e-12)
    check("dominated volume single point == 1.21",
          abs(met.dominated_volume_2d([(0.0, 0.0)]) - 1.21) < 1e-12)

    # replicate folding equivalence on one small instance
    rng = np.random.default_rng(0)
    grid = np.linspace(0, 1, 12)[:, None]
    store = gpmod.ObservationStore(12, 1)
    raw = {}
    for i in range(0, 12, 2):
        vals = rng.normal(np.sin(3 * grid[i, 0]), 0.3, size=(4, 1))
        store.fold(i, vals)
        raw[i] = vals
    p = gpmod.KernelParams(1.0, np.array([0.4]), 0.09)
    fld = gpmod.posterior(store, grid, [p])
    big_grid = np.vstack([np.repeat(grid[[i]], 4, axis=0) for i in raw])
    big = gpmod.ObservationStore(len(big_grid), 1)
    k = 0
    for i in raw:
        for v in raw[i]:
            big.fold(k, v[None, :])
            k += 1
    fld2 = gpmod.posterior(big, big_grid, [p])
    # compare at the visited points themselves
    err = 0.0
    for pos, i in enumerate(raw):
        err = max(err, abs(fld.mean[i, 0] - fld2.mean[4 * pos, 0]))
        err = max(err, abs(fld.sd[i, 0] - fld2.sd[4 * pos, 0]))
    check("replicate folding equivalence (1e-8)", err < 1e-8)
    return ok

"""Command line entry point: generate, solve, validate, bench, report.

Exit codes: 0 success, 1 solution violations or unusable input, 2 usage error.
The default worker count for ``bench`` comes from ``AMPACK_WORKERS``.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from statistics import mean

from .instances import (GeneratorSpec, InstanceFormatError, generate_instance, read_instance, read_solution,
                        suite_specs, write_instance, write_solution)
from .model import InstanceError, validate_solution
from .packcheck import STAGES
from .solver import SolverConfig, solve, solve_two_step

VARIANTS = {"org": solve, "ts": solve_two_step}

RUN_COLUMNS = (
    ["instance", "variant", "seed", "U", "L", "gap_pct", "status", "wall_time", "batches_checked"]
    + [f"cuts_{s}" for s in STAGES]
    + [f"time_{s}" for s in STAGES]
    + ["t_max_op", "hard_packings", "hard_epsilons", "error"]
)

AGGREGATE_COLUMNS = ["instance", "variant", "runs", "best_U", "avg_U", "best_L", "avg_L",
                     "best_gap_pct", "avg_gap_pct", "n_optimal"]


def gap_pct(U: float, L: float) -> float:
    if U <= 0:
        return 0.0
    return 100.0 * (U - L) / U


def run_record(instance_path: str, variant: str, seed: int, config: SolverConfig) -> dict:
    """Solve once and flatten the outcome into a table row; failures become rows too."""
    t0 = time.perf_counter()
    try:
        inst = read_instance(instance_path)
        res = VARIANTS[variant](inst, dataclasses.replace(config, seed=seed))
    except Exception as exc:  # a broken run must not stop the suite
        row = {c: "" for c in RUN_COLUMNS}
        row.update(instance=Path(instance_path).stem, variant=variant, seed=seed,
                   status="Error", wall_time=f"{time.perf_counter() - t0:.3f}", error=f"{type(exc).__name__}: {exc}")
        return row
    return _row_from_result(instance_path, variant, seed, res)


def aggregate(rows) -> list[dict]:
    groups: dict[tuple[str, str], list[dict]] = {}
    for r in rows:
        groups.setdefault((r["instance"], r["variant"]), []).append(r)
    out = []
    for (name, variant), rs in sorted(groups.items()):
        ok = [r for r in rs if r["status"] != "Error"]
        rec = {"instance": name, "variant": variant, "runs": len(rs),
               "n_optimal": sum(r["status"] == "Optimal" for r in rs)}
        if ok:
            U = [float(r["U"]) for r in ok]
            L = [float(r["L"]) for r in ok]
            G = [float(r["gap_pct"]) for r in ok]
            rec.update(best_U=f"{min(U):.6f}", avg_U=f"{mean(U):.6f}", best_L=f"{max(L):.6f}",
                       avg_L=f"{mean(L):.6f}", best_gap_pct=f"{gap_pct(min(U), max(L)):.2f}",
                       avg_gap_pct=f"{mean(G):.2f}")
        else:
            rec.update({c: "" for c in AGGREGATE_COLUMNS if c not in rec})
        out.append(rec)
    return out


def write_table(rows, columns, path=None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RUN_COLUMNS:
            raise InstanceFormatError(f"{path}: unexpected header {reader.fieldnames}")
        return list(reader)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("AMPACK_WORKERS", "1")))
    except ValueError:
        return 1


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    for f in dataclasses.fields(SolverConfig):
        flag = "--" + f.name.replace("_", "-")
        p.add_argument(flag, dest=f.name, type=type(f.default), default=f.default,
                       help=f"(default: {f.default})")


def _config(args) -> SolverConfig:
    return SolverConfig(**{f.name: getattr(args, f.name) for f in dataclasses.fields(SolverConfig)})


def cmd_generate(args) -> int:
    out = Path(args.out)
    if args.suite:
        out.mkdir(parents=True, exist_ok=True)
        specs = suite_specs(args.classes, args.per_config, args.seed)
        for spec in specs:
            write_instance(generate_instance(spec), out / f"{spec.name}.json")
        print(f"wrote {len(specs)} instances to {out}")
        return 0
    if args.part_class is None or args.parts is None or args.machines is None:
        raise _Usage("generate needs --class, --parts and --machines (or --suite)")
    spec = GeneratorSpec(args.part_class, args.parts, args.machines, args.seed, args.size, args.off_grid)
    write_instance(generate_instance(spec), out)
    print(f"wrote {out}")
    return 0


def cmd_solve(args) -> int:
    config = _config(args)
    inst = read_instance(args.instance)
    res = VARIANTS[args.variant](inst, config)
    if args.solution_out:
        write_solution(res.incumbent, args.solution_out)
    row = _row_from_result(args.instance, args.variant, config.seed, res)
    text = write_table([row], RUN_COLUMNS, args.record_out)
    sys.stdout.write(text)
    return 0


def _row_from_result(instance_path, variant, seed, res) -> dict:
    row = {c: "" for c in RUN_COLUMNS}
    st = res.stats
    row.update(instance=Path(instance_path).stem, variant=variant, seed=seed, U=f"{res.upper:.6f}",
               L=f"{res.lower:.6f}", gap_pct=f"{gap_pct(res.upper, res.lower):.2f}", status=res.status,
               wall_time=f"{res.wall_time:.3f}", batches_checked=st.batches_checked,
               t_max_op=f"{st.max_exact_time:.3f}", hard_packings=st.hard_packings,
               hard_epsilons=";".join(f"{e:.4f}" for e in st.hard_epsilons))
    for s in STAGES:
        row[f"cuts_{s}"] = st.cuts[s]
        row[f"time_{s}"] = f"{st.stage_times[s]:.3f}"
    return row


def cmd_validate(args) -> int:
    inst = read_instance(args.instance)
    sol = read_solution(args.solution, inst)
    report = validate_solution(inst, sol)
    if report.ok:
        print(f"ok: makespan {sol.makespan:.6f}")
        return 0
    for v in report.violations:
        print(v)
    return 1


def cmd_bench(args) -> int:
    paths = []
    for p in args.suite:
        p = Path(p)
        paths.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    if not paths:
        raise _Usage("bench: no instance files found")
    config = _config(args)
    jobs = [(str(p), v, s, config) for p in paths for v in args.variants for s in args.seeds]
    workers = args.workers or default_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(run_record, *zip(*jobs)))
    else:
        rows = [run_record(*j) for j in jobs]
    text = write_table(rows, RUN_COLUMNS, args.out)
    agg = write_table(aggregate(rows), AGGREGATE_COLUMNS, args.aggregate_out)
    if args.out is None:
        sys.stdout.write(text + "\n")
    sys.stdout.write(agg)
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.tables:
        rows.extend(read_table(path))
    sys.stdout.write(write_table(aggregate(rows), AGGREGATE_COLUMNS, args.out))
    return 0


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ampack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write random benchmark instances")
    g.add_argument("--class", dest="part_class", type=int, choices=(1, 2, 3, 4))
    g.add_argument("--parts", type=int)
    g.add_argument("--machines", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--size", type=int, default=None, help="override the class size constant")
    g.add_argument("--off-grid", action="store_true", help="allow part/machine counts outside the grid")
    g.add_argument("--suite", action="store_true", help="generate the whole grid into the --out directory")
    g.add_argument("--classes", type=int, nargs="+", default=[1, 2, 3])
    g.add_argument("--per-config", type=int, default=5)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("instance")
    s.add_argument("--variant", choices=sorted(VARIANTS), default="org")
    s.add_argument("--solution-out")
    s.add_argument("--record-out")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check a solution file against an instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bench", help="run every (instance, variant, seed)")
    b.add_argument("suite", nargs="+", help="instance files or directories")
    b.add_argument("--variants", nargs="+", choices=sorted(VARIANTS), default=["org", "ts"])
    b.add_argument("--seeds", nargs="+", type=int, default=[0, 1, 2])
    b.add_argument("--workers", type=int, default=None)
    b.add_argument("-o", "--out")
    b.add_argument("--aggregate-out")
    _add_solver_flags(b)
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("report", help="aggregate run tables")
    r.add_argument("tables", nargs="+")
    r.add_argument("-o", "--out")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as exc:
        parser.error(str(exc))
    except (InstanceError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

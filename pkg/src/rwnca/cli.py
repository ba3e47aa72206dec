"""Command-line front end.

Exit codes: 0 ok, 1 usage error, 2 infeasible or not proven optimal within
the time limit, 3 validation failure (including unreadable or mismatched
solution files).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from .ilp import export_lp, export_mps
from .io import SolutionFile, SolutionFormatError, load_solution, render_report
from .model import DesignSpec, design_model
from .planner import PlanOptions, plan
from .solver import OPTIMAL
from .topology import Instance, TopologyError, all_to_one, cost239, read_topology
from .validator import MalformedSolution, metrics, simulate_failures, validate

TOPOLOGY_ENV = "RWNCA_TOPOLOGY"
EXIT_OK, EXIT_USAGE, EXIT_UNSOLVED, EXIT_INVALID = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _topology(path: str | None):
    path = path or os.environ.get(TOPOLOGY_ENV)
    if not path:
        return cost239()
    try:
        return read_topology(path)
    except OSError as exc:
        raise UsageError(f"cannot read topology {path}: {exc}") from None
    except TopologyError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _plan_options(args, n_wavelengths=None) -> PlanOptions:
    threads = max(1, args.threads)
    return PlanOptions(n_wavelengths=n_wavelengths, time_limit=args.time_limit or None,
                       deterministic=args.deterministic or threads == 1, threads=threads,
                       strategy=args.strategy)


def _export(inst: Instance, spec: DesignSpec, fmt: str, model=None) -> str:
    if model is None:
        model, _ = design_model(inst, spec)
    title = f"design{spec.design_id}"
    return export_lp(model, title) if fmt == "lp" else export_mps(model, title.upper())


def _check_dest(t, dest):
    if dest not in t.nodes:
        raise UsageError(f"unknown destination node {dest}")


def cmd_solve(args) -> int:
    t = _topology(args.topology)
    _check_dest(t, args.dest)
    demands = all_to_one(t, args.dest)
    spec = DesignSpec.for_design(args.design, len(demands))
    r = plan(t, demands, spec, _plan_options(args, args.wavelengths))
    print(f"design {args.design}  destination {args.dest}  status {r.status}  method {r.method}  "
          f"time {r.wall_time:.1f}s")
    for note in r.notes:
        print(f"  note: {note}")
    if r.solution is None:
        print(f"no solution: {r.status}", file=sys.stderr)
        return EXIT_UNSOLVED
    m = metrics(r.instance, r.solution)
    print(f"wavelengths {m.wavelength_count}  client-side {m.client_side_count}  "
          f"transponders {m.transponder_count}  objective {r.objective}  bound {r.lower_bound}")
    out = Path(args.out or f"solution_design{args.design}_dest{args.dest}.json")
    out.write_text(SolutionFile.of(r.instance, r.solution, args.design).to_json())
    print(f"solution written to {out}")
    if args.export:
        path = out.with_suffix("." + args.export)
        path.write_text(_export(r.instance, spec, args.export, r.model))
        print(f"model written to {path}")
    return EXIT_OK if r.status == OPTIMAL else EXIT_UNSOLVED


def _parse_dests(args, t) -> dict[int, int]:
    dests = bench_mod.default_representatives(t)
    for item in args.dest or []:
        try:
            deg, node = (int(v) for v in item.split("="))
        except ValueError:
            raise UsageError(f"--dest expects DEGREE=NODE, got {item!r}") from None
        if node not in t.nodes or t.degree(node) != deg:
            raise UsageError(f"node {node} is not a degree-{deg} node")
        dests[deg] = node
    return dests


def cmd_bench(args) -> int:
    t = _topology(args.topology)
    try:
        designs = sorted({int(v) for v in args.designs.split(",")})
    except ValueError:
        raise UsageError(f"--designs expects a comma list, got {args.designs!r}") from None
    if not designs or any(d not in range(1, 6) for d in designs):
        raise UsageError("designs must be within 1..5")
    dests = _parse_dests(args, t)
    report = bench_mod.run_bench(t, designs, dests, _plan_options(args), jobs=args.jobs)
    md, table = report.to_markdown(), report.to_csv()
    print(md)
    print(table)
    if args.csv:
        Path(args.csv).write_text(table)
    if args.markdown:
        Path(args.markdown).write_text(md)
    if report.invariant_failures():
        return EXIT_INVALID
    return EXIT_OK if report.complete else EXIT_UNSOLVED


def _load(args):
    t = _topology(args.topology)
    try:
        text = Path(args.solution).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.solution}: {exc}") from None
    return load_solution(text, t)


def cmd_validate(args) -> int:
    inst, sf = _load(args)
    design = args.design or sf.design
    spec = DesignSpec.for_design(design, len(inst.demands)) if design else None
    rep = validate(inst, spec, sf.solution)
    for v in rep.violations:
        print(v)
    fail = simulate_failures(inst, sf.solution)
    counts = fail.summary()
    print(f"{len(rep.violations)} violation(s); {len(fail.verdicts)} single-fiber failures: "
          + ", ".join(f"{k} {counts[k]}" for k in sorted(counts)))
    for edge, d in fail.lost():
        print(f"LOST: demand {inst.demands[[x.id for x in inst.demands].index(d)]} on cut {edge[0]}-{edge[1]}")
    m = metrics(inst, sf.solution)
    print(f"wavelengths {m.wavelength_count}  client-side {m.client_side_count}  transponders {m.transponder_count}")
    return EXIT_OK if rep.ok and fail.fully_recoverable else EXIT_INVALID


def cmd_report(args) -> int:
    if args.topology or os.environ.get(TOPOLOGY_ENV):
        _, sf = _load(args)
    else:
        try:
            sf = SolutionFile.from_json(Path(args.solution).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {args.solution}: {exc}") from None
    text = render_report(sf, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export(args) -> int:
    t = _topology(args.topology)
    _check_dest(t, args.dest)
    demands = all_to_one(t, args.dest)
    spec = DesignSpec.for_design(args.design, len(demands))
    text = _export(Instance.create(t, demands, args.wavelengths), spec, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _common(p, solve_flags=True):
    p.add_argument("--topology", help=f"topology file (default: ${TOPOLOGY_ENV} or bundled COST239)")
    if solve_flags:
        p.add_argument("--threads", type=_positive, default=1)
        p.add_argument("--deterministic", action="store_true", help="single worker, fixed seed")
        p.add_argument("--time-limit", type=float, default=1800.0, help="seconds per solve (0: none)")
        p.add_argument("--strategy", choices=("auto", "model", "paths"), default="auto")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rwnca", description="Survivable RWA with network coding: solve, benchmark, validate.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one design for all-to-one traffic")
    _common(s)
    s.add_argument("--dest", type=int, required=True)
    s.add_argument("--design", type=int, choices=range(1, 6), required=True)
    s.add_argument("--wavelengths", type=_positive, help="fix |W| instead of searching upward")
    s.add_argument("--export", choices=("lp", "mps"))
    s.add_argument("--out", help="solution file path")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="compare designs over destination degree classes")
    _common(b)
    b.add_argument("--designs", default="1,2,3,4,5")
    b.add_argument("--dest", action="append", metavar="DEGREE=NODE", help="override a class representative")
    b.add_argument("--jobs", type=_positive, default=1, help="cells solved in parallel")
    b.add_argument("--csv")
    b.add_argument("--markdown")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("validate", help="check a solution file and simulate every fiber cut")
    _common(v, solve_flags=False)
    v.add_argument("--solution", required=True)
    v.add_argument("--design", type=int, choices=range(1, 6), help="override the design recorded in the file")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("report", help="render a solution as provisioning and coding tables")
    _common(r, solve_flags=False)
    r.add_argument("--solution", required=True)
    r.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)

    e = sub.add_parser("export", help="write the design program as LP or MPS")
    _common(e, solve_flags=False)
    e.add_argument("--dest", type=int, required=True)
    e.add_argument("--design", type=int, choices=range(1, 6), required=True)
    e.add_argument("--wavelengths", type=_positive, required=True)
    e.add_argument("--format", choices=("lp", "mps"), default="lp")
    e.add_argument("--out")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rwnca: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolutionFormatError, MalformedSolution) as exc:
        print(f"rwnca: invalid solution: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

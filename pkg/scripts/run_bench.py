"""Solve every design at each destination degree class and write the comparison tables."""

import argparse
import logging
from pathlib import Path

from rwnca.bench import run_bench
from rwnca.planner import PlanOptions
from rwnca.topology import cost239, read_topology


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--topology")
    ap.add_argument("--designs", default="1,2,3,4,5")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--time-limit", type=float, default=1800.0)
    ap.add_argument("--out", default="results", help="directory for bench.md and bench.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    t = read_topology(args.topology) if args.topology else cost239()
    designs = [int(d) for d in args.designs.split(",")]
    report = run_bench(t, designs, opts=PlanOptions(time_limit=args.time_limit), jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.md").write_text(report.to_markdown())
    (out / "bench.csv").write_text(report.to_csv())
    print(report.to_markdown())


if __name__ == "__main__":
    main()

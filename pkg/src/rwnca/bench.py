"""Five-design comparison across destination degree classes."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .model import DesignSpec
from .planner import PlanOptions, PlanResult, plan
from .solver import OPTIMAL
from .topology import Topology, all_to_one, degree_histogram
from .validator import metrics, simulate_failures, validate

# degree -> representative destination on the bundled COST239
PREFERRED = {4: 1, 5: 3, 6: 6}


def default_representatives(t: Topology) -> dict[int, int]:
    reps = {}
    for deg, nodes in degree_histogram(t).items():
        reps[deg] = PREFERRED[deg] if PREFERRED.get(deg) in nodes else nodes[0]
    return reps


@dataclass
class BenchCell:
    degree: int
    dest: int
    design: int
    status: str
    wavelengths: int | None = None
    client_side: int | None = None
    transponders: int | None = None
    wall_time: float = 0.0
    clean: bool = False  # validator found nothing and every single failure recovers
    method: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == OPTIMAL and self.clean


def run_cell(topology: Topology, degree: int, dest: int, design: int, opts: PlanOptions) -> BenchCell:
    demands = all_to_one(topology, dest)
    spec = DesignSpec.for_design(design, len(demands))
    r: PlanResult = plan(topology, demands, spec, opts)
    cell = BenchCell(degree, dest, design, r.status, wall_time=r.wall_time, method=r.method, notes=list(r.notes))
    if r.solution is not None:
        m = metrics(r.instance, r.solution)
        cell.wavelengths, cell.client_side, cell.transponders = m.as_tuple()
        cell.clean = (validate(r.instance, spec, r.solution).ok
                      and simulate_failures(r.instance, r.solution).fully_recoverable)
    return cell


def _run(args):
    return run_cell(*args)


@dataclass
class BenchReport:
    cells: list[BenchCell]

    def cell(self, degree: int, design: int) -> BenchCell | None:
        for c in self.cells:
            if c.degree == degree and c.design == design:
                return c
        return None

    @property
    def degrees(self) -> list[int]:
        return sorted({c.degree for c in self.cells})

    @property
    def designs(self) -> list[int]:
        return sorted({c.design for c in self.cells})

    def invariant_failures(self) -> list[str]:
        """Ordering checks per degree class; pairs with a missing or unsolved cell are skipped."""
        out = []
        for deg in self.degrees:
            def val(design, attr="wavelengths"):
                c = self.cell(deg, design)
                return getattr(c, attr) if c is not None and c.solved else None

            def check(a, b, op, attr="wavelengths"):
                va, vb = val(a, attr), val(b, attr)
                if va is None or vb is None:
                    return
                ok = va == vb if op == "==" else va <= vb
                if not ok:
                    out.append(f"degree-{deg}: design {a} {attr} {va} not {op} design {b} {attr} {vb}")

            check(5, 4, "==")
            check(4, 3, "<=")
            check(3, 1, "<=")
            check(4, 2, "<=")
            check(2, 1, "<=")
            check(5, 4, "<=", "transponders")
        return out

    @property
    def complete(self) -> bool:
        return all(c.solved for c in self.cells)

    def _grid(self, attr: str, designs=None):
        rows = []
        for design in designs or self.designs:
            row = [f"Design {design}"]
            for deg in self.degrees:
                c = self.cell(deg, design)
                if c is None:
                    row.append("")
                elif getattr(c, attr) is None:
                    row.append(c.status)
                else:
                    row.append(str(getattr(c, attr)) + ("" if c.solved else "*"))
            rows.append(row)
        return rows

    def to_markdown(self) -> str:
        cols = ["Design"] + [f"degree-{d} (node {self.cell(d, self.designs[0]).dest})" for d in self.degrees]
        parts = ["### Wavelength count", "", _md(cols, self._grid("wavelengths")), ""]
        parts += ["### Transponder count", "", _md(cols, self._grid("transponders")), ""]
        parts += ["### Solve time (s)", "", _md(cols, self._grid_time()), ""]
        if not self.complete:
            parts.append("`*` marks a cell that is not certified optimal and clean.")
        fails = self.invariant_failures()
        parts.append("Ordering invariants: " + ("hold" if not fails else "VIOLATED: " + "; ".join(fails)))
        return "\n".join(parts) + "\n"

    def _grid_time(self):
        rows = []
        for design in self.designs:
            row = [f"Design {design}"]
            for deg in self.degrees:
                c = self.cell(deg, design)
                row.append("" if c is None else f"{c.wall_time:.1f}")
            rows.append(row)
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degree", "dest", "design", "status", "wavelengths", "client_side", "transponders",
                    "wall_time_s", "clean", "method"])
        for c in sorted(self.cells, key=lambda c: (c.design, c.degree)):
            w.writerow([c.degree, c.dest, c.design, c.status, c.wavelengths, c.client_side, c.transponders,
                        f"{c.wall_time:.2f}", int(c.clean), c.method])
        return buf.getvalue()


def _md(cols, rows) -> str:
    cells = [cols] + rows
    width = [max(len(r[i]) for r in cells) for i in range(len(cols))]
    fmt = lambda r: "| " + " | ".join(c.ljust(w) for c, w in zip(r, width)) + " |"
    return "\n".join([fmt(cols), "| " + " | ".join("-" * w for w in width) + " |"] + [fmt(r) for r in rows])


def run_bench(topology: Topology, designs=(1, 2, 3, 4, 5), dests: dict[int, int] | None = None,
              opts: PlanOptions | None = None, jobs: int = 1) -> BenchReport:
    """``dests`` maps a degree class to its destination node."""
    dests = dests or default_representatives(topology)
    opts = opts or PlanOptions()
    tasks = [(topology, deg, dests[deg], design, opts) for deg in sorted(dests) for design in designs]
    if jobs <= 1:
        cells = [run_cell(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run, tasks))
    return BenchReport(cells)

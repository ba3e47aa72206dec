"""Exact minimisation of binary programs.

Two backends share one contract (:func:`solve`):

``bnb``
    Depth-first branch-and-bound in variable-creation order, zero branch
    first, with activity-based bound propagation on every row and an
    objective cutoff. The first optimum found is the lexicographically
    smallest one, which makes results reproducible by construction.
    Pure Python, so meant for small models (a few hundred variables).

``cpsat``
    OR-tools CP-SAT on the same integer-scaled rows, for the full-size
    benchmark models. Deterministic mode pins a single worker and a fixed
    seed.

``auto`` picks ``bnb`` below :data:`BNB_MAX_VARS` variables.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .ilp import EQ, GE, LE, Constraint, MilpModel, ModelError, make_constraint, scaled_row

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
TIMEOUT = "timeout"

BNB_MAX_VARS = 200


@dataclass(frozen=True)
class SolveOptions:
    time_limit: float | None = None
    threads: int = 1
    deterministic: bool = True
    backend: str = "auto"
    log_progress: bool = False


@dataclass
class SolveResult:
    status: str
    assignment: dict[str, int] | None = None
    objective: Fraction | None = None
    bound: Fraction | None = None
    wall_time: float = 0.0
    backend: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _int_objective(m: MilpModel) -> tuple[list[tuple[int, int]], int]:
    s = 1
    for _, c in m.objective:
        if isinstance(c, Fraction):
            s = math.lcm(s, c.denominator)
    return [(i, int(c * s)) for i, c in m.objective], s


# -- native branch-and-bound ------------------------------------------------------

class _BranchAndBound:
    """Rows are normalised to ``sum(a*x) <= b`` with integer ``a``."""

    def __init__(self, m: MilpModel, deadline: float | None):
        self.n = m.n_vars
        self.deadline = deadline
        coefs: list[list[tuple[int, int]]] = []
        rhs: list[int] = []
        for con in m.constraints:
            terms, b = scaled_row(con)
            if con.sense in (LE, EQ):
                coefs.append(terms)
                rhs.append(b)
            if con.sense in (GE, EQ):
                coefs.append([(i, -c) for i, c in terms])
                rhs.append(-b)
        self.coefs = coefs
        self.rhs = rhs
        self.occ: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for r, terms in enumerate(coefs):
            for i, a in terms:
                self.occ[i].append((r, a))
        # minimum activity with every free variable at its cheapest value
        self.minact = [sum(a for _, a in terms if a < 0) for terms in coefs]
        self.maxabs = [max((abs(a) for _, a in terms), default=0) for terms in coefs]
        self.obj, self.obj_scale = _int_objective(m)
        self.obj_coef = [0] * self.n
        for i, c in self.obj:
            self.obj_coef[i] = c
        self.obj_min = sum(c for _, c in self.obj if c < 0)
        self.value = [-1] * self.n
        self.trail: list[int] = []
        self.nodes = 0

    def _assign(self, i: int, v: int) -> None:
        self.value[i] = v
        self.trail.append(i)
        for r, a in self.occ[i]:
            if a > 0 and v == 1:
                self.minact[r] += a
            elif a < 0 and v == 0:
                self.minact[r] -= a
        c = self.obj_coef[i]
        if c > 0 and v == 1:
            self.obj_min += c
        elif c < 0 and v == 0:
            self.obj_min -= c

    def _undo(self, pos: int) -> None:
        value, trail = self.value, self.trail
        while len(trail) > pos:
            i = trail.pop()
            v = value[i]
            for r, a in self.occ[i]:
                if a > 0 and v == 1:
                    self.minact[r] -= a
                elif a < 0 and v == 0:
                    self.minact[r] += a
            c = self.obj_coef[i]
            if c > 0 and v == 1:
                self.obj_min -= c
            elif c < 0 and v == 0:
                self.obj_min += c
            value[i] = -1

    def _propagate(self, rows: Iterable[int]) -> bool:
        queue = list(rows)
        queued = set(queue)
        value, coefs, rhs, minact, maxabs = self.value, self.coefs, self.rhs, self.minact, self.maxabs
        while queue:
            r = queue.pop()
            queued.discard(r)
            slack = rhs[r] - minact[r]
            if slack < 0:
                return False
            if maxabs[r] <= slack:
                continue
            for i, a in coefs[r]:
                if value[i] != -1 or abs(a) <= slack:
                    continue
                self._assign(i, 0 if a > 0 else 1)
                for r2, _ in self.occ[i]:
                    if r2 not in queued:
                        queued.add(r2)
                        queue.append(r2)
                slack = rhs[r] - minact[r]
                if slack < 0:
                    return False
        return True

    def run(self, incumbent_limit: int | None = None):
        """Returns (status, best values, best integer objective, proven bound)."""
        best_vals = None
        best_obj = incumbent_limit
        if not self._propagate(range(len(self.coefs))):
            return INFEASIBLE, None, None, None
        root_bound = self.obj_min
        stack: list[tuple[int, int, int]] = []  # (var, trail position, value tried)
        cursor = 0
        check = 0
        while True:
            ok = best_obj is None or self.obj_min < best_obj
            if ok:
                while cursor < self.n and self.value[cursor] != -1:
                    cursor += 1
                if cursor == self.n:
                    best_obj = self.obj_min
                    best_vals = list(self.value)
                    ok = False
                else:
                    self.nodes += 1
                    check += 1
                    if self.deadline is not None and check >= 256:
                        check = 0
                        if time.monotonic() > self.deadline:
                            return TIMEOUT, best_vals, best_obj, root_bound
                    pos = len(self.trail)
                    stack.append((cursor, pos, 0))
                    self._assign(cursor, 0)
                    if not self._propagate(r for r, _ in self.occ[cursor]):
                        ok = False
                    else:
                        continue
            # backtrack
            while stack:
                var, pos, tried = stack.pop()
                self._undo(pos)
                if tried == 0:
                    stack.append((var, pos, 1))
                    self._assign(var, 1)
                    cursor = var
                    if self._propagate(r for r, _ in self.occ[var]) and (best_obj is None or self.obj_min < best_obj):
                        break
                    continue
            else:
                if best_vals is None:
                    return INFEASIBLE, None, None, None
                return OPTIMAL, best_vals, best_obj, best_obj


def _solve_bnb(m: MilpModel, opts: SolveOptions, t0: float) -> SolveResult:
    deadline = t0 + opts.time_limit if opts.time_limit else None
    search = _BranchAndBound(m, deadline)
    status, vals, obj, bound = search.run()
    res = SolveResult(status, backend="bnb", stats={"nodes": search.nodes})
    if vals is not None:
        res.assignment = m.to_assignment(vals)
        res.objective = Fraction(obj, search.obj_scale)
    if bound is not None:
        res.bound = Fraction(bound, search.obj_scale)
    return res


# -- CP-SAT backend -----------------------------------------------------------------

def _solve_cpsat(m: MilpModel, opts: SolveOptions, t0: float) -> SolveResult:
    from ortools.sat.python import cp_model

    cp = cp_model.CpModel()
    xs = [cp.new_bool_var(n) for n in m.names]
    for con in m.constraints:
        terms, rhs = scaled_row(con)
        expr = cp_model.LinearExpr.weighted_sum([xs[i] for i, _ in terms], [c for _, c in terms])
        if con.sense == LE:
            cp.add(expr <= rhs)
        elif con.sense == GE:
            cp.add(expr >= rhs)
        else:
            cp.add(expr == rhs)
    obj, scale = _int_objective(m)
    if obj:
        cp.minimize(cp_model.LinearExpr.weighted_sum([xs[i] for i, _ in obj], [c for _, c in obj]))
    solver = cp_model.CpSolver()
    p = solver.parameters
    if opts.time_limit:
        p.max_time_in_seconds = max(0.0, opts.time_limit - (time.monotonic() - t0))
    if opts.deterministic:
        p.num_workers = 1
        p.random_seed = 0
    else:
        p.num_workers = max(1, opts.threads)
    p.log_search_progress = opts.log_progress
    status = solver.solve(cp)
    res = SolveResult(TIMEOUT, backend="cpsat",
                      stats={"branches": solver.num_branches, "conflicts": solver.num_conflicts})
    if status == cp_model.OPTIMAL:
        res.status = OPTIMAL
    elif status == cp_model.INFEASIBLE:
        res.status = INFEASIBLE
        return res
    elif status == cp_model.MODEL_INVALID:
        raise ModelError(f"CP-SAT rejected the model: {cp.validate()}")
    if status in (cp_model.OPTIMAL, cp_model.FEASIBLE):
        vals = [int(solver.boolean_value(x)) for x in xs]
        res.assignment = m.to_assignment(vals)
        res.objective = Fraction(sum(c * vals[i] for i, c in obj), scale)
    if obj:
        res.bound = Fraction(math.ceil(solver.best_objective_bound - 1e-6), scale)
    else:
        res.bound = Fraction(0)
    if res.status == OPTIMAL:
        res.bound = res.objective
    return res


# -- public API ------------------------------------------------------------------

def solve(m: MilpModel, opts: SolveOptions | None = None) -> SolveResult:
    """Minimise ``m``. An optimal result's assignment is re-checked by substitution."""
    from .ilp import evaluate

    opts = opts or SolveOptions()
    backend = opts.backend
    if backend == "auto":
        backend = "bnb" if m.n_vars <= BNB_MAX_VARS else "cpsat"
    t0 = time.monotonic()
    if backend == "bnb":
        res = _solve_bnb(m, opts, t0)
    elif backend == "cpsat":
        res = _solve_cpsat(m, opts, t0)
    else:
        raise ValueError(f"unknown backend {opts.backend!r}")
    res.wall_time = time.monotonic() - t0
    if res.assignment is not None:
        ev = evaluate(m, res.assignment)
        if not ev.feasible:
            raise RuntimeError(f"{backend} returned an infeasible assignment: {ev.violated[:5]}")
        if ev.objective != res.objective:
            raise RuntimeError(f"{backend} objective {res.objective} disagrees with substitution {ev.objective}")
    log.info("solve[%s]: %s obj=%s in %.2fs", backend, res.status, res.objective, res.wall_time)
    return res


def _terms_by_name(m: MilpModel, terms) -> list[tuple[int, Fraction]]:
    items = terms.items() if isinstance(terms, Mapping) else terms
    out = []
    for k, c in items:
        out.append((m.var(k) if isinstance(k, str) else k, Fraction(c)))
    return out


def solve_lexicographic(m: MilpModel, primary, secondary, opts: SolveOptions | None = None) -> tuple[SolveResult, Fraction | None, Fraction | None]:
    """Minimise ``primary``, pin it to its optimum, then minimise ``secondary``.

    Term lists are ``(variable, coef)`` pairs or mappings, keyed by index or
    name. Returns the final result and the two objective values.
    """
    opts = opts or SolveOptions()
    p_terms = _terms_by_name(m, primary)
    s_terms = _terms_by_name(m, secondary)
    t0 = time.monotonic()
    first = solve(m.with_objective(p_terms), opts)
    if first.status != OPTIMAL:
        return first, None, None
    if not s_terms:
        return first, first.objective, Fraction(0)
    rest = None
    if opts.time_limit:
        rest = max(1.0, opts.time_limit - (time.monotonic() - t0))
    opts2 = SolveOptions(rest, opts.threads, opts.deterministic, opts.backend, opts.log_progress)
    pinned = m.with_constraints([make_constraint(p_terms, EQ, first.objective, "lex_primary")])
    second = solve(pinned.with_objective(s_terms), opts2)
    second.wall_time = time.monotonic() - t0
    if second.status != OPTIMAL:
        return second, first.objective, None
    return second, first.objective, second.objective


def import_solution(m: MilpModel, text: str) -> dict[str, int]:
    """Read an external solver's ``name value`` listing.

    Also accepts ``name = value``. Values within 1e-6 of 0 or 1 are rounded;
    anything else is rejected. Unlisted variables default to 0; ``#``
    starts a comment.
    """
    values = {n: 0 for n in m.names}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace("=", " ").split()
        if len(parts) != 2:
            raise ModelError(f"line {lineno}: expected 'name value', got {raw.strip()!r}")
        name, val = parts
        if name not in m.index:
            raise ModelError(f"line {lineno}: unknown variable {name!r}")
        try:
            x = float(val)
        except ValueError:
            raise ModelError(f"line {lineno}: value {val!r} is not a number") from None
        if abs(x) <= 1e-6:
            values[name] = 0
        elif abs(x - 1) <= 1e-6:
            values[name] = 1
        else:
            raise ModelError(f"line {lineno}: variable {name} has non-binary value {val}")
    return values


def export_assignment(m: MilpModel, assignment: Mapping[str, int]) -> str:
    return "".join(f"{n} {assignment[n]}\n" for n in m.names if assignment.get(n))

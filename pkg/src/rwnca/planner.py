"""End-to-end planning of one design on one demand set.

Full-size models (COST239 with ten demands has ~20k variables and ~330k
rows) are out of reach for a direct search on a single core, so large
instances are planned with two independent bounds:

* an upper bound from a restricted route-based formulation (every lightpath
  drawn from enumerated simple paths), solved with CP-SAT; its solution is
  encoded into the full program and re-checked by substitution;
* a lower bound from an aggregate relaxation of the full program that
  counts signal arrivals per wavelength at the common destination
  (:func:`arrival_bound`).

When both meet, the plan is optimal for the full program. Small instances
go straight to :func:`rwnca.solver.solve` on the full model.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .ilp import MilpModel, evaluate
from .model import (CodingPair, DesignSpec, Lightpath, Provision, Solution, VarCatalog, decode_solution,
                    design_model, encode_solution)
from .solver import INFEASIBLE, OPTIMAL, TIMEOUT, SolveOptions, solve
from .topology import Demand, Instance, Topology, simple_paths

log = logging.getLogger(__name__)

FEASIBLE = "feasible"


# -- aggregate lower bound --------------------------------------------------------

@dataclass(frozen=True)
class ArrivalBound:
    """Lower bounds implied by counting arrivals at the destination.

    ``min_wavelengths`` bounds the wavelength count; ``min_client_side[k]``
    bounds the client-side count of any solution using at most ``k``
    wavelengths (absent keys: no such solution).
    """

    min_wavelengths: int | None
    min_client_side: dict[int, int]

    def objective_bound(self, spec: DesignSpec, max_w: int) -> Fraction | None:
        best = None
        for k, u in self.min_client_side.items():
            if k > max_w:
                continue
            val = spec.c1 * k + spec.c2 * u
            best = val if best is None else min(best, val)
        return best


def _profiles(deg: int, n_d: int, coding: bool, same: bool):
    """Per-wavelength (working arrivals, protection arrivals) a destination can absorb.

    For wavelength w let X, Y be the working/protection link uses entering
    the destination and Z the coded uses there. Summing the per-link
    wavelength rows over the incoming links gives X + Y - Z/2 <= deg.
    Flow conservation gives X >= n (working copies that end on w) and
    Y >= m. Coded partners carry identical coded links, so Z is even, and
    coded links lie on protection links, so Z <= Y. With P = max(0, Z/2 - (Y - m))
    this yields n + m - P <= deg with 0 <= 2P <= m, i.e. n + ceil(m/2) <= deg.
    Without coding Z = 0 and n + m <= deg.
    """
    out = []
    for n in range(min(deg, n_d) + 1):
        for m in range(n_d + 1):
            if same and n != m:
                continue
            load = n + (math.ceil(m / 2) if coding else m)
            if load <= deg:
                out.append((n, m))
    return out


def arrival_bound(topology: Topology, demands, spec: DesignSpec, max_w: int) -> ArrivalBound:
    """Exact optimum of the arrival-count relaxation for up to ``max_w`` wavelengths.

    The client-side bound uses u[d] >= |alpha[d,w] - beta[d,w]|, hence
    sum(u) >= 1/2 * sum_w |n_w - m_w|.
    """
    demands = list(demands)
    n_d = len(demands)
    dests = {d.dst for d in demands}
    if n_d == 0:
        return ArrivalBound(0, {k: 0 for k in range(max_w + 1)})
    if len(dests) != 1:
        # no aggregate structure to exploit: one wavelength, no client-side
        return ArrivalBound(1, {k: 0 for k in range(1, max_w + 1)})
    (dest,) = dests
    deg = topology.degree(dest)
    profiles = [p for p in _profiles(deg, n_d, spec.coding_enabled, spec.force_same_wavelength) if p != (0, 0)]
    # state (sum n, sum m) -> min sum |n - m| after k used wavelengths
    layer = {(0, 0): 0}
    result: dict[int, int] = {}
    min_k = None
    for k in range(1, max_w + 1):
        nxt: dict[tuple[int, int], int] = {}
        for (sn, sm), cost in layer.items():
            for n, m in profiles:
                a, b = sn + n, sm + m
                if a > n_d or b > n_d:
                    continue
                c = cost + abs(n - m)
                if nxt.get((a, b), c + 1) > c:
                    nxt[(a, b)] = c
        # wavelengths may stay dark, so keep the previous states too
        for key, cost in layer.items():
            if nxt.get(key, cost + 1) > cost:
                nxt[key] = cost
        layer = nxt
        if (n_d, n_d) in layer:
            result[k] = layer[(n_d, n_d)] // 2
            if min_k is None:
                min_k = k
    return ArrivalBound(min_k, result)


# -- restricted route formulation ---------------------------------------------------

@dataclass
class RestrictedResult:
    status: str
    solution: Solution | None = None
    objective: Fraction | None = None
    wall_time: float = 0.0


def _fibers(route):
    return {frozenset(h) for h in zip(route, route[1:])}


def restricted_search(inst: Instance, spec: DesignSpec, max_hops: int | None, time_limit: float | None,
                      lower_bound: Fraction | None = None, deterministic: bool = True, threads: int = 1,
                      hint: Solution | None = None) -> RestrictedResult:
    """Optimise the design with every lightpath restricted to a simple path
    of at most ``max_hops`` links. Any solution is feasible for the full
    program; infeasibility only says the route set is too small."""
    from ortools.sat.python import cp_model

    t0 = time.monotonic()
    topo = inst.topology
    W = inst.wavelengths
    dem = inst.demands
    D = range(len(dem))
    routes = {d: simple_paths(topo, dem[d].src, dem[d].dst, max_hops) for d in D}
    fibers = {d: [_fibers(r) for r in routes[d]] for d in D}
    hops = {d: [set(zip(r, r[1:])) for r in routes[d]] for d in D}
    all_fibers = sorted({frozenset(e) for e in topo.edges}, key=sorted)

    cp = cp_model.CpModel()
    a = {(d, p, w): cp.new_bool_var(f"a{d}_{p}_{w}") for d in D for p in range(len(routes[d])) for w in W}
    b = {(d, q, w): cp.new_bool_var(f"b{d}_{q}_{w}") for d in D for q in range(len(routes[d])) for w in W}
    delta = {w: cp.new_bool_var(f"delta{w}") for w in W}
    for d in D:
        cp.add_exactly_one(a[d, p, w] for p in range(len(routes[d])) for w in W)
        cp.add_exactly_one(b[d, q, w] for q in range(len(routes[d])) for w in W)
        for p, fp in enumerate(fibers[d]):
            for q, fq in enumerate(fibers[d]):
                if fp & fq:
                    for w1 in W:
                        for w2 in W:
                            if spec.force_same_wavelength and w1 != w2:
                                continue
                            cp.add_bool_or([a[d, p, w1].Not(), b[d, q, w2].Not()])
        for w in W:
            wa = sum(a[d, p, w] for p in range(len(routes[d])))
            wb = sum(b[d, q, w] for q in range(len(routes[d])))
            if spec.force_same_wavelength:
                cp.add(wa == wb)

    work_fiber = {}
    prot_fiber = {}
    for d in D:
        for phi in all_fibers:
            work_fiber[d, phi] = [a[d, p, w] for p, fp in enumerate(fibers[d]) if phi in fp for w in W]
            prot_fiber[d, phi] = [b[d, q, w] for q, fq in enumerate(fibers[d]) if phi in fq for w in W]

    s = {}
    if spec.coding_enabled and len(inst.destinations) == 1:
        suffix_routes = {}
        for d in D:
            table: dict[tuple[int, ...], list[int]] = {}
            for q, r in enumerate(routes[d]):
                for i in range(len(r) - 1):
                    table.setdefault(r[i:], []).append(q)
            suffix_routes[d] = table
        for d1, d2 in combinations(D, 2):
            common = set(suffix_routes[d1]) & set(suffix_routes[d2])
            for sigma in sorted(common, key=lambda x: (len(x), x)):
                for w in W:
                    v = cp.new_bool_var(f"s{d1}_{d2}_{'-'.join(map(str, sigma))}_{w}")
                    s[d1, d2, sigma, w] = v
                    for dd in (d1, d2):
                        cp.add(sum(b[dd, q, w] for q in suffix_routes[dd][sigma]) >= v)
        for d in D:
            mine = [v for (d1, d2, _, _), v in s.items() if d in (d1, d2)]
            if mine:
                cp.add_at_most_one(mine)
        for d1, d2 in combinations(D, 2):
            c = [v for (e1, e2, _, _), v in s.items() if (e1, e2) == (d1, d2)]
            if not c:
                continue
            coded = cp.new_bool_var(f"c{d1}_{d2}")
            cp.add(sum(c) == coded)
            for phi in all_fibers:
                w1, w2 = work_fiber[d1, phi], work_fiber[d2, phi]
                p1, p2 = prot_fiber[d1, phi], prot_fiber[d2, phi]
                if w1 and w2:
                    cp.add(sum(w1) + sum(w2) + coded <= 2)
                if w1 and p2:
                    cp.add(sum(w1) + sum(p2) + coded <= 2)
                if w2 and p1:
                    cp.add(sum(w2) + sum(p1) + coded <= 2)

    for l in topo.links:
        h = (l.src, l.dst)
        for w in W:
            load = [a[d, p, w] for d in D for p, hp in enumerate(hops[d]) if h in hp]
            load += [b[d, q, w] for d in D for q, hq in enumerate(hops[d]) if h in hq]
            merged = [v for (d1, d2, sigma, ww), v in s.items() if ww == w and h in set(zip(sigma, sigma[1:]))]
            if len(load) > 1:
                cp.add(sum(load) - sum(merged) <= 1)

    for w in W:
        users = [v for (d, p, ww), v in a.items() if ww == w] + [v for (d, q, ww), v in b.items() if ww == w]
        cp.add(sum(users) <= 2 * len(dem) * delta[w])
    for w1, w2 in zip(W, W[1:]):
        cp.add(delta[w1] >= delta[w2])

    u = {}
    if spec.has_u:
        for d in D:
            u[d] = cp.new_bool_var(f"u{d}")
            for w in W:
                cp.add(u[d] >= sum(a[d, p, w] for p in range(len(routes[d])))
                       - sum(b[d, q, w] for q in range(len(routes[d]))))
    c1, c2 = Fraction(spec.c1), Fraction(spec.c2)
    scale = math.lcm(c1.denominator, c2.denominator)
    obj = int(c1 * scale) * sum(delta.values())
    if u and c2:
        obj = obj + int(c2 * scale) * sum(u.values())
    cp.minimize(obj)
    if lower_bound is not None:
        cp.add(obj >= math.ceil(lower_bound * scale))

    if hint is not None:
        _apply_hint(cp, hint, inst, routes, a, b, s)

    solver = cp_model.CpSolver()
    prm = solver.parameters
    if time_limit:
        prm.max_time_in_seconds = time_limit
    prm.num_workers = 1 if deterministic else max(1, threads)
    prm.random_seed = 0
    st = solver.solve(cp)
    res = RestrictedResult(TIMEOUT)
    if st == cp_model.INFEASIBLE:
        res.status = INFEASIBLE
    elif st in (cp_model.OPTIMAL, cp_model.FEASIBLE):
        res.status = OPTIMAL if st == cp_model.OPTIMAL else FEASIBLE
        provisions = []
        for d in D:
            (p, w1), = [(p, w) for (dd, p, w), v in a.items() if dd == d and solver.boolean_value(v)]
            (q, w2), = [(q, w) for (dd, q, w), v in b.items() if dd == d and solver.boolean_value(v)]
            provisions.append(Provision(dem[d], Lightpath(routes[d][p], w1), Lightpath(routes[d][q], w2)))
        coding = []
        for (d1, d2, sigma, w), v in s.items():
            if solver.boolean_value(v):
                ids = tuple(sorted((dem[d1].id, dem[d2].id)))
                coding.append(CodingPair(ids, sigma[0], sigma, w))
        coding.sort(key=lambda c: c.demands)
        res.solution = Solution(tuple(provisions), tuple(coding))
        res.objective = Fraction(int(round(solver.objective_value)), scale)
    res.wall_time = time.monotonic() - t0
    return res


def _apply_hint(cp, hint: Solution, inst, routes, a, b, s) -> None:
    pos = {dem.id: d for d, dem in enumerate(inst.demands)}
    for p in hint.provisions:
        d = pos[p.demand.id]
        for var, lp in ((a, p.working), (b, p.protection)):
            if lp.route in routes[d]:
                cp.add_hint(var[d, routes[d].index(lp.route), lp.wavelength], 1)
    for c in hint.coding:
        d1, d2 = sorted((pos[c.demands[0]], pos[c.demands[1]]))
        key = (d1, d2, c.route, c.wavelength)
        if key in s:
            cp.add_hint(s[key], 1)


# -- driver ---------------------------------------------------------------------

@dataclass(frozen=True)
class PlanOptions:
    n_wavelengths: int | None = None  # None: search upward from the lower bound
    max_wavelengths: int | None = None
    strategy: str = "auto"  # auto | model | paths
    hop_limits: tuple = (4, 6)
    time_limit: float | None = 1800.0
    deterministic: bool = True
    threads: int = 1
    model_var_limit: int = 4000


@dataclass
class PlanResult:
    status: str  # optimal | feasible | infeasible | timeout
    design: DesignSpec
    instance: Instance | None = None
    solution: Solution | None = None
    objective: Fraction | None = None
    lower_bound: Fraction | None = None
    method: str = ""
    wall_time: float = 0.0
    notes: list[str] = field(default_factory=list)
    model: MilpModel | None = None
    catalog: VarCatalog | None = None
    assignment: list[int] | None = None

    @property
    def n_wavelengths(self) -> int | None:
        return len(self.instance.wavelengths) if self.instance else None


def certify(inst: Instance, spec: DesignSpec, sol: Solution):
    """Encode ``sol`` into the full program and check it by substitution."""
    m, cat = design_model(inst, spec)
    values = encode_solution(inst, spec, cat, sol, m.n_vars)
    ev = evaluate(m, m.to_assignment(values))
    if not ev.feasible:
        raise RuntimeError(f"planned solution violates the program: {ev.violated[:5]}")
    return m, cat, values, Fraction(ev.objective)


def _plan_model(topology, demands, spec, opts, W, t0) -> PlanResult:
    inst = Instance.create(topology, demands, W)
    m, cat = design_model(inst, spec)
    remaining = None if not opts.time_limit else max(1.0, opts.time_limit - (time.monotonic() - t0))
    res = solve(m, SolveOptions(remaining, opts.threads, opts.deterministic))
    out = PlanResult(res.status, spec, inst, method=f"model[{res.backend}]", model=m, catalog=cat)
    out.lower_bound = res.bound
    if res.assignment is not None:
        out.assignment = [res.assignment[n] for n in m.names]
        out.solution = decode_solution(inst, spec, cat, out.assignment, strict=False)
        out.objective = res.objective
        if res.status == TIMEOUT:
            out.status = FEASIBLE
    return out


def plan(topology: Topology, demands, spec: DesignSpec, opts: PlanOptions | None = None) -> PlanResult:
    """Solve one design, choosing |W| upward from the arrival bound unless fixed."""
    opts = opts or PlanOptions()
    demands = tuple(demands)
    t0 = time.monotonic()
    n_d = len(demands)
    cap = opts.n_wavelengths or opts.max_wavelengths or max(2 * n_d, 1)
    bound = arrival_bound(topology, demands, spec, cap)
    if bound.min_wavelengths is None:
        r = PlanResult(INFEASIBLE, spec, Instance.create(topology, demands, cap), method="arrival-bound")
        r.notes.append(f"arrival counting rules out every solution with at most {cap} wavelength(s)")
        r.wall_time = time.monotonic() - t0
        return r
    if opts.n_wavelengths:
        w_range = [opts.n_wavelengths]
    else:
        w_range = list(range(max(1, bound.min_wavelengths), cap + 1))

    probe = Instance.create(topology, demands, w_range[0])
    use_model = opts.strategy == "model"
    if opts.strategy == "auto":
        # z variables dominate the model size
        size = n_d * len(topology.links) * w_range[0] * (len(topology.nodes) if spec.coding_enabled else 2)
        use_model = size <= opts.model_var_limit
    notes: list[str] = []
    proven_below = True  # every |W| below the current one is known infeasible
    for W in w_range:
        if use_model:
            r = _plan_model(topology, demands, spec, opts, W, t0)
            if r.status == INFEASIBLE:
                notes.append(f"|W|={W}: infeasible (full model)")
                continue
            r.notes = notes + r.notes
            if r.status == OPTIMAL and not proven_below:
                r.status = FEASIBLE
            r.wall_time = time.monotonic() - t0
            return r
        inst = Instance.create(topology, demands, W)
        lb = bound.objective_bound(spec, W)
        found = None
        for hops in opts.hop_limits:
            remaining = None if not opts.time_limit else max(1.0, opts.time_limit - (time.monotonic() - t0))
            rr = restricted_search(inst, spec, hops, remaining, lower_bound=lb, deterministic=opts.deterministic,
                                   threads=opts.threads)
            log.info("restricted |W|=%d hops=%s: %s obj=%s (%.1fs)", W, hops, rr.status, rr.objective, rr.wall_time)
            if rr.solution is not None:
                found = (rr, hops)
                break
            notes.append(f"|W|={W}: no solution within {hops}-hop routes ({rr.status})")
        if found is None:
            if opts.n_wavelengths is None:
                # the route restriction is not a proof; larger |W| results are unproven
                proven_below = False
                continue
            r = PlanResult(TIMEOUT, spec, inst, lower_bound=lb, method="paths", notes=notes)
            r.wall_time = time.monotonic() - t0
            return r
        rr, hops = found
        m, cat, values, obj = certify(inst, spec, rr.solution)
        status = OPTIMAL if (lb is not None and obj == lb and proven_below) else FEASIBLE
        if status == FEASIBLE:
            notes.append(f"objective {obj} above the arrival bound {lb}; optimality unproven")
        r = PlanResult(status, spec, inst, rr.solution, obj, lb, f"paths[{hops}]+arrival-bound", notes=notes,
                       model=m, catalog=cat, assignment=values)
        r.wall_time = time.monotonic() - t0
        return r
    r = PlanResult(TIMEOUT, spec, probe, method="paths" if not use_model else "model", notes=notes)
    r.wall_time = time.monotonic() - t0
    return r

"""Exhaustive search over tiny instances, independent of the integer program.

Every candidate is a complete :class:`~rwnca.model.Solution` (routes,
wavelengths, coded pairs) judged only by :func:`rwnca.validator.validate`.
Meant for two demands on graphs of about six nodes with one or two
wavelengths; the search grows quickly beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .model import CodingPair, DesignSpec, Lightpath, Provision, Solution
from .topology import Instance, simple_paths
from .validator import validate


@dataclass(frozen=True)
class OracleResult:
    objective: Fraction | None  # None: no feasible solution
    best: Solution | None
    explored: int


def objective_of(spec: DesignSpec, sol: Solution) -> Fraction:
    return spec.c1 * len(sol.used_wavelengths) + spec.c2 * sol.client_side_count


def _fibers(route):
    return {frozenset(h) for h in zip(route, route[1:])}


def _provision_options(inst: Instance, spec: DesignSpec, demand):
    routes = simple_paths(inst.topology, demand.src, demand.dst)
    out = []
    for wr, pr in product(routes, routes):
        if _fibers(wr) & _fibers(pr):
            continue
        for ww, pw in product(inst.wavelengths, inst.wavelengths):
            if spec.force_same_wavelength and ww != pw:
                continue
            out.append(Provision(demand, Lightpath(wr, ww), Lightpath(pr, pw)))
    return out


def _coding_options(provisions, spec: DesignSpec):
    """Every set of disjoint coded pairs: each pair codes on a common protection suffix."""
    if not spec.coding_enabled:
        return [()]
    candidates = []
    for p, q in combinations(provisions, 2):
        if p.demand.dst != q.demand.dst or p.protection.wavelength != q.protection.wavelength:
            continue
        rp, rq = p.protection.route, q.protection.route
        for i in range(len(rp) - 1):
            if rp[i] in rq and rq[rq.index(rp[i]):] == rp[i:]:
                ids = tuple(sorted((p.demand.id, q.demand.id)))
                candidates.append(CodingPair(ids, rp[i], rp[i:], p.protection.wavelength))
    out = [()]
    for pick in candidates:
        for chosen in list(out):
            used = {d for c in chosen for d in c.demands}
            if not used & set(pick.demands):
                out.append(tuple(sorted(chosen + (pick,), key=lambda c: c.demands)))
    return out


def brute_force(inst: Instance, spec: DesignSpec) -> OracleResult:
    """Minimum design objective over all validator-clean solutions."""
    options = [_provision_options(inst, spec, d) for d in inst.demands]
    best, best_obj, explored = None, None, 0
    for combo in product(*options):
        provisions = tuple(combo)
        for coding in _coding_options(provisions, spec):
            sol = Solution(provisions, coding)
            obj = objective_of(spec, sol)
            if best_obj is not None and obj >= best_obj:
                continue
            explored += 1
            if validate(inst, spec, sol).ok:
                best, best_obj = sol, obj
    return OracleResult(best_obj, best, explored)

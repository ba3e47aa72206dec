"""Solution checks by direct graph and set logic, failure simulation, metrics.

Nothing here touches the integer program; it is the second opinion on
whatever produced it: the solver, a transcribed reference, or a hand edit.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .model import CLIENT_SIDE, Lightpath, Solution
from .topology import Instance

DISJOINTNESS = "disjointness"
WAVELENGTH_CLASH = "wavelength-clash"
CODING_PAIRING = "coding-pairing"
CODING_CONSISTENCY = "coding-consistency"
RECOVERY_CONDITION = "recovery-condition"
CODING_ON_PROTECTION = "coding-on-protection"
CODING_FLOW = "coding-flow"
FAMILIES = (DISJOINTNESS, WAVELENGTH_CLASH, CODING_PAIRING, CODING_CONSISTENCY,
            RECOVERY_CONDITION, CODING_ON_PROTECTION, CODING_FLOW)

WORKING_SURVIVES = "working-survives"
RECOVERED_PROTECTION = "recovered-via-protection"
RECOVERED_XOR = "recovered-via-xor"
LOST = "LOST"


class MalformedSolution(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    family: str
    message: str
    demands: tuple[int, ...] = ()
    links: tuple[tuple[int, int], ...] = ()
    wavelengths: tuple[int, ...] = ()

    def __str__(self):
        return f"[{self.family}] {self.message}"


@dataclass
class ViolationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def families(self) -> set[str]:
        return {v.family for v in self.violations}

    def add(self, family, message, **kw):
        self.violations.append(Violation(family, message, **kw))


@dataclass
class FailureReport:
    # undirected edge (u, v) -> demand id -> verdict
    verdicts: dict[tuple[int, int], dict[int, str]] = field(default_factory=dict)

    def lost(self) -> list[tuple[tuple[int, int], int]]:
        return [(edge, d) for edge, row in self.verdicts.items() for d, v in row.items() if v == LOST]

    @property
    def fully_recoverable(self) -> bool:
        return not self.lost()

    def summary(self) -> dict[str, int]:
        counts: dict[str, int] = defaultdict(int)
        for row in self.verdicts.values():
            for v in row.values():
                counts[v] += 1
        return dict(counts)


def _check_path(inst: Instance, lp: Lightpath, src: int, dst: int, what: str) -> None:
    topo = inst.topology
    r = lp.route
    if len(r) < 2 or r[0] != src or r[-1] != dst:
        raise MalformedSolution(f"{what}: route {r} does not run {src}->{dst}")
    if len(set(r)) != len(r):
        raise MalformedSolution(f"{what}: route {r} is not simple")
    for a, b in zip(r, r[1:]):
        if not topo.has_link(a, b):
            raise MalformedSolution(f"{what}: no link {a}-{b}")
    if lp.wavelength not in inst.wavelengths:
        raise MalformedSolution(f"{what}: wavelength {lp.wavelength} outside 1..{len(inst.wavelengths)}")


def check_structure(inst: Instance, sol: Solution) -> None:
    ids = [p.demand.id for p in sol.provisions]
    want = sorted(d.id for d in inst.demands)
    if sorted(ids) != want:
        raise MalformedSolution(f"solution covers demands {sorted(ids)}, instance has {want}")
    by_id = {d.id: d for d in inst.demands}
    for p in sol.provisions:
        d = by_id[p.demand.id]
        if (p.demand.src, p.demand.dst) != (d.src, d.dst):
            raise MalformedSolution(f"demand {d.id}: endpoints differ from the instance")
        _check_path(inst, p.working, d.src, d.dst, f"demand {d} working")
        _check_path(inst, p.protection, d.src, d.dst, f"demand {d} protection")
    for c in sol.coding:
        if len(c.demands) != 2:
            raise MalformedSolution(f"coding record {c} must name two demands")
        for d in c.demands:
            if d not in by_id:
                raise MalformedSolution(f"coding record names unknown demand {d}")
        if c.wavelength not in inst.wavelengths:
            raise MalformedSolution(f"coding record {c.demands}: wavelength {c.wavelength} out of range")


def _fibers(route) -> set[frozenset]:
    return {frozenset(h) for h in zip(route, route[1:])}


def _hops(route) -> list[tuple[int, int]]:
    return list(zip(route, route[1:]))


def validate(inst: Instance, spec, sol: Solution) -> ViolationReport:
    """Check every constraint family of the design on a decoded solution."""
    check_structure(inst, sol)
    rep = ViolationReport()
    prov = {p.demand.id: p for p in sol.provisions}

    for p in sol.provisions:
        shared = _fibers(p.working.route) & _fibers(p.protection.route)
        if shared:
            rep.add(DISJOINTNESS, f"demand {p.demand}: working and protection share fiber(s) "
                    f"{sorted(tuple(sorted(s)) for s in shared)}", demands=(p.demand.id,))
        if spec is not None and spec.force_same_wavelength and p.working.wavelength != p.protection.wavelength:
            rep.add(WAVELENGTH_CLASH, f"demand {p.demand}: design requires one wavelength for both paths",
                    demands=(p.demand.id,), wavelengths=(p.working.wavelength, p.protection.wavelength))

    if sol.coding and spec is not None and not spec.coding_enabled:
        rep.add(CODING_PAIRING, "design does not allow network coding")

    # coding records ---------------------------------------------------------------
    membership: dict[int, list] = defaultdict(list)
    for c in sol.coding:
        for d in c.demands:
            membership[d].append(c)
    for d, cs in membership.items():
        if len(cs) > 1:
            rep.add(CODING_PAIRING, f"demand {prov[d].demand} appears in {len(cs)} coded pairs", demands=(d,))
    merged: dict[int, set[tuple[int, int]]] = {}  # demand -> hops of its coded segment
    for c in sol.coding:
        a, b = c.demands
        if a == b:
            rep.add(CODING_PAIRING, f"demand {a} is paired with itself", demands=(a,))
            continue
        pa, pb = prov[a], prov[b]
        dest = pa.demand.dst
        if pb.demand.dst != dest:
            rep.add(CODING_PAIRING, f"coded demands {pa.demand} and {pb.demand} have different destinations",
                    demands=(a, b))
        if c.node == dest:
            rep.add(CODING_PAIRING, f"coding node {c.node} is the destination", demands=(a, b))
        for p in (pa, pb):
            if p.protection.wavelength != c.wavelength:
                rep.add(CODING_CONSISTENCY, f"demand {p.demand}: protection on λ{p.protection.wavelength} "
                        f"but coded on λ{c.wavelength}", demands=(a, b), wavelengths=(c.wavelength,))
            if c.node not in p.protection.route:
                rep.add(CODING_CONSISTENCY, f"coding node {c.node} is not on the protection route of {p.demand}",
                        demands=(a, b))
        # coded signal must run as a connected path from the coding node to the destination
        hops = _hops(c.route)
        if (len(c.route) < 2 or c.route[0] != c.node or c.route[-1] != dest
                or len(set(c.route)) != len(c.route)
                or not all(inst.topology.has_link(u, v) for u, v in hops)):
            rep.add(CODING_FLOW, f"coding links {c.route} of pair {c.demands} do not form a path "
                    f"{c.node}->{dest}", demands=(a, b), links=tuple(hops))
        for p in (pa, pb):
            off = [h for h in hops if h not in set(p.protection.hops())]
            if off:
                rep.add(CODING_ON_PROTECTION, f"coding link(s) {off} of pair {c.demands} are not on the "
                        f"protection route of {p.demand}", demands=(a, b), links=tuple(off))
        # recovery: partners' working paths disjoint, and each working path
        # disjoint from the other's protection
        for p, q in ((pa, pb), (pb, pa)):
            if p is pa and _fibers(pa.working.route) & _fibers(pb.working.route):
                rep.add(RECOVERY_CONDITION, f"coded demands {pa.demand} and {pb.demand} share working fiber",
                        demands=(a, b))
            if _fibers(p.working.route) & _fibers(q.protection.route):
                rep.add(RECOVERY_CONDITION, f"working route of {p.demand} meets protection route of {q.demand}",
                        demands=(a, b))
        for d in c.demands:
            merged.setdefault(d, set()).update(hops)

    # wavelength occupancy per directed link ------------------------------------------
    occupancy: dict[tuple[tuple[int, int], int], list[str]] = defaultdict(list)
    for p in sol.provisions:
        for h in p.working.hops():
            occupancy[h, p.working.wavelength].append(f"{p.demand} working")
        for h in p.protection.hops():
            occupancy[h, p.protection.wavelength].append(f"{p.demand} protection")
    for c in sol.coding:
        a, b = c.demands
        for h in c.hops():
            key = (h, c.wavelength)
            tags = occupancy.get(key, [])
            ta, tb = f"{prov[a].demand} protection", f"{prov[b].demand} protection"
            if ta in tags and tb in tags:
                tags.remove(tb)
                tags[tags.index(ta)] = f"{prov[a].demand}+{prov[b].demand} coded"
    for (h, w), users in sorted(occupancy.items()):
        if len(users) > 1:
            rep.add(WAVELENGTH_CLASH, f"link ({h[0]}-{h[1]}) λ{w} carries {', '.join(users)}",
                    links=(h,), wavelengths=(w,))
    return rep


def _avoids(route, failed: frozenset) -> bool:
    return failed not in _fibers(route)


def simulate_failures(inst: Instance, sol: Solution) -> FailureReport:
    """Cut each fiber (both directions) in turn and decide every demand's fate.

    A coded demand recovers only when its own protection prefix, its
    partner's protection prefix, the shared coded segment and the partner's
    working path all survive: XOR decoding needs both inputs.
    """
    rep = FailureReport()
    prov = {p.demand.id: p for p in sol.provisions}
    for u, v in inst.topology.edges:
        cut = frozenset((u, v))
        row = {}
        for p in sol.provisions:
            if _avoids(p.working.route, cut):
                row[p.demand.id] = WORKING_SURVIVES
                continue
            pair = sol.pair_of(p.demand.id)
            if pair is None:
                row[p.demand.id] = RECOVERED_PROTECTION if _avoids(p.protection.route, cut) else LOST
                continue
            q = prov[pair.partner(p.demand.id)]
            ok = all(_avoids(r, cut) for r in (_prefix(p.protection.route, pair.node),
                                                _prefix(q.protection.route, pair.node),
                                                pair.route, q.working.route))
            row[p.demand.id] = RECOVERED_XOR if ok else LOST
        rep.verdicts[(u, v)] = row
    return rep


def _prefix(route, node):
    if node not in route:
        return route
    return route[: route.index(node) + 1]


@dataclass(frozen=True)
class Metrics:
    wavelength_count: int
    client_side_count: int
    transponder_count: int

    def as_tuple(self):
        return (self.wavelength_count, self.client_side_count, self.transponder_count)


def metrics(inst: Instance, sol: Solution) -> Metrics:
    client = sum(p.configuration == CLIENT_SIDE for p in sol.provisions)
    return Metrics(len(sol.used_wavelengths), client, len(sol.provisions) + client)

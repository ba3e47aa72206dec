"""RWNCA-PC program construction and decoding.

One catalog entry per logical variable family:

    x[d,e,w]    working lightpath of d uses link e on wavelength w
    y[d,e,w]    protection lightpath of d uses link e on wavelength w
    alpha[d,w]  working wavelength choice
    beta[d,w]   protection wavelength choice
    z[d,v,e,w]  d is XOR-coded at v, the coded signal rides e on w
    theta[d,v]  d is coded at node v
    f[d1,d2]    d1 and d2 are coded together
    gamma[e,w]  wavelength w is lit on link e
    delta[w]    wavelength w is used anywhere
    u[d]        d is provisioned client-side

``d`` is the position of the demand in ``Instance.demands``, ``e`` the
directed link id and ``w`` the 1-based wavelength number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

from .ilp import EQ, GE, LE, Constraint, MilpModel, ModelBuilder, make_constraint
from .topology import Demand, Instance, Topology

NETWORK_SIDE = "network-side"
CLIENT_SIDE = "client-side"


class UnsupportedInstance(ValueError):
    pass


class DecodeError(ValueError):
    """The assignment does not describe simple lightpaths; points at a model bug."""


# -- designs ------------------------------------------------------------------

@dataclass(frozen=True)
class DesignSpec:
    design_id: int
    coding_enabled: bool
    force_same_wavelength: bool
    secondary_objective: bool
    c1: Fraction = Fraction(1)
    c2: Fraction = Fraction(0)

    @classmethod
    def for_design(cls, design_id: int, n_demands: int = 0) -> "DesignSpec":
        """The five benchmark designs. ``n_demands`` sets Design 5's secondary weight."""
        if design_id == 1:
            return cls(1, False, True, False)
        if design_id == 2:
            return cls(2, False, False, False)
        if design_id == 3:
            return cls(3, True, True, False)
        if design_id == 4:
            return cls(4, True, False, False)
        if design_id == 5:
            return cls(5, True, False, True, Fraction(1), Fraction(1, 1 + n_demands))
        raise ValueError(f"unknown design {design_id}; expected 1..5")

    @property
    def has_u(self) -> bool:
        return not self.force_same_wavelength


@dataclass
class VarCatalog:
    x: dict[tuple[int, int, int], int] = field(default_factory=dict)
    y: dict[tuple[int, int, int], int] = field(default_factory=dict)
    alpha: dict[tuple[int, int], int] = field(default_factory=dict)
    beta: dict[tuple[int, int], int] = field(default_factory=dict)
    z: dict[tuple[int, int, int, int], int] = field(default_factory=dict)
    theta: dict[tuple[int, int], int] = field(default_factory=dict)
    f: dict[tuple[int, int], int] = field(default_factory=dict)
    gamma: dict[tuple[int, int], int] = field(default_factory=dict)
    delta: dict[int, int] = field(default_factory=dict)
    u: dict[int, int] = field(default_factory=dict)

    FAMILIES = ("x", "y", "alpha", "beta", "z", "theta", "f", "gamma", "delta", "u")

    def counts(self) -> dict[str, int]:
        return {k: len(getattr(self, k)) for k in self.FAMILIES}

    def all_indices(self) -> list[int]:
        return [i for k in self.FAMILIES for i in getattr(self, k).values()]


# -- solutions ----------------------------------------------------------------

@dataclass(frozen=True)
class Lightpath:
    route: tuple[int, ...]  # node sequence, source first
    wavelength: int

    def hops(self) -> list[tuple[int, int]]:
        return list(zip(self.route, self.route[1:]))

    def fibers(self) -> set[frozenset]:
        return {frozenset(h) for h in self.hops()}

    def __str__(self):
        return "(" + "-".join(map(str, self.route)) + f") λ{self.wavelength}"


@dataclass(frozen=True)
class Provision:
    demand: Demand
    working: Lightpath
    protection: Lightpath

    @property
    def configuration(self) -> str:
        return NETWORK_SIDE if self.working.wavelength == self.protection.wavelength else CLIENT_SIDE


@dataclass(frozen=True)
class CodingPair:
    demands: tuple[int, int]  # demand ids, ascending
    node: int
    route: tuple[int, ...]  # coding node ... destination
    wavelength: int

    def hops(self) -> list[tuple[int, int]]:
        return list(zip(self.route, self.route[1:]))

    def partner(self, demand_id: int) -> int:
        a, b = self.demands
        return b if demand_id == a else a


@dataclass(frozen=True)
class Solution:
    provisions: tuple[Provision, ...]
    coding: tuple[CodingPair, ...] = ()

    def provision(self, demand_id: int) -> Provision:
        for p in self.provisions:
            if p.demand.id == demand_id:
                return p
        raise KeyError(demand_id)

    def pair_of(self, demand_id: int) -> CodingPair | None:
        for c in self.coding:
            if demand_id in c.demands:
                return c
        return None

    @property
    def used_wavelengths(self) -> set[int]:
        return {lp.wavelength for p in self.provisions for lp in (p.working, p.protection)}

    @property
    def client_side_count(self) -> int:
        return sum(p.configuration == CLIENT_SIDE for p in self.provisions)


# -- construction ---------------------------------------------------------------

def _fiber_groups(topo: Topology) -> list[tuple[int, int]]:
    return [(l.id, topo.reverse[l.id]) for l in topo.links if l.id < topo.reverse[l.id]]


def build_model(inst: Instance, spec: DesignSpec) -> tuple[MilpModel, VarCatalog]:
    """Variables and constraints of the RWNCA-PC program for one design.

    The objective is left empty; see :func:`set_weighted_objective`.
    Disjointness rows (working vs protection, and the two recovery rows of a
    coded pair) are written per fiber, i.e. over a link and its reverse
    together, so that a single cut cannot hit both paths from opposite
    directions.
    """
    topo = inst.topology
    if spec.coding_enabled and len(inst.destinations) > 1:
        raise UnsupportedInstance("network coding requires all demands to share one destination")
    D = range(len(inst.demands))
    W = inst.wavelengths
    E = [l.id for l in topo.links]
    V = topo.nodes
    dem = inst.demands
    out_links = {v: [l.id for l in topo.out_links(v)] for v in V}
    in_links = {v: [l.id for l in topo.in_links(v)] for v in V}
    fibers = _fiber_groups(topo)
    coding = spec.coding_enabled

    b = ModelBuilder()
    cat = VarCatalog()
    for w in W:
        cat.delta[w] = b.add_var(f"delta_w{w}")
    if spec.has_u:
        for d in D:
            cat.u[d] = b.add_var(f"u_d{d}")
    for d, w in product(D, W):
        cat.alpha[d, w] = b.add_var(f"alpha_d{d}_w{w}")
    for d, w in product(D, W):
        cat.beta[d, w] = b.add_var(f"beta_d{d}_w{w}")
    for d, e, w in product(D, E, W):
        cat.x[d, e, w] = b.add_var(f"x_d{d}_e{e}_w{w}")
    for d, e, w in product(D, E, W):
        cat.y[d, e, w] = b.add_var(f"y_d{d}_e{e}_w{w}")
    if coding:
        for d, v in product(D, V):
            cat.theta[d, v] = b.add_var(f"theta_d{d}_v{v}")
        for d1, d2 in product(D, D):
            cat.f[d1, d2] = b.add_var(f"f_d{d1}_d{d2}")
        for d, v, e, w in product(D, V, E, W):
            cat.z[d, v, e, w] = b.add_var(f"z_d{d}_v{v}_e{e}_w{w}")
    for e, w in product(E, W):
        cat.gamma[e, w] = b.add_var(f"gamma_e{e}_w{w}")

    x, y, z, al, be = cat.x, cat.y, cat.z, cat.alpha, cat.beta
    th, f, ga, de = cat.theta, cat.f, cat.gamma, cat.delta
    add = b.add_constraint
    rows = b.constraints

    for d in D:
        add([(al[d, w], 1) for w in W], EQ, 1, f"onewl_d{d}")
        add([(al[d, w], 1) for w in W] + [(be[d, w], -1) for w in W], EQ, 0, f"pairwl_d{d}")

    # flow conservation per wavelength for working and protection
    for d, v, w in product(D, V, W):
        rhs_coef = 1 if v == dem[d].src else -1 if v == dem[d].dst else 0
        for var, sel, tag in ((x, al, "wflow"), (y, be, "pflow")):
            terms = [(var[d, e, w], 1) for e in out_links[v]] + [(var[d, e, w], -1) for e in in_links[v]]
            if rhs_coef:
                terms.append((sel[d, w], -rhs_coef))
            add(terms, EQ, 0, f"{tag}_d{d}_v{v}_w{w}")

    for d, (e1, e2) in product(D, fibers):
        add([(x[d, e, w], 1) for e in (e1, e2) for w in W] + [(y[d, e, w], 1) for e in (e1, e2) for w in W],
            LE, 1, f"disj_d{d}_e{e1}")

    half = Fraction(1, 2)
    for e, w in product(E, W):
        terms = [(x[d, e, w], 1) for d in D] + [(y[d, e, w], 1) for d in D]
        if coding:
            terms += [(z[d, v, e, w], -half) for d in D for v in V]
        terms.append((ga[e, w], -1))
        add(terms, LE, 0, f"single_e{e}_w{w}")

    if spec.force_same_wavelength:
        for d, w in product(D, W):
            add([(al[d, w], 1), (be[d, w], -1)], EQ, 0, f"samewl_d{d}_w{w}")

    if coding:
        for d in D:
            add([(th[d, v], 1) for v in V], LE, 1, f"onenode_d{d}")
            add([(th[d, dem[d].dst], 1)], EQ, 0, f"nodest_d{d}")
        for d, v in product(D, V):
            add([(z[d, v, e, w], 1) for w in W for e in out_links[v]] + [(th[d, v], -1)], GE, 0,
                f"codelink_d{d}_v{v}")
        for d1 in D:
            add([(f[d1, d2], 1) for d2 in D], LE, 1, f"onepartner_d{d1}")
            add([(f[d1, d1], 1)] + [(f[d1, d2], 1) for d2 in D if dem[d2].dst != dem[d1].dst], EQ, 0,
                f"samedest_d{d1}")
        for d1, d2 in product(D, D):
            if d1 < d2:
                add([(f[d1, d2], 1), (f[d2, d1], -1)], EQ, 0, f"fsym_d{d1}_d{d2}")
        for d1 in D:
            add([(f[d1, d2], 1) for d2 in D] + [(th[d1, v], -1) for v in V], EQ, 0, f"coded_d{d1}")
        for d1, e in product(D, E):
            add([(z[d1, v, e, w], 1) for w in W for v in V] + [(f[d1, d2], -1) for d2 in D], LE, 0,
                f"zpair_d{d1}_e{e}")
        for d, v, e in product(D, V, E):
            add([(z[d, v, e, w], 1) for w in W] + [(th[d, v], -1)], LE, 0, f"znode_d{d}_v{v}_e{e}")
        for d1, d2 in product(D, D):
            if d1 == d2:
                continue
            zs = [(z[dd, v, e, w], -half) for dd in (d1, d2) for v in V for e in E for w in W]
            add([(f[d1, d2], 1)] + zs, LE, 0, f"fz_d{d1}_d{d2}")
        # partners share coding node, links and wavelength (rows built directly: hot loop)
        for d1, d2 in product(D, D):
            if d1 == d2:
                continue
            fv = f[d1, d2]
            for v, e, w in product(V, E, W):
                a, c = z[d1, v, e, w], z[d2, v, e, w]
                rows.append(Constraint(((a, 1), (c, -1), (fv, 1)), LE, 1, f"zeq_d{d1}_d{d2}_v{v}_e{e}_w{w}"))
                rows.append(Constraint(((c, 1), (a, -1), (fv, 1)), LE, 1, f"zeq_d{d2}_d{d1}_v{v}_e{e}_w{w}"))
            for v in V:
                a, c = th[d1, v], th[d2, v]
                rows.append(Constraint(((a, 1), (c, -1), (fv, 1)), LE, 1, f"theq_d{d1}_d{d2}_v{v}"))
                rows.append(Constraint(((c, 1), (a, -1), (fv, 1)), LE, 1, f"theq_d{d2}_d{d1}_v{v}"))
        # recovery: partners' working paths disjoint, and working of one
        # disjoint from protection of the other
        for d1, d2 in product(D, D):
            if d1 == d2:
                continue
            for e1, e2 in fibers:
                ws1 = [(x[d1, e, w], 1) for e in (e1, e2) for w in W]
                if d1 < d2:
                    ws2 = [(x[d2, e, w], 1) for e in (e1, e2) for w in W]
                    add(ws1 + ws2 + [(f[d1, d2], 1)], LE, 2, f"recww_d{d1}_d{d2}_e{e1}")
                ps2 = [(y[d2, e, w], 1) for e in (e1, e2) for w in W]
                add(ws1 + ps2 + [(f[d1, d2], 1)], LE, 2, f"recwp_d{d1}_d{d2}_e{e1}")
        for d, e, w in product(D, E, W):
            add([(z[d, v, e, w], 1) for v in V] + [(y[d, e, w], -1)], LE, 0, f"zony_d{d}_e{e}_w{w}")
        for d, v, i in product(D, V, V):
            coef = (1 if i == v else 0) - (1 if i == dem[d].dst else 0)
            terms = [(z[d, v, e, w], 1) for w in W for e in out_links[i]]
            terms += [(z[d, v, e, w], -1) for w in W for e in in_links[i]]
            if coef:
                terms.append((th[d, v], -coef))
            add(terms, EQ, 0, f"zflow_d{d}_v{v}_i{i}")

    for w in W:
        add([(ga[e, w], 1) for e in E] + [(de[w], -len(E))], LE, 0, f"used_w{w}")

    return b.build(), cat


def client_side_rows(catalog: VarCatalog) -> list[Constraint]:
    """``u[d] >= |alpha[d,w] - beta[d,w]|`` for every wavelength.

    With one working and one protection wavelength per demand this makes
    ``u[d]`` at least 1 exactly when the two wavelengths differ.
    """
    rows = []
    for (d, w), a in catalog.alpha.items():
        bw = catalog.beta[d, w]
        u = catalog.u[d]
        rows.append(make_constraint([(u, 1), (a, -1), (bw, 1)], GE, 0, f"uab_d{d}_w{w}"))
        rows.append(make_constraint([(u, 1), (bw, -1), (a, 1)], GE, 0, f"uba_d{d}_w{w}"))
    return rows


def set_weighted_objective(m: MilpModel, catalog: VarCatalog, c1, c2) -> MilpModel:
    """Objective ``c1 * sum(delta) + c2 * sum(u)`` plus the rows that tie ``u`` to the wavelengths."""
    c1, c2 = Fraction(c1), Fraction(c2)
    if c2 != 0 and not catalog.u:
        raise ValueError("secondary weight given but the design has no client-side variables "
                         "(same-wavelength design)")
    terms = [(i, c1) for i in catalog.delta.values()] + [(i, c2) for i in catalog.u.values()]
    if catalog.u:
        m = m.with_constraints(client_side_rows(catalog))
    return m.with_objective(terms)


def design_model(inst: Instance, spec: DesignSpec) -> tuple[MilpModel, VarCatalog]:
    m, cat = build_model(inst, spec)
    return set_weighted_objective(m, cat, spec.c1, spec.c2), cat


O1_STRICT = "O1-strict"
O2_STRICT = "O2-strict"
INDETERMINATE = "indeterminate"


def classify_weight_regime(c1, c2, dcount: int, wcount: int) -> str:
    """Which objective the weighted sum strictly prioritises.

    The wavelength count moves in [0, |W|] and the client-side count in
    [0, |D|], both in unit steps.
    """
    c1, c2 = Fraction(c1), Fraction(c2)
    if c1 <= 0 or c2 <= 0:
        raise ValueError("weights must be positive")
    ratio = c1 / c2
    if ratio > dcount:
        return O1_STRICT
    if ratio < Fraction(1, wcount):
        return O2_STRICT
    return INDETERMINATE


# -- decoding -------------------------------------------------------------------

def _trace(topo: Topology, links: set[int], start: int, end: int, what: str, strict: bool) -> tuple[int, ...]:
    nxt: dict[int, list[int]] = {}
    for e in links:
        l = topo.links[e]
        nxt.setdefault(l.src, []).append(l.dst)
    route = [start]
    used = set()
    while route[-1] != end:
        here = route[-1]
        succ = [n for n in nxt.get(here, []) if (here, n) not in used]
        if len(succ) != 1:
            if not succ:
                raise DecodeError(f"{what}: flow is disconnected at node {here}")
            raise DecodeError(f"{what}: flow branches at node {here}")
        used.add((here, succ[0]))
        if succ[0] in route:
            raise DecodeError(f"{what}: route revisits node {succ[0]}")
        route.append(succ[0])
    if strict and len(used) != len(links):
        raise DecodeError(f"{what}: {len(links) - len(used)} link(s) off the route (detached cycle)")
    return tuple(route)


def decode_solution(inst: Instance, spec: DesignSpec, catalog: VarCatalog, assignment: Mapping[str, int] | list[int],
                    names: tuple[str, ...] | None = None, strict: bool = True) -> Solution:
    """Rebuild lightpaths and coding records from a feasible assignment.

    ``assignment`` is either a name -> value mapping (``names`` then gives
    the model's variable order) or a value list in model order. With
    ``strict=False`` flow on detached cycles, which the program permits but
    does not need, is dropped instead of raising.
    """
    if isinstance(assignment, Mapping):
        if names is None:
            raise ValueError("names are required to read a mapping assignment")
        values = [assignment[n] for n in names]
    else:
        values = list(assignment)
    topo = inst.topology
    W = inst.wavelengths

    def chosen(sel, d, what):
        ws = [w for w in W if values[sel[d, w]]]
        if len(ws) != 1:
            raise DecodeError(f"demand {inst.demands[d]}: {len(ws)} {what} wavelengths selected")
        return ws[0]

    provisions = []
    for d, dem in enumerate(inst.demands):
        paths = []
        for var, sel, what in ((catalog.x, catalog.alpha, "working"), (catalog.y, catalog.beta, "protection")):
            w = chosen(sel, d, what)
            stray = [e for (dd, e, ww), i in var.items() if dd == d and ww != w and values[i]]
            if stray and strict:
                raise DecodeError(f"demand {dem} {what}: flow on unselected wavelength")
            links = {e for (dd, e, ww), i in var.items() if dd == d and ww == w and values[i]}
            route = _trace(topo, links, dem.src, dem.dst, f"demand {dem} {what}", strict)
            paths.append(Lightpath(route, w))
        provisions.append(Provision(dem, paths[0], paths[1]))

    coding = []
    if catalog.theta:
        nd = len(inst.demands)
        seen = set()
        for d1 in range(nd):
            partners = [d2 for d2 in range(nd) if values[catalog.f[d1, d2]]]
            nodes = [v for v in topo.nodes if values[catalog.theta[d1, v]]]
            if not partners:
                if nodes:
                    raise DecodeError(f"demand {inst.demands[d1]} has a coding node but no partner")
                continue
            if len(partners) != 1 or len(nodes) != 1:
                raise DecodeError(f"demand {inst.demands[d1]}: inconsistent coding variables")
            d2, v = partners[0], nodes[0]
            key = frozenset((d1, d2))
            if key in seen:
                continue
            seen.add(key)
            segs = []
            for dd in (d1, d2):
                zl = {(e, w) for (ddd, vv, e, w), i in catalog.z.items() if ddd == dd and vv == v and values[i]}
                segs.append(zl)
            if segs[0] != segs[1]:
                raise DecodeError(f"coded pair {inst.demands[d1]}, {inst.demands[d2]}: coding links differ")
            ws = {w for _, w in segs[0]}
            if len(ws) != 1:
                raise DecodeError(f"coded pair {inst.demands[d1]}, {inst.demands[d2]}: coding wavelength ambiguous")
            (w,) = ws
            route = _trace(topo, {e for e, _ in segs[0]}, v, inst.demands[d1].dst,
                           f"coding segment of {inst.demands[d1]}", strict)
            ids = tuple(sorted((inst.demands[d1].id, inst.demands[d2].id)))
            coding.append(CodingPair(ids, v, route, w))
    coding.sort(key=lambda c: c.demands)
    return Solution(tuple(provisions), tuple(coding))


def encode_solution(inst: Instance, spec: DesignSpec, catalog: VarCatalog, sol: Solution, n_vars: int) -> list[int]:
    """Value list (model order) describing ``sol``; the inverse of decoding."""
    topo = inst.topology
    values = [0] * n_vars
    pos = {dem.id: d for d, dem in enumerate(inst.demands)}
    lit: set[tuple[int, int]] = set()
    for p in sol.provisions:
        d = pos[p.demand.id]
        for var, sel, lp in ((catalog.x, catalog.alpha, p.working), (catalog.y, catalog.beta, p.protection)):
            values[sel[d, lp.wavelength]] = 1
            for a, b2 in lp.hops():
                e = topo.link(a, b2).id
                values[var[d, e, lp.wavelength]] = 1
                lit.add((e, lp.wavelength))
        if catalog.u and p.configuration == CLIENT_SIDE:
            values[catalog.u[d]] = 1
    for c in sol.coding:
        if not catalog.theta:
            raise ValueError("solution has coding records but the design has no coding variables")
        d1, d2 = pos[c.demands[0]], pos[c.demands[1]]
        values[catalog.f[d1, d2]] = values[catalog.f[d2, d1]] = 1
        for d in (d1, d2):
            values[catalog.theta[d, c.node]] = 1
            for a, b2 in c.hops():
                values[catalog.z[d, c.node, topo.link(a, b2).id, c.wavelength]] = 1
    for (e, w) in lit:
        values[catalog.gamma[e, w]] = 1
    for w in {w for _, w in lit}:
        values[catalog.delta[w]] = 1
    return values

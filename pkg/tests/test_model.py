from fractions import Fraction

import pytest

from conftest import micro_instance
from rwnca.ilp import evaluate
from rwnca.model import (CLIENT_SIDE, NETWORK_SIDE, DesignSpec, Lightpath, Provision, Solution,
                         UnsupportedInstance, build_model, classify_weight_regime, decode_solution, design_model,
                         encode_solution, set_weighted_objective)
from rwnca.solver import SolveOptions, solve
from rwnca.topology import Demand, Instance, Topology, all_to_one


@pytest.fixture(scope="module")
def cost_d5(cost):
    inst = Instance.create(cost, all_to_one(cost, 3), 3)
    spec = DesignSpec.for_design(5, 10)
    m, cat = design_model(inst, spec)
    return inst, spec, m, cat


def test_design_table():
    d = {k: DesignSpec.for_design(k, 10) for k in range(1, 6)}
    assert [(s.coding_enabled, s.force_same_wavelength) for s in d.values()] == [
        (False, True), (False, False), (True, True), (True, False), (True, False)]
    assert d[4].c2 == 0 and d[5].c1 == 1 and d[5].c2 == Fraction(1, 11)
    with pytest.raises(ValueError):
        DesignSpec.for_design(6)


def test_cost239_design5_variable_counts(cost_d5):
    _, _, m, cat = cost_d5
    c = cat.counts()
    assert c["z"] == 10 * 11 * 52 * 3 == 17160
    assert c["f"] == 100 and c["u"] == 10 and c["theta"] == 110
    assert c["x"] == c["y"] == 10 * 52 * 3
    assert m.n_vars == sum(c.values())


def test_design5_objective_coefficients(cost_d5):
    _, _, m, cat = cost_d5
    coef = dict(m.objective)
    assert {coef[i] for i in cat.delta.values()} == {1}
    assert {coef[i] for i in cat.u.values()} == {Fraction(1, 11)}
    assert len(coef) == 13


def test_zero_secondary_leaves_only_delta():
    inst = micro_instance(2)
    m, cat = build_model(inst, DesignSpec.for_design(4, 2))
    m = set_weighted_objective(m, cat, 1, 0)
    assert {i for i, c in m.objective if c} == set(cat.delta.values())


def test_secondary_weight_needs_client_side_variables():
    inst = micro_instance(2)
    m, cat = build_model(inst, DesignSpec.for_design(3, 2))
    assert not cat.u
    with pytest.raises(ValueError):
        set_weighted_objective(m, cat, 1, Fraction(1, 3))


def test_no_coding_design_has_no_coding_variables(cost):
    inst = Instance.create(cost, all_to_one(cost, 3), 4)
    _, cat = build_model(inst, DesignSpec.for_design(2, 10))
    c = cat.counts()
    assert c["z"] == c["theta"] == c["f"] == 0
    assert c["u"] == 10


def test_multi_destination_coding_refused():
    t = Topology.from_edges(range(1, 5), [(1, 2), (2, 3), (3, 4), (4, 1)])
    inst = Instance.create(t, [Demand(0, 1, 3), Demand(1, 2, 4)], 1)
    with pytest.raises(UnsupportedInstance):
        build_model(inst, DesignSpec.for_design(4, 2))
    build_model(inst, DesignSpec.for_design(2, 2))


def test_build_does_not_judge_feasibility():
    t = Topology.from_edges([1, 2, 3], [(1, 2), (1, 3), (3, 2)])
    inst = Instance.create(t, [Demand(0, 1, 2)], 1)
    m, _ = design_model(inst, DesignSpec.for_design(1, 1))
    assert m.n_vars > 0


def _rows(m, drop=()):
    return {(tuple(sorted((m.names[i], c) for i, c in r.terms)), r.sense, r.rhs)
            for r in m.constraints if not r.name.startswith(drop)}


def test_design4_equals_design5_without_secondary():
    inst = micro_instance(2)
    m4, _ = design_model(inst, DesignSpec.for_design(4, 2))
    m5, cat5 = build_model(inst, DesignSpec.for_design(5, 2))
    m5 = set_weighted_objective(m5, cat5, 1, 0)
    assert m4.names == m5.names
    assert _rows(m4) == _rows(m5)
    assert dict(m4.objective) == {i: c for i, c in m5.objective if c}


def test_design3_equals_design4_plus_wavelength_pinning():
    inst = micro_instance(2)
    m3, _ = build_model(inst, DesignSpec.for_design(3, 2))
    m4, cat4 = build_model(inst, DesignSpec.for_design(4, 2))
    u_names = {m4.names[i] for i in cat4.u.values()}
    assert set(m4.names) - set(m3.names) == u_names
    pins = {r for r in _rows(m3) if r not in _rows(m4)}
    want = {(tuple(sorted(((f"alpha_d{d}_w{w}", 1), (f"beta_d{d}_w{w}", -1)))), "=", 0)
            for d in range(2) for w in (1, 2)}
    assert pins == want
    assert _rows(m4) <= _rows(m3)


@pytest.mark.parametrize("args,regime", [
    ((1, Fraction(1, 11), 10, 3), "O1-strict"),
    ((1, 20, 10, 10), "O2-strict"),
    ((1, 1, 10, 3), "indeterminate"),
])
def test_weight_regimes(args, regime):
    assert classify_weight_regime(*args) == regime


def test_weight_regime_rejects_nonpositive():
    with pytest.raises(ValueError):
        classify_weight_regime(0, 1, 3, 3)


def test_regime_boundaries():
    assert classify_weight_regime(10, 1, 10, 3) == "indeterminate"
    assert classify_weight_regime(Fraction(1, 3), 1, 10, 3) == "indeterminate"


# -- published solutions ---------------------------------------------------------------

def test_design5_reference_encodes_feasible(cost_d5, ref5):
    inst, spec, m, cat = cost_d5
    values = encode_solution(inst, spec, cat, ref5.solution, m.n_vars)
    ev = evaluate(m, m.to_assignment(values))
    assert ev.feasible, ev.violated[:5]
    assert ev.objective == 3 + Fraction(2, 11)


def test_decode_design5_reference(cost_d5, ref5):
    inst, spec, m, cat = cost_d5
    values = encode_solution(inst, spec, cat, ref5.solution, m.n_vars)
    sol = decode_solution(inst, spec, cat, values)
    p = sol.provision(9)  # 11 -> 3
    assert (p.demand.src, p.working.route, p.working.wavelength) == (11, (11, 4, 3), 3)
    assert (p.protection.route, p.protection.wavelength, p.configuration) == ((11, 6, 3), 3, NETWORK_SIDE)
    pair = sol.pair_of(0)
    assert (pair.demands, pair.node, pair.route, pair.wavelength) == ((0, 9), 6, (6, 3), 3)
    assert sol == ref5.solution
    assert encode_solution(inst, spec, cat, sol, m.n_vars) == values


def test_decode_design4_reference(cost, ref4):
    inst = ref4.instance(cost)
    spec = DesignSpec.for_design(4, 10)
    m, cat = design_model(inst, spec)
    values = encode_solution(inst, spec, cat, ref4.solution, m.n_vars)
    ev = evaluate(m, m.to_assignment(values))
    assert ev.feasible and ev.objective == 3
    sol = decode_solution(inst, spec, cat, values)
    p = sol.provision(0)
    assert (p.working.route, p.working.wavelength) == ((1, 6, 3), 2)
    assert (p.protection.route, p.protection.wavelength, p.configuration) == ((1, 2, 3), 1, CLIENT_SIDE)
    pair = sol.pair_of(0)
    assert (pair.demands, pair.node, pair.route, pair.wavelength) == ((0, 6), 1, (1, 2, 3), 1)
    assert sol == ref4.solution


def test_coded_link_counts_once(cost, ref4):
    """On link 10->3 at λ3 the pair (2->3, 4->3) puts two protection uses and two
    coded uses: 2 - 2/2 = 1 <= gamma."""
    inst = ref4.instance(cost)
    spec = DesignSpec.for_design(4, 10)
    m, cat = design_model(inst, spec)
    values = encode_solution(inst, spec, cat, ref4.solution, m.n_vars)
    e, w = cost.link(10, 3).id, 3
    xs = sum(values[cat.x[d, e, w]] for d in range(10))
    ys = sum(values[cat.y[d, e, w]] for d in range(10))
    zs = sum(values[cat.z[d, v, e, w]] for d in range(10) for v in cost.nodes)
    assert (xs, ys, zs) == (0, 2, 2)
    assert xs + ys - Fraction(zs, 2) == 1 == values[cat.gamma[e, w]]
    row = next(r for r in m.constraints if r.name == f"single_e{e}_w{w}")
    assert row.satisfied(values)


def test_all_uncoded_same_wavelength_decodes_network_side():
    inst = micro_instance(2)
    spec = DesignSpec.for_design(3, 2)
    m, cat = design_model(inst, spec)
    sol = Solution((Provision(inst.demands[0], Lightpath((1, 3), 1), Lightpath((1, 4, 5, 3), 1)),
                    Provision(inst.demands[1], Lightpath((2, 3), 2), Lightpath((2, 4, 5, 3), 2))), ())
    values = encode_solution(inst, spec, cat, sol, m.n_vars)
    assert evaluate(m, m.to_assignment(values)).feasible
    back = decode_solution(inst, spec, cat, values)
    assert back.coding == ()
    assert {p.configuration for p in back.provisions} == {NETWORK_SIDE}


@pytest.mark.parametrize("design", [1, 2, 3, 4, 5])
def test_solver_assignment_round_trips(design):
    inst = micro_instance(2)
    spec = DesignSpec.for_design(design, 2)
    m, cat = design_model(inst, spec)
    r = solve(m, SolveOptions(backend="bnb"))
    values = [r.assignment[n] for n in m.names]
    sol = decode_solution(inst, spec, cat, values)
    assert encode_solution(inst, spec, cat, sol, m.n_vars) == values

import random
from dataclasses import replace

import pytest

from conftest import micro_instance, random_small_instance
from rwnca.ilp import evaluate
from rwnca.model import CodingPair, DesignSpec, Lightpath, Provision, Solution, design_model, encode_solution
from rwnca.oracle import _coding_options, _provision_options
from rwnca.validator import (CODING_CONSISTENCY, CODING_FLOW, CODING_ON_PROTECTION, CODING_PAIRING, DISJOINTNESS,
                             FAMILIES, LOST, RECOVERED_PROTECTION, RECOVERED_XOR, RECOVERY_CONDITION,
                             WAVELENGTH_CLASH, WORKING_SURVIVES, MalformedSolution, metrics, simulate_failures,
                             validate)

D5 = DesignSpec.for_design(5, 10)
D4 = DesignSpec.for_design(4, 10)


def _by_src(sol, src):
    return next(p for p in sol.provisions if p.demand.src == src)


def _replace_provision(sol, src, **kw):
    new = []
    for p in sol.provisions:
        if p.demand.src == src:
            p = replace(p, **kw)
        new.append(p)
    return Solution(tuple(new), sol.coding)


def _replace_pair(sol, pair_ids, **kw):
    return Solution(sol.provisions, tuple(replace(c, **kw) if c.demands == pair_ids else c for c in sol.coding))


def _ids(sol, *srcs):
    return tuple(sorted(_by_src(sol, s).demand.id for s in srcs))


# -- published solutions -------------------------------------------------------------------

def test_references_are_clean(ref4, ref4_instance, ref5, ref5_instance):
    assert validate(ref4_instance, D4, ref4.solution).ok
    assert validate(ref5_instance, D5, ref5.solution).ok


def test_reference_metrics(ref4, ref4_instance, ref5, ref5_instance):
    assert metrics(ref5_instance, ref5.solution).as_tuple() == (3, 2, 12)
    assert metrics(ref4_instance, ref4.solution).as_tuple() == (3, 5, 15)


def test_all_network_side_uses_one_transponder_each(ref5, ref5_instance):
    sol = ref5.solution
    for src in (1, 10):
        p = _by_src(sol, src)
        sol = _replace_provision(sol, src, protection=Lightpath(p.protection.route, p.working.wavelength))
    assert metrics(ref5_instance, sol).transponder_count == 10


@pytest.mark.parametrize("which", [4, 5])
def test_references_survive_every_cut(which, ref4, ref4_instance, ref5, ref5_instance):
    sf, inst = (ref4, ref4_instance) if which == 4 else (ref5, ref5_instance)
    rep = simulate_failures(inst, sf.solution)
    assert len(rep.verdicts) == 26
    assert rep.fully_recoverable and not rep.lost()


def test_xor_recovery_after_cut_9_10(ref4, ref4_instance):
    rep = simulate_failures(ref4_instance, ref4.solution)
    row = next(v for e, v in rep.verdicts.items() if set(e) == {9, 10})
    assert row[_by_src(ref4.solution, 9).demand.id] == RECOVERED_XOR
    assert row[_by_src(ref4.solution, 6).demand.id] == WORKING_SURVIVES


def test_unused_fiber_cut_leaves_everything_working(ref5, ref5_instance):
    used = set()
    for p in ref5.solution.provisions:
        used |= p.working.fibers() | p.protection.fibers()
    spare = [e for e in ref5_instance.topology.edges if frozenset(e) not in used]
    assert spare
    rep = simulate_failures(ref5_instance, ref5.solution)
    for e in spare:
        assert set(rep.verdicts[e].values()) == {WORKING_SURVIVES}


def test_plain_one_plus_one_recovers_via_protection():
    inst = micro_instance(2)
    sol = Solution((Provision(inst.demands[0], Lightpath((1, 3), 1), Lightpath((1, 4, 5, 3), 1)),
                    Provision(inst.demands[1], Lightpath((2, 3), 1), Lightpath((2, 4, 5, 3), 2))), ())
    assert validate(inst, DesignSpec.for_design(2, 2), sol).ok
    rep = simulate_failures(inst, sol)
    assert rep.verdicts[(1, 3)][0] == RECOVERED_PROTECTION
    assert rep.fully_recoverable


def test_structural_errors_come_first(ref5, ref5_instance):
    p = _by_src(ref5.solution, 2)
    broken = _replace_provision(ref5.solution, 2, working=Lightpath((2, 5, 3), p.working.wavelength))
    with pytest.raises(MalformedSolution):
        validate(ref5_instance, D5, broken)
    short = Solution(ref5.solution.provisions[1:], ())
    with pytest.raises(MalformedSolution):
        validate(ref5_instance, D5, short)


# -- mutation suite: one mutation per family -------------------------------------------------

def _mutations(sol):
    p2 = _by_src(sol, 2)
    p10 = _by_src(sol, 10)
    return {
        DISJOINTNESS: _replace_provision(sol, 2, protection=Lightpath((2, 3), p2.protection.wavelength)),
        WAVELENGTH_CLASH: _replace_provision(sol, 2, protection=Lightpath(p2.protection.route, 1)),
        CODING_PAIRING: Solution(sol.provisions, sol.coding + (CodingPair(_ids(sol, 1, 2), 10, (10, 3), 3),)),
        CODING_CONSISTENCY: _replace_pair(sol, _ids(sol, 8, 10), wavelength=2),
        RECOVERY_CONDITION: _replace_provision(sol, 10, working=Lightpath((10, 9, 8, 3), p10.working.wavelength)),
        CODING_ON_PROTECTION: _replace_pair(sol, _ids(sol, 4, 6), route=(10, 2, 3)),
        CODING_FLOW: _replace_pair(sol, _ids(sol, 5, 7), route=(6, 11)),
    }


def test_mutations_cover_every_family(ref5):
    assert set(_mutations(ref5.solution)) == set(FAMILIES)


@pytest.mark.parametrize("family", FAMILIES)
def test_mutation_rejected_with_family(family, ref5, ref5_instance):
    rep = validate(ref5_instance, D5, _mutations(ref5.solution)[family])
    assert not rep.ok
    assert family in rep.families()


def test_clash_mutation_names_link_and_wavelength(ref5, ref5_instance):
    rep = validate(ref5_instance, D5, _mutations(ref5.solution)[WAVELENGTH_CLASH])
    clashes = [v for v in rep.violations if v.family == WAVELENGTH_CLASH]
    assert any(v.links == ((10, 3),) and v.wavelengths == (1,) for v in clashes)


def test_same_wavelength_design_flags_split_wavelengths(ref5, ref5_instance):
    rep = validate(ref5_instance, DesignSpec.for_design(3, 10), ref5.solution)
    assert rep.families() == {WAVELENGTH_CLASH}


def test_coding_in_non_coding_design(ref5, ref5_instance):
    assert CODING_PAIRING in validate(ref5_instance, DesignSpec.for_design(2, 10), ref5.solution).families()


@pytest.fixture(scope="module")
def cost_d5_model(ref5_instance):
    return design_model(ref5_instance, D5)


@pytest.mark.parametrize("family", [f for f in FAMILIES if f != CODING_FLOW])
def test_program_rejects_mutations_too(family, ref5, ref5_instance, cost_d5_model):
    m, cat = cost_d5_model
    values = encode_solution(ref5_instance, D5, cat, _mutations(ref5.solution)[family], m.n_vars)
    assert not evaluate(m, m.to_assignment(values)).feasible


# -- randomized agreement and safety ----------------------------------------------------------

def _candidates(inst, spec, rng, k):
    options = [_provision_options(inst, spec, d) for d in inst.demands]
    options = [o for o in options if o]
    if len(options) < len(inst.demands):
        return []
    out = []
    for _ in range(k):
        provisions = tuple(rng.choice(o) for o in options)
        out.append(Solution(provisions, rng.choice(_coding_options(provisions, spec))))
    return out


@pytest.mark.parametrize("seed", range(30))
def test_validator_agrees_with_program(seed):
    rng = random.Random(seed)
    inst = random_small_instance(rng)
    spec = DesignSpec.for_design(rng.randint(1, 5), 2)
    m, cat = design_model(inst, spec)
    for sol in _candidates(inst, spec, rng, 25):
        values = encode_solution(inst, spec, cat, sol, m.n_vars)
        assert validate(inst, spec, sol).ok == evaluate(m, m.to_assignment(values)).feasible


@pytest.mark.parametrize("seed", range(30))
def test_clean_solutions_lose_nothing(seed):
    rng = random.Random(500 + seed)
    inst = random_small_instance(rng)
    spec = DesignSpec.for_design(rng.choice([2, 4]), 2)
    for sol in _candidates(inst, spec, rng, 40):
        if validate(inst, spec, sol).ok:
            rep = simulate_failures(inst, sol)
            assert LOST not in rep.summary(), rep.lost()
            m = metrics(inst, sol)
            assert m.transponder_count - len(inst.demands) == m.client_side_count


@pytest.mark.parametrize("seed", range(12))
def test_every_clean_coded_solution_survives(seed):
    rng = random.Random(900 + seed)
    inst = random_small_instance(rng, max_w=1)
    if seed == 0:
        inst = micro_instance(1)
    spec = DesignSpec.for_design(4, 2)
    options = [_provision_options(inst, spec, d) for d in inst.demands]
    checked = 0
    for a in options[0]:
        for b in options[1]:
            for coding in _coding_options((a, b), spec)[1:]:
                sol = Solution((a, b), coding)
                if validate(inst, spec, sol).ok:
                    checked += 1
                    assert simulate_failures(inst, sol).fully_recoverable
    if seed == 0:
        assert checked >= 1

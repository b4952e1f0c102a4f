from itertools import permutations

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from fkfermion.checks import well_separated_sets
from fkfermion.configuration import FkConfig, extract_loops
from fkfermion.lattice import build_domain
from fkfermion.measures import ModelParams, fk_weight, route_defect_line
from fkfermion.observables import (InsertionSet, check_equivalence, config_contribution,
                                   exploration_tree_winding, fermion_exact, fermion_mc,
                                   ising_fermion_exact, matching_sign, permutation_sign,
                                   sequential_matching, winding_interior_check)
from fkfermion.measures import DefectLine

D2 = build_domain(2, 2)
D3 = build_domain(3, 3)


def brute_force(domain, params, ins):
    num = den = 0.0
    for bits in range(1 << domain.n_edges):
        c = FkConfig(domain, bits)
        w = fk_weight(c, params)
        den += w
        num += w * config_contribution(c, ins)
    return num / den


@pytest.mark.parametrize("p", [0.2, 0.5, None])
def test_exact_matches_brute_force(p):
    params = ModelParams.critical() if p is None else ModelParams.from_p(p)
    ins = (D2.corner_by_spec(0, 0, "NE"), D2.corner_by_spec(1, 1, "SW"))
    assert fermion_exact(D2, params, ins).real == pytest.approx(brute_force(D2, params, ins),
                                                                abs=1e-14)


def test_golden_values(crit):
    ins = (D2.corner_by_spec(0, 0, "NE"), D2.corner_by_spec(1, 1, "SW"))
    assert fermion_exact(D2, crit, ins).real == pytest.approx(-1 / 3, abs=1e-14)
    assert fermion_exact(D2, ModelParams.from_p(0.5), ins).real == pytest.approx(-9 / 41,
                                                                                 abs=1e-14)
    quad = ("0,0,NE;1,0,NE;2,0,NE;0,1,NE")
    v = fermion_exact(D3, crit, InsertionSet.parse(D3, quad)).real
    assert v == pytest.approx(-0.12058517740604387, abs=1e-13)


def test_permutation_and_matching_signs():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([2, 0, 1]) == 1
    assert matching_sign([(0, 1), (2, 3)]) == 1
    assert matching_sign([(0, 2), (1, 3)]) == -1
    assert matching_sign([(0, 3), (1, 2)]) == 1


def test_insertion_parsing_and_validation():
    ins = InsertionSet.parse(D3, "0,0,NE; 2,2,SW")
    assert len(ins) == 2 and ins[0] == 0
    with pytest.raises(ValueError):
        InsertionSet.parse(D3, "0,0,NE;0,0,NE")


def test_odd_insertions_vanish(crit):
    assert fermion_exact(D2, crit, (0, 5, 10)).real == 0.0


def test_sequential_matching_none_when_not_admissible():
    loops = extract_loops(FkConfig.all_closed(D2))
    assert sequential_matching(loops, (0, 4)) is None
    assert config_contribution(loops, (0, 4)) == 0
    m = sequential_matching(loops, (0, 2))
    assert m.pairs == ((0, 1),)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, (1 << D3.n_edges) - 1),
       st.lists(st.integers(0, D3.n_corners - 1), min_size=4, max_size=4, unique=True),
       st.permutations(range(4)))
def test_contribution_is_antisymmetric(bits, ins, perm):
    loops = extract_loops(FkConfig(D3, bits))
    base = config_contribution(loops, ins)
    assert config_contribution(loops, [ins[i] for i in perm]) == permutation_sign(perm) * base


@settings(max_examples=30, deadline=None)
@given(st.integers(0, (1 << D3.n_edges) - 1),
       st.lists(st.integers(0, D3.n_corners - 1), min_size=2, max_size=6, unique=True)
       .filter(lambda xs: len(xs) % 2 == 0),
       st.integers(0, D3.n_corners - 1))
def test_exploration_root_invariance(bits, ins, root):
    from fkfermion.observables import boundary_corners
    loops = extract_loops(FkConfig(D3, bits))
    roots = boundary_corners(D3)
    r = roots[root % len(roots)]
    assert exploration_tree_winding(loops, r, ins) == config_contribution(loops, ins)


def test_fk_ising_equivalence_two_point(crit):
    for z1, z2 in list(permutations(range(D2.n_corners), 2))[::5]:
        rep = check_equivalence(D2, ModelParams.from_beta(0.3), (z1, z2))
        assert rep.difference < 1e-12 and rep.bookkeeping_ok


def test_ising_observable_is_independent_of_the_route(crit):
    z1, z2 = D3.corner_by_spec(0, 0, "NE"), D3.corner_by_spec(2, 2, "SW")
    a = route_defect_line(D3, z1, z2)
    b = route_defect_line(D3, z1, z2, vertical_first=True)
    va = ising_fermion_exact(D3, crit, (z1, z2), [a]).real
    vb = ising_fermion_exact(D3, crit, (z1, z2), [b]).real
    assert va == pytest.approx(vb, abs=1e-13)
    assert va == pytest.approx(fermion_exact(D3, crit, (z1, z2)).real, abs=1e-12)


def test_winding_interior_enclosure_rule():
    z1, z2 = D3.corner_by_spec(0, 1, "NE"), D3.corner_by_spec(2, 1, "NE")
    straight = route_defect_line(D3, z1, z2)
    detour = DefectLine(D3, (z1, z2), tuple(D3.dual_id(X, Y) for X, Y in
                                            [(0, 1), (0, 2), (1, 2), (2, 2), (2, 1)]))
    rep = winding_interior_check(straight, detour)
    assert rep.enclosure_rule_holds


def test_winding_interior_crossing_rule_counterexample():
    # Two lines whose closed curve has no self-crossing yet whose prefactors
    # differ in sign: the crossing-count form is not the right invariant.
    failures = 0
    for z1, z2 in permutations(range(D3.n_corners), 2):
        a = route_defect_line(D3, z1, z2)
        b = route_defect_line(D3, z1, z2, vertical_first=True)
        if not set(map(frozenset, a.dual_edges)) & set(map(frozenset, b.dual_edges)) \
                and a.dual_edges:
            rep = winding_interior_check(a, b)
            assert rep.enclosure_rule_holds
            failures += not rep.crossing_rule_holds
    assert failures > 0


def test_monte_carlo_agrees(crit):
    ins = well_separated_sets(D2, 2, 1)[0]
    exact = fermion_exact(D2, crit, ins).real
    est = fermion_mc(D2, crit, ins, 20_000, seed=1)
    assert abs(est.real - exact) < 5 * est.stderr
    assert est.mode == "monte-carlo" and est.n_samples == 20_000
    with pytest.raises(ValueError):
        fermion_mc(D2, crit, ins, 100, seed=1)


def test_sharded_fermion_is_bit_identical(crit):
    ins = well_separated_sets(D3, 2, 1)[0]
    a = fermion_exact(D3, crit, ins).real
    b = fermion_exact(D3, crit, ins, shards=8, threads=4).real
    assert a == b
    assert np.isfinite(a)

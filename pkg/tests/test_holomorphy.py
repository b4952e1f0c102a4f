import numpy as np
from hypothesis import given, settings, strategies as st
import pytest

from fkfermion.checks import well_separated_sets
from fkfermion.holomorphy import (HolomorphyError, SkewMatrix, build_midedge_field, cauchy_sums,
                                  corners_with_two_sites, f_plus_minus, pfaffian,
                                  pfaffian_by_matchings, pfaffian_identity_check, project,
                                  residue_check, rotation, sholo_residuals, two_point_diagonal)
from fkfermion.lattice import LatticeError
from fkfermion.measures import ModelParams


def skew(rng, n):
    a = rng.normal(size=(n, n))
    return a - a.T


def test_pfaffian_small_cases():
    assert pfaffian(np.zeros((0, 0))) == 1.0
    assert pfaffian([[0, 2.5], [-2.5, 0]]) == 2.5
    a = skew(np.random.default_rng(0), 4)
    expected = a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]
    assert pfaffian(a) == pytest.approx(expected, abs=1e-14)
    with pytest.raises(ValueError):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        SkewMatrix(np.eye(2))


@given(st.integers(0, 10_000), st.sampled_from([2, 4, 6, 8]))
def test_pfaffian_squared_is_determinant(seed, n):
    a = skew(np.random.default_rng(seed), n)
    pf = pfaffian(a)
    assert pf == pytest.approx(pfaffian_by_matchings(a), rel=1e-9, abs=1e-12)
    assert pf ** 2 == pytest.approx(np.linalg.det(a), rel=1e-8, abs=1e-10)


def test_projection():
    assert project(1 + 1j, 1) == 1
    assert project(1 + 1j, 1j) == 1
    assert abs(rotation(0)) == pytest.approx(1.0)


def test_field_needs_criticality(d3):
    with pytest.raises(HolomorphyError):
        build_midedge_field(d3, ModelParams.from_p(0.4), (0,))
    field = build_midedge_field(d3, ModelParams.from_p(0.4), (0,), strict=False)
    assert field.pairing_mismatch > 1e-6


def test_s_holomorphic_at_criticality(d3, crit):
    z = d3.corner_by_spec(1, 1, "NE")
    field = build_midedge_field(d3, crit, (z,))
    assert max(sholo_residuals(field).values()) < 1e-12
    assert max(cauchy_sums(field).values()) < 1e-12


@pytest.mark.parametrize("p", [0.3, 0.6])
def test_off_critical_is_not_s_holomorphic(d3, p):
    field = build_midedge_field(d3, ModelParams.from_p(p), (d3.corner_by_spec(1, 1, "NE"),),
                                strict=False)
    assert max(sholo_residuals(field).values()) > 1e-6


def test_diagonal_two_point(d3, crit):
    cs = corners_with_two_sites(d3)
    assert len(cs) == 16
    for c in cs:
        fp, fm = two_point_diagonal(d3, crit, c)
        assert abs(fp - fm) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(LatticeError):
        f_plus_minus(d3, crit, (d3.corner_by_spec(0, 0, "SW"),), 0)


def test_residue_factorization(d3, crit):
    triple = (d3.corner_by_spec(0, 0, "NE"), d3.corner_by_spec(2, 1, "SW"),
              d3.corner_by_spec(1, 2, "NE"))
    rows = residue_check(d3, crit, triple)
    assert rows and max(r.error for r in rows) < 1e-10


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 40))
def test_pfaffian_identity_at_criticality(d3, crit, k):
    sets = well_separated_sets(d3, 4, 41)
    rep = pfaffian_identity_check(d3, crit, sets[k % len(sets)])
    assert rep.difference < 1e-10
    assert isinstance(rep.lhs, float) and rep.critical


def test_pfaffian_identity_preconditions(d3, crit):
    quad = well_separated_sets(d3, 4, 1)[0]
    with pytest.raises(HolomorphyError):
        pfaffian_identity_check(d3, ModelParams.from_p(0.3), quad)
    with pytest.raises(HolomorphyError):
        pfaffian_identity_check(d3, crit, quad[:3])
    with pytest.raises(HolomorphyError):
        pfaffian_identity_check(d3, crit, (0, 1, 2, 3))


def test_pfaffian_off_critical_is_reported(d3):
    # Exploratory: the identity is only claimed at t = 1; report the gap off it.
    quad = well_separated_sets(d3, 4, 1)[0]
    rep = pfaffian_identity_check(d3, ModelParams.from_p(0.3), quad, strict=False)
    print(f"\nPfaffian gap at p=0.3: {rep.difference:.3e}")
    assert not rep.critical

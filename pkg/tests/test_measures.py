import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from fkfermion.configuration import FkConfig, clusters, extract_loops
from fkfermion.measures import (BETA_CRITICAL, P_CRITICAL, DefectLine, ModelParams,
                                ParameterError, RoutingError, SpinConfig,
                                compatible_with_defect, disorder_energy,
                                es_sample_fk_given_spins, es_sample_spins_given_fk,
                                es_sample_spins_given_fk_with_defect, fk_weight, lines_disjoint,
                                loop_weight, make_rng, params_from, route_defect_line,
                                route_defect_lines)


def test_critical_point_is_consistent():
    c = ModelParams.critical()
    assert c.p == pytest.approx(P_CRITICAL, abs=1e-15)
    assert c.beta == pytest.approx(BETA_CRITICAL, abs=1e-15)
    assert c.is_critical
    assert ModelParams.from_p(P_CRITICAL).is_critical
    assert ModelParams.from_beta(BETA_CRITICAL).is_critical


@given(st.floats(0.01, 0.99))
def test_parameter_round_trips(p):
    a = ModelParams.from_p(p)
    assert ModelParams.from_beta(a.beta).p == pytest.approx(p, rel=1e-12)
    assert ModelParams.from_t(a.t).p == pytest.approx(p, rel=1e-12)


@pytest.mark.parametrize("kwargs", [{}, {"p": 0.3, "beta": 0.2}, {"p": 1.0}, {"beta": -1},
                                    {"t": 0}, {"p": 0.3, "critical": True}])
def test_bad_parameters(kwargs):
    with pytest.raises(ParameterError):
        params_from(**kwargs)


@given(st.integers(0, (1 << 12) - 1))
def test_fk_and_loop_weights_differ_by_a_constant(bits):
    from fkfermion.lattice import build_domain
    d = build_domain(3, 3)
    params = ModelParams.from_p(0.37)
    ref = fk_weight(FkConfig(d, 0), params) / loop_weight(FkConfig(d, 0), params)
    config = FkConfig(d, bits)
    assert fk_weight(config, params) / loop_weight(config, params) == pytest.approx(ref,
                                                                                      rel=1e-12)


def test_spin_energy(d2):
    s = SpinConfig.all_plus(d2)
    assert s.energy() == d2.n_edges and not s.domain_walls()
    s = SpinConfig(d2, (1, -1, 1, 1))
    assert s.energy() == d2.n_edges - 4
    with pytest.raises(ValueError):
        SpinConfig(d2, (1, 0, 1, 1))


def test_defect_line_validation(d3):
    z1 = d3.corner_by_spec(0, 1, "NE")
    z2 = d3.corner_by_spec(2, 1, "NE")
    line = route_defect_line(d3, z1, z2)
    assert line.dual_path[0] == d3.corner_dual(z1) and line.dual_path[-1] == d3.corner_dual(z2)
    assert line.reversed().reversed() == line
    assert len(line.crossed_primal_edges) == 2
    with pytest.raises(RoutingError):
        DefectLine(d3, (z1, z2), (d3.corner_dual(z1), d3.corner_dual(z2)))
    with pytest.raises(RoutingError):
        DefectLine(d3, (z1, z1), (d3.corner_dual(z1),))
    assert disorder_energy(SpinConfig.all_plus(d3), line) == 2


def test_disjoint_routing(d3):
    ins = [d3.corner_by_spec(0, 0, "NE"), d3.corner_by_spec(1, 1, "NE"),
           d3.corner_by_spec(0, 1, "NE"), d3.corner_by_spec(1, 2, "NE")]
    lines = route_defect_lines(d3, ins)
    assert lines_disjoint(lines)
    with pytest.raises(RoutingError):
        route_defect_lines(d3, ins[:3])


def test_rng_streams_are_reproducible_and_distinct():
    a = make_rng(5, 0).random(4)
    assert np.array_equal(a, make_rng(5, 0).random(4))
    assert not np.array_equal(a, make_rng(5, 1).random(4))


def test_es_steps_respect_constraints(d3):
    rng = make_rng(1)
    params = ModelParams.from_p(0.6)
    config = FkConfig.all_open(d3)
    for _ in range(20):
        spins = es_sample_spins_given_fk(config, rng)
        for e, (a, b) in enumerate(d3.primal_edges):
            if config.is_open(e):
                assert spins[a] == spins[b]
        config = es_sample_fk_given_spins(spins, params, rng)
        for e, (a, b) in enumerate(d3.primal_edges):
            if config.is_open(e):
                assert spins[a] == spins[b]


def test_defect_sampling_flips_across_the_line(d3):
    rng = make_rng(2)
    z1, z2 = d3.corner_by_spec(0, 0, "NE"), d3.corner_by_spec(2, 0, "NE")
    line = route_defect_line(d3, z1, z2)
    crossed = set(line.crossed_primal_edges)
    # all open: the line crosses an open cycle an odd number of times
    assert not compatible_with_defect(FkConfig.all_open(d3), line)
    assert es_sample_spins_given_fk_with_defect(FkConfig.all_open(d3), line, rng) is None
    config = FkConfig.from_edges(d3, crossed)
    spins = es_sample_spins_given_fk_with_defect(config, line, rng)
    for e in crossed:
        a, b = d3.primal_edges[e]
        assert spins[a] == -spins[b]


def test_loop_count_matches_clusters(d2):
    for bits in range(1 << d2.n_edges):
        c = FkConfig(d2, bits)
        lab = clusters(c)
        assert len(extract_loops(c)) == lab.primal_count + lab.dual_count - 1
        assert math.isfinite(fk_weight(c, ModelParams.from_p(0.5)))

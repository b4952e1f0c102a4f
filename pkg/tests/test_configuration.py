from hypothesis import given, strategies as st
import pytest

from fkfermion.configuration import (FkConfig, UnionFind, clusters, corners_connected,
                                     extract_loops, mirror_config, step_turn)


def test_union_find():
    uf = UnionFind(5)
    assert uf.union(0, 1) and uf.union(3, 4)
    assert not uf.union(1, 0)
    assert uf.count == 3
    labels = uf.labels()
    assert labels[0] == labels[1] != labels[2]


def test_hex_round_trip(d3):
    c = FkConfig.from_edges(d3, [0, 5, 11])
    assert FkConfig.from_hex(d3, c.hex()) == c
    assert c.n_open == 3
    assert c.flip(5).n_open == 2


def test_all_closed_gives_one_loop_per_vertex(d3):
    loops = extract_loops(FkConfig.all_closed(d3))
    assert len(loops) == d3.n_vertices
    assert all(len(L) == 4 for L in loops.loops)


def test_all_open_loop_count(d3):
    loops = extract_loops(FkConfig.all_open(d3))
    assert len(loops) == 1 + (d3.width - 1) * (d3.height - 1)


def test_clusters_extremes(d3):
    lab = clusters(FkConfig.all_closed(d3))
    assert lab.primal_count == d3.n_vertices and lab.dual_count == 1
    lab = clusters(FkConfig.all_open(d3))
    assert lab.primal_count == 1 and lab.dual_count == 1 + 4


@given(st.integers(0, (1 << 12) - 1))
def test_loops_partition_corners(bits):
    from fkfermion.lattice import build_domain
    d = build_domain(3, 3)
    config = FkConfig(d, bits)
    loops = extract_loops(config)
    seen = sorted(c for L in loops.loops for c in L)
    assert seen == list(range(d.n_corners))
    for k, L in enumerate(loops.loops):
        assert L[0] == min(L)
        assert abs(loops.total_turn(k)) == 4
    lab = clusters(config)
    assert len(loops) == lab.primal_count + lab.dual_count - 1
    assert len(extract_loops(mirror_config(config))) == len(loops)


def test_step_turns(d3):
    assert step_turn(0, 1) == -1
    assert step_turn(1, 0) == 1
    with pytest.raises(ValueError):
        step_turn(0, 2)
    loops = extract_loops(FkConfig.all_open(d3))
    for L in loops.loops:
        for a, b in zip(L, L[1:] + L[:1]):
            assert step_turn(a, b) in (-1, 1)


def test_corners_connected(d2):
    loops = extract_loops(FkConfig.all_closed(d2))
    a = d2.corner_by_spec(0, 0, "NE")
    assert corners_connected(loops, a, d2.corner_by_spec(0, 0, "SW"))
    assert not corners_connected(loops, a, d2.corner_by_spec(1, 0, "SW"))

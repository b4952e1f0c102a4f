import json

from hypothesis import given, strategies as st
import pytest

from fkfermion.lattice import HORIZONTAL, LatticeError, build_domain

sizes = st.tuples(st.integers(2, 6), st.integers(2, 6))


@given(sizes)
def test_counts(size):
    W, H = size
    d = build_domain(W, H)
    assert d.n_vertices == W * H
    assert d.n_edges == (W - 1) * H + W * (H - 1)
    assert d.n_dual == (W + 1) * (H + 1)
    assert d.n_corners == 4 * W * H
    assert len(d.outer_ring) == 2 * (W + 1) + 2 * (H - 1)


@given(sizes)
def test_vertex_and_dual_ids_round_trip(size):
    d = build_domain(*size)
    for v in range(d.n_vertices):
        assert d.vertex_id(*d.vertex_xy(v)) == v
    for w in range(d.n_dual):
        assert d.dual_id(*d.dual_xy(w)) == w


def test_edge_order_horizontal_first(d3):
    assert d3.horizontal_edge(0, 0) == 0
    assert d3.edge_axis(0) == HORIZONTAL
    n_h = 2 * 3
    assert d3.vertical_edge(0, 0) == n_h
    assert d3.primal_edges[n_h] == (0, 3)


def test_every_edge_crossed_by_its_dual_edge(d3):
    for e, (a, b) in enumerate(d3.dual_edge_ends):
        assert d3.primal_edge_crossing(a, b) == e


def test_corner_geometry(d3):
    for c in range(d3.n_corners):
        px, py = d3.corner_position(c)
        vx, vy = d3.vertex_xy(d3.corner_vertex(c))
        wx, wy = d3.dual_position(d3.corner_dual(c))
        # the corner is the midpoint of its primal and dual vertex
        assert (2 * px, 2 * py) == (4 * vx + wx, 4 * vy + wy)
        assert d3.corner_orientation(c) % 2 == 1


def test_corner_literals(d3):
    c = d3.parse_corner("1,2,sw")
    assert d3.format_corner(c) == "1,2,SW"
    assert c == 4 * d3.vertex_id(1, 2) + 2
    for bad in ("1,2", "a,b,NE", "1,2,XX", "5,5,NE"):
        with pytest.raises(LatticeError):
            d3.parse_corner(bad)


def test_mid_edges_have_four_corners(d3):
    for m in d3.mid_edges:
        assert len(set(m.corners)) == 4
        for c in m.corners:
            assert m.id in d3.corner_mid_edges(c)


def test_boundary_corner_has_a_missing_site(d3):
    h, v = d3.corner_sites(d3.corner_by_spec(0, 0, "SW"))
    assert h is None and v is None
    h, v = d3.corner_sites(d3.corner_by_spec(1, 1, "NE"))
    assert h is not None and v is not None


@pytest.mark.parametrize("size", [(1, 3), (3, 0), (2.5, 3), (True, 3)])
def test_invalid_sizes(size):
    with pytest.raises(LatticeError):
        build_domain(*size)


def test_dump_is_json(d2):
    data = json.loads(d2.dumps())
    assert data["counts"]["corners"] == 16
    assert len(data["corners"]) == 16

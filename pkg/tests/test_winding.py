import cmath

from hypothesis import given, strategies as st
import pytest

from fkfermion.configuration import FkConfig, extract_loops
from fkfermion.lattice import build_domain
from fkfermion.winding import (PhaseEighth, WindingError, loop_phase_table, orientation_eighth,
                               path_winding, phase_complex, phase_sign, unit, winding_phase)

D3 = build_domain(3, 3)


def test_unit_exact_on_axes():
    assert unit(0, 8) == 1 and unit(2, 8) == 1j and unit(4, 8) == -1 and unit(6, 8) == -1j
    assert abs(unit(1, 8) - cmath.exp(1j * cmath.pi / 4)) < 1e-15


def test_phase_eighth_arithmetic():
    a, b = PhaseEighth(3), PhaseEighth(7)
    assert (a * b).k == 2
    assert (a / b).k == 4 and (a / b).sign == -1
    assert a.conjugate().k == 5
    with pytest.raises(WindingError):
        PhaseEighth(2).sign


def test_phase_sign_rejects_inconsistent_winding():
    with pytest.raises(WindingError):
        phase_sign(1, 3, 0)
    assert phase_sign(1, 3, -1) == 1
    assert phase_sign(1, 3, 3) == -1


def test_single_loop_around_a_vertex():
    loops = extract_loops(FkConfig.all_closed(D3))
    a, b = 0, 1  # NE then NW of vertex 0, one left turn apart
    assert path_winding(loops, a, b) == -1
    assert winding_phase(loops, a, b) == 1
    assert winding_phase(loops, b, a) == -1
    with pytest.raises(WindingError):
        path_winding(loops, 0, 4)
    with pytest.raises(WindingError):
        path_winding(loops, 0, 0)


@given(st.integers(0, (1 << D3.n_edges) - 1), st.data())
def test_phase_matches_complex_formula(bits, data):
    loops = extract_loops(FkConfig(D3, bits))
    k = data.draw(st.integers(0, len(loops) - 1))
    L = loops.loops[k]
    i, j = data.draw(st.lists(st.integers(0, len(L) - 1), min_size=2, max_size=2, unique=True))
    z1, z2 = L[i], L[j]
    q = path_winding(loops, z1, z2)
    phi = winding_phase(loops, z1, z2)
    assert (orientation_eighth(z1) - orientation_eighth(z2) - 2 * q) % 8 == 0
    assert abs(phase_complex(z1, z2, q) - phi) < 1e-12
    assert phi * winding_phase(loops, z2, z1) == -1
    table = loop_phase_table(loops, k)
    lo, hi = sorted((i, j))
    assert winding_phase(loops, L[lo], L[hi]) == table[lo] * table[hi]

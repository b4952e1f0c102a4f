"""Mid-edge extension, s-holomorphicity, discrete residues and the Pfaffian structure.

With ``2n - 1`` corners fixed, the observable becomes a function ``f(c)`` of
one more corner.  It is rotated into ``h(c) = nu(c) f(c)`` where
``nu(c) = (i o(c)) ** (-1/2)`` is the fixed sixteenth root of unity
``exp(-i (a + 2) pi/8)`` for ``o(c) = exp(i a pi/4)``, and summed over
opposite corners of each mid-edge: ``H(z) = h(z_NW) + h(z_SE)``.  At the
critical point ``H(z)`` equals ``h(z_NE) + h(z_SW)`` and the projections
``Re(H(z) conj(nu(c)))`` agree on the two mid-edges of every corner ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .lattice import LatticeDomain, LatticeError
from .measures import ModelParams
from .observables import as_insertions, corner_extension_values, fermion_exact, matching_sign
from .winding import orientation_eighth, unit


class HolomorphyError(ValueError):
    """Preconditions of the holomorphic identities are not met."""


def rotation(c: int) -> complex:
    """``nu(c) = (i o(c)) ** (-1/2)`` on the branch ``exp(-i (a + 2) pi/8)``."""
    return unit(-(orientation_eighth(c) + 2), 16)


def project(x: complex, nu: complex) -> float:
    """``P_nu[x] = Re(x conj(nu)) / |nu|``."""
    return (x * nu.conjugate()).real / abs(nu)


def midedge_position(domain: LatticeDomain, m: int) -> complex:
    a, b = domain.primal_edges[m]
    (xa, ya), (xb, yb) = domain.vertex_xy(a), domain.vertex_xy(b)
    return complex((xa + xb) / 2, (ya + yb) / 2)


def _check_insertions(domain: LatticeDomain, insertions, odd: bool = True):
    ins = as_insertions(domain, insertions)
    if odd and len(ins) % 2 == 0:
        raise HolomorphyError("the mid-edge field needs an odd number of fixed corners")
    if not ins.well_separated(domain):
        raise HolomorphyError("fixed corners must not share a primal or a dual vertex")
    return ins.corners


# ----------------------------------------------------------------------
# mid-edge field

@dataclass(frozen=True)
class MidEdgeField:
    """``H`` on the mid-edges for fixed corners ``z1 .. z_{2n-1}``.

    ``values`` uses the NW/SE pairing and ``alternate`` the NE/SW pairing;
    ``eligible`` holds the mid-edges none of whose corners is a fixed corner.
    """

    domain: LatticeDomain
    params: ModelParams
    insertions: tuple[int, ...]
    corner_values: np.ndarray
    values: dict
    alternate: dict
    eligible: frozenset

    @property
    def pairing_mismatch(self) -> float:
        if not self.eligible:
            return 0.0
        return max(abs(self.values[m] - self.alternate[m]) for m in self.eligible)

    def h(self, c: int) -> complex:
        return rotation(c) * self.corner_values[c]

    def eligible_corners(self) -> list[int]:
        """Corners with two mid-edges, both eligible, that are not fixed corners."""
        out = []
        for c in range(self.domain.n_corners):
            sites = self.domain.corner_sites(c)
            if c in self.insertions or None in sites:
                continue
            if all(m in self.eligible for m in sites):
                out.append(c)
        return out


def field_from_values(domain: LatticeDomain, params: ModelParams, insertions,
                      corner_values: np.ndarray) -> MidEdgeField:
    ins = tuple(insertions)
    nu = [rotation(c) for c in range(domain.n_corners)]
    h = [nu[c] * corner_values[c] for c in range(domain.n_corners)]
    values, alternate, eligible = {}, {}, set()
    for m in domain.mid_edges:
        values[m.id] = h[m.corner_NW] + h[m.corner_SE]
        alternate[m.id] = h[m.corner_NE] + h[m.corner_SW]
        if not set(m.corners) & set(ins):
            eligible.add(m.id)
    return MidEdgeField(domain, params, ins, np.asarray(corner_values), values, alternate,
                        frozenset(eligible))


def build_midedge_field(domain: LatticeDomain, params: ModelParams, insertions,
                        strict: bool = True, tol: float = 1e-12) -> MidEdgeField:
    """Build ``H`` by one enumeration.

    With ``strict`` (the default) the parameters must be critical and the
    two pairings must agree to ``tol`` on every eligible mid-edge.  Pass
    ``strict=False`` to build the same field off the critical point, for
    instance as a negative control.
    """
    ins = _check_insertions(domain, insertions)
    if strict and not params.is_critical:
        raise HolomorphyError(f"the mid-edge field is only well defined at t = 1 (t = {params.t})")
    values = corner_extension_values(domain, params, ins)
    field = field_from_values(domain, params, ins, values)
    if strict and field.pairing_mismatch > tol:
        raise HolomorphyError(f"pairings disagree by {field.pairing_mismatch:.3e}")
    return field


def sholo_residual(field: MidEdgeField, corner: int) -> float:
    """``|P_nu[H(z1)] - P_nu[H(z2)]|`` over the two mid-edges of ``corner``."""
    sites = field.domain.corner_sites(corner)
    if None in sites:
        raise HolomorphyError(f"corner {corner} has a single mid-edge")
    if corner in field.insertions or not all(m in field.eligible for m in sites):
        raise HolomorphyError(f"corner {corner} is a fixed corner or next to one")
    nu = rotation(corner)
    z1, z2 = sites
    return abs(project(field.values[z1], nu) - project(field.values[z2], nu))


def sholo_residuals(field: MidEdgeField) -> dict[int, float]:
    return {c: sholo_residual(field, c) for c in field.eligible_corners()}


def cauchy_sums(field: MidEdgeField) -> dict[tuple[str, int], float]:
    """``|sum_k H(z_k) (z_{k+1} - z_{k-1})|`` around interior vertices and faces.

    Keys are ``("vertex", v)`` or ``("face", w)``; only loops of four
    eligible mid-edges are included.
    """
    d = field.domain
    rings = {}
    for y in range(1, d.height - 1):
        for x in range(1, d.width - 1):
            rings[("vertex", d.vertex_id(x, y))] = [
                d.horizontal_edge(x, y), d.vertical_edge(x, y),
                d.horizontal_edge(x - 1, y), d.vertical_edge(x, y - 1)]
    for Y in range(d.height - 1):
        for X in range(d.width - 1):
            rings[("face", d.dual_id(X, Y))] = [
                d.horizontal_edge(X, Y), d.vertical_edge(X + 1, Y),
                d.horizontal_edge(X, Y + 1), d.vertical_edge(X, Y)]
    out = {}
    for key, ring in rings.items():
        if not all(m in field.eligible for m in ring):
            continue
        z = [midedge_position(d, m) for m in ring]
        total = sum(field.values[ring[k]] * (z[(k + 1) % 4] - z[k - 1]) for k in range(4))
        out[key] = abs(total)
    return out


def midedge_indicator_identity(loops, corner: int, m) -> bool:
    """Per configuration, the loop through ``corner`` meets NW+SE as often as NE+SW."""
    k = loops.loop_of[corner]
    on = [loops.loop_of[c] == k for c in m.corners]
    return on[0] + on[2] == on[1] + on[3]


# ----------------------------------------------------------------------
# residues

def _site_extension(domain: LatticeDomain, corner_values, corner: int, m: int) -> float:
    """Projection at ``corner`` of the value carried by the mid-edge ``m``.

    Of the four corners of ``m`` (cyclically NW, NE, SE, SW), the opposite one
    is dropped and the two neighbours of ``corner`` are rotated and summed.
    """
    cs = domain.mid_edges[m].corners
    i = cs.index(corner)
    a, b = cs[(i + 1) % 4], cs[(i + 3) % 4]
    x = rotation(a) * corner_values[a] + rotation(b) * corner_values[b]
    return project(x, rotation(corner))


def f_plus_minus(domain: LatticeDomain, params: ModelParams, insertions, j: int,
                 corner_values: np.ndarray | None = None) -> tuple[float, float]:
    """The two extensions of ``f(z1, .., z_{2n-1}, z_j)`` to the diagonal.

    ``f+`` comes from the horizontal mid-edge of ``z_j`` and ``f-`` from the
    vertical one.
    """
    ins = _check_insertions(domain, insertions)
    if not 0 <= j < len(ins):
        raise IndexError(f"insertion index {j} out of range")
    z = ins[j]
    h_site, v_site = domain.corner_sites(z)
    if h_site is None or v_site is None:
        raise LatticeError(f"corner {domain.format_corner(z)} has a single mid-edge")
    if corner_values is None:
        corner_values = corner_extension_values(domain, params, ins)
    return (_site_extension(domain, corner_values, z, h_site),
            _site_extension(domain, corner_values, z, v_site))


def two_point_diagonal(domain: LatticeDomain, params: ModelParams, corner: int):
    return f_plus_minus(domain, params, (corner,), 0)


def corners_with_two_sites(domain: LatticeDomain) -> list[int]:
    return [c for c in range(domain.n_corners) if None not in domain.corner_sites(c)]


@dataclass(frozen=True)
class ResidueRow:
    j: int
    lhs: tuple[float, float]
    rhs: tuple[float, float]

    @property
    def error(self) -> float:
        return max(abs(a - b) for a, b in zip(self.lhs, self.rhs))


def residue_check(domain: LatticeDomain, params: ModelParams, insertions) -> list[ResidueRow]:
    """Compare ``f(.., z_j)`` extensions with ``(-1)^(j+1) f(.. without z_j ..) f(z_j, z_j)``.

    Indices in the sign are 1-based, so the first corner carries ``+``.
    """
    ins = _check_insertions(domain, insertions)
    values = corner_extension_values(domain, params, ins)
    rows = []
    for j, z in enumerate(ins):
        if None in domain.corner_sites(z):
            continue
        lhs = f_plus_minus(domain, params, ins, j, values)
        rest = ins[:j] + ins[j + 1:]
        g = fermion_exact(domain, params, rest).real
        diag = two_point_diagonal(domain, params, z)
        sign = 1 if j % 2 == 0 else -1
        rows.append(ResidueRow(j, lhs, (sign * g * diag[0], sign * g * diag[1])))
    return rows


def r_function_residual(domain: LatticeDomain, params: ModelParams, insertions) -> float:
    """``max_z |H(.., z) - sum_j (-1)^(j+1) f(.. without z_j ..) H(z_j, z)|`` over all mid-edges."""
    ins = _check_insertions(domain, insertions)
    full = field_from_values(domain, params, ins, corner_extension_values(domain, params, ins))
    combo = {m.id: 0j for m in domain.mid_edges}
    for j, z in enumerate(ins):
        rest = ins[:j] + ins[j + 1:]
        g = fermion_exact(domain, params, rest).real
        single = field_from_values(domain, params, (z,),
                                   corner_extension_values(domain, params, (z,)))
        sign = 1 if j % 2 == 0 else -1
        for m in combo:
            combo[m] += sign * g * single.values[m]
    return max(abs(full.values[m] - combo[m]) for m in combo)


# ----------------------------------------------------------------------
# Pfaffians

@dataclass(frozen=True)
class SkewMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("a square matrix is required")
        if np.max(np.abs(a + a.T), initial=0.0) > 1e-14:
            raise ValueError("matrix is not antisymmetric")
        object.__setattr__(self, "entries", a)

    @property
    def order(self) -> int:
        return self.entries.shape[0]


def pfaffian(matrix) -> float:
    """Expansion along the last column; the empty matrix has Pfaffian 1."""
    a = matrix.entries if isinstance(matrix, SkewMatrix) else SkewMatrix(matrix).entries
    n = a.shape[0]
    if n % 2:
        raise ValueError("the Pfaffian needs an even order")
    if n == 0:
        return 1.0
    last = n - 1
    total = 0.0
    for j in range(last):
        if a[j, last] == 0.0:
            continue
        keep = [k for k in range(last) if k != j]
        sign = 1.0 if j % 2 == 0 else -1.0
        total += sign * a[j, last] * pfaffian(SkewMatrix(a[np.ix_(keep, keep)]))
    return float(total)


def perfect_matchings(items: Sequence[int]):
    items = list(items)
    if not items:
        yield []
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1:]
        for m in perfect_matchings(rest):
            yield [(first, items[k])] + m


def pfaffian_by_matchings(matrix) -> float:
    a = matrix.entries if isinstance(matrix, SkewMatrix) else SkewMatrix(matrix).entries
    total = 0.0
    for m in perfect_matchings(range(a.shape[0])):
        term = float(matching_sign(m))
        for i, k in m:
            term *= a[i, k]
        total += term
    return total


def two_point_matrix(domain: LatticeDomain, params: ModelParams, insertions) -> SkewMatrix:
    ins = as_insertions(domain, insertions).corners
    n = len(ins)
    a = np.zeros((n, n))
    for i, k in combinations(range(n), 2):
        v = fermion_exact(domain, params, (ins[i], ins[k])).real
        a[i, k], a[k, i] = v, -v
    return SkewMatrix(a)


@dataclass(frozen=True)
class PfaffianReport:
    lhs: float
    rhs: float
    critical: bool

    @property
    def difference(self) -> float:
        return abs(self.lhs - self.rhs)


def pfaffian_identity_check(domain: LatticeDomain, params: ModelParams, insertions,
                            strict: bool = True) -> PfaffianReport:
    """``f(z1, .., z2n)`` against the Pfaffian of the two-point matrix.

    ``strict`` demands critical parameters and well separated corners.
    """
    ins = as_insertions(domain, insertions)
    if len(ins) % 2:
        raise HolomorphyError("the Pfaffian identity needs an even number of corners")
    if strict:
        if not params.is_critical:
            raise HolomorphyError("the Pfaffian identity is stated at t = 1")
        if not ins.well_separated(domain):
            raise HolomorphyError("corners must not share a primal or a dual vertex")
    lhs = float(fermion_exact(domain, params, ins).real)
    rhs = float(pfaffian(two_point_matrix(domain, params, ins)))
    return PfaffianReport(lhs, rhs, params.is_critical)

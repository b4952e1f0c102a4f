"""Fermionic observables of the FK-Ising loop model and of the Ising model.

The FK observable of corners ``z1 .. z2n`` averages, over configurations in
which every loop carries an even number of the corners, the sign of the
sequential matching times the winding phases of the matched arcs.  The
Ising observable is a spin expectation with one disorder line per
consecutive pair of corners.  Both are computed exactly by enumeration; the
FK one also by Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import Iterable, Sequence

import numpy as np

from .configuration import FkConfig, LoopSet, clusters, extract_loops
from .engines import DEFAULT_MAX_EDGES, batch_means, enumerate_reduce, run_chain_bits
from .lattice import LatticeDomain, LatticeError
from .measures import (DefectLine, ModelParams, RoutingError, SpinConfig, disorder_energy,
                       lines_disjoint, make_rng, route_defect_lines)
from .winding import orientation_eighth, unit, winding_phase

EXACT = "exact"
MONTE_CARLO = "monte-carlo"
MAX_SPIN_VERTICES = 20


# ----------------------------------------------------------------------
# value types

@dataclass(frozen=True)
class InsertionSet:
    """Ordered distinct corners; the order matters because observables are antisymmetric."""

    corners: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "corners", tuple(int(c) for c in self.corners))
        if len(set(self.corners)) != len(self.corners):
            raise LatticeError("insertion corners must be distinct")

    def __len__(self) -> int:
        return len(self.corners)

    def __iter__(self):
        return iter(self.corners)

    def __getitem__(self, i):
        return self.corners[i]

    def validate(self, domain: LatticeDomain) -> "InsertionSet":
        for c in self.corners:
            domain.check_corner(c)
        return self

    def well_separated(self, domain: LatticeDomain) -> bool:
        """No two corners share a primal vertex or a dual vertex."""
        us = [c >> 2 for c in self.corners]
        ws = [domain.corner_dual(c) for c in self.corners]
        return len(set(us)) == len(us) and len(set(ws)) == len(ws)

    @classmethod
    def parse(cls, domain: LatticeDomain, text: str) -> "InsertionSet":
        items = [t for t in text.split(";") if t.strip()]
        return cls(tuple(domain.parse_corner(t) for t in items))


def as_insertions(domain: LatticeDomain | None, insertions) -> InsertionSet:
    ins = insertions if isinstance(insertions, InsertionSet) else InsertionSet(tuple(insertions))
    if domain is not None:
        ins.validate(domain)
    return ins


@dataclass(frozen=True)
class Matching:
    """Pairs ``(i, tau)`` with ``i < tau`` (0-based), sorted by ``i``, and their sign."""

    pairs: tuple[tuple[int, int], ...]
    sign: int


@dataclass(frozen=True)
class ObservableValue:
    value: complex
    mode: str = EXACT
    stderr: float = 0.0
    n_samples: int = 0
    note: str = ""

    def __post_init__(self):
        if self.mode == EXACT and self.stderr != 0.0:
            raise ValueError("exact values carry no standard error")
        if self.stderr < 0:
            raise ValueError("standard error must be non-negative")

    @property
    def real(self) -> float:
        return complex(self.value).real

    def as_dict(self) -> dict:
        v = complex(self.value)
        return {"value_re": v.real, "value_im": v.imag, "stderr": self.stderr,
                "n_samples": self.n_samples, "mode": self.mode}


# ----------------------------------------------------------------------
# matchings

def permutation_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation listing ``seq`` (any distinct comparable items)."""
    inversions = 0
    s = list(seq)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                inversions += 1
    return -1 if inversions % 2 else 1


def matching_sign(pairs: Iterable[tuple[int, int]]) -> int:
    ordered = sorted((min(a, b), max(a, b)) for a, b in pairs)
    return permutation_sign([x for pr in ordered for x in pr])


def sequential_matching(loops: LoopSet, insertions) -> Matching | None:
    """Pair the insertions loop by loop, or None if some loop holds an odd number.

    On each loop the walk starts at the insertion of lowest index and
    follows the loop orientation; consecutive visited insertions are paired.
    """
    ins = insertions.corners if isinstance(insertions, InsertionSet) else tuple(insertions)
    by_loop: dict[int, list[int]] = {}
    for idx, z in enumerate(ins):
        by_loop.setdefault(loops.loop_of[z], []).append(idx)
    pairs = []
    for k, idxs in by_loop.items():
        if len(idxs) % 2:
            return None
        n = len(loops.loops[k])
        p0 = loops.position[ins[idxs[0]]]
        order = sorted(idxs, key=lambda i: (loops.position[ins[i]] - p0) % n)
        for a, b in zip(order[::2], order[1::2]):
            pairs.append((min(a, b), max(a, b)))
    pairs.sort()
    return Matching(tuple(pairs), permutation_sign([x for pr in pairs for x in pr]))


def _loops_of(config_or_loops) -> LoopSet:
    if isinstance(config_or_loops, LoopSet):
        return config_or_loops
    return extract_loops(config_or_loops)


def config_contribution(config_or_loops, insertions) -> int:
    """Matching sign times the product of winding phases; 0 if not admissible."""
    loops = _loops_of(config_or_loops)
    ins = insertions.corners if isinstance(insertions, InsertionSet) else tuple(insertions)
    if len(ins) % 2:
        return 0
    m = sequential_matching(loops, ins)
    if m is None:
        return 0
    value = m.sign
    for a, b in m.pairs:
        value *= winding_phase(loops, ins[a], ins[b])
    return value


def pairing_contribution(loops: LoopSet, insertions, pairs) -> int:
    """Same as :func:`config_contribution` but for an arbitrary co-looped pairing.

    Each pair ``(a, b)`` uses the forward arc from ``z_a`` to ``z_b``; returns
    None when a pair is not co-looped.
    """
    ins = tuple(insertions)
    value = matching_sign(pairs)
    for a, b in pairs:
        if loops.loop_of[ins[a]] != loops.loop_of[ins[b]]:
            return None
        lo, hi = min(a, b), max(a, b)
        value *= winding_phase(loops, ins[lo], ins[hi])
    return value


# ----------------------------------------------------------------------
# exact FK observable

def fermion_exact(domain: LatticeDomain, params: ModelParams, insertions, shards: int = 1,
                  threads: int = 1, max_edges: int = DEFAULT_MAX_EDGES) -> ObservableValue:
    ins = as_insertions(domain, insertions)
    if len(ins) % 2:
        return ObservableValue(0.0, EXACT, 0.0, 0, note="odd number of insertions")
    if len(ins) == 0:
        return ObservableValue(1.0, EXACT, 0.0, 1 << domain.n_edges)
    corners = ins.corners
    red = enumerate_reduce(domain, params, lambda c, loops: config_contribution(loops, corners),
                           shards=shards, threads=threads, max_edges=max_edges)
    return ObservableValue(float(red.mean), EXACT, 0.0, red.n_configs)


def corner_extension_values(domain: LatticeDomain, params: ModelParams, insertions,
                            max_edges: int = DEFAULT_MAX_EDGES) -> np.ndarray:
    """``f(z1, .., z_m, c)`` for every corner ``c`` (0 where ``c`` is an insertion).

    One enumeration serves all corners.
    """
    ins = as_insertions(domain, insertions).corners
    n = domain.n_corners
    targets = [c for c in range(n) if c not in ins]

    def functional(config, loops):
        out = np.zeros(n)
        for c in targets:
            v = config_contribution(loops, ins + (c,))
            if v:
                out[c] = v
        return out

    return np.asarray(enumerate_reduce(domain, params, functional, max_edges=max_edges).mean)


def smirnov_prefactor(z2: int) -> complex:
    """Principal ``sqrt(i / o(z2))`` as an exact sixteenth root of unity."""
    k = (2 - orientation_eighth(z2)) % 8
    if k > 4:
        k -= 8
    return unit(k, 16)


def smirnov_complexified(domain: LatticeDomain, params: ModelParams, z1: int, z2: int,
                         **kwargs) -> complex:
    f = fermion_exact(domain, params, (z1, z2), **kwargs).value
    return smirnov_prefactor(z2) * f


# ----------------------------------------------------------------------
# Ising observable

DIRS8 = {(1, 0): 0, (1, 1): 1, (0, 1): 2, (-1, 1): 3, (-1, 0): 4, (-1, -1): 5, (0, -1): 6,
         (1, -1): 7}


def _direction(a, b) -> int:
    dx, dy = b[0] - a[0], b[1] - a[1]
    return DIRS8[((dx > 0) - (dx < 0), (dy > 0) - (dy < 0))]


def turning_eighths(points: Sequence[tuple[int, int]]) -> int:
    """Total turning (counter-clockwise positive) of an open polyline, in eighths of a turn."""
    dirs = [_direction(a, b) for a, b in zip(points, points[1:])]
    total = 0
    for a, b in zip(dirs, dirs[1:]):
        t = (b - a) % 8
        if t == 4:
            raise RoutingError("polyline reverses on itself")
        total += t - 8 if t > 4 else t
    return total


def line_turning(line: DefectLine) -> int:
    """Turning of ``zeta1 -> w1 -> dual path -> w2 -> zeta2`` in eighths of a turn."""
    d = line.domain
    z1, z2 = line.corner_ends
    pts = [d.corner_position(z1)] + [d.dual_position(w) for w in line.dual_path]
    pts.append(d.corner_position(z2))
    return turning_eighths(pts)


def pair_phase_sign(line: DefectLine) -> int:
    """The real prefactor ``i sqrt(o2/o1) exp(-i W / 2)`` of a fermion pair, as a sign."""
    z1, z2 = line.corner_ends
    m = 4 + orientation_eighth(z2) - orientation_eighth(z1) - line_turning(line)
    if m % 8:
        raise RoutingError(f"pair prefactor is not real (exponent {m}/8)")
    return -1 if (m // 8) % 2 else 1


def fermion_pair(spins: SpinConfig, line: DefectLine, beta: float) -> float:
    """Real fermion pair ``(psi(z1) psi(z2))_lambda`` for one spin configuration."""
    z1, z2 = line.corner_ends
    return (pair_phase_sign(line) * math.exp(-2.0 * beta * disorder_energy(spins, line))
            * spins[z1 >> 2] * spins[z2 >> 2])


@lru_cache(maxsize=8)
def _spin_table(domain: LatticeDomain) -> np.ndarray:
    n = domain.n_vertices
    bits = np.arange(1 << n)[:, None] >> np.arange(n)[None, :] & 1
    return (2 * bits - 1).astype(np.int8)


def _edge_products(S: np.ndarray, domain: LatticeDomain, edges: Sequence[int]) -> np.ndarray:
    out = np.zeros(S.shape[0], dtype=np.int64)
    for e in edges:
        a, b = domain.primal_edges[e]
        out += S[:, a].astype(np.int64) * S[:, b]
    return out


def ising_fermion_exact(domain: LatticeDomain, params: ModelParams, insertions,
                        lines: Sequence[DefectLine] | None = None) -> ObservableValue:
    """``< prod_j (psi(z_{2j-1}) psi(z_{2j}))_{lambda_j} >`` by summing over all spins."""
    ins = as_insertions(domain, insertions).corners
    if len(ins) % 2:
        return ObservableValue(0.0, EXACT, 0.0, 0, note="odd number of insertions")
    if domain.n_vertices > MAX_SPIN_VERTICES:
        raise MemoryError(f"{domain.n_vertices} spins exceed the enumeration limit")
    if lines is None:
        lines = route_defect_lines(domain, ins)
    lines = list(lines)
    if len(lines) != len(ins) // 2:
        raise RoutingError("one defect line per consecutive pair is required")
    for j, line in enumerate(lines):
        if tuple(line.corner_ends) != (ins[2 * j], ins[2 * j + 1]):
            raise RoutingError(f"line {j} does not join corners {2 * j} and {2 * j + 1}")
    if not lines_disjoint(lines):
        raise RoutingError("defect lines must be pairwise disjoint")
    S = _spin_table(domain)
    beta = params.beta
    all_edges = range(domain.n_edges)
    energy = _edge_products(S, domain, all_edges)
    logw = beta * (energy - domain.n_edges)
    crossed = [e for line in lines for e in line.crossed_primal_edges]
    logw_line = logw - 2.0 * beta * _edge_products(S, domain, crossed)
    prod = np.ones(S.shape[0], dtype=np.int64)
    for z in ins:
        prod *= S[:, z >> 2]
    sign = 1
    for line in lines:
        sign *= pair_phase_sign(line)
    Z = np.exp(logw).sum()
    value = sign * float((np.exp(logw_line) * prod).sum() / Z)
    return ObservableValue(value, EXACT, 0.0, S.shape[0])


@dataclass(frozen=True)
class EquivalenceReport:
    f_fk: float
    f_ising: float
    difference: float
    bookkeeping_checked: int
    bookkeeping_ok: bool


def low_temperature_bookkeeping(spins: SpinConfig, lines: Sequence[DefectLine]) -> bool:
    """``-2 E_lambda[sigma] + E[sigma] == |E| - 2 |lambda (+) eta|``.

    ``eta`` is the set of domain walls of ``sigma`` (as primal edges) and
    ``lambda`` the set of crossed edges.
    """
    lam = set()
    for line in lines:
        lam ^= set(line.crossed_primal_edges)
    e_lam = sum(disorder_energy(spins, line) for line in lines)
    eta = spins.domain_walls()
    return -2 * e_lam + spins.energy() == spins.domain.n_edges - 2 * len(lam ^ eta)


def check_equivalence(domain: LatticeDomain, params: ModelParams, insertions,
                      lines: Sequence[DefectLine] | None = None, n_spin_checks: int = 64,
                      seed: int = 0) -> EquivalenceReport:
    ins = as_insertions(domain, insertions).corners
    if lines is None:
        lines = route_defect_lines(domain, ins)
    f_fk = fermion_exact(domain, params, ins).real
    f_is = ising_fermion_exact(domain, params, ins, lines).real
    rng = make_rng(seed)
    ok = True
    for _ in range(n_spin_checks):
        spins = SpinConfig(domain, tuple(int(s) for s in rng.choice((-1, 1), domain.n_vertices)))
        ok = ok and low_temperature_bookkeeping(spins, lines)
    return EquivalenceReport(f_fk, f_is, abs(f_fk - f_is), n_spin_checks, ok)


# ----------------------------------------------------------------------
# comparing two lines with the same ends

_CYCLE4 = {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}


def crossing_count(domain: LatticeDomain, cycle: Sequence[int]) -> int:
    """Transversal self-crossings of a closed dual-lattice curve given by its vertices."""
    n = len(cycle)
    visits: dict[int, list[tuple[int, int]]] = {}
    for i, w in enumerate(cycle):
        X, Y = domain.dual_xy(w)
        Xp, Yp = domain.dual_xy(cycle[i - 1])
        Xn, Yn = domain.dual_xy(cycle[(i + 1) % n])
        visits.setdefault(w, []).append((_CYCLE4[(Xp - X, Yp - Y)], _CYCLE4[(Xn - X, Yn - Y)]))
    count = 0
    for passes in visits.values():
        for i in range(len(passes)):
            for j in range(i + 1, len(passes)):
                a, b = sorted(passes[i])
                inside = [a < d < b for d in passes[j]]
                count += inside[0] != inside[1]
    return count


def encloses(domain: LatticeDomain, cycle: Sequence[int], v: int) -> bool:
    """Even-odd test: is primal vertex ``v`` inside the closed dual curve ``cycle``?"""
    x, y = domain.vertex_xy(v)
    px, py = 4 * x, 4 * y
    pts = [domain.dual_position(w) for w in cycle]
    inside = False
    for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
        if x1 == x2 and x1 > px and min(y1, y2) < py < max(y1, y2):
            inside = not inside
    return inside


@dataclass(frozen=True)
class LinePairReport:
    """How the pair prefactor changes between two lines with the same corner ends.

    ``phase_ratio`` is the product of the two pair signs.  ``crossings`` counts
    transversal self-crossings of the closed curve formed by the lines, and
    ``enclosed_spin_ends`` counts the spin-ends inside it (even-odd rule).
    """

    phase_ratio: int
    crossings: int
    enclosed_spin_ends: int

    @property
    def crossing_rule_holds(self) -> bool:
        return self.phase_ratio == (-1) ** self.crossings

    @property
    def enclosure_rule_holds(self) -> bool:
        return self.phase_ratio == (-1) ** self.enclosed_spin_ends


def winding_interior_check(line_a: DefectLine, line_b: DefectLine) -> LinePairReport:
    """Compare two lines with the same corner ends and no common dual edge.

    The closed curve runs along ``line_a`` and back along ``line_b``.  Flipping
    every spin inside it turns one disorder energy into the other, so the
    ratio of prefactors must equal ``(-1) ** enclosed_spin_ends`` for the two
    lines to give the same observable.
    """
    if tuple(line_a.corner_ends) != tuple(line_b.corner_ends):
        raise RoutingError("lines must share their corner ends")
    ea = {frozenset(e) for e in line_a.dual_edges}
    eb = {frozenset(e) for e in line_b.dual_edges}
    if ea & eb or not ea:
        raise RoutingError("lines must be non-trivial and share no dual edge")
    domain = line_a.domain
    cycle = list(line_a.dual_path) + list(reversed(line_b.dual_path))[1:-1]
    z1, z2 = line_a.corner_ends
    enclosed = sum(encloses(domain, cycle, z >> 2) for z in (z1, z2))
    ratio = pair_phase_sign(line_a) * pair_phase_sign(line_b)
    return LinePairReport(ratio, crossing_count(domain, cycle), enclosed)


# ----------------------------------------------------------------------
# Monte Carlo

def fermion_mc(domain: LatticeDomain, params: ModelParams, insertions, n_sweeps: int,
               seed: int, burn_in: int = 1000, n_batches: int = 32,
               stream: int = 0) -> ObservableValue:
    """Average contribution along the Edwards-Sokal chain, with batch-means error."""
    ins = as_insertions(domain, insertions).corners
    if n_sweeps <= 0:
        raise ValueError("n_sweeps must be positive")
    if n_sweeps < 100 * n_batches:
        raise ValueError(f"need at least {100 * n_batches} sweeps for {n_batches} batches")
    if n_batches < 32:
        raise ValueError("at least 32 batches are required")
    if len(ins) % 2:
        return ObservableValue(0.0, MONTE_CARLO, 0.0, n_sweeps, note="odd number of insertions")
    memo: dict[int, int] = {}
    values = np.empty(n_sweeps)
    for i, bits in enumerate(run_chain_bits(domain, params, n_sweeps + burn_in, burn_in,
                                            seed, stream)):
        v = memo.get(bits)
        if v is None:
            if len(memo) > 1 << 18:
                memo.clear()
            v = config_contribution(FkConfig(domain, bits), ins)
            memo[bits] = v
        values[i] = v
    mean, err = batch_means(values, n_batches)
    return ObservableValue(mean, MONTE_CARLO, err, n_sweeps)


# ----------------------------------------------------------------------
# exploration tree

@lru_cache(maxsize=16)
def _corner_neighbours(domain: LatticeDomain) -> tuple[tuple[int, ...], ...]:
    """Corners sharing a primal or a dual vertex with each corner (ring counts as one)."""
    by_dual: dict[int, list[int]] = {}
    for c in range(domain.n_corners):
        w = domain.corner_dual(c)
        key = -1 if domain.is_outer(w) else w
        by_dual.setdefault(key, []).append(c)
    out = []
    for c in range(domain.n_corners):
        w = domain.corner_dual(c)
        key = -1 if domain.is_outer(w) else w
        same_vertex = [4 * (c >> 2) + q for q in range(4)]
        out.append(tuple(x for x in same_vertex + by_dual[key] if x != c))
    return tuple(out)


@dataclass
class Branch:
    loop: int
    cut: int
    visits: list[int] = field(default_factory=list)


def exploration_tree(loops: LoopSet, root: int) -> list[Branch]:
    """Deterministic branching exploration of every loop, started next to ``root``.

    A branch walks its loop forward from its cut corner.  Whenever it passes
    a corner next to a loop not yet explored, that loop becomes a child
    branch cut open at the neighbouring corner and is explored at once
    (depth first) before the parent resumes.  Branches are returned in the
    order they were opened.
    """
    domain = loops.domain
    if not domain.is_outer(domain.corner_dual(root)):
        raise LatticeError("the root corner must lie on the boundary")
    neigh = _corner_neighbours(domain)
    explored = {loops.loop_of[root]}
    branches: list[Branch] = []

    def open_branch(loop_index: int, cut: int) -> list:
        branch = Branch(loop_index, cut)
        branches.append(branch)
        return [branch, loops.position[cut], 0]

    stack = [open_branch(loops.loop_of[root], root)]
    while stack:
        frame = stack[-1]
        branch, start, step = frame
        loop = loops.loops[branch.loop]
        if step == len(loop):
            stack.pop()
            continue
        frame[2] += 1
        c = loop[(start + step) % len(loop)]
        branch.visits.append(c)
        children = []
        for n in neigh[c]:
            k = loops.loop_of[n]
            if k not in explored:
                explored.add(k)
                children.append((k, n))
        for k, n in reversed(children):
            stack.append(open_branch(k, n))
    return branches


def branch_winding(loops: LoopSet, branch: Branch, index_of: dict[int, int]):
    """Pairs and phase of one branch, or None if it meets an odd number of insertions."""
    seen = [c for c in branch.visits if c in index_of]
    if len(seen) % 2:
        return None
    value = 1
    pairs = []
    for a, b in zip(seen[::2], seen[1::2]):
        value *= winding_phase(loops, a, b)
        if index_of[a] > index_of[b]:
            value = -value
        pairs.append((index_of[a], index_of[b]))
    return value, pairs


def exploration_tree_winding(config_or_loops, root_corner: int, insertions) -> int:
    """Total winding ``W(T)``: product of branch windings times the sign of their pairing."""
    loops = _loops_of(config_or_loops)
    ins = insertions.corners if isinstance(insertions, InsertionSet) else tuple(insertions)
    index_of = {z: i for i, z in enumerate(ins)}
    total = 1
    pairs = []
    for branch in exploration_tree(loops, root_corner):
        res = branch_winding(loops, branch, index_of)
        if res is None:
            return 0
        total *= res[0]
        pairs.extend(res[1])
    return total * matching_sign(pairs)


def boundary_corners(domain: LatticeDomain) -> list[int]:
    return [c for c in range(domain.n_corners) if domain.is_outer(domain.corner_dual(c))]


def exploration_expectation(domain: LatticeDomain, params: ModelParams, insertions,
                            root_corner: int | None = None) -> float:
    ins = as_insertions(domain, insertions).corners
    root = boundary_corners(domain)[0] if root_corner is None else root_corner
    red = enumerate_reduce(domain, params,
                           lambda c, loops: exploration_tree_winding(loops, root, ins))
    return float(red.mean)


def cluster_connection_probability(domain: LatticeDomain, params: ModelParams, x: int,
                                   y: int) -> float:
    """``P[x <-> y]`` under the FK measure."""
    def functional(config, loops):
        lab = clusters(config).primal_label
        return 1.0 if lab[x] == lab[y] else 0.0
    return float(enumerate_reduce(domain, params, functional, needs_loops=False).mean)


def spin_correlation(domain: LatticeDomain, params: ModelParams, x: int, y: int) -> float:
    """``<sigma_x sigma_y>`` under the Ising measure by summing over all spins."""
    S = _spin_table(domain)
    energy = _edge_products(S, domain, range(domain.n_edges))
    w = np.exp(params.beta * (energy - domain.n_edges))
    return float((w * S[:, x] * S[:, y]).sum() / w.sum())

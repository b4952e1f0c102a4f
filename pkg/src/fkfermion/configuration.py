"""FK configurations, their primal/dual clusters and the corner loops between them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .lattice import LatticeDomain


class UnionFind:
    """Disjoint sets over ``0 .. n-1`` with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.count = n

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.count -= 1
        return True

    def labels(self) -> list[int]:
        """Canonical labels: each element maps to the smallest member of its set."""
        smallest: dict[int, int] = {}
        roots = [self.find(i) for i in range(len(self.parent))]
        for i, r in enumerate(roots):
            smallest.setdefault(r, i)
        return [smallest[r] for r in roots]


@dataclass(frozen=True)
class FkConfig:
    """Open/closed state of every primal edge, packed into an int (1 = open)."""

    domain: LatticeDomain
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << self.domain.n_edges):
            raise ValueError(
                f"config bits {self.bits:#x} do not fit {self.domain.n_edges} edges"
            )

    def is_open(self, e: int) -> bool:
        return bool(self.bits >> e & 1)

    @property
    def n_open(self) -> int:
        return self.bits.bit_count()

    def dual_bits(self) -> int:
        """The dual configuration: a dual edge is open iff its primal edge is closed."""
        return ~self.bits & ((1 << self.domain.n_edges) - 1)

    def flip(self, e: int) -> "FkConfig":
        return FkConfig(self.domain, self.bits ^ (1 << e))

    def hex(self) -> str:
        return hex(self.bits)

    @classmethod
    def from_hex(cls, domain: LatticeDomain, text: str) -> "FkConfig":
        return cls(domain, int(text, 16))

    @classmethod
    def from_edges(cls, domain: LatticeDomain, open_edges) -> "FkConfig":
        bits = 0
        for e in open_edges:
            bits |= 1 << e
        return cls(domain, bits)

    @classmethod
    def all_open(cls, domain: LatticeDomain) -> "FkConfig":
        return cls(domain, (1 << domain.n_edges) - 1)

    @classmethod
    def all_closed(cls, domain: LatticeDomain) -> "FkConfig":
        return cls(domain, 0)


@dataclass(frozen=True)
class ClusterLabels:
    primal_label: tuple[int, ...]
    primal_count: int
    dual_label: tuple[int, ...]
    dual_count: int


def clusters(config: FkConfig) -> ClusterLabels:
    """Primal clusters of ``config`` and dual clusters of its dual (ring wired)."""
    domain = config.domain
    primal = UnionFind(domain.n_vertices)
    dual = UnionFind(domain.n_dual)
    ring = domain.outer_ring
    for w in ring[1:]:
        dual.union(ring[0], w)
    bits = config.bits
    for e, (a, b) in enumerate(domain.primal_edges):
        if bits >> e & 1:
            primal.union(a, b)
        else:
            dual.union(*domain.dual_edge_ends[e])
    return ClusterLabels(tuple(primal.labels()), primal.count, tuple(dual.labels()), dual.count)


# ----------------------------------------------------------------------
# loops

@lru_cache(maxsize=None)
def step_table(domain: LatticeDomain) -> tuple[tuple[int, int, int], ...]:
    """For every corner: (exit edge or -1, successor if open, successor if closed).

    Loops keep primal clusters on their left.  NE and SW corners leave through
    their vertical mid-edge, NW and SE corners through their horizontal one;
    a missing boundary edge behaves like a closed one, because the dual ring
    around the domain is wired.
    """
    table = []
    for c in range(domain.n_corners):
        v, q = c >> 2, c & 3
        x, y = domain.vertex_xy(v)
        if q == 0:  # NE: up edge
            e = domain.vertical_edge(x, y)
            opened = domain.corner_id(domain.vertex_id(x, y + 1), "SE") if e is not None else -1
            closed = domain.corner_id(v, "NW")
        elif q == 1:  # NW: left edge
            e = domain.horizontal_edge(x - 1, y)
            opened = domain.corner_id(domain.vertex_id(x - 1, y), "NE") if e is not None else -1
            closed = domain.corner_id(v, "SW")
        elif q == 2:  # SW: down edge
            e = domain.vertical_edge(x, y - 1)
            opened = domain.corner_id(domain.vertex_id(x, y - 1), "NW") if e is not None else -1
            closed = domain.corner_id(v, "SE")
        else:  # SE: right edge
            e = domain.horizontal_edge(x, y)
            opened = domain.corner_id(domain.vertex_id(x + 1, y), "SW") if e is not None else -1
            closed = domain.corner_id(v, "NE")
        table.append((-1 if e is None else e, opened, closed))
    return tuple(table)


def step_turn(a: int, b: int) -> int:
    """Quarter-turn of the step between corners ``a`` and ``b``: +1 right, -1 left.

    The tangent at a corner is ``i * o(corner)``, so turning left means the
    orientation advances by a quarter turn.
    """
    d = ((b & 3) - (a & 3)) % 4
    if d == 1:
        return -1
    if d == 3:
        return 1
    raise ValueError(f"corners {a} and {b} are not consecutive on any loop")


@dataclass(frozen=True)
class LoopSet:
    """Oriented corner loops of one configuration.

    ``loops[k]`` starts at the smallest corner id of the loop and follows the
    primal-on-the-left orientation.  ``turn_prefix[k][i]`` is the signed
    number of quarter turns (right minus left) accumulated from ``loops[k][0]``
    to ``loops[k][i]``; the last entry is the total for the closed loop.
    """

    domain: LatticeDomain
    loops: tuple[tuple[int, ...], ...]
    loop_of: tuple[int, ...]
    position: tuple[int, ...]
    turn_prefix: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.loops)

    def corner_to_loop(self, c: int) -> tuple[int, int]:
        return self.loop_of[c], self.position[c]

    def successor(self, c: int) -> int:
        loop = self.loops[self.loop_of[c]]
        return loop[(self.position[c] + 1) % len(loop)]

    def total_turn(self, k: int) -> int:
        return self.turn_prefix[k][-1]


def successors(config: FkConfig) -> list[int]:
    bits = config.bits
    out = []
    for e, opened, closed in step_table(config.domain):
        out.append(opened if e >= 0 and bits >> e & 1 else closed)
    return out


def extract_loops(config: FkConfig) -> LoopSet:
    domain = config.domain
    nxt = successors(config)
    n = domain.n_corners
    loop_of = [-1] * n
    position = [0] * n
    loops = []
    prefixes = []
    for start in range(n):
        if loop_of[start] >= 0:
            continue
        k = len(loops)
        loop = []
        prefix = [0]
        c = start
        while loop_of[c] < 0:
            loop_of[c] = k
            position[c] = len(loop)
            loop.append(c)
            d = nxt[c]
            prefix.append(prefix[-1] + step_turn(c, d))
            c = d
        if c != start:
            raise RuntimeError("corner successor map is not a permutation")
        loops.append(tuple(loop))
        prefixes.append(tuple(prefix))
    return LoopSet(domain, tuple(loops), tuple(loop_of), tuple(position), tuple(prefixes))


def corners_connected(loops: LoopSet, z1: int, z2: int) -> bool:
    if z1 == z2:
        raise ValueError("corners must be distinct")
    return loops.loop_of[z1] == loops.loop_of[z2]


def mirror_config(config: FkConfig) -> FkConfig:
    """Reflect a configuration through the vertical axis ``x -> width - 1 - x``."""
    domain = config.domain
    W = domain.width
    bits = 0
    for e, (a, b) in enumerate(domain.primal_edges):
        if not config.is_open(e):
            continue
        (xa, ya), (xb, yb) = domain.vertex_xy(a), domain.vertex_xy(b)
        if ya == yb:
            e2 = domain.horizontal_edge(W - 1 - max(xa, xb), ya)
        else:
            e2 = domain.vertical_edge(W - 1 - xa, min(ya, yb))
        bits |= 1 << e2
    return FkConfig(domain, bits)

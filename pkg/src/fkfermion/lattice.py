"""Geometry and indexing of a rectangular piece of the square lattice.

Primal vertices sit at integer points ``(x, y)``.  Dual vertices are face
centres ``(X + 1/2, Y + 1/2)`` for ``-1 <= X <= width - 1`` and
``-1 <= Y <= height - 1``; the ones with ``X`` or ``Y`` on the extreme values
form the outer ring that closes the domain.  All coordinates are stored as
integers in units of one quarter of the lattice spacing, so nothing in this
module uses floating point.

Every primal vertex owns four corners, one per quadrant.  Quadrants are
indexed ``NE=0, NW=1, SW=2, SE=3``, which makes the orientation of a corner
(in eighths of a turn) equal to ``2 * quadrant + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import json

QUADRANTS = ("NE", "NW", "SW", "SE")
QUADRANT_INDEX = {name: i for i, name in enumerate(QUADRANTS)}
# unit step (in lattice units) from a vertex towards its dual partner
QUADRANT_OFFSET = ((1, 1), (-1, 1), (-1, -1), (1, -1))

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


class LatticeError(ValueError):
    """Invalid domain, vertex or corner specification."""


@dataclass(frozen=True)
class Corner:
    id: int
    u: int
    w: int
    orientation_eighth: int

    @property
    def quadrant(self) -> str:
        return QUADRANTS[self.id % 4]


@dataclass(frozen=True)
class MidEdge:
    id: int
    edge: int
    axis: str
    corner_NW: int
    corner_NE: int
    corner_SE: int
    corner_SW: int

    @property
    def corners(self) -> tuple[int, int, int, int]:
        return (self.corner_NW, self.corner_NE, self.corner_SE, self.corner_SW)


@dataclass(frozen=True)
class LatticeDomain:
    """Finite ``width x height`` block of primal vertices with its dual ring.

    Entities are indexed deterministically:

    * vertex ``(x, y)`` has id ``y * width + x``;
    * horizontal edges come first in row-major order, then vertical ones;
    * dual vertex ``(X, Y)`` has id ``(Y + 1) * (width + 1) + X + 1``;
    * corner ``(vertex, quadrant)`` has id ``4 * vertex + quadrant``;
    * the mid-edge of edge ``e`` has id ``e``.
    """

    width: int
    height: int

    def __post_init__(self):
        for name in ("width", "height"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise LatticeError(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise LatticeError(f"{name} must be at least 2, got {value}")

    # ------------------------------------------------------------------
    # counts
    @property
    def n_vertices(self) -> int:
        return self.width * self.height

    @property
    def n_horizontal(self) -> int:
        return (self.width - 1) * self.height

    @property
    def n_edges(self) -> int:
        return self.n_horizontal + self.width * (self.height - 1)

    @property
    def n_dual(self) -> int:
        return (self.width + 1) * (self.height + 1)

    @property
    def n_corners(self) -> int:
        return 4 * self.n_vertices

    # ------------------------------------------------------------------
    # vertices
    def vertex_id(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise LatticeError(f"vertex ({x},{y}) outside {self.width}x{self.height} domain")
        return y * self.width + x

    def vertex_xy(self, v: int) -> tuple[int, int]:
        return v % self.width, v // self.width

    @cached_property
    def primal_vertices(self) -> list[tuple[int, int]]:
        return [self.vertex_xy(v) for v in range(self.n_vertices)]

    # ------------------------------------------------------------------
    # edges
    def horizontal_edge(self, x: int, y: int) -> int | None:
        """Edge between ``(x, y)`` and ``(x + 1, y)``, or None outside."""
        if 0 <= x < self.width - 1 and 0 <= y < self.height:
            return y * (self.width - 1) + x
        return None

    def vertical_edge(self, x: int, y: int) -> int | None:
        """Edge between ``(x, y)`` and ``(x, y + 1)``, or None outside."""
        if 0 <= x < self.width and 0 <= y < self.height - 1:
            return self.n_horizontal + y * self.width + x
        return None

    @cached_property
    def primal_edges(self) -> list[tuple[int, int]]:
        edges = []
        for y in range(self.height):
            for x in range(self.width - 1):
                edges.append((self.vertex_id(x, y), self.vertex_id(x + 1, y)))
        for y in range(self.height - 1):
            for x in range(self.width):
                edges.append((self.vertex_id(x, y), self.vertex_id(x, y + 1)))
        return edges

    def edge_axis(self, e: int) -> str:
        return HORIZONTAL if e < self.n_horizontal else VERTICAL

    @cached_property
    def dual_edge_ends(self) -> list[tuple[int, int]]:
        """The two dual vertices separated by each primal edge, by edge id."""
        ends = []
        for e, (a, _) in enumerate(self.primal_edges):
            x, y = self.vertex_xy(a)
            if self.edge_axis(e) == HORIZONTAL:
                ends.append((self.dual_id(x, y - 1), self.dual_id(x, y)))
            else:
                ends.append((self.dual_id(x - 1, y), self.dual_id(x, y)))
        return ends

    # ------------------------------------------------------------------
    # dual vertices
    def dual_id(self, X: int, Y: int) -> int:
        if not (-1 <= X <= self.width - 1 and -1 <= Y <= self.height - 1):
            raise LatticeError(f"dual vertex ({X},{Y}) outside the ring")
        return (Y + 1) * (self.width + 1) + X + 1

    def dual_xy(self, w: int) -> tuple[int, int]:
        return w % (self.width + 1) - 1, w // (self.width + 1) - 1

    def is_outer(self, w: int) -> bool:
        X, Y = self.dual_xy(w)
        return X in (-1, self.width - 1) or Y in (-1, self.height - 1)

    @cached_property
    def dual_vertices(self) -> list[tuple[int, int]]:
        return [self.dual_xy(w) for w in range(self.n_dual)]

    @cached_property
    def outer_ring(self) -> list[int]:
        return [w for w in range(self.n_dual) if self.is_outer(w)]

    def dual_neighbors(self, w: int) -> list[int]:
        X, Y = self.dual_xy(w)
        out = []
        for dX, dY in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if -1 <= X + dX <= self.width - 1 and -1 <= Y + dY <= self.height - 1:
                out.append(self.dual_id(X + dX, Y + dY))
        return out

    def primal_edge_crossing(self, w1: int, w2: int) -> int | None:
        """Primal edge crossed by the dual edge ``w1 w2`` (None on the ring)."""
        X1, Y1 = self.dual_xy(w1)
        X2, Y2 = self.dual_xy(w2)
        if abs(X1 - X2) + abs(Y1 - Y2) != 1:
            raise LatticeError(f"dual vertices {w1} and {w2} are not adjacent")
        if Y1 == Y2:
            # horizontal dual step crosses the vertical edge at x = max(X)
            return self.vertical_edge(max(X1, X2), Y1)
        return self.horizontal_edge(X1, max(Y1, Y2))

    # ------------------------------------------------------------------
    # corners
    def corner_id(self, v: int, quadrant: int | str) -> int:
        if isinstance(quadrant, str):
            try:
                quadrant = QUADRANT_INDEX[quadrant.upper()]
            except KeyError:
                raise LatticeError(f"unknown quadrant {quadrant!r}") from None
        if not 0 <= v < self.n_vertices:
            raise LatticeError(f"vertex id {v} out of range")
        return 4 * v + quadrant

    def corner_by_spec(self, vx: int, vy: int, quadrant: str) -> int:
        return self.corner_id(self.vertex_id(vx, vy), quadrant)

    def parse_corner(self, text: str) -> int:
        """Parse a ``"x,y,Q"`` corner literal."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise LatticeError(f"corner literal must look like 'x,y,Q', got {text!r}")
        try:
            vx, vy = int(parts[0]), int(parts[1])
        except ValueError:
            raise LatticeError(f"bad corner coordinates in {text!r}") from None
        return self.corner_by_spec(vx, vy, parts[2])

    def format_corner(self, c: int) -> str:
        x, y = self.vertex_xy(c // 4)
        return f"{x},{y},{QUADRANTS[c % 4]}"

    def check_corner(self, c: int) -> int:
        if not (isinstance(c, int) and 0 <= c < self.n_corners):
            raise LatticeError(f"corner id {c!r} out of range")
        return c

    def corner_vertex(self, c: int) -> int:
        return c >> 2

    def corner_dual(self, c: int) -> int:
        x, y = self.vertex_xy(c >> 2)
        dx, dy = QUADRANT_OFFSET[c & 3]
        return self.dual_id(x + (dx - 1) // 2, y + (dy - 1) // 2)

    def corner_orientation(self, c: int) -> int:
        """Orientation ``o(c) = exp(i k pi/4)`` as the odd integer ``k``."""
        self.check_corner(c)
        return 2 * (c & 3) + 1

    def corner(self, c: int) -> Corner:
        self.check_corner(c)
        return Corner(c, c >> 2, self.corner_dual(c), 2 * (c & 3) + 1)

    @cached_property
    def corners(self) -> list[Corner]:
        return [self.corner(c) for c in range(self.n_corners)]

    def corner_position(self, c: int) -> tuple[int, int]:
        """Corner location in quarter-lattice units."""
        x, y = self.vertex_xy(c >> 2)
        dx, dy = QUADRANT_OFFSET[c & 3]
        return 4 * x + dx, 4 * y + dy

    def dual_position(self, w: int) -> tuple[int, int]:
        X, Y = self.dual_xy(w)
        return 4 * X + 2, 4 * Y + 2

    # ------------------------------------------------------------------
    # mid-edges
    @cached_property
    def mid_edges(self) -> list[MidEdge]:
        out = []
        for e, (a, b) in enumerate(self.primal_edges):
            if self.edge_axis(e) == HORIZONTAL:
                # a is the left end, b the right end
                nw, sw = self.corner_id(a, "NE"), self.corner_id(a, "SE")
                ne, se = self.corner_id(b, "NW"), self.corner_id(b, "SW")
                out.append(MidEdge(e, e, HORIZONTAL, nw, ne, se, sw))
            else:
                # a is the bottom end, b the top end
                sw, se = self.corner_id(a, "NW"), self.corner_id(a, "NE")
                nw, ne = self.corner_id(b, "SW"), self.corner_id(b, "SE")
                out.append(MidEdge(e, e, VERTICAL, nw, ne, se, sw))
        return out

    def corner_sites(self, c: int) -> tuple[int | None, int | None]:
        """The (horizontal, vertical) primal edges whose mid-edges touch ``c``.

        A missing edge (outside the domain) is reported as None.
        """
        x, y = self.vertex_xy(c >> 2)
        dx, dy = QUADRANT_OFFSET[c & 3]
        h = self.horizontal_edge(x if dx > 0 else x - 1, y)
        v = self.vertical_edge(x, y if dy > 0 else y - 1)
        return h, v

    def corner_mid_edges(self, c: int) -> list[int]:
        return [e for e in self.corner_sites(c) if e is not None]

    # ------------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "counts": {
                "primal_vertices": self.n_vertices,
                "primal_edges": self.n_edges,
                "dual_vertices": self.n_dual,
                "outer_ring": len(self.outer_ring),
                "corners": self.n_corners,
                "mid_edges": self.n_edges,
            },
            "primal_edges": [list(e) for e in self.primal_edges],
            "corners": [
                {"id": k.id, "u": k.u, "w": k.w, "orientation_eighth": k.orientation_eighth,
                 "mid_edges": self.corner_mid_edges(k.id)}
                for k in self.corners
            ],
            "mid_edges": [
                {"id": m.id, "axis": m.axis, "NW": m.corner_NW, "NE": m.corner_NE,
                 "SE": m.corner_SE, "SW": m.corner_SW}
                for m in self.mid_edges
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def build_domain(width: int, height: int) -> LatticeDomain:
    return LatticeDomain(width, height)


def corner_orientation(domain: LatticeDomain, corner: int) -> int:
    return domain.corner_orientation(corner)


def corner_by_spec(domain: LatticeDomain, vx: int, vy: int, quadrant: str) -> int:
    return domain.corner_by_spec(vx, vy, quadrant)

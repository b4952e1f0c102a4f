"""Weights of the FK and Ising measures, disorder lines and Edwards-Sokal sampling.

The FK weight of a configuration is ``(p/(1-p))**|omega| * 2**k(omega)``
and its loop form is ``t**|omega| * sqrt(2)**l(omega)``; the two differ
by a constant factor for fixed domain and ``p``.  Weights are assembled from
integer exponents in log space so that large enumerations neither
overflow nor underflow before ratios are taken.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .configuration import FkConfig, clusters, extract_loops
from .lattice import LatticeDomain, LatticeError

SQRT2 = math.sqrt(2.0)
P_CRITICAL = SQRT2 / (1.0 + SQRT2)
BETA_CRITICAL = 0.5 * math.log(1.0 + SQRT2)


class ParameterError(ValueError):
    """Parameters outside the physical range."""


class RoutingError(ValueError):
    """No valid (or no pairwise disjoint) defect line for the requested corners."""


# ----------------------------------------------------------------------
# parameters

@dataclass(frozen=True)
class ModelParams:
    """Edge probability ``p``, inverse temperature ``beta`` and loop fugacity ``t``.

    Build instances with :meth:`from_p`, :meth:`from_beta`, :meth:`from_t`
    or :meth:`critical`; the three numbers are kept mutually consistent.
    """

    p: float
    beta: float
    t: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ParameterError(f"p must lie in [0, 1), got {self.p}")
        if self.beta < 0:
            raise ParameterError(f"beta must be non-negative, got {self.beta}")

    @classmethod
    def from_p(cls, p: float) -> "ModelParams":
        p = float(p)
        if not 0.0 <= p < 1.0:
            raise ParameterError(f"p must lie in [0, 1), got {p}")
        return cls(p, -0.5 * math.log1p(-p), p / (SQRT2 * (1.0 - p)))

    @classmethod
    def from_beta(cls, beta: float) -> "ModelParams":
        beta = float(beta)
        if not beta >= 0 or math.isinf(beta):
            raise ParameterError(f"beta must be finite and non-negative, got {beta}")
        p = -math.expm1(-2.0 * beta)
        return cls(p, beta, p / (SQRT2 * (1.0 - p)))

    @classmethod
    def from_t(cls, t: float) -> "ModelParams":
        t = float(t)
        if not t > 0 or math.isinf(t):
            raise ParameterError(f"t must be finite and positive, got {t}")
        if t == 1.0:
            return cls.critical()
        p = SQRT2 * t / (1.0 + SQRT2 * t)
        return cls(p, -0.5 * math.log1p(-p), t)

    @classmethod
    def critical(cls) -> "ModelParams":
        return cls(2.0 - SQRT2, BETA_CRITICAL, 1.0)

    @property
    def is_critical(self) -> bool:
        return abs(self.t - 1.0) < 1e-12

    @property
    def log_ratio(self) -> float:
        """``log(p / (1 - p))``; ``-inf`` at ``p = 0``."""
        if self.p == 0.0:
            return -math.inf
        return math.log(self.p) - math.log1p(-self.p)

    def as_dict(self) -> dict:
        return {"p": self.p, "beta": self.beta, "t": self.t}


def params_from(p=None, beta=None, t=None, critical=False) -> ModelParams:
    """Resolve exactly one of the parameter flags into :class:`ModelParams`."""
    given = [name for name, v in (("p", p), ("beta", beta), ("t", t)) if v is not None]
    if critical:
        given.append("critical")
    if len(given) != 1:
        raise ParameterError(f"give exactly one of p, beta, t, critical (got {given or 'none'})")
    if critical:
        return ModelParams.critical()
    if p is not None:
        return ModelParams.from_p(p)
    if beta is not None:
        return ModelParams.from_beta(beta)
    return ModelParams.from_t(t)


# ----------------------------------------------------------------------
# weights

def log_fk_weight(n_open: int, k: int, params: ModelParams) -> float:
    if n_open == 0:
        return k * math.log(2.0)
    return n_open * params.log_ratio + k * math.log(2.0)


def fk_weight(config: FkConfig, params: ModelParams) -> float:
    """Unnormalised FK weight ``(p/(1-p))**|omega| * 2**k``."""
    k = clusters(config).primal_count
    return math.exp(log_fk_weight(config.n_open, k, params))


def loop_weight(config: FkConfig, params: ModelParams) -> float:
    """Unnormalised loop weight ``t**|omega| * sqrt(2)**l``."""
    if params.t <= 0:
        raise ParameterError("t must be positive")
    n_loops = len(extract_loops(config).loops)
    return math.exp(config.n_open * math.log(params.t) + 0.5 * n_loops * math.log(2.0))


@dataclass(frozen=True)
class SpinConfig:
    domain: LatticeDomain
    spins: tuple[int, ...]

    def __post_init__(self):
        if len(self.spins) != self.domain.n_vertices:
            raise LatticeError("one spin per primal vertex is required")
        if any(s not in (1, -1) for s in self.spins):
            raise ValueError("spins must be +1 or -1")

    @classmethod
    def from_bits(cls, domain: LatticeDomain, bits: int) -> "SpinConfig":
        """Bit ``v`` set means spin +1 at vertex ``v``."""
        return cls(domain, tuple(1 if bits >> v & 1 else -1 for v in range(domain.n_vertices)))

    @classmethod
    def all_plus(cls, domain: LatticeDomain) -> "SpinConfig":
        return cls(domain, (1,) * domain.n_vertices)

    def __getitem__(self, v: int) -> int:
        return self.spins[v]

    def energy(self) -> int:
        """``sum over edges of sigma_x sigma_y``."""
        s = self.spins
        return sum(s[a] * s[b] for a, b in self.domain.primal_edges)

    def domain_walls(self) -> frozenset[int]:
        """Primal edges whose endpoints disagree (their duals form the contour set)."""
        s = self.spins
        return frozenset(e for e, (a, b) in enumerate(self.domain.primal_edges) if s[a] != s[b])


def ising_weight(spins: SpinConfig, params: ModelParams) -> float:
    return math.exp(params.beta * spins.energy())


# ----------------------------------------------------------------------
# disorder lines

@dataclass(frozen=True)
class DefectLine:
    """A corner defect line: ``zeta1 -> w1``, a simple dual path, ``w2 -> zeta2``.

    ``dual_path`` lists dual vertices from ``w(zeta1)`` to ``w(zeta2)``; a
    single entry means both corners share their dual vertex.
    """

    domain: LatticeDomain
    corner_ends: tuple[int, int]
    dual_path: tuple[int, ...]

    def __post_init__(self):
        d = self.domain
        z1, z2 = self.corner_ends
        d.check_corner(z1)
        d.check_corner(z2)
        if z1 == z2:
            raise RoutingError("a defect line needs two distinct corners")
        path = self.dual_path
        if not path or path[0] != d.corner_dual(z1) or path[-1] != d.corner_dual(z2):
            raise RoutingError("dual path must run from w(zeta1) to w(zeta2)")
        if len(set(path)) != len(path):
            raise RoutingError("dual path is not simple")
        for a, b in zip(path, path[1:]):
            if b not in d.dual_neighbors(a):
                raise RoutingError(f"dual vertices {a} and {b} are not adjacent")

    @property
    def dual_edges(self) -> list[tuple[int, int]]:
        return list(zip(self.dual_path, self.dual_path[1:]))

    @property
    def crossed_primal_edges(self) -> tuple[int, ...]:
        out = []
        for a, b in self.dual_edges:
            e = self.domain.primal_edge_crossing(a, b)
            if e is not None:
                out.append(e)
        return tuple(out)

    def reversed(self) -> "DefectLine":
        z1, z2 = self.corner_ends
        return DefectLine(self.domain, (z2, z1), tuple(reversed(self.dual_path)))


def disorder_energy(spins: SpinConfig, line: DefectLine) -> int:
    """``E_lambda[sigma]``: the sum of ``sigma_x sigma_y`` over crossed edges."""
    s = spins.spins
    edges = spins.domain.primal_edges
    return sum(s[edges[e][0]] * s[edges[e][1]] for e in line.crossed_primal_edges)


def _l_path(domain: LatticeDomain, w1: int, w2: int, vertical_first: bool) -> tuple[int, ...]:
    X, Y = domain.dual_xy(w1)
    X2, Y2 = domain.dual_xy(w2)
    path = [w1]
    moves = ("y", "x") if vertical_first else ("x", "y")
    for axis in moves:
        if axis == "x":
            while X != X2:
                X += 1 if X2 > X else -1
                path.append(domain.dual_id(X, Y))
        else:
            while Y != Y2:
                Y += 1 if Y2 > Y else -1
                path.append(domain.dual_id(X, Y))
    return tuple(path)


def route_defect_line(domain: LatticeDomain, z1: int, z2: int,
                      vertical_first: bool = False) -> DefectLine:
    """Deterministic L-shaped line (horizontal leg first unless asked otherwise)."""
    path = _l_path(domain, domain.corner_dual(z1), domain.corner_dual(z2), vertical_first)
    return DefectLine(domain, (z1, z2), path)


def lines_disjoint(lines) -> bool:
    seen: set[int] = set()
    for line in lines:
        vs = set(line.dual_path)
        if vs & seen:
            return False
        seen |= vs
    return True


def route_defect_lines(domain: LatticeDomain, insertions) -> list[DefectLine]:
    """One line per consecutive pair ``(z1, z2), (z3, z4), ...``, pairwise disjoint.

    Each line is tried in both L orientations; the first combination (in
    binary order, horizontal-first preferred) whose dual paths share no
    vertex is returned.
    """
    ins = list(insertions)
    if len(ins) % 2:
        raise RoutingError("defect lines need an even number of corners")
    pairs = [(ins[i], ins[i + 1]) for i in range(0, len(ins), 2)]
    for mask in range(1 << len(pairs)):
        lines = [route_defect_line(domain, a, b, bool(mask >> j & 1))
                 for j, (a, b) in enumerate(pairs)]
        if lines_disjoint(lines):
            return lines
    raise RoutingError("no pairwise disjoint L-shaped routing exists; supply explicit paths")


# ----------------------------------------------------------------------
# Edwards-Sokal coupling

INCOMPATIBLE = None


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``(seed, stream)``; distinct streams are independent."""
    ss = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


def es_sample_spins_given_fk(config: FkConfig, rng: np.random.Generator) -> SpinConfig:
    """Fair independent sign for every primal cluster."""
    labels = clusters(config).primal_label
    n = config.domain.n_vertices
    coins = rng.integers(0, 2, size=n)
    return SpinConfig(config.domain, tuple(1 if coins[labels[v]] else -1 for v in range(n)))


def es_sample_fk_given_spins(spins: SpinConfig, params: ModelParams,
                             rng: np.random.Generator) -> FkConfig:
    """Close disagreeing edges; open agreeing edges independently with probability p."""
    s = spins.spins
    u = rng.random(spins.domain.n_edges)
    bits = 0
    for e, (a, b) in enumerate(spins.domain.primal_edges):
        if s[a] == s[b] and u[e] < params.p:
            bits |= 1 << e
    return FkConfig(spins.domain, bits)


def _twisted_components(config: FkConfig, crossed) -> tuple[list[int], list[int]] | None:
    """Root and relative sign of each vertex, or None when frustrated.

    Along an open edge the spin is copied, or flipped if the edge is crossed
    by the line; this is a two-colouring problem on the open subgraph.
    """
    d = config.domain
    flip = set(crossed)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(d.n_vertices)]
    for e, (a, b) in enumerate(d.primal_edges):
        if config.is_open(e):
            f = -1 if e in flip else 1
            adj[a].append((b, f))
            adj[b].append((a, f))
    root = [-1] * d.n_vertices
    rel = [0] * d.n_vertices
    for v in range(d.n_vertices):
        if root[v] >= 0:
            continue
        root[v], rel[v] = v, 1
        stack = [v]
        while stack:
            x = stack.pop()
            for y, f in adj[x]:
                if root[y] < 0:
                    root[y], rel[y] = v, rel[x] * f
                    stack.append(y)
                elif rel[y] != rel[x] * f:
                    return None
    return root, rel


def es_sample_spins_given_fk_with_defect(config: FkConfig, line: DefectLine,
                                         rng: np.random.Generator):
    """Spins for ``config`` that flip across every crossing of ``line``.

    Returns :data:`INCOMPATIBLE` (None) when some open cycle crosses the
    line an odd number of times, in which case no spin configuration has
    positive weight.
    """
    comps = _twisted_components(config, line.crossed_primal_edges)
    if comps is None:
        return INCOMPATIBLE
    root, rel = comps
    n = config.domain.n_vertices
    coins = rng.integers(0, 2, size=n)
    return SpinConfig(config.domain,
                      tuple(rel[v] * (1 if coins[root[v]] else -1) for v in range(n)))


def compatible_with_defect(config: FkConfig, line: DefectLine) -> bool:
    return _twisted_components(config, line.crossed_primal_edges) is not None


def es_joint_weight(spins: SpinConfig, config: FkConfig, params: ModelParams,
                    line: DefectLine | None = None) -> float:
    """Unnormalised Edwards-Sokal weight ``mu(sigma, omega)`` (with optional line).

    Each open edge carries ``p`` and needs agreeing spins (disagreeing when
    crossed by the line); each closed edge carries ``1 - p``.
    """
    s = spins.spins
    flip = set(line.crossed_primal_edges) if line is not None else set()
    w = 1.0
    for e, (a, b) in enumerate(config.domain.primal_edges):
        if config.is_open(e):
            want = -1 if e in flip else 1
            if s[a] * s[b] != want:
                return 0.0
            w *= params.p
        else:
            w *= 1.0 - params.p
    return w


def spin_configs(domain: LatticeDomain):
    for bits in range(1 << domain.n_vertices):
        yield SpinConfig.from_bits(domain, bits)


def connected_dual(config: FkConfig, w1: int, w2: int) -> bool:
    labels = clusters(config).dual_label
    return labels[w1] == labels[w2]


__all__ = [
    "BETA_CRITICAL", "DefectLine", "INCOMPATIBLE", "ModelParams", "P_CRITICAL",
    "ParameterError", "RoutingError", "SpinConfig", "compatible_with_defect",
    "connected_dual", "disorder_energy", "es_joint_weight", "es_sample_fk_given_spins",
    "es_sample_spins_given_fk", "es_sample_spins_given_fk_with_defect", "fk_weight",
    "ising_weight", "lines_disjoint", "log_fk_weight", "loop_weight", "make_rng",
    "params_from", "route_defect_line", "route_defect_lines", "spin_configs",
]

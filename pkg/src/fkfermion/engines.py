"""Exhaustive enumeration and the Edwards-Sokal Markov chain.

Enumeration walks all ``2**|E|`` configurations in fixed-size blocks.  Each
block is summed in index order and block sums are combined in block order,
so the result is bit-identical whatever the number of shards or threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import math
import sys
from typing import Callable, Iterator

import numpy as np

from .configuration import ClusterLabels, FkConfig, LoopSet, clusters, extract_loops
from .lattice import LatticeDomain
from .measures import ModelParams, SpinConfig, make_rng

DEFAULT_MAX_EDGES = 26
# configuration tables (loops, cluster counts) are memoised up to this size
CACHE_MAX_EDGES = 16
BLOCK_BITS = 8


class EnumerationCapError(RuntimeError):
    """The domain has more edges than the enumeration cap allows."""


@dataclass(frozen=True)
class EnumerationPlan:
    """Partition of ``0 .. 2**edge_count - 1`` into contiguous, block-aligned shards."""

    domain: LatticeDomain
    shard_count: int
    edge_count: int
    block_size: int
    shards: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, domain: LatticeDomain, shard_count: int = 1,
              max_edges: int = DEFAULT_MAX_EDGES) -> "EnumerationPlan":
        n_edges = domain.n_edges
        if n_edges > max_edges:
            raise EnumerationCapError(
                f"{n_edges} edges exceed the enumeration cap of {max_edges}"
            )
        if shard_count < 1:
            raise ValueError("shard_count must be positive")
        total = 1 << n_edges
        block = 1 << min(BLOCK_BITS, n_edges)
        n_blocks = total // block
        shard_count = min(shard_count, n_blocks)
        bounds = [block * (n_blocks * i // shard_count) for i in range(shard_count + 1)]
        shards = tuple((bounds[i], bounds[i + 1]) for i in range(shard_count))
        return cls(domain, shard_count, n_edges, block, shards)

    @property
    def total(self) -> int:
        return 1 << self.edge_count


@dataclass(frozen=True)
class ConfigTable:
    """Per-configuration data that does not depend on the parameters."""

    n_open: np.ndarray
    primal_count: np.ndarray
    loops: tuple[LoopSet, ...]
    labels: tuple[ClusterLabels, ...]


@lru_cache(maxsize=8)
def config_table(domain: LatticeDomain) -> ConfigTable:
    if domain.n_edges > CACHE_MAX_EDGES:
        raise EnumerationCapError("configuration tables are only kept for small domains")
    n_open, counts, loops, labels = [], [], [], []
    for bits in range(1 << domain.n_edges):
        config = FkConfig(domain, bits)
        lab = clusters(config)
        n_open.append(config.n_open)
        counts.append(lab.primal_count)
        loops.append(extract_loops(config))
        labels.append(lab)
    return ConfigTable(np.array(n_open), np.array(counts), tuple(loops), tuple(labels))


def log_scale(domain: LatticeDomain, params: ModelParams) -> float:
    """An upper bound on every log-weight, subtracted before exponentiating."""
    lr = params.log_ratio
    return domain.n_vertices * math.log(2.0) + max(0.0, domain.n_edges * lr)


def weights(domain: LatticeDomain, params: ModelParams, n_open, primal_count) -> np.ndarray:
    """Scaled FK weights ``exp(log w - log_scale)`` from integer exponent arrays."""
    n_open = np.asarray(n_open)
    lr = params.log_ratio
    logw = np.asarray(primal_count) * math.log(2.0) - log_scale(domain, params)
    if math.isinf(lr):
        return np.where(n_open == 0, np.exp(logw), 0.0)
    return np.exp(logw + n_open * lr)


@dataclass(frozen=True)
class Reduction:
    """Scaled partition function and weighted sum; true values carry ``exp(log_scale)``."""

    Z: float
    total: complex | np.ndarray
    log_scale: float
    n_configs: int

    @property
    def mean(self):
        return self.total / self.Z

    def __iter__(self):
        yield self.Z
        yield self.total


Functional = Callable[[FkConfig, LoopSet], "complex | np.ndarray"]


def _reduce_range(domain, params, functional, start, stop, block, table, needs_loops):
    out = []
    scale = log_scale(domain, params)
    lr = params.log_ratio
    log2 = math.log(2.0)
    for b0 in range(start, stop, block):
        z = 0.0
        acc = 0.0
        for bits in range(b0, b0 + block):
            config = FkConfig(domain, bits)
            if table is not None:
                n_open = int(table.n_open[bits])
                k = int(table.primal_count[bits])
                loops = table.loops[bits]
            else:
                n_open = config.n_open
                k = clusters(config).primal_count
                loops = extract_loops(config) if needs_loops else None
            if n_open and math.isinf(lr):
                continue
            w = math.exp((n_open * lr if n_open else 0.0) + k * log2 - scale)
            z += w
            acc = acc + w * functional(config, loops)
        out.append((z, acc))
    return out


def enumerate_reduce(domain: LatticeDomain, params: ModelParams, functional: Functional,
                     shards: int = 1, threads: int = 1, max_edges: int = DEFAULT_MAX_EDGES,
                     needs_loops: bool = True, progress: bool = False) -> Reduction:
    """Exact ``Z`` and ``sum_omega w(omega) * functional(omega)`` over all configurations.

    ``functional`` receives the configuration and its loops (None when
    ``needs_loops`` is false) and may return a scalar or a numpy array.
    """
    plan = EnumerationPlan.build(domain, shards, max_edges)
    table = config_table(domain) if domain.n_edges <= CACHE_MAX_EDGES else None

    def work(i):
        start, stop = plan.shards[i]
        res = _reduce_range(domain, params, functional, start, stop, plan.block_size,
                            table, needs_loops)
        if progress:
            print(f"shard {i + 1}/{plan.shard_count} done", file=sys.stderr)
        return res

    if threads > 1 and plan.shard_count > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(plan.shard_count)))
    else:
        parts = [work(i) for i in range(plan.shard_count)]
    Z = 0.0
    total = 0.0
    for part in parts:
        for z, acc in part:
            Z += z
            total = total + acc
    return Reduction(Z, total, log_scale(domain, params), plan.total)


def exact_distribution(domain: LatticeDomain, params: ModelParams) -> np.ndarray:
    """``rho_p(omega)`` for every configuration, indexed by its bit pattern."""
    if domain.n_edges > CACHE_MAX_EDGES:
        raise EnumerationCapError("exact distribution is only tabulated for small domains")
    table = config_table(domain)
    w = weights(domain, params, table.n_open, table.primal_count)
    return w / w.sum()


# ----------------------------------------------------------------------
# Markov chain

@dataclass
class ChainState:
    config: FkConfig
    spins: SpinConfig
    stream: int
    sweep: int = 0
    burn_in: int = 0


@dataclass
class ESChain:
    """Alternate cluster-spin resampling and edge resampling.

    Random numbers are drawn in blocks from a Philox stream keyed by
    ``(seed, stream)``, so a chain is a deterministic function of those two
    integers.
    """

    domain: LatticeDomain
    params: ModelParams
    seed: int
    stream: int = 0
    bits: int = 0
    block: int = 4096
    sweeps_done: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)
    _buffer: list = field(init=False, repr=False, default_factory=list)
    _labels: dict = field(init=False, repr=False, default_factory=dict)
    _spin_bits: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        self._rng = make_rng(self.seed, self.stream)
        self._edges = self.domain.primal_edges
        self._pos = 0

    def _refill(self):
        d = self.domain
        coins = self._rng.integers(0, 2, size=(self.block, d.n_vertices), dtype=np.uint8)
        opens = self._rng.random((self.block, d.n_edges)) < self.params.p
        packed = np.packbits(opens, axis=1, bitorder="little")
        masks = [int.from_bytes(row.tobytes(), "little") for row in packed]
        self._buffer = list(zip(coins.tolist(), masks))
        self._pos = 0

    def _cluster_labels(self, bits: int):
        labels = self._labels.get(bits)
        if labels is None:
            if len(self._labels) > 1 << 16:
                self._labels.clear()
            labels = clusters(FkConfig(self.domain, bits)).primal_label
            self._labels[bits] = labels
        return labels

    def sweep(self) -> int:
        if self._pos >= len(self._buffer):
            self._refill()
        coins, mask = self._buffer[self._pos]
        self._pos += 1
        labels = self._cluster_labels(self.bits)
        spin = [coins[lab] for lab in labels]
        new = 0
        for e, (a, b) in enumerate(self._edges):
            if spin[a] == spin[b] and mask >> e & 1:
                new |= 1 << e
        self.bits = new
        self._spin_bits = sum(1 << v for v, s in enumerate(spin) if s)
        self.sweeps_done += 1
        return new

    def state(self, burn_in: int = 0) -> ChainState:
        return ChainState(FkConfig(self.domain, self.bits),
                          SpinConfig.from_bits(self.domain, self._spin_bits),
                          self.stream, self.sweeps_done, burn_in)


def run_chain_bits(domain: LatticeDomain, params: ModelParams, n_sweeps: int, burn_in: int,
                   seed: int, stream: int = 0) -> Iterator[int]:
    """Configuration bit patterns after each sweep past ``burn_in``."""
    if n_sweeps <= burn_in:
        raise ValueError("n_sweeps must exceed burn_in")
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    chain = ESChain(domain, params, seed, stream)
    for _ in range(burn_in):
        chain.sweep()
    for _ in range(n_sweeps - burn_in):
        yield chain.sweep()


def run_chain(domain: LatticeDomain, params: ModelParams, n_sweeps: int, burn_in: int,
              seed: int, stream: int = 0) -> Iterator[FkConfig]:
    for bits in run_chain_bits(domain, params, n_sweeps, burn_in, seed, stream):
        yield FkConfig(domain, bits)


def chain_histogram(domain: LatticeDomain, params: ModelParams, n_sweeps: int, burn_in: int,
                    seed: int, stream: int = 0) -> np.ndarray:
    counts = np.zeros(1 << domain.n_edges, dtype=np.int64)
    for bits in run_chain_bits(domain, params, n_sweeps, burn_in, seed, stream):
        counts[bits] += 1
    return counts


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def batch_means(values, n_batches: int = 32) -> tuple[float, float]:
    """Mean and batch-means standard error of a correlated series."""
    x = np.asarray(values, dtype=float)
    if len(x) < n_batches:
        raise ValueError("fewer samples than batches")
    size = len(x) // n_batches
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(x.mean()), float(means.std(ddof=1) / math.sqrt(n_batches))

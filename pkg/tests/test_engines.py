import numpy as np
import pytest

from fkfermion.configuration import FkConfig
from fkfermion.engines import (EnumerationCapError, EnumerationPlan, ESChain, batch_means,
                               chain_histogram, enumerate_reduce, exact_distribution,
                               run_chain_bits, total_variation)
from fkfermion.lattice import build_domain
from fkfermion.measures import ModelParams, fk_weight


def test_plan_covers_every_configuration(d3):
    for shards in (1, 3, 7, 64):
        plan = EnumerationPlan.build(d3, shards)
        assert plan.shards[0][0] == 0 and plan.shards[-1][1] == plan.total
        for (a, b), (c, _) in zip(plan.shards, plan.shards[1:]):
            assert b == c and (b - a) % plan.block_size == 0


def test_cap_refusal():
    with pytest.raises(EnumerationCapError):
        EnumerationPlan.build(build_domain(4, 4), max_edges=20)


def test_partition_function_matches_direct_sum(d2):
    params = ModelParams.from_p(0.42)
    red = enumerate_reduce(d2, params, lambda c, loops: 1.0)
    direct = sum(fk_weight(FkConfig(d2, b), params) for b in range(16))
    assert red.Z * np.exp(red.log_scale) == pytest.approx(direct, rel=1e-12)
    assert red.mean == pytest.approx(1.0)
    assert red.n_configs == 16


def test_results_independent_of_sharding(d3, crit):
    f = lambda c, loops: float(c.n_open)  # noqa: E731
    ref = enumerate_reduce(d3, crit, f)
    for shards, threads in ((4, 1), (5, 3), (16, 4)):
        red = enumerate_reduce(d3, crit, f, shards=shards, threads=threads)
        assert red.Z == ref.Z and red.total == ref.total


def test_p_zero_keeps_only_the_empty_configuration(d2):
    probs = exact_distribution(d2, ModelParams.from_p(0.0))
    assert probs[0] == 1.0 and probs[1:].sum() == 0.0


def test_chain_is_reproducible(d2, crit):
    a = list(run_chain_bits(d2, crit, 300, 100, seed=3))
    b = list(run_chain_bits(d2, crit, 300, 100, seed=3))
    c = list(run_chain_bits(d2, crit, 300, 100, seed=3, stream=1))
    assert a == b and a != c and len(a) == 200
    with pytest.raises(ValueError):
        list(run_chain_bits(d2, crit, 10, 10, seed=0))


def test_chain_state_is_consistent(d3, crit):
    chain = ESChain(d3, crit, seed=9)
    for _ in range(50):
        chain.sweep()
    state = chain.state()
    for e, (a, b) in enumerate(d3.primal_edges):
        if state.config.is_open(e):
            assert state.spins[a] == state.spins[b]
    assert state.sweep == 50


def test_short_chain_is_close_to_stationary(d2):
    params = ModelParams.from_p(0.5)
    hist = chain_histogram(d2, params, 60_000, 1000, seed=4)
    assert total_variation(hist / hist.sum(), exact_distribution(d2, params)) < 0.02


def test_batch_means():
    rng = np.random.default_rng(0)
    x = rng.normal(size=32_000)
    mean, err = batch_means(x, 32)
    assert abs(mean) < 5 * err
    assert err == pytest.approx(1 / np.sqrt(32_000), rel=0.5)
    with pytest.raises(ValueError):
        batch_means(x[:10], 32)

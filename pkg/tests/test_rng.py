"""Counter-based walk streams: determinism, seekability, antithetic pairing."""

import numpy as np
import pytest

from spinctrl import rng as srng

POLICY = srng.SeedPolicy(1234)
CTX = (srng.NS_ESTIMATOR, 0, 0, 0, 0)


def test_entries_are_rademacher():
    tau = 0.01
    pairs = POLICY.walk_pairs(CTX, 16, 20, 9, tau)
    assert pairs.shape == (16, 20, 9)
    assert np.all(np.isin(pairs, [-np.sqrt(tau), np.sqrt(tau)]))
    # second moment is exact, not just unbiased
    assert np.allclose(pairs**2, tau)


def test_mean_within_clt_bound():
    tau = 0.04
    pairs = POLICY.walk_pairs(CTX, 500, 20, 10, tau)  # 1e5 entries
    n = pairs.size
    assert abs(pairs.mean()) < 4.0 * np.sqrt(tau) / np.sqrt(n)


def test_walk_pairs_deterministic_and_prefix_stable():
    a = POLICY.walk_pairs(CTX, 5, 7, 3, 0.1)
    b = POLICY.walk_pairs(CTX, 5, 7, 3, 0.1)
    assert np.array_equal(a, b)
    head = POLICY.walk_pairs(CTX, 3, 7, 3, 0.1)
    assert np.array_equal(a[:3], head)


def test_sample_walk_matches_batch_layout():
    # sample 2p reads pair span p via advance(), 2p+1 is its negation
    steps, dims, tau = 11, 6, 0.2
    batch = srng.signed_batch(POLICY.walk_pairs(CTX, 4, steps, dims, tau))
    for k in range(8):
        walk = POLICY.sample_walk(CTX, k, steps, dims, tau)
        assert walk.steps == steps
        assert np.array_equal(walk.xi, batch[k]), f"sample {k} diverges"


def test_sample_walk_spans_multiple_blocks():
    # steps*dims > 256 forces more than one 256-bit block per pair
    steps, dims = 40, 9
    assert steps * dims > 256
    batch = srng.signed_batch(POLICY.walk_pairs(CTX, 3, steps, dims, 0.01))
    assert np.array_equal(POLICY.sample_walk(CTX, 4, steps, dims, 0.01).xi, batch[4])


def test_antithetic_involution_and_moments():
    walk = POLICY.sample_walk(CTX, 0, 10, 3, 0.5)
    anti = srng.antithetic(walk)
    assert np.array_equal(srng.antithetic(anti).xi, walk.xi)
    assert np.array_equal(anti.xi, -walk.xi)
    # negation preserves the symmetric law entrywise
    assert np.allclose(anti.xi**2, walk.xi**2)


def test_signed_batch_interleave():
    base = POLICY.walk_pairs(CTX, 3, 4, 2, 1.0)
    full = srng.signed_batch(base)
    assert full.shape == (6, 4, 2)
    assert np.array_equal(full[0::2], base)
    assert np.array_equal(full[1::2], -base)


def test_pair_average_of_affine_functional_is_constant():
    # antithetic pairs cancel the linear part exactly
    rng = np.random.default_rng(3)
    coef = rng.normal(size=(8, 5))
    batch = srng.signed_batch(POLICY.walk_pairs(CTX, 32, 8, 5, 0.3))
    vals = 2.5 + np.einsum("sd,ksd->k", coef, batch)
    pair_avg = 0.5 * (vals[0::2] + vals[1::2])
    assert np.allclose(pair_avg, 2.5, atol=1e-12)


def test_contexts_are_independent_streams():
    a = POLICY.walk_pairs((srng.NS_ESTIMATOR, 0, 0, 0, 0), 4, 10, 3, 0.1)
    b = POLICY.walk_pairs((srng.NS_ESTIMATOR, 0, 0, 0, 1), 4, 10, 3, 0.1)
    c = POLICY.walk_pairs((srng.NS_OUTER, 0), 4, 10, 3, 0.1)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    other = srng.SeedPolicy(1235).walk_pairs((srng.NS_ESTIMATOR, 0, 0, 0, 0), 4, 10, 3, 0.1)
    assert not np.array_equal(a, other)


def test_outer_walk_is_sample_zero_of_outer_stream():
    w = POLICY.outer_walk(12, 9, 0.05, run_id=3)
    direct = POLICY.sample_walk((srng.NS_OUTER, 3), 0, 12, 9, 0.05)
    assert np.array_equal(w.xi, direct.xi)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        POLICY.walk_pairs(CTX, 0, 5, 3, 0.1)
    with pytest.raises(ValueError):
        POLICY.walk_pairs(CTX, 1, 5, 3, 0.0)
    with pytest.raises(ValueError):
        POLICY.sample_walk(CTX, -1, 5, 3, 0.1)
    with pytest.raises(ValueError):
        POLICY.walk_pairs((1, -2), 1, 5, 3, 0.1)


def test_blocks_per_pair():
    assert srng._blocks_per_pair(1, 1) == 1
    assert srng._blocks_per_pair(256, 1) == 1
    assert srng._blocks_per_pair(257, 1) == 2
    assert srng._blocks_per_pair(50, 9) == 2  # 450 bits

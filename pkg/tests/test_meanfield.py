"""Generation-growth sampling on complete graphs without materialization."""

from __future__ import annotations

import math

import numpy as np
import pytest

from volumelab import (
    DomainError,
    ModelParams,
    complete_cluster_sizes,
    enumerate_measure,
    exact_tail,
    meanfield_subcritical_scan,
    meanfield_tail,
    named_graph,
)


def test_degenerate_retention_probabilities():
    assert set(complete_cluster_sizes(5, 0.0, 100, seed=1)) == {1}
    assert set(complete_cluster_sizes(5, 1.0, 100, seed=1)) == {5}


def test_sampler_is_deterministic():
    a = complete_cluster_sizes(100, 0.008, 1000, seed=4)
    b = complete_cluster_sizes(100, 0.008, 1000, seed=4)
    assert np.array_equal(a, b)
    c = complete_cluster_sizes(100, 0.008, 1000, seed=4, key=1)
    assert not np.array_equal(a, c)


def test_rejects_out_of_range_probability():
    with pytest.raises(DomainError):
        complete_cluster_sizes(10, 1.5, 10, seed=0)


def test_growth_sampler_agrees_with_enumeration_on_k3(triangle):
    # dual route: the same tail from exhaustive enumeration of the triangle
    p = 0.35
    sizes = complete_cluster_sizes(3, p, 200_000, seed=11)
    m = enumerate_measure(triangle, ModelParams(beta=-math.log1p(-p), q=1.0))
    oracle = exact_tail(m, 0)
    for n in (2, 3):
        assert (sizes >= n).mean() == pytest.approx(oracle.value(n), abs=5e-3)


def test_meanfield_tail_moments_are_consistent():
    tail, moments = meanfield_tail(2000, 0.5 / 2000, 40_000, seed=6)
    mean, hw = tail.mean()
    assert moments.estimate(1) == pytest.approx(mean)
    assert hw > 0


def test_subcritical_mean_matches_branching_limit():
    # E|K| -> 1/(1 - c) below the critical density
    vals, means, tables = meanfield_subcritical_scan(
        2000, [0.25, 0.5], 20_000, seed=8
    )
    assert vals == [0.25 / 2000, 0.5 / 2000]
    assert means[0] == pytest.approx(4.0 / 3.0, abs=0.05)
    assert means[1] == pytest.approx(2.0, abs=0.08)
    assert tables[0].estimate(1) == pytest.approx(means[0])

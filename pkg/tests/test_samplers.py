"""Dynamics and exact sampling: heat-bath, coupled sheets, backward coupling."""

from __future__ import annotations

import math

import numpy as np
import pytest

from volumelab import (
    BudgetError,
    LatticeSpec,
    ModelParams,
    build_lattice,
    cftp_sample,
    cftp_sample_batch,
    enumerate_measure,
    glauber_size_samples,
    named_graph,
    sample_bernoulli_coupled,
    validate_sampler,
)
from volumelab.samplers import heat_bath_invariance_error, heat_bath_probs

FK = ModelParams(beta=1.0, q=2.0)


def test_heat_bath_reduces_to_bernoulli_at_q1(triangle, half_params):
    p_conn, p_disc = heat_bath_probs(triangle, half_params)
    assert np.allclose(p_conn, 0.5)
    assert np.allclose(p_disc, 0.5)


def test_heat_bath_separates_probabilities_at_q2(triangle):
    p_conn, p_disc = heat_bath_probs(triangle, FK)
    w = math.expm1(1.0)
    assert np.allclose(p_conn, w / (w + 1.0))
    assert np.allclose(p_disc, w / (w + 2.0))
    assert np.all(p_conn > p_disc)


def test_exact_measure_is_heat_bath_invariant(triangle):
    m = enumerate_measure(triangle, FK)
    assert heat_bath_invariance_error(m) < 1e-12


def test_coupled_sheet_is_monotone_in_p(triangle):
    sheet = sample_bernoulli_coupled(triangle, seed=3, n_replicas=200)
    lo = sheet.configs_at_p(0.3)
    hi = sheet.configs_at_p(0.7)
    assert np.all(lo <= hi)
    assert lo.mean() < hi.mean()


def test_glauber_samples_are_deterministic(triangle):
    a = glauber_size_samples(triangle, FK, 0, 300, burn_in=32, thinning=2, seed=9)
    b = glauber_size_samples(triangle, FK, 0, 300, burn_in=32, thinning=2, seed=9)
    assert np.array_equal(a, b)
    assert a.shape == (300,)
    assert set(np.unique(a)) <= {1, 2, 3}


def test_glauber_matches_enumeration(triangle):
    rep = validate_sampler(triangle, FK, n_samples=20_000, seed=7, kind="glauber")
    assert rep.tv < 0.02
    assert rep.kind == "glauber"


def test_miscalibrated_control_is_detected(triangle):
    rep = validate_sampler(
        triangle, FK, n_samples=20_000, seed=7, kind="glauber", miscalibrated=True
    )
    assert rep.tv > 0.05


def test_cftp_matches_enumeration(triangle):
    rep = validate_sampler(triangle, FK, n_samples=20_000, seed=7, kind="cftp")
    assert rep.tv < 0.02


def test_cftp_batch_is_deterministic(triangle):
    a = cftp_sample_batch(triangle, FK, 64, seed=5)
    b = cftp_sample_batch(triangle, FK, 64, seed=5)
    assert np.array_equal(a, b)
    assert a.shape == (64,)


def test_cftp_single_sample_shape(triangle):
    bits = cftp_sample(triangle, FK, seed=5)
    assert bits.shape == (triangle.n_edges,)
    assert set(np.unique(bits)) <= {0, 1}


def test_cftp_budget_error_names_the_horizon():
    box = build_lattice(LatticeSpec(dimension=2, lengths=(2, 2), wrap=False))
    hot = ModelParams(beta=2.0, q=3.0)
    with pytest.raises(BudgetError):
        cftp_sample_batch(box, hot, 4, seed=1, t_max=1)
    with pytest.raises(BudgetError):
        cftp_sample(box, hot, seed=1, t_max=1)


def test_cftp_batch_returns_valid_codes(triangle):
    codes = cftp_sample_batch(triangle, FK, 40, seed=11, batch_size=8)
    assert codes.min() >= 0
    assert codes.max() < 2**triangle.n_edges

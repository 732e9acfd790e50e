"""Exhaustive-enumeration oracle: weights, tails, covariances, certificates."""

from __future__ import annotations

import math

import numpy as np
import pytest

from volumelab import (
    DomainError,
    EnumerationCapError,
    InvalidSpecError,
    ModelParams,
    check_fkg_lattice,
    check_monotonic,
    derivative_gap_ratio,
    enumerate_measure,
    exact_covariance,
    exact_event_prob,
    exact_radius_tail,
    exact_tail,
    named_graph,
    verify_derivative_formula,
)
from volumelab.exact import config_bits, config_code

# weights q^#clusters (e^{beta J} - 1)^#open on the single edge at
# q = 2, beta = ln 3: closed -> 2 clusters -> 4, open -> 1 cluster -> 2*2;
# partition function 8, so each state has probability exactly 1/2
SINGLE_EDGE_Q2 = ModelParams(beta=math.log(3.0), q=2.0)


def _edge_count(bits: np.ndarray) -> float:
    return float(bits.sum())


def test_model_params_rejects_bad_inputs():
    with pytest.raises(InvalidSpecError):
        ModelParams(beta=-0.1, q=1.0)
    with pytest.raises(InvalidSpecError):
        ModelParams(beta=1.0, q=0.5)


def test_single_edge_partition_function():
    m = enumerate_measure(named_graph("single-edge"), SINGLE_EDGE_Q2)
    assert m.n_configs == 2
    assert np.allclose(m.probs, [0.5, 0.5])


def test_q1_marginal_is_bernoulli(triangle, half_params):
    m = enumerate_measure(triangle, half_params)
    assert exact_event_prob(m, lambda bits: bits[0] == 1) == pytest.approx(0.5)


def test_triangle_dyadic_tail(triangle_half):
    t = exact_tail(triangle_half, 0)
    # 8 equally likely configurations: 6 join vertex 0 to a neighbor,
    # 4 connect the whole triangle
    assert t.value(1) == pytest.approx(1.0)
    assert t.value(2) == pytest.approx(0.75)
    assert t.value(3) == pytest.approx(0.5)
    assert t.half_width(2) == 0.0
    assert t.provenance == "exact"
    mean, hw = t.mean()
    assert mean == pytest.approx(2.25)
    assert hw == 0.0


def test_path_tail_depends_on_the_vertex(half_params):
    m = enumerate_measure(named_graph("path-3"), half_params)
    end = exact_tail(m, 0)
    middle = exact_tail(m, 1)
    assert end.value(2) == pytest.approx(0.5)
    assert end.value(3) == pytest.approx(0.25)
    assert middle.value(2) == pytest.approx(0.75)


def test_radius_tail_middle_of_path(half_params):
    m = enumerate_measure(named_graph("path-3"), half_params)
    r = exact_radius_tail(m, 1)
    # reaches distance 1 unless both incident edges are closed
    assert r.value(1) == pytest.approx(0.75)
    assert r.n_max == 2


def test_radius_metrics_diverge_on_the_paw(half_params):
    # paw = triangle 0-1-2 with pendant 3 on 2; with only the open path
    # 0-1-2 the ambient distance from 0 to 2 is 1 but the open path is 2
    g = named_graph("paw")
    m = enumerate_measure(g, half_params)
    ambient = exact_radius_tail(m, 0, metric="ambient")
    intrinsic = exact_radius_tail(m, 0, metric="intrinsic")
    assert ambient.value(2) == pytest.approx(5.0 / 16.0)
    assert intrinsic.value(2) == pytest.approx(7.0 / 16.0)
    assert intrinsic.value(3) == pytest.approx(1.0 / 16.0)
    assert ambient.value(3) == 0.0
    for n in (1, 2, 3):
        assert intrinsic.value(n) >= ambient.value(n)


def test_edge_indicator_variance_at_q1(triangle_half):
    v = exact_covariance(triangle_half, lambda bits: float(bits[0]), 0)
    assert v == pytest.approx(0.25)


def test_tails_increase_with_beta(triangle):
    lo = exact_tail(enumerate_measure(triangle, ModelParams(beta=0.4, q=2.0)), 0)
    hi = exact_tail(enumerate_measure(triangle, ModelParams(beta=0.9, q=2.0)), 0)
    for n in (2, 3):
        assert hi.value(n) > lo.value(n)


def test_derivative_formula_single_edge_oracle():
    # E[open edges] = 1/2 at beta = ln 3; d/dbeta E = J/(1-e^{-beta J}) Var
    # = (3/2)(1/4) = 3/8
    rep = verify_derivative_formula(
        named_graph("single-edge"), SINGLE_EDGE_Q2, _edge_count, step=1e-4
    )
    assert rep.covariance_sum == pytest.approx(3.0 / 8.0, abs=1e-12)
    assert rep.finite_difference == pytest.approx(3.0 / 8.0, abs=1e-6)


def test_derivative_gap_shrinks_quadratically():
    ratio = derivative_gap_ratio(
        named_graph("single-edge"), SINGLE_EDGE_Q2, _edge_count, step=1e-2
    )
    assert 3.5 <= ratio <= 4.5


def test_monotonicity_certificates_pass_for_fk_weights(triangle_half):
    assert check_monotonic(triangle_half).passed
    assert check_fkg_lattice(triangle_half).passed


def test_planted_parity_weights_are_detected():
    # single-edge-pair weight table favoring odd parity; fails both lattice
    # conditions and yields a concrete witness
    planted = np.array([1.0, 2.0, 2.0, 1.0])
    mono = check_monotonic(planted)
    fkg = check_fkg_lattice(planted)
    assert not mono.passed
    assert not fkg.passed
    assert mono.worst_violation > 0
    assert mono.witness is not None


def test_enumeration_cap_guards_large_graphs():
    from volumelab import LatticeSpec, build_lattice

    g = build_lattice(LatticeSpec(dimension=2, lengths=(4, 4), wrap=True))
    with pytest.raises(EnumerationCapError):
        enumerate_measure(g, ModelParams(beta=1.0, q=2.0))


def test_config_code_round_trip():
    for code in (0, 1, 5, 7):
        assert config_code(config_bits(code, 3)) == code


def test_cluster_size_table_is_a_distribution(triangle_half):
    sizes = triangle_half.cluster_size_table(0)
    assert sizes.shape == (8,)
    assert set(np.unique(sizes)) <= {1, 2, 3}
    assert float(triangle_half.probs.sum()) == pytest.approx(1.0)


def test_exact_tail_rejects_bad_vertex(triangle_half):
    with pytest.raises((InvalidSpecError, DomainError)):
        exact_tail(triangle_half, 7)

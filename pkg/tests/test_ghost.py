"""Green-field coupling: revealments, two-function bound, covariance bound."""

from __future__ import annotations

import math

import numpy as np
import pytest

from volumelab import (
    DomainError,
    GhostParams,
    InvalidSpecError,
    ModelParams,
    enumerate_measure,
    exact_tail,
    named_graph,
    revealment_exact,
    truncated_magnetization,
    verify_osss,
    verify_prop31,
)
from volumelab.ghost import (
    ExplorationTree,
    GhostLab,
    covr,
    revealment_bound_check,
    serialize_forest,
    truncated_magnetization_bound,
)

GP = GhostParams(lam=1.0, n=2)


def test_ghost_params_validate():
    with pytest.raises(InvalidSpecError):
        GhostParams(lam=0.0, n=2)
    with pytest.raises(InvalidSpecError):
        GhostParams(lam=1.0, n=0)


def test_green_probability_is_capped_by_intensity():
    gp = GhostParams(lam=1.5, n=7)
    assert gp.h == pytest.approx(-math.expm1(-1.5 / 7))
    assert gp.h <= 1.5 / 7


def test_covr_equals_twice_covariance_for_binary_functions():
    probs = np.full(4, 0.25)
    f = np.array([1.0, 0.0, 1.0, 0.0])
    g = np.array([1.0, 1.0, 0.0, 0.0])
    cov = probs @ (f * g) - (probs @ f) * (probs @ g)
    assert covr(probs, f, g) == pytest.approx(2.0 * cov)


def test_truncated_magnetization_dual_route(triangle, half_params, triangle_half):
    tm = truncated_magnetization(triangle, half_params, GP, 0, triangle_half)
    # independent route through the exact tail: pmf(k) = P(>=k) - P(>=k+1)
    tail = exact_tail(triangle_half, 0)
    alt = 0.0
    for k in range(1, tail.n_max + 1):
        nxt = tail.value(k + 1) if k < tail.n_max else 0.0
        alt += (tail.value(k) - nxt) * -math.expm1(-GP.lam * k / GP.n)
    assert tm == pytest.approx(alt, abs=1e-12)


def test_magnetization_bound_holds_exactly(triangle, half_params, triangle_half):
    lab = GhostLab(triangle, half_params, GP, triangle_half)
    passed, value, bound = truncated_magnetization_bound(lab, 0)
    assert passed
    assert value <= bound + 1e-12


def test_revealments_are_probabilities(triangle, half_params, triangle_half):
    prof = revealment_exact(triangle, half_params, GP, measure=triangle_half)
    assert np.all(prof.edge_revealments >= 0.0)
    assert np.all(prof.edge_revealments <= 1.0)
    assert prof.max_edge_revealment == pytest.approx(prof.edge_revealments.max())


def test_revealment_bound_check(triangle, half_params, triangle_half):
    lab = GhostLab(triangle, half_params, GP, triangle_half)
    passed, max_reveal, bound = revealment_bound_check(lab)
    assert passed
    assert max_reveal <= bound + 1e-12


def test_exploration_trace_stops_at_a_closed_root(triangle):
    tree = ExplorationTree(triangle, 0)
    events = tree.trace(np.array([1, 1, 1]), np.array([0, 0, 0]))
    # closed root vertex: one query, nothing else revealed
    assert len(events) == 1


def test_exploration_trace_reveals_incident_edges(triangle):
    from volumelab.ghost import EDGE, VERTEX

    tree = ExplorationTree(triangle, 0)
    events = tree.trace(np.array([1, 0, 0]), np.array([1, 0, 0]))
    kinds = [kind for (kind, _), _ in events]
    assert kinds[0] == VERTEX
    assert EDGE in kinds


def test_serialized_forest_preserves_queried_coordinates(triangle):
    trees = [ExplorationTree(triangle, u) for u in range(3)]
    st = serialize_forest(trees)
    omega = np.array([1, 0, 1])
    eta = np.array([1, 1, 0])
    union = set()
    for tree in trees:
        union |= {coord for coord, _ in tree.trace(omega, eta)}
    assert st.queried_coords(omega, eta) == union
    assert st.halt_time(omega, eta) >= 1


def test_osss_report_on_the_triangle(triangle, half_params, triangle_half):
    rep = verify_osss(triangle, half_params, GP, v=0, n=2, measure=triangle_half)
    assert rep.passed
    assert rep.lhs <= rep.rhs + rep.tolerance
    # f never reads the vertex sheet, so vertex covariances vanish
    assert rep.max_vertex_cov_abs == pytest.approx(0.0, abs=1e-12)


def test_prop31_report_on_the_triangle(triangle, half_params, triangle_half):
    rep = verify_prop31(triangle, half_params, GP, v=0, n=2, measure=triangle_half)
    assert rep.passed
    assert rep.lhs >= rep.rhs - rep.tolerance


def test_prop31_requires_matching_volume_scale(triangle, half_params, triangle_half):
    with pytest.raises(InvalidSpecError):
        verify_prop31(triangle, half_params, GP, v=0, n=3, measure=triangle_half)


def test_osss_rejects_nonpositive_n(triangle, half_params, triangle_half):
    with pytest.raises(DomainError):
        verify_osss(triangle, half_params, GP, v=0, n=0, measure=triangle_half)

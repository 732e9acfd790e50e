"""Differential-inequality checks against exhaustively enumerated curves."""

from __future__ import annotations

import math

import numpy as np
import pytest

from volumelab import (
    BetaGridCurves,
    InvalidSpecError,
    ModelParams,
    check_diffineq,
    check_integrated,
    classify,
    combined_half_width,
    dominance_violations,
    enumerate_measure,
    exact_radius_tail,
    exact_tail,
    log_tail_derivative,
    menshikov_check,
    named_graph,
    sharpness_check,
    synthetic_tail,
)
from volumelab.inequalities import (
    diffineq_rhs,
    diffineq_rhs_limit,
    integrated_bound_mean,
    integrated_bound_tail,
)


def _exact_percolation_curves(name: str, ps, vertex: int = 0, radii: bool = False):
    g = named_graph(name)
    tails, radius_curves = [], []
    for p in ps:
        params = ModelParams(beta=-math.log1p(-p), q=1.0)
        m = enumerate_measure(g, params)
        tails.append(exact_tail(m, vertex))
        if radii:
            radius_curves.append(exact_radius_tail(m, vertex))
    return g, BetaGridCurves(
        param="p",
        values=tuple(ps),
        q=1.0,
        vertex=vertex,
        graph_meta={"name": g.name, "n_vertices": g.n_vertices, "n_edges": g.n_edges},
        tails=tuple(tails),
        radii=tuple(radius_curves) if radii else None,
    )


def test_classify_margins():
    assert classify(1.0, 0.5, 0.1) == "holds"
    assert classify(0.5, 0.55, 0.2) == "holds-within-noise"
    assert classify(0.5, 1.0, 0.1) == "violated"


def test_combined_half_width_is_rss():
    assert combined_half_width(3.0, 4.0) == pytest.approx(5.0)


def test_bracket_matches_hand_computation(triangle_half):
    # lam = 1, n = 2 on the dyadic triangle tail: S = P(>=1) + P(>=2) = 1.75,
    # rhs = half the bracket (1 - e^-1) * 2 / 1.75 - 1
    t = exact_tail(triangle_half, 0)
    rhs = diffineq_rhs(t, n=2, lam=1.0)
    assert rhs == pytest.approx(0.5 * (-math.expm1(-1.0) * 2.0 / 1.75 - 1.0))


def test_bracket_limit_drops_the_green_field(triangle_half):
    t = exact_tail(triangle_half, 0)
    mean, _ = t.mean()
    assert diffineq_rhs_limit(mean, n=2) == pytest.approx(0.5 * (2.0 / mean - 1.0))


def test_log_tail_derivative_vanishes_on_identical_points(triangle_half):
    t = exact_tail(triangle_half, 0)
    curves = BetaGridCurves(
        param="p",
        values=(0.4, 0.5),
        q=1.0,
        vertex=0,
        graph_meta={"name": "triangle", "n_vertices": 3, "n_edges": 3},
        tails=(t, t),
    )
    diffs = log_tail_derivative(curves, n=2)
    assert diffs[0].value == pytest.approx(0.0, abs=1e-12)


def test_diffineq_holds_on_exact_percolation_grid():
    ps = [round(0.2 + 0.05 * i, 2) for i in range(9)]
    g, curves = _exact_percolation_curves("triangle", ps)
    reports = check_diffineq(g, curves, n_values=(1, 2, 3), lam=1.0)
    verdicts = {r.verdict for r in reports}
    assert "violated" not in verdicts
    margins = [r.margin for r in reports if r.verdict == "holds"]
    assert margins and min(margins) > 0.0


def test_diffineq_fk_form_needs_the_graph(triangle):
    betas = (0.6, 0.8, 1.0)
    tails = tuple(
        exact_tail(enumerate_measure(triangle, ModelParams(beta=b, q=2.0)), 0)
        for b in betas
    )
    curves = BetaGridCurves(
        param="beta",
        values=betas,
        q=2.0,
        vertex=0,
        graph_meta={"name": "triangle", "n_vertices": 3, "n_edges": 3},
        tails=tails,
    )
    reports = check_diffineq(triangle, curves, n_values=(2, 3), lam=1.0)
    assert {r.verdict for r in reports} <= {"holds", "holds-within-noise", "undefined"}
    with pytest.raises(InvalidSpecError):
        check_diffineq(None, curves, n_values=(2,), lam=1.0)


def test_integrated_identity_at_the_base_point(triangle_half):
    t = exact_tail(triangle_half, 0)
    bounds, _ = integrated_bound_tail(t, beta=0.7, beta0=0.7, c0=2.0)
    values = np.array([t.value(n) for n in range(1, t.n_max + 1)])
    assert np.max(np.abs(bounds - values)) <= 1e-12
    bounds_m, _ = integrated_bound_mean(t, beta=0.7, beta0=0.7, c0=2.0)
    assert np.max(np.abs(bounds_m - values)) <= 1e-12


def test_integrated_bounds_dominate_exact_tails():
    ps = [0.30, 0.35, 0.40, 0.45]
    g, curves = _exact_percolation_curves("cycle-4", ps)
    for kind in ("tail", "mean"):
        reports = check_integrated(g, curves, kind=kind, n_values=(1, 2, 3, 4))
        assert reports
        assert all(r.verdict != "violated" for r in reports)


def test_menshikov_holds_on_exact_radius_grid():
    ps = [round(0.2 + 0.02 * i, 2) for i in range(21)]
    _, curves = _exact_percolation_curves("path-3", ps, vertex=1, radii=True)
    reports = menshikov_check(curves, n_values=(1, 2))
    assert reports
    assert all(r.verdict in ("holds", "undefined") for r in reports)
    margins = [r.margin for r in reports if r.verdict == "holds"]
    assert min(margins) > 0.0


def test_sharpness_bound_is_reported_below_beta_c(triangle):
    betas = (0.2, 0.4, 0.6, 0.8, 1.0)
    tails = tuple(
        exact_tail(enumerate_measure(triangle, ModelParams(beta=b, q=2.0)), 0)
        for b in betas
    )
    curves = BetaGridCurves(
        param="beta",
        values=betas,
        q=2.0,
        vertex=0,
        graph_meta={"name": "triangle", "n_vertices": 3, "n_edges": 3},
        tails=tails,
    )
    reports = sharpness_check(triangle, curves, beta_c=0.7)
    assert reports
    assert all(r.verdict != "violated" for r in reports)


def test_dominance_violations_flag_planted_decreases():
    good = BetaGridCurves(
        param="p",
        values=(0.3, 0.5),
        q=1.0,
        vertex=0,
        graph_meta={"name": "x", "n_vertices": 3, "n_edges": 2},
        tails=(
            synthetic_tail(np.array([1.0, 0.2, 0.1])),
            synthetic_tail(np.array([1.0, 0.5, 0.3])),
        ),
    )
    assert dominance_violations(good) == []
    bad = BetaGridCurves(
        param="p",
        values=(0.3, 0.5),
        q=1.0,
        vertex=0,
        graph_meta={"name": "x", "n_vertices": 3, "n_edges": 2},
        tails=(
            synthetic_tail(np.array([1.0, 0.5, 0.3])),
            synthetic_tail(np.array([1.0, 0.2, 0.1])),
        ),
    )
    assert dominance_violations(bad)


def test_report_records_are_json_ready(triangle_half):
    ps = [0.35, 0.45, 0.55]
    g, curves = _exact_percolation_curves("triangle", ps)
    rec = check_diffineq(g, curves, n_values=(2,), lam=1.0)[0].to_record()
    assert {"name", "lhs", "rhs", "margin", "half_width", "verdict"} <= set(rec)

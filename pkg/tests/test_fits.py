"""Exponent extraction and tail-shape fits on planted curves."""

from __future__ import annotations

import math

import numpy as np
import pytest

from volumelab import (
    DomainError,
    InvalidSpecError,
    check_exponent_inequalities,
    check_exponential_tail,
    estimate_beta_c,
    fit_Delta,
    fit_delta,
    fit_gamma,
    synthetic_moments,
    synthetic_tail,
)
from volumelab.fits import ExponentEstimates, ExponentFit, default_window


def _power_tail(exponent: float, n_max: int = 4096):
    ns = np.arange(1, n_max + 1, dtype=np.float64)
    return synthetic_tail(ns ** (-1.0 / exponent))


def test_fit_delta_recovers_planted_exponent():
    fit = fit_delta(_power_tail(2.345))
    assert fit.value == pytest.approx(2.345, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_delta_honors_an_explicit_window():
    fit = fit_delta(_power_tail(1.8), window=(10, 100))
    assert fit.window == (10, 100)
    assert fit.value == pytest.approx(1.8, abs=1e-9)


def test_fit_delta_rejects_degenerate_windows():
    with pytest.raises(InvalidSpecError):
        fit_delta(_power_tail(2.0), window=(50, 10))


def test_fit_gamma_recovers_planted_divergence():
    bc = 1.0
    betas = np.linspace(0.2, 0.8, 13)
    means = [(bc - b) ** -1.234 for b in betas]
    fit = fit_gamma(betas, means, bc)
    assert fit.value == pytest.approx(1.234, abs=1e-9)


def test_fit_gamma_flags_nondivergent_input():
    betas = np.linspace(0.2, 0.8, 13)
    means = [1.0 + 0.01 * i for i in range(13)]
    fit = fit_gamma(betas, means, 1.0)
    assert "non-divergent" in fit.flags


def test_fit_delta_ratio_recovers_planted_gap():
    bc = 1.0
    betas = np.linspace(0.2, 0.8, 13)
    gap = 2.1
    tables = [
        synthetic_moments([(bc - b) ** (-1.234 - gap * (k - 1)) for k in range(1, 5)])
        for b in betas
    ]
    fit = fit_Delta(betas, tables, bc)
    assert fit.value == pytest.approx(gap, abs=1e-9)


def test_exponential_fit_recovers_planted_rate():
    ns = np.arange(1, 257, dtype=np.float64)
    rep = check_exponential_tail(synthetic_tail(np.exp(-0.37 * ns)))
    assert rep.rate == pytest.approx(0.37, abs=1e-9)
    assert rep.r_squared == pytest.approx(1.0)
    assert rep.flags == ()


def test_exponential_fit_flags_supercritical_plateau():
    rep = check_exponential_tail(synthetic_tail(np.full(64, 0.9)))
    assert "looks-supercritical" in rep.flags


def test_beta_c_interpolates_the_crossing():
    # tails evaluated at the volume-scale level cross 1/2 midway between
    # the second and third grid points
    tails = [
        synthetic_tail(np.array([1.0, v, v])) for v in (0.30, 0.45, 0.55, 0.70)
    ]
    est, provenance = estimate_beta_c((1.0, 2.0, 3.0, 4.0), tails, n_vertices=3)
    assert est == pytest.approx(2.5)
    assert provenance == "estimated"


def test_beta_c_requires_a_crossing():
    tails = [synthetic_tail(np.array([1.0, v, v])) for v in (0.1, 0.2)]
    with pytest.raises(DomainError):
        estimate_beta_c((1.0, 2.0), tails, n_vertices=3)


def test_default_window_is_inside_the_curve():
    lo, hi = default_window(4096)
    assert 1 <= lo < hi <= 4096


def test_exponent_inequalities_saturate_at_mean_field_values():
    est = ExponentEstimates(
        delta=ExponentFit("delta", 2.0, 0.01, 0.999, (8, 120), 50),
        gamma=ExponentFit("gamma", 1.0, 0.01, 0.999, (0, 0), 13),
        Delta=ExponentFit("Delta", 2.0, 0.02, 0.999, (0, 0), 13),
        beta_c=1.0,
        beta_c_provenance="config",
    )
    reports = check_exponent_inequalities(est)
    assert len(reports) == 2
    for rep in reports:
        assert rep.verdict in ("holds", "holds-within-noise")
        assert rep.context["saturated"]


def test_exponent_inequalities_detect_genuine_violation():
    est = ExponentEstimates(
        delta=ExponentFit("delta", 1.5, 0.001, 0.999, (8, 120), 50),
        gamma=ExponentFit("gamma", 1.0, 0.001, 0.999, (0, 0), 13),
        Delta=None,
        beta_c=1.0,
        beta_c_provenance="config",
    )
    (rep,) = check_exponent_inequalities(est)
    assert rep.verdict == "violated"
    assert not rep.context["saturated"]

"""Exhaustive small-graph oracle suites.

Every suite runs exact enumeration against an independent formulation of the
same quantity over the full catalog grid; together they form the gate the
command-line `verify` subcommand and the acceptance tests both run.  Each
returns a SuiteResult whose `failures` list is empty iff the suite passed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clusters import decompose
from .exact import (
    ModelParams,
    check_fkg_lattice,
    check_monotonic,
    derivative_gap_ratio,
    enumerate_measure,
)
from .ghost import GhostParams, verify_osss, verify_prop31
from .graphs import named_graph, small_graph_catalog
from .samplers import heat_bath_invariance_error, validate_sampler

__all__ = [
    "SuiteResult",
    "CATALOG_QS",
    "CATALOG_BETAS",
    "CATALOG_LAMBDAS",
    "osss_suite",
    "prop31_suite",
    "derivative_suite",
    "monotonicity_suite",
    "invariance_suite",
    "cftp_spot_suite",
    "full_verify",
]

CATALOG_QS = (1.0, 1.5, 2.0, 3.0)
CATALOG_BETAS = (0.25, 0.5, 1.0, 2.0)
CATALOG_LAMBDAS = (0.5, 1.0, 2.0)
QUICK_QS = (1.0, 2.0)
QUICK_BETAS = (0.5, 1.0)
QUICK_LAMBDAS = (1.0,)


@dataclass
class SuiteResult:
    name: str
    n_cases: int
    failures: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "ok  " if self.passed else "FAIL"
        detail = f"{self.n_cases} cases"
        if self.failures:
            detail += f", {len(self.failures)} failures (first: {self.failures[0]})"
        return f"{status} {self.name}: {detail}"


def _grid(quick: bool):
    if quick:
        return QUICK_QS, QUICK_BETAS, QUICK_LAMBDAS
    return CATALOG_QS, CATALOG_BETAS, CATALOG_LAMBDAS


def _decision_tree_suite(kind: str, tol: float, quick: bool) -> SuiteResult:
    verify = verify_osss if kind == "osss" else verify_prop31
    qs, betas, lams = _grid(quick)
    n_cases = 0
    failures = []
    worst = np.inf
    for g in small_graph_catalog():
        for q in qs:
            for beta in betas:
                params = ModelParams(beta=beta, q=q)
                measure = enumerate_measure(g, params)
                for lam in lams:
                    for n in range(1, g.n_vertices + 1):
                        gp = GhostParams(lam=lam, n=n)
                        for v in range(g.n_vertices):
                            rep = verify(g, params, gp, v, n, measure=measure, tolerance=tol)
                            n_cases += 1
                            worst = min(worst, rep.margin)
                            if not rep.passed:
                                failures.append(
                                    {
                                        "graph": g.name,
                                        "q": q,
                                        "beta": beta,
                                        "lam": lam,
                                        "v": v,
                                        "n": n,
                                        "margin": rep.margin,
                                    }
                                )
    return SuiteResult(kind, n_cases, failures, {"worst_margin": float(worst)})


def osss_suite(tol: float = 1e-9, quick: bool = False) -> SuiteResult:
    """Decision-tree covariance bound over the full catalog grid."""
    return _decision_tree_suite("osss", tol, quick)


def prop31_suite(tol: float = 1e-9, quick: bool = False) -> SuiteResult:
    """Revealment-vs-magnetization bound over the full catalog grid."""
    return _decision_tree_suite("prop31", tol, quick)


def _edge_count(bits) -> float:
    return float(np.sum(bits))


def _cluster_indicator(g, v: int, n: int):
    def f(bits) -> float:
        return 1.0 if decompose(g, bits).size_of(v) >= n else 0.0

    return f


def derivative_suite(step: float = 1e-2, lo: float = 3.5, hi: float = 4.5) -> SuiteResult:
    """Finite-difference convergence of the covariance derivative identity.

    The gap between central difference and covariance sum is O(step^2), so
    halving the step must shrink it by about 4x on every instance.
    """
    names = ("triangle", "path-4", "cycle-4", "diamond", "parallel-pair")
    param_grid = ((1.0, 0.8), (2.0, 1.2))
    cases = []
    for name in names:
        g = named_graph(name)
        for q, beta in param_grid:
            cases.append((g, ModelParams(beta=beta, q=q), "edge-count", _edge_count))
            cases.append(
                (g, ModelParams(beta=beta, q=q), "volume-indicator", _cluster_indicator(g, 0, 2))
            )
    failures = []
    ratios = []
    for g, params, fname, f in cases:
        ratio = derivative_gap_ratio(g, params, f, step)
        ratios.append(ratio)
        if not lo <= ratio <= hi:
            failures.append(
                {"graph": g.name, "q": params.q, "beta": params.beta, "f": fname, "ratio": ratio}
            )
    return SuiteResult("derivative", len(cases), failures, {"ratios": ratios})


# parity-weighted two-edge table: odd configurations doubled; violates both
# the lattice condition and conditional monotonicity
PLANTED_PARITY_WEIGHTS = np.array([1.0, 2.0, 2.0, 1.0])


def monotonicity_suite(tol: float = 1e-9, quick: bool = False) -> SuiteResult:
    """Conditional-probability monotonicity and the lattice condition across
    the catalog, plus detection of the planted parity counterexample."""
    qs, betas, _ = _grid(quick)
    n_cases = 0
    failures = []
    for g in small_graph_catalog():
        for q in qs:
            for beta in betas:
                measure = enumerate_measure(g, ModelParams(beta=beta, q=q))
                mono = check_monotonic(measure, tol=tol)
                fkg = check_fkg_lattice(measure, tol=tol)
                n_cases += 1
                if not (mono.passed and fkg.passed):
                    failures.append(
                        {
                            "graph": g.name,
                            "q": q,
                            "beta": beta,
                            "monotonic": mono.passed,
                            "fkg": fkg.passed,
                        }
                    )
    planted_mono = check_monotonic(PLANTED_PARITY_WEIGHTS, tol=tol)
    planted_fkg = check_fkg_lattice(PLANTED_PARITY_WEIGHTS, tol=tol)
    detected = (not planted_mono.passed) and (not planted_fkg.passed)
    n_cases += 1
    if not detected:
        failures.append({"planted_counterexample_detected": False})
    return SuiteResult("monotonic", n_cases, failures, {"planted_detected": detected})


def invariance_suite(tol: float = 1e-10) -> SuiteResult:
    """Single-edge heat-bath kernels leave the enumerated measure invariant."""
    cases = [
        ("triangle", 1.0, 0.6),
        ("triangle", 2.0, 1.0),
        ("parallel-pair", 1.5, 0.7),
        ("path-3", 3.0, 1.2),
        ("cycle-4", 1.5, 0.8),
    ]
    failures = []
    errors = []
    for name, q, beta in cases:
        g = named_graph(name)
        measure = enumerate_measure(g, ModelParams(beta=beta, q=q))
        err = heat_bath_invariance_error(measure)
        errors.append(err)
        if err > tol:
            failures.append({"graph": name, "q": q, "beta": beta, "error": err})
    return SuiteResult("invariance", len(cases), failures, {"errors": errors})


def cftp_spot_suite(
    n_samples: int = 20000, seed: int = 7, tol: float = 0.03, control_floor: float = 0.04
) -> SuiteResult:
    """Quick total-variation spot check of the exact sampler plus its
    miscalibrated negative control (which must be visibly wrong)."""
    g = named_graph("triangle")
    params = ModelParams(beta=1.0, q=2.0)
    rep = validate_sampler(g, params, n_samples, seed, kind="cftp")
    control = validate_sampler(g, params, n_samples, seed, kind="glauber", miscalibrated=True)
    failures = []
    if rep.tv > tol:
        failures.append({"kind": "cftp", "tv": rep.tv, "tol": tol})
    if control.tv <= control_floor:
        failures.append({"kind": "negative-control", "tv": control.tv, "floor": control_floor})
    return SuiteResult(
        "sampler-spot", 2, failures, {"tv": rep.tv, "control_tv": control.tv}
    )


def full_verify(quick: bool = False, sampler_spot: bool = True) -> list[SuiteResult]:
    """The whole oracle gate in one call; order is cheap-to-expensive."""
    results = [
        derivative_suite(),
        monotonicity_suite(quick=quick),
        invariance_suite(),
        osss_suite(quick=quick),
        prop31_suite(quick=quick),
    ]
    if sampler_spot:
        results.append(cftp_spot_suite())
    return results

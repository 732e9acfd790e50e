"""Numerical evaluation of the volume differential inequality, its integrated
consequences, the radius inequality, and the supercritical sharpness bound.

All differential statements are checked over grid intervals with forward
differences: for a nondecreasing function the increment over an interval is
at least the integral of the lower derivative bound, so comparing the
difference quotient against the bound evaluated at the conservative endpoint
is the finite-data surrogate used throughout.  Conventions, fixed once:

* the susceptibility-type constant multiplying the LHS is taken at the RIGHT
  endpoint of the interval (the larger value, making the check harder);
* the RHS bracket is evaluated from the tail curve at the LEFT endpoint.

Verdicts: "holds" (margin >= 0), "holds-within-noise" (negative by at most
the combined half-width), "violated" (below that), "undefined" (a zero tail
estimate makes the log-derivative meaningless at that cell).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clusters import MomentTable, TailCurve
from .errors import DomainError, InsufficientDataError, InvalidSpecError
from .graphs import WeightedGraph, susceptibility_constant

__all__ = [
    "BetaGridCurves",
    "InequalityReport",
    "classify",
    "combined_half_width",
    "diffineq_rhs",
    "diffineq_rhs_limit",
    "GridDifference",
    "log_tail_derivative",
    "check_diffineq",
    "integrated_bound_tail",
    "integrated_bound_mean",
    "check_integrated",
    "menshikov_check",
    "sharpness_lower_bound",
    "sharpness_check",
    "dominance_violations",
]

VERDICT_HOLDS = "holds"
VERDICT_NOISE = "holds-within-noise"
VERDICT_VIOLATED = "violated"
VERDICT_UNDEFINED = "undefined"


# ---- report plumbing ---------------------------------------------------------


@dataclass(frozen=True)
class InequalityReport:
    """One checked cell: asserted direction is lhs >= rhs."""

    name: str
    lhs: float
    rhs: float
    half_width: float
    verdict: str
    context: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    def to_record(self) -> dict:
        rec = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "half_width": self.half_width,
            "verdict": self.verdict,
        }
        rec.update(self.context)
        return rec


def combined_half_width(*hws: float) -> float:
    return math.sqrt(math.fsum(h * h for h in hws))


def classify(lhs: float, rhs: float, half_width: float) -> str:
    if math.isnan(lhs) or math.isnan(rhs) or math.isinf(lhs) and lhs < 0:
        return VERDICT_UNDEFINED
    margin = lhs - rhs
    if margin >= 0.0:
        return VERDICT_HOLDS
    if margin >= -half_width:
        return VERDICT_NOISE
    return VERDICT_VIOLATED


def _report(name: str, lhs: float, rhs: float, hw: float, context: dict) -> InequalityReport:
    return InequalityReport(
        name=name, lhs=lhs, rhs=rhs, half_width=hw, verdict=classify(lhs, rhs, hw), context=context
    )


# ---- grid curves -------------------------------------------------------------


@dataclass(frozen=True)
class BetaGridCurves:
    """Tail data across a sorted parameter grid for one (graph, q, vertex).

    `param` is "beta" (coupling-strength grid) or "p" (q = 1 edge-probability
    grid); the two are linked by p = 1 - exp(-beta) for unit couplings.
    """

    param: str
    values: tuple[float, ...]
    q: float
    vertex: int
    graph_meta: dict
    tails: tuple[TailCurve, ...]
    radii: tuple[TailCurve, ...] | None = None
    moments: tuple[MomentTable, ...] | None = None

    def __post_init__(self):
        if self.param not in ("beta", "p"):
            raise InvalidSpecError(f"param must be 'beta' or 'p', got {self.param!r}")
        if len(self.values) != len(self.tails):
            raise InvalidSpecError("one tail curve per grid value required")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise InvalidSpecError("grid values must be strictly increasing")
        if self.param == "p":
            if self.q != 1.0:
                raise InvalidSpecError("a p-grid only parametrizes q = 1 models")
            if not all(0.0 <= v < 1.0 for v in self.values):
                raise InvalidSpecError("p values must lie in [0, 1)")
        elif any(v < 0.0 for v in self.values):
            raise InvalidSpecError("beta values must be nonnegative")
        if self.radii is not None and len(self.radii) != len(self.values):
            raise InvalidSpecError("one radius curve per grid value required")
        if self.moments is not None and len(self.moments) != len(self.values):
            raise InvalidSpecError("one moment table per grid value required")

    @property
    def n_points(self) -> int:
        return len(self.values)

    def betas(self) -> tuple[float, ...]:
        if self.param == "beta":
            return self.values
        return tuple(-math.log1p(-p) for p in self.values)

    def ps(self) -> tuple[float, ...]:
        """Unit-coupling conversion; only meaningful at q = 1."""
        if self.param == "p":
            return self.values
        return tuple(-math.expm1(-b) for b in self.values)


def dominance_violations(curves: BetaGridCurves, slack: float = 0.0) -> list[dict]:
    """Stochastic-domination screen: tails must be pointwise nondecreasing
    along the grid up to combined statistical noise (plus `slack`)."""
    bad = []
    for i in range(curves.n_points - 1):
        lo, hi = curves.tails[i], curves.tails[i + 1]
        for n in range(1, min(lo.n_max, hi.n_max) + 1):
            gap = hi.value(n) - lo.value(n)
            tol = combined_half_width(lo.half_width(n), hi.half_width(n)) + slack
            if gap < -tol:
                bad.append(
                    {"interval": i, "n": n, "gap": gap, "tolerance": tol}
                )
    return bad


# ---- differential inequality -------------------------------------------------


def _bracket(tail: TailCurve, n: int, lam: float) -> tuple[float, float]:
    """[(1-e^{-lam}) n / (lam S) - 1] with S = sum_{m<=ceil(n/lam)} P(|K|>=m),
    plus its half-width."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if lam <= 0:
        raise DomainError(f"lam must be positive, got {lam}")
    m_top = math.ceil(n / lam)
    s, s_hw = tail.partial_sum(m_top)
    coeff = -math.expm1(-lam) * n / lam
    value = coeff / s - 1.0
    hw = abs(coeff) / (s * s) * s_hw
    return value, hw


def diffineq_rhs(tail: TailCurve, n: int, lam: float) -> float:
    """Half the bracket: the right-hand side of the volume differential
    inequality in its coupling-strength form.  The q = 1 edge-probability
    form divides the same bracket by 2 p (1-p) instead."""
    value, _ = _bracket(tail, n, lam)
    return 0.5 * value


def diffineq_rhs_limit(mean: float, n: int) -> float:
    """Small-field limit of the bracket: (1/2) [n / E|K| - 1]."""
    if mean <= 0:
        raise DomainError(f"mean cluster size must be positive, got {mean}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return 0.5 * (n / mean - 1.0)


@dataclass(frozen=True)
class GridDifference:
    """Forward difference of log P(|K| >= n) over one grid interval."""

    index: int
    param_lo: float
    param_hi: float
    n: int
    value: float
    half_width: float
    defined: bool


def log_tail_derivative(curves: BetaGridCurves, n: int) -> list[GridDifference]:
    """Forward difference quotients of the log tail along the grid.

    This estimates the mean of the lower derivative over each interval (the
    increment of a nondecreasing function dominates the integral of its lower
    derivative).  Cells with a zero tail estimate are flagged undefined.
    """
    if curves.n_points < 2:
        raise InsufficientDataError("need at least two grid points")
    out = []
    for i in range(curves.n_points - 1):
        lo, hi = curves.tails[i], curves.tails[i + 1]
        dx = curves.values[i + 1] - curves.values[i]
        p_lo = lo.value(n) if n <= lo.n_max else 0.0
        p_hi = hi.value(n) if n <= hi.n_max else 0.0
        if p_lo <= 0.0 or p_hi <= 0.0:
            out.append(
                GridDifference(i, curves.values[i], curves.values[i + 1], n, math.nan, math.nan, False)
            )
            continue
        value = (math.log(p_hi) - math.log(p_lo)) / dx
        hw = combined_half_width(lo.half_width(n) / p_lo, hi.half_width(n) / p_hi) / dx
        out.append(GridDifference(i, curves.values[i], curves.values[i + 1], n, value, hw, True))
    return out


def check_diffineq(
    g: WeightedGraph | None,
    curves: BetaGridCurves,
    n_values,
    lam: float | None = 1.0,
    form: str = "auto",
) -> list[InequalityReport]:
    """Grid check of the volume differential inequality.

    form "fk":          C(beta_right) * d/dbeta log P(|K|>=n) >= bracket/2
    form "percolation": d/dp log P(|K|>=n) >= bracket / (2 p_left (1-p_left))
    form "auto":        percolation when the grid is a q=1 p-grid, else fk.
    lam=None uses the small-field limit bracket n/E|K| - 1 instead.
    """
    if form == "auto":
        form = "percolation" if curves.param == "p" else "fk"
    if form not in ("fk", "percolation"):
        raise InvalidSpecError(f"unknown form {form!r}")
    if form == "percolation" and curves.q != 1.0:
        raise DomainError("the edge-probability form applies only at q = 1")
    betas = curves.betas()
    ps = curves.ps() if form == "percolation" else None
    reports = []
    for n in n_values:
        diffs = log_tail_derivative(curves, n)
        for d in diffs:
            i = d.index
            tail_left = curves.tails[i]
            context = {
                "form": form,
                "interval": i,
                "param_lo": d.param_lo,
                "param_hi": d.param_hi,
                "n": n,
                "lam": lam,
                "q": curves.q,
            }
            if lam is None:
                mean, mean_hw = tail_left.mean()
                bracket = 2.0 * diffineq_rhs_limit(mean, n)
                bracket_hw = n / (mean * mean) * mean_hw
            else:
                bracket, bracket_hw = _bracket(tail_left, n, lam)
            if form == "fk":
                if g is None:
                    raise InvalidSpecError("the coupling-strength form needs the graph")
                c_right = susceptibility_constant(g, betas[i + 1])
                lhs = c_right * d.value
                lhs_hw = c_right * d.half_width
                rhs = 0.5 * bracket
                rhs_hw = 0.5 * bracket_hw
            else:
                p_left = ps[i]
                if p_left <= 0.0:
                    reports.append(
                        _report("diffineq-percolation", math.nan, math.nan, 0.0, context)
                    )
                    continue
                scale = 1.0 / (2.0 * p_left * (1.0 - p_left))
                lhs = d.value
                lhs_hw = d.half_width
                rhs = scale * bracket
                rhs_hw = scale * bracket_hw
            if not d.defined:
                reports.append(_report(f"diffineq-{form}", math.nan, math.nan, 0.0, context))
                continue
            hw = combined_half_width(lhs_hw, rhs_hw)
            reports.append(_report(f"diffineq-{form}", lhs, rhs, hw, context))
    return reports


# ---- integrated bounds -------------------------------------------------------


def _integrated_common(beta: float, beta0: float, c0: float) -> float:
    if not 0.0 <= beta <= beta0:
        raise DomainError(f"need 0 <= beta <= beta0, got beta={beta}, beta0={beta0}")
    if c0 <= 0.0:
        raise DomainError(f"susceptibility constant must be positive, got {c0}")
    return (beta0 - beta) / (2.0 * c0)


def integrated_bound_tail(
    tail0: TailCurve, beta: float, beta0: float, c0: float
) -> tuple[np.ndarray, np.ndarray]:
    """Upper bound on the tail at beta predicted from the tail at beta0:

        P_beta(n) <= P_beta0(n) * exp[-(1-1/e) a n / S0(n) + a],

    a = (beta0-beta)/(2 c0), S0(n) = sum_{m<=n} P_beta0(|K|>=m).  Returns
    (bounds, half_widths) over n = 1..n_max.  At beta = beta0 the bound is
    the input tail itself, exactly.
    """
    a = _integrated_common(beta, beta0, c0)
    n_max = tail0.n_max
    values = np.array([tail0.value(n) for n in range(1, n_max + 1)])
    s0 = np.cumsum(values)
    ns = np.arange(1, n_max + 1, dtype=np.float64)
    shrink = -(-math.expm1(-1.0)) * a * ns / s0 + a
    bounds = values * np.exp(shrink)
    hw_p = np.array([tail0.half_width(n) for n in range(1, n_max + 1)])
    hw_s = np.array([tail0.partial_sum(n)[1] for n in range(1, n_max + 1)])
    # first-order propagation through P0 and S0 (treated as independent)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel_p = np.where(values > 0, hw_p / np.where(values > 0, values, 1.0), 0.0)
    ddS = -math.expm1(-1.0) * a * ns / (s0 * s0)
    half_widths = bounds * np.sqrt(rel_p**2 + (ddS * hw_s) ** 2)
    return bounds, half_widths


def integrated_bound_mean(
    tail0: TailCurve, beta: float, beta0: float, c0: float
) -> tuple[np.ndarray, np.ndarray]:
    """Mean-form integrated bound: exponent -a n / E_beta0|K| + a."""
    a = _integrated_common(beta, beta0, c0)
    n_max = tail0.n_max
    mean0, mean0_hw = tail0.mean()
    values = np.array([tail0.value(n) for n in range(1, n_max + 1)])
    ns = np.arange(1, n_max + 1, dtype=np.float64)
    bounds = values * np.exp(-a * ns / mean0 + a)
    hw_p = np.array([tail0.half_width(n) for n in range(1, n_max + 1)])
    with np.errstate(invalid="ignore", divide="ignore"):
        rel_p = np.where(values > 0, hw_p / np.where(values > 0, values, 1.0), 0.0)
    dd_mean = a * ns / (mean0 * mean0)
    half_widths = bounds * np.sqrt(rel_p**2 + (dd_mean * mean0_hw) ** 2)
    return bounds, half_widths


def check_integrated(
    g: WeightedGraph,
    curves: BetaGridCurves,
    base_index: int | None = None,
    kind: str = "tail",
    n_values=None,
) -> list[InequalityReport]:
    """Predict tails at every grid point below the base point from the base
    tail, and check the prediction dominates the measurement (lhs = bound,
    rhs = measured)."""
    if kind not in ("tail", "mean"):
        raise InvalidSpecError(f"kind must be 'tail' or 'mean', got {kind!r}")
    if base_index is None:
        base_index = curves.n_points - 1
    if not 0 <= base_index < curves.n_points:
        raise InvalidSpecError(f"base index {base_index} out of range")
    betas = curves.betas()
    beta0 = betas[base_index]
    c0 = susceptibility_constant(g, beta0)
    tail0 = curves.tails[base_index]
    bound_fn = integrated_bound_tail if kind == "tail" else integrated_bound_mean
    reports = []
    for i in range(base_index + 1):
        beta = betas[i]
        bounds, bound_hws = bound_fn(tail0, beta, beta0, c0)
        measured = curves.tails[i]
        levels = n_values if n_values is not None else range(1, tail0.n_max + 1)
        for n in levels:
            if n > tail0.n_max or n > measured.n_max:
                continue
            lhs = float(bounds[n - 1])
            rhs = measured.value(n)
            hw = combined_half_width(float(bound_hws[n - 1]), measured.half_width(n))
            context = {
                "kind": kind,
                "grid_index": i,
                "base_index": base_index,
                "beta": beta,
                "beta0": beta0,
                "n": n,
            }
            reports.append(_report(f"integrated-{kind}", lhs, rhs, hw, context))
    return reports


# ---- radius inequality (q = 1) -----------------------------------------------


def menshikov_check(curves: BetaGridCurves, n_values) -> list[InequalityReport]:
    """Radius-tail differential inequality on a q = 1 edge-probability grid:

        d/dp log P_p(R >= n) >= (1/p) [ n / sum_{m=0..n} P_p(R >= m) - 1 ].

    The m = 0 term of the sum is P(R >= 0) = 1.
    """
    if curves.q != 1.0:
        raise DomainError("the radius inequality is checked at q = 1 only")
    if curves.param != "p":
        raise DomainError("radius curves must be given over a p-grid")
    if curves.radii is None:
        raise InsufficientDataError("no radius curves attached to this grid")
    radius_grid = BetaGridCurves(
        param=curves.param,
        values=curves.values,
        q=curves.q,
        vertex=curves.vertex,
        graph_meta=curves.graph_meta,
        tails=curves.radii,
    )
    reports = []
    for n in n_values:
        if n < 0:
            raise DomainError(f"n must be >= 0, got {n}")
        if n == 0:
            diffs = [
                GridDifference(i, curves.values[i], curves.values[i + 1], 0, 0.0, 0.0, True)
                for i in range(curves.n_points - 1)
            ]
        else:
            diffs = log_tail_derivative(radius_grid, n)
        for d in diffs:
            i = d.index
            p_left = curves.values[i]
            context = {
                "form": "radius",
                "interval": i,
                "param_lo": d.param_lo,
                "param_hi": d.param_hi,
                "n": n,
            }
            if not d.defined:
                reports.append(_report("menshikov", math.nan, math.nan, 0.0, context))
                continue
            if n == 0:
                s, s_hw = 1.0, 0.0
            else:
                ps_sum, s_hw = curves.radii[i].partial_sum(n)
                s = 1.0 + ps_sum
            rhs = (n / s - 1.0) / p_left
            rhs_hw = (n / (s * s)) / p_left * s_hw
            hw = combined_half_width(d.half_width, rhs_hw)
            reports.append(_report("menshikov", d.value, rhs, hw, context))
    return reports


# ---- sharpness ---------------------------------------------------------------


def sharpness_lower_bound(beta: float, beta_c: float, c_beta: float) -> float:
    """(beta - beta_c) / (2 C(beta) + beta - beta_c), the supercritical lower
    bound on the ordered fraction."""
    if beta <= beta_c:
        raise DomainError(f"need beta > beta_c, got beta={beta}, beta_c={beta_c}")
    if c_beta <= 0:
        raise DomainError(f"susceptibility constant must be positive, got {c_beta}")
    gap = beta - beta_c
    return gap / (2.0 * c_beta + gap)


def sharpness_check(
    g: WeightedGraph,
    curves: BetaGridCurves,
    beta_c: float,
    proxy_exponent: float = 2.0 / 3.0,
) -> list[InequalityReport]:
    """Compare the sharpness lower bound against a finite-volume proxy for
    the ordered fraction: P(|K_v| >= |V|^proxy_exponent).  The proxy is a
    finite-size stand-in, flagged as such in every record."""
    n_star = max(1, math.ceil(g.n_vertices**proxy_exponent))
    betas = curves.betas()
    reports = []
    for i, beta in enumerate(betas):
        if beta <= beta_c:
            continue
        bound = sharpness_lower_bound(beta, beta_c, susceptibility_constant(g, beta))
        tail = curves.tails[i]
        if n_star > tail.n_max:
            continue
        proxy = tail.value(n_star)
        hw = tail.half_width(n_star)
        context = {
            "beta": beta,
            "beta_c": beta_c,
            "proxy": True,
            "proxy_exponent": proxy_exponent,
            "proxy_level": n_star,
        }
        reports.append(_report("sharpness-proxy", proxy, bound, hw, context))
    return reports

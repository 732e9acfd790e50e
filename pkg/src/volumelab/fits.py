"""Critical-exponent estimation from tail and moment data, the exponent
inequality checks they feed, moment-growth constant fits, and the
subcritical exponential-tail fit.

Exponent conventions (all defined through power laws):

    P_crit(|K| >= n)  ~ n^(-1/delta)
    E|K|              ~ dist^(-gamma)        dist = distance to criticality
    E|K|^(k+1)/E|K|^k ~ dist^(-Delta)

Fits are ordinary least squares in log-log coordinates.  The reported
standard error is the larger of the regression stderr and the half-spread of
the slope across the full window and its lower and upper halves; smooth
systematic curvature otherwise hides behind a tiny regression stderr.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .clusters import MomentTable, TailCurve
from .errors import DomainError, InsufficientDataError, InvalidSpecError
from .inequalities import InequalityReport, classify, combined_half_width

__all__ = [
    "ExponentFit",
    "ExponentEstimates",
    "default_window",
    "fit_delta",
    "fit_gamma",
    "fit_Delta",
    "check_exponent_inequalities",
    "MomentBoundReport",
    "moment_bound_constant",
    "TailFitReport",
    "check_exponential_tail",
    "estimate_beta_c",
]

NON_DIVERGENT_SLOPE = 0.1


@dataclass(frozen=True)
class ExponentFit:
    name: str
    value: float
    stderr: float
    r_squared: float
    window: tuple
    n_points: int
    flags: tuple[str, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "stderr": self.stderr,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class ExponentEstimates:
    delta: ExponentFit | None
    gamma: ExponentFit | None
    Delta: ExponentFit | None
    beta_c: float
    beta_c_provenance: str  # "config" | "estimated"

    def __post_init__(self):
        if self.beta_c_provenance not in ("config", "estimated"):
            raise InvalidSpecError(
                f"beta_c provenance must be 'config' or 'estimated', got {self.beta_c_provenance!r}"
            )


def _robust_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """(slope, robust stderr, r^2).  Stderr = max(regression stderr,
    half-spread of the slope across full / lower-half / upper-half windows)."""
    if x.size < 3:
        raise InsufficientDataError(f"need >= 3 points for a slope fit, got {x.size}")
    res = stats.linregress(x, y)
    slopes = [res.slope]
    half = x.size // 2
    if half >= 3:
        slopes.append(stats.linregress(x[:half], y[:half]).slope)
        slopes.append(stats.linregress(x[-half:], y[-half:]).slope)
    spread = 0.5 * (max(slopes) - min(slopes))
    stderr = res.stderr if math.isfinite(res.stderr) else 0.0
    return res.slope, max(stderr, spread), res.rvalue**2


def default_window(n_max: int, lo_exp: float = 0.3, hi_exp: float = 0.8) -> tuple[int, int]:
    """n in [n_max^0.3, n_max^0.8]: dodges small-n discreteness and large-n
    finite-size cutoffs."""
    lo = max(2, math.ceil(n_max**lo_exp))
    hi = max(lo + 1, math.floor(n_max**hi_exp))
    return lo, min(hi, n_max)


def fit_delta(tail: TailCurve, window: tuple[int, int] | None = None) -> ExponentFit:
    """Slope of log P(|K| >= n) vs log n over the window -> -1/delta."""
    if window is None:
        window = default_window(tail.n_max)
    lo, hi = window
    if not 1 <= lo < hi <= tail.n_max:
        raise InvalidSpecError(f"bad fit window {window} for n_max={tail.n_max}")
    ns, logs = [], []
    for n in range(lo, hi + 1):
        v = tail.value(n)
        if v > 0.0:
            ns.append(n)
            logs.append(math.log(v))
    if len(ns) < 3:
        raise InsufficientDataError("fewer than 3 positive tail values in the fit window")
    slope, se, r2 = _robust_slope(np.log(np.array(ns, dtype=float)), np.array(logs))
    if slope >= -1e-12:
        raise DomainError(f"tail fit slope {slope} is nonnegative; no power-law decay")
    delta = -1.0 / slope
    se_delta = se / (slope * slope)
    return ExponentFit(
        name="delta",
        value=delta,
        stderr=se_delta,
        r_squared=r2,
        window=(lo, hi),
        n_points=len(ns),
        diagnostics={"slope": slope, "slope_stderr": se},
    )


def _distances(values, beta_c: float) -> np.ndarray:
    d = beta_c - np.asarray(values, dtype=float)
    if np.any(d <= 0.0):
        raise DomainError("grid must lie strictly below the critical point")
    return d


def fit_gamma(values, means, beta_c: float) -> ExponentFit:
    """Slope of log E|K| vs log(beta_c - beta) -> -gamma.

    `values` is the subcritical grid (beta or p, matching beta_c's scale);
    `means` are the corresponding mean cluster sizes.
    """
    d = _distances(values, beta_c)
    m = np.asarray(means, dtype=float)
    if np.any(m <= 0.0):
        raise DomainError("mean cluster sizes must be positive")
    slope, se, r2 = _robust_slope(np.log(d), np.log(m))
    gamma = -slope
    flags = ("non-divergent",) if gamma < NON_DIVERGENT_SLOPE else ()
    return ExponentFit(
        name="gamma",
        value=gamma,
        stderr=se,
        r_squared=r2,
        window=(float(d.min()), float(d.max())),
        n_points=int(d.size),
        flags=flags,
        diagnostics={"slope": slope},
    )


def fit_Delta(values, moment_tables, beta_c: float, k_max: int | None = None) -> ExponentFit:
    """Gap exponent from successive moment ratios: slope of
    log(E|K|^{k+1} / E|K|^k) vs log(beta_c - beta) -> -Delta, averaged over k.
    """
    d = _distances(values, beta_c)
    tables: list[MomentTable] = list(moment_tables)
    if len(tables) != d.size:
        raise InvalidSpecError("one moment table per grid point required")
    top = min(t.k_max for t in tables)
    if k_max is None:
        k_max = top - 1
    usable = [k for k in range(1, top) if k <= k_max]
    if not usable:
        raise InsufficientDataError("need consecutive moment orders k, k+1")
    per_k = []
    log_d = np.log(d)
    for k in usable:
        ratios = np.array([t.estimate(k + 1) / t.estimate(k) for t in tables])
        slope, se, r2 = _robust_slope(log_d, np.log(ratios))
        per_k.append((k, -slope, se, r2))
    vals = np.array([v for _, v, _, _ in per_k])
    ses = np.array([s for _, _, s, _ in per_k])
    value = float(vals.mean())
    spread = float(vals.std()) if len(per_k) > 1 else 0.0
    stderr = max(float(np.sqrt((ses**2).mean())), spread)
    flags = ("non-divergent",) if value < NON_DIVERGENT_SLOPE else ()
    return ExponentFit(
        name="Delta",
        value=value,
        stderr=stderr,
        r_squared=float(min(r for _, _, _, r in per_k)),
        window=(float(d.min()), float(d.max())),
        n_points=int(d.size),
        flags=flags,
        diagnostics={"per_k": [{"k": k, "value": v, "stderr": s} for k, v, s, _ in per_k]},
    )


def check_exponent_inequalities(est: ExponentEstimates) -> list[InequalityReport]:
    """One-sided checks gamma <= delta - 1 and Delta <= gamma + 1, each with
    a 2x combined-stderr allowance; saturation (equality within the same
    allowance) is noted in the context."""
    reports = []
    if est.gamma is not None and est.delta is not None:
        hw = 2.0 * combined_half_width(est.gamma.stderr, est.delta.stderr)
        lhs = est.delta.value - 1.0
        rhs = est.gamma.value
        context = {
            "inequality": "gamma <= delta - 1",
            "gamma": est.gamma.value,
            "delta": est.delta.value,
            "saturated": abs(lhs - rhs) <= hw,
        }
        reports.append(
            InequalityReport(
                name="exponent-gamma-delta",
                lhs=lhs,
                rhs=rhs,
                half_width=hw,
                verdict=classify(lhs, rhs, hw),
                context=context,
            )
        )
    if est.Delta is not None and est.gamma is not None:
        hw = 2.0 * combined_half_width(est.Delta.stderr, est.gamma.stderr)
        lhs = est.gamma.value + 1.0
        rhs = est.Delta.value
        context = {
            "inequality": "Delta <= gamma + 1",
            "gamma": est.gamma.value,
            "Delta": est.Delta.value,
            "saturated": abs(lhs - rhs) <= hw,
        }
        reports.append(
            InequalityReport(
                name="exponent-Delta-gamma",
                lhs=lhs,
                rhs=rhs,
                half_width=hw,
                verdict=classify(lhs, rhs, hw),
                context=context,
            )
        )
    return reports


# ---- moment growth constants ---------------------------------------------------


@dataclass(frozen=True)
class MomentBoundReport:
    """Smallest constants making E|K|^k <= k! [c / dist]^{exponent(k)} hold."""

    hypothesis: str  # "delta" | "gamma"
    exponent_value: float
    constants: dict  # k -> list of per-grid-point constants
    sup_constant: float
    stability_ratio: float  # max/min over k <= 4 and the grid

    def to_record(self) -> dict:
        return {
            "hypothesis": self.hypothesis,
            "exponent_value": self.exponent_value,
            "sup_constant": self.sup_constant,
            "stability_ratio": self.stability_ratio,
            "constants": {str(k): v for k, v in self.constants.items()},
        }


def moment_exponent(hypothesis: str, exponent_value: float, k: int) -> float:
    """Moment-growth exponent for order k under either tail hypothesis."""
    if k < 1:
        raise DomainError(f"moment order must be >= 1, got {k}")
    if hypothesis == "delta":
        d = exponent_value
        if d <= 1.0:
            raise DomainError(f"the tail hypothesis needs delta > 1, got {d}")
        return (d - 1.0) + (k - 1) * d
    if hypothesis == "gamma":
        gmm = exponent_value
        return gmm + (k - 1) * (gmm + 1.0)
    raise InvalidSpecError(f"hypothesis must be 'delta' or 'gamma', got {hypothesis!r}")


def moment_bound_constant(
    values,
    moment_tables,
    beta_c: float,
    hypothesis: str,
    exponent_value: float,
    k_max: int = 4,
) -> MomentBoundReport:
    """For each grid point and k, the smallest c with
    E|K|^k <= k! [c / dist]^{exponent(k)} is c = dist * (E|K|^k / k!)^{1/exponent(k)};
    the bound family is considered verified when the fitted constant is
    stable (bounded spread) across k <= k_max and the grid."""
    d = _distances(values, beta_c)
    tables: list[MomentTable] = list(moment_tables)
    if len(tables) != d.size:
        raise InvalidSpecError("one moment table per grid point required")
    ks = [k for k in range(1, min(t.k_max for t in tables) + 1) if k <= k_max]
    if not ks:
        raise InsufficientDataError(f"no moment orders within k <= {k_max}")
    constants: dict[int, list[float]] = {}
    all_consts = []
    for k in ks:
        exp_k = moment_exponent(hypothesis, exponent_value, k)
        row = []
        for dist, table in zip(d, tables):
            m_k = table.estimate(k)
            if m_k <= 0:
                raise DomainError(f"moment of order {k} must be positive")
            c = float(dist * (m_k / math.factorial(k)) ** (1.0 / exp_k))
            row.append(c)
            all_consts.append(c)
        constants[k] = row
    sup_c = max(all_consts)
    min_c = min(all_consts)
    return MomentBoundReport(
        hypothesis=hypothesis,
        exponent_value=exponent_value,
        constants=constants,
        sup_constant=sup_c,
        stability_ratio=sup_c / min_c if min_c > 0 else math.inf,
    )


# ---- subcritical exponential tail ----------------------------------------------


@dataclass(frozen=True)
class TailFitReport:
    """log P(|K| >= n) = log C - c n fit on the large-n window."""

    rate: float  # c
    log_prefactor: float
    r_squared: float
    window: tuple[int, int]
    n_points: int
    flags: tuple[str, ...] = ()

    def to_record(self) -> dict:
        return {
            "rate": self.rate,
            "log_prefactor": self.log_prefactor,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
            "flags": list(self.flags),
        }


def check_exponential_tail(
    tail: TailCurve,
    window: tuple[int, int] | None = None,
    supercritical_level: float = 0.25,
) -> TailFitReport:
    """Linear fit of the log tail against n.  Degenerate inputs (too few
    positive levels) come back flagged instead of raising; a fat tail at the
    top level is flagged as looking supercritical.

    The default window tracks the data: its top is the last level whose
    estimate still exceeds its own half-width (signal above noise), its
    bottom sits at 15% of that to dodge the small-n curvature."""
    if window is None:
        hi = 0
        for n in range(1, tail.n_max + 1):
            v = tail.value(n)
            if v > 0.0 and v > tail.half_width(n):
                hi = n
        hi = max(hi, 5)
        lo = min(max(2, math.ceil(0.15 * hi)), hi - 4) if hi > 6 else 2
        window = (max(2, lo), min(hi, tail.n_max))
        if window[0] >= window[1]:
            window = (max(1, tail.n_max - 4), tail.n_max)
    lo, hi = window
    if not 1 <= lo < hi <= tail.n_max:
        raise InvalidSpecError(f"bad fit window {window} for n_max={tail.n_max}")
    ns, logs = [], []
    for n in range(lo, hi + 1):
        v = tail.value(n)
        if v > 0.0:
            ns.append(float(n))
            logs.append(math.log(v))
    flags = []
    if tail.value(tail.n_max) > supercritical_level:
        flags.append("looks-supercritical")
    if len(ns) < 4:
        flags.append("degenerate")
        return TailFitReport(
            rate=math.nan,
            log_prefactor=math.nan,
            r_squared=math.nan,
            window=(lo, hi),
            n_points=len(ns),
            flags=tuple(flags),
        )
    res = stats.linregress(np.array(ns), np.array(logs))
    return TailFitReport(
        rate=-res.slope,
        log_prefactor=res.intercept,
        r_squared=res.rvalue**2,
        window=(lo, hi),
        n_points=len(ns),
        flags=tuple(flags),
    )


# ---- auxiliary critical-point locator -------------------------------------------


def estimate_beta_c(grid_values, tails, n_vertices: int, fraction: float = 0.5) -> tuple[float, str]:
    """Heuristic grid locator: the first parameter value where the chance of
    the tagged cluster reaching |V|^(2/3) crosses `fraction`, linearly
    interpolated between neighbors.  Always labeled "estimated"; acceptance
    thresholds never depend on it.
    """
    tails = list(tails)
    if len(grid_values) != len(tails) or len(tails) < 2:
        raise InsufficientDataError("need matched grids of >= 2 points")
    n_star = max(1, math.ceil(n_vertices ** (2.0 / 3.0)))
    probs = []
    for t in tails:
        probs.append(t.value(min(n_star, t.n_max)))
    for i in range(len(probs) - 1):
        if probs[i] < fraction <= probs[i + 1]:
            x0, x1 = grid_values[i], grid_values[i + 1]
            y0, y1 = probs[i], probs[i + 1]
            frac = (fraction - y0) / (y1 - y0)
            return float(x0 + frac * (x1 - x0)), "estimated"
    raise DomainError("no crossing of the target fraction inside the grid")

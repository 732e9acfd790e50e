"""Exact enumeration of random-cluster measures on small graphs.

The measure assigns configuration omega weight
q^{#clusters(omega)} * prod_{e open} (exp(beta J_e) - 1),
with clusters counted over all vertices, isolated ones included.  q = 1 with
unit couplings is Bernoulli percolation at p = 1 - exp(-beta).

Everything here is the oracle side of the lab: weights live in log-space
with one exponential-sum normalization, and configurations are coded as
integers whose bit e is the state of edge e in the fixed edge order.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .clusters import DEFAULT_CONFIDENCE, TailCurve
from .errors import DomainError, EnumerationCapError, InvalidSpecError
from .graphs import BoundaryCondition, UnionFind, WeightedGraph

__all__ = [
    "ModelParams",
    "ExactMeasure",
    "enumerate_measure",
    "exact_event_prob",
    "exact_covariance",
    "exact_tail",
    "exact_radius_tail",
    "check_fkg_lattice",
    "check_monotonic",
    "verify_derivative_formula",
    "derivative_gap_ratio",
    "config_bits",
    "config_code",
    "ENUMERATION_CAP",
]

ENUMERATION_CAP = 22


@dataclass(frozen=True)
class ModelParams:
    """Random-cluster parameters; q < 1 and beta < 0 are rejected outright."""

    beta: float
    q: float
    boundary: BoundaryCondition = BoundaryCondition("free")

    def __post_init__(self):
        if not self.beta >= 0.0:
            raise InvalidSpecError(f"beta must be >= 0, got {self.beta}")
        if not self.q >= 1.0:
            raise InvalidSpecError(f"q must be >= 1, got {self.q}")

    def edge_weights(self, g: WeightedGraph) -> np.ndarray:
        """w_e = exp(beta J_e) - 1."""
        return np.expm1(self.beta * g.edge_arrays[2])

    def bernoulli_probs(self, g: WeightedGraph) -> np.ndarray:
        """p_e = 1 - exp(-beta J_e): the q = 1 marginal."""
        return -np.expm1(-self.beta * g.edge_arrays[2])

    def meta(self) -> dict:
        return {"beta": self.beta, "q": self.q, "boundary": self.boundary.kind}


def config_bits(code: int, n_edges: int) -> np.ndarray:
    """Integer code -> uint8 edge configuration (bit e = edge e)."""
    return np.array([(code >> e) & 1 for e in range(n_edges)], dtype=np.uint8)


def config_code(bits) -> int:
    bits = np.asarray(bits)
    return int(sum(1 << e for e in range(bits.size) if bits[e]))


def _count_clusters_python(n_v: int, edges, code: int) -> int:
    uf = UnionFind.of(n_v)
    comps = n_v
    for e, (a, b) in enumerate(edges):
        if (code >> e) & 1 and uf.union(a, b):
            comps -= 1
    return comps


@dataclass(frozen=True)
class ExactMeasure:
    """Fully enumerated measure: weight table, partition function, probabilities."""

    graph: WeightedGraph
    params: ModelParams
    log_weights: np.ndarray
    log_z: float
    probs: np.ndarray
    n_clusters: np.ndarray
    _size_tables: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_configs(self) -> int:
        return self.probs.size

    @property
    def z(self) -> float:
        return float(math.exp(self.log_z))

    def weight(self, code: int) -> float:
        return float(np.exp(self.log_weights[code]))

    def prob(self, code: int) -> float:
        return float(self.probs[code])

    def configs(self):
        """Iterate (code, bits) over all configurations."""
        for code in range(self.n_configs):
            yield code, config_bits(code, self.graph.n_edges)

    def expectation(self, values) -> float:
        """E[f] for f given as a per-code array or a callable on bit vectors."""
        return float(np.dot(self.probs, self._values(values)))

    def _values(self, values) -> np.ndarray:
        if callable(values):
            values = np.array(
                [float(values(bits)) for _, bits in self.configs()], dtype=np.float64
            )
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.n_configs,):
            raise InvalidSpecError("value table must have one entry per configuration")
        return values

    def marginal_open(self, e: int) -> float:
        codes = np.arange(self.n_configs)
        return float(self.probs[(codes >> e) & 1 == 1].sum())

    def cluster_size_table(self, v: int) -> np.ndarray:
        """|K_v| per configuration code (cached)."""
        if not 0 <= v < self.graph.n_vertices:
            raise InvalidSpecError(f"vertex {v} out of range")
        if v not in self._size_tables:
            eu, ev, _ = self.graph.edge_arrays
            out = np.empty(self.n_configs, dtype=np.int64)
            _kernels.vertex_cluster_sizes_all(self.graph.n_vertices, eu, ev, v, out)
            self._size_tables[v] = out
        return self._size_tables[v]

    def mean_cluster_size(self, v: int) -> float:
        return float(np.dot(self.probs, self.cluster_size_table(v)))

    def to_csv(self, path) -> None:
        """Rows of (configuration bitstring, weight, probability); bit e of
        the string is edge e, leftmost first."""
        n_e = self.graph.n_edges
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["config", "weight", "probability"])
            for code in range(self.n_configs):
                bits = "".join("1" if (code >> e) & 1 else "0" for e in range(n_e))
                writer.writerow([bits, repr(self.weight(code)), repr(self.prob(code))])


def enumerate_measure(g: WeightedGraph, params: ModelParams, cap: int = ENUMERATION_CAP) -> ExactMeasure:
    """Enumerate all 2^{|E|} configurations (|E| <= cap, default 22)."""
    n_e = g.n_edges
    if n_e > cap:
        raise EnumerationCapError(f"{n_e} edges exceeds enumeration cap {cap}")
    n_cfg = 1 << n_e
    eu, ev, js = g.edge_arrays

    n_clusters = np.empty(n_cfg, dtype=np.int64)
    if _kernels.HAVE_NUMBA and n_e >= 12:
        _kernels.count_clusters_all(g.n_vertices, eu, ev, n_clusters)
    else:
        for code in range(n_cfg):
            n_clusters[code] = _count_clusters_python(g.n_vertices, g.edges, code)

    # sum of per-edge log-weights over open edges, built one edge at a time
    # in binary counting order; beta = 0 puts -inf on every nonempty config
    with np.errstate(divide="ignore"):
        edge_logs = np.log(np.expm1(params.beta * js))
    open_sums = np.zeros(1, dtype=np.float64)
    for e in range(n_e):
        open_sums = np.concatenate([open_sums, open_sums + edge_logs[e]])

    log_weights = n_clusters * math.log(params.q) + open_sums
    log_z = float(logsumexp(log_weights))
    probs = np.exp(log_weights - log_z)
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-12:
        raise DomainError(f"probability normalization off by {total - 1.0:.3e}")
    return ExactMeasure(
        graph=g,
        params=params,
        log_weights=log_weights,
        log_z=log_z,
        probs=probs,
        n_clusters=n_clusters,
    )


def exact_event_prob(measure: ExactMeasure, event) -> float:
    """P(event) for an event given as a per-code bool array or a predicate
    on bit vectors."""
    if callable(event):
        vals = np.array(
            [1.0 if event(bits) else 0.0 for _, bits in measure.configs()], dtype=np.float64
        )
    else:
        vals = np.asarray(event, dtype=np.float64)
    return measure.expectation(vals)


def exact_covariance(measure: ExactMeasure, f, e: int) -> float:
    """Cov(f, omega_e) under the exact measure."""
    if not 0 <= e < measure.graph.n_edges:
        raise InvalidSpecError(f"edge {e} out of range")
    fv = measure._values(f)
    codes = np.arange(measure.n_configs)
    ind = ((codes >> e) & 1).astype(np.float64)
    return float(np.dot(measure.probs, fv * ind) - measure.expectation(fv) * np.dot(measure.probs, ind))


def exact_tail(measure: ExactMeasure, v: int) -> TailCurve:
    """Exact survival curve of |K_v| for n = 1..|V|."""
    sizes = measure.cluster_size_table(v)
    n_v = measure.graph.n_vertices
    pmf = np.zeros(n_v + 1, dtype=np.float64)
    np.add.at(pmf, sizes, measure.probs)
    values = np.array([pmf[n:].sum() for n in range(1, n_v + 1)])
    values = np.minimum.accumulate(np.clip(values, 0.0, 1.0))
    return TailCurve(
        n_max=n_v,
        values=values,
        half_widths=np.zeros(n_v),
        n_samples=0,
        provenance="exact",
        confidence=1.0,
        pmf=pmf,
    )


@dataclass(frozen=True)
class LatticeConditionReport:
    """Outcome of an FKG lattice or monotonicity scan."""

    passed: bool
    worst_violation: float
    witness: tuple | None
    n_checked: int
    skipped_cells: int = 0
    exhaustive: bool = True


def _measure_log_weights(measure_or_weights) -> np.ndarray:
    if isinstance(measure_or_weights, ExactMeasure):
        return measure_or_weights.log_weights
    w = np.asarray(measure_or_weights, dtype=np.float64)
    if w.ndim != 1 or w.size & (w.size - 1):
        raise InvalidSpecError("weight table must have length 2^{n_edges}")
    if np.any(w < 0):
        raise InvalidSpecError("weights must be nonnegative")
    with np.errstate(divide="ignore"):
        return np.log(w)


def check_fkg_lattice(measure_or_weights, tol: float = 1e-9) -> LatticeConditionReport:
    """All-pairs FKG lattice condition:
    mu(a | b) mu(a & b) >= mu(a) mu(b), checked in log space."""
    lw = _measure_log_weights(measure_or_weights)
    n_cfg = lw.size
    codes = np.arange(n_cfg)
    worst = 0.0
    witness = None
    checked = 0
    for a in range(n_cfg):
        if lw[a] == -np.inf:
            continue  # rhs vanishes; condition holds trivially
        b_mask = lw > -np.inf
        bs = codes[b_mask]
        lhs = lw[a | bs] + lw[a & bs]
        rhs = lw[a] + lw[bs]
        gap = rhs - lhs  # positive -> violation
        checked += bs.size
        i = int(np.argmax(gap))
        if gap[i] > worst:
            worst = float(gap[i])
            witness = (a, int(bs[i]))
    return LatticeConditionReport(
        passed=worst <= tol, worst_violation=worst, witness=witness, n_checked=checked
    )


def _conditional_tables(probs: np.ndarray, n_e: int, cond_mask: int):
    """For conditioning set F (bitmask): per-pattern probabilities and
    per-pattern open mass of every edge outside F, pattern-indexed by the raw
    submask value."""
    n_cfg = probs.size
    codes = np.arange(n_cfg)
    patt = codes & cond_mask
    denom = np.bincount(patt, weights=probs, minlength=n_cfg)
    numer = {}
    for e in range(n_e):
        if (cond_mask >> e) & 1:
            continue
        w = probs * (((codes >> e) & 1).astype(np.float64))
        numer[e] = np.bincount(patt, weights=w, minlength=n_cfg)
    return denom, numer


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def check_monotonic(
    measure_or_weights,
    tol: float = 1e-9,
    exhaustive_cap: int = 12,
    n_spot: int = 200,
    seed: int = 0,
) -> LatticeConditionReport:
    """Monotonicity of conditional single-edge probabilities.

    Checks P(omega_e = 1 | omega_F = xi) >= P(omega_e = 1 | omega_F = zeta)
    for xi >= zeta.  Exhaustive up to `exhaustive_cap` edges over covering
    pairs (xi = zeta plus one coordinate), which implies the full comparable
    order by transitivity; above the cap, a seeded randomized spot-check.
    Conditioning events of zero probability are skipped and counted.
    """
    lw = _measure_log_weights(measure_or_weights)
    with np.errstate(over="ignore"):
        probs = np.exp(lw - logsumexp(lw))
    n_cfg = probs.size
    n_e = n_cfg.bit_length() - 1
    worst = 0.0
    witness = None
    checked = 0
    skipped = 0
    full = n_cfg - 1

    if n_e <= exhaustive_cap:
        for cond_mask in range(n_cfg):
            denom, numer = _conditional_tables(probs, n_e, cond_mask)
            free_edges = [e for e in range(n_e) if not (cond_mask >> e) & 1]
            cond_bits = [f for f in range(n_e) if (cond_mask >> f) & 1]
            for zeta in _submasks(cond_mask):
                if denom[zeta] <= 0.0:
                    skipped += 1
                    continue
                for f in cond_bits:
                    if (zeta >> f) & 1:
                        continue
                    xi = zeta | (1 << f)
                    if denom[xi] <= 0.0:
                        skipped += 1
                        continue
                    for e in free_edges:
                        lo = numer[e][zeta] / denom[zeta]
                        hi = numer[e][xi] / denom[xi]
                        checked += 1
                        if lo - hi > worst:
                            worst = float(lo - hi)
                            witness = (e, cond_mask, zeta, xi)
        return LatticeConditionReport(
            passed=worst <= tol,
            worst_violation=worst,
            witness=witness,
            n_checked=checked,
            skipped_cells=skipped,
            exhaustive=True,
        )

    rng = np.random.default_rng(seed)
    codes = np.arange(n_cfg)
    for _ in range(n_spot):
        e = int(rng.integers(n_e))
        cond_mask = int(rng.integers(n_cfg)) & ~(1 << e) & full
        zeta = int(rng.integers(n_cfg)) & cond_mask
        extra = int(rng.integers(n_cfg)) & cond_mask & ~zeta
        xi = zeta | extra
        if xi == zeta:
            continue
        patt = codes & cond_mask
        sel_lo = patt == zeta
        sel_hi = patt == xi
        d_lo = probs[sel_lo].sum()
        d_hi = probs[sel_hi].sum()
        if d_lo <= 0.0 or d_hi <= 0.0:
            skipped += 1
            continue
        openmask = ((codes >> e) & 1) == 1
        lo = probs[sel_lo & openmask].sum() / d_lo
        hi = probs[sel_hi & openmask].sum() / d_hi
        checked += 1
        if lo - hi > worst:
            worst = float(lo - hi)
            witness = (e, cond_mask, zeta, xi)
    return LatticeConditionReport(
        passed=worst <= tol,
        worst_violation=worst,
        witness=witness,
        n_checked=checked,
        skipped_cells=skipped,
        exhaustive=False,
    )


@dataclass(frozen=True)
class DerivativeReport:
    """Finite-difference vs covariance-sum comparison of d/dbeta E[f]."""

    finite_difference: float
    covariance_sum: float
    step: float

    @property
    def gap(self) -> float:
        return abs(self.finite_difference - self.covariance_sum)


def verify_derivative_formula(
    g: WeightedGraph, params: ModelParams, f, step: float = 1e-2, cap: int = ENUMERATION_CAP
) -> DerivativeReport:
    """Check d/dbeta E_beta[f] = sum_e (J_e / (1 - exp(-beta J_e))) Cov(f, omega_e).

    The coefficient is d(log w_e)/dbeta with w_e = exp(beta J_e) - 1 the
    conditional odds, which is what differentiating the edge weights gives.
    The left side is a central finite difference, so the gap shrinks like
    step^2; beta must exceed step to stay in the valid domain.
    """
    if params.beta <= step:
        raise DomainError("need beta > step for the central difference")
    mid = enumerate_measure(g, params, cap)
    lo = enumerate_measure(g, ModelParams(params.beta - step, params.q, params.boundary), cap)
    hi = enumerate_measure(g, ModelParams(params.beta + step, params.q, params.boundary), cap)
    fv = mid._values(f)
    fd = (hi.expectation(fv) - lo.expectation(fv)) / (2.0 * step)
    _, _, js = g.edge_arrays
    coeff = js / (-np.expm1(-params.beta * js))
    cov_sum = 0.0
    for e in range(g.n_edges):
        cov_sum += coeff[e] * exact_covariance(mid, fv, e)
    return DerivativeReport(finite_difference=fd, covariance_sum=cov_sum, step=step)


def derivative_gap_ratio(g: WeightedGraph, params: ModelParams, f, step: float = 1e-2) -> float:
    """gap(step) / gap(step/2); about 4 when the step^2 error term dominates."""
    r1 = verify_derivative_formula(g, params, f, step)
    r2 = verify_derivative_formula(g, params, f, step / 2.0)
    if r2.gap == 0.0:
        raise DomainError("gap vanished at the halved step; ratio undefined")
    return r1.gap / r2.gap


def all_measures(graphs, qs, betas, cap: int = ENUMERATION_CAP):
    """Iterate (graph, params, measure) over a parameter grid."""
    for g, q, beta in itertools.product(graphs, qs, betas):
        params = ModelParams(beta=beta, q=q)
        yield g, params, enumerate_measure(g, params, cap)


def exact_radius_tail(measure: ExactMeasure, v: int, metric: str = "ambient") -> TailCurve:
    """Exact survival curve of the cluster radius of v.

    Radius 0 (isolated tagged vertex) carries mass, so value(1) < 1 in
    general; levels run 1..max(1, |V|-1).
    """
    from .clusters import cluster_radius

    g = measure.graph
    if not 0 <= v < g.n_vertices:
        raise InvalidSpecError(f"vertex {v} out of range")
    n_max = max(1, g.n_vertices - 1)
    pmf = np.zeros(n_max + 1)
    for code in range(measure.n_configs):
        r = cluster_radius(g, config_bits(code, g.n_edges), v, metric)
        pmf[r] += measure.probs[code]
    # suffix sums give survival; clip stray negatives from float addition
    values = np.minimum.accumulate(np.clip(pmf[::-1].cumsum()[::-1][1:], 0.0, 1.0))
    return TailCurve(
        n_max=n_max,
        values=values,
        half_widths=np.zeros(n_max),
        n_samples=0,
        provenance="exact",
        confidence=DEFAULT_CONFIDENCE,
        pmf=pmf,
    )

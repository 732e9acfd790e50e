"""Cluster decomposition and the statistics built on it.

Tail curves keep the full integer histogram of observed sizes, not just the
survival probabilities: partial sums and means are then exact sample means of
min(size, M), with honest half-widths, instead of sums of correlated
per-level estimates.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import DomainError, InsufficientDataError, InvalidSpecError
from .graphs import UnionFind, WeightedGraph

__all__ = [
    "ClusterDecomposition",
    "decompose",
    "cluster_radius",
    "TailCurve",
    "tail_curve",
    "MomentTable",
    "empirical_moments",
    "TailAccumulator",
    "synthetic_tail",
    "synthetic_moments",
    "DEFAULT_CONFIDENCE",
]

# two-sided normal level whose quantile is exactly 3 sigma
DEFAULT_CONFIDENCE = 2.0 * norm.cdf(3.0) - 1.0


def _z(confidence: float) -> float:
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must be in (0, 1), got {confidence}")
    return float(norm.ppf(0.5 * (1.0 + confidence)))


@dataclass(frozen=True)
class ClusterDecomposition:
    """Connected components of the open subgraph.

    labels[v] is the smallest vertex index in v's component, so labels are
    canonical and stable across decomposition strategies.
    """

    labels: np.ndarray
    sizes: np.ndarray  # size of the component containing each vertex

    @property
    def n_clusters(self) -> int:
        return int(np.unique(self.labels).size)

    def size_of(self, v: int) -> int:
        return int(self.sizes[v])

    def members(self, v: int) -> np.ndarray:
        return np.nonzero(self.labels == self.labels[v])[0]


def decompose(g: WeightedGraph, config) -> ClusterDecomposition:
    """Union-find decomposition of the open subgraph (isolated vertices are
    their own clusters; self-loops and parallel edges are harmless)."""
    config = np.asarray(config)
    if config.shape != (g.n_edges,):
        raise InvalidSpecError("config length must equal number of edges")
    uf = UnionFind.of(g.n_vertices)
    for e, (u, v) in enumerate(g.edges):
        if config[e]:
            uf.union(u, v)
    roots = np.fromiter((uf.find(v) for v in range(g.n_vertices)), dtype=np.int64)
    labels = np.empty(g.n_vertices, dtype=np.int64)
    smallest: dict[int, int] = {}
    for v in range(g.n_vertices):
        r = roots[v]
        if r not in smallest:
            smallest[r] = v
        labels[v] = smallest[r]
    sizes = np.fromiter((uf.component_size(v) for v in range(g.n_vertices)), dtype=np.int64)
    return ClusterDecomposition(labels=labels, sizes=sizes)


def cluster_radius(g: WeightedGraph, config, v: int, metric: str = "ambient") -> int:
    """Radius of the cluster of v: max distance from v to a cluster member.

    `ambient` measures distance in the full graph (the default convention);
    `intrinsic` measures it inside the open subgraph.
    """
    if metric not in ("ambient", "intrinsic"):
        raise InvalidSpecError(f"unknown radius metric {metric!r}")
    dec = decompose(g, config)
    members = dec.members(v)
    if metric == "ambient":
        dist = g.distances_from(v)
        return int(dist[members].max())
    # BFS restricted to open edges
    config = np.asarray(config)
    dist = {v: 0}
    frontier = [v]
    best = 0
    while frontier:
        nxt = []
        for x in frontier:
            for e in g.incident_edges[x]:
                if not config[e]:
                    continue
                u0, v0 = g.edges[e]
                y = u0 + v0 - x
                if y not in dist:
                    dist[y] = dist[x] + 1
                    best = max(best, dist[y])
                    nxt.append(y)
        frontier = nxt
    return best


@dataclass(frozen=True)
class TailCurve:
    """Survival curve P(X >= n) for n = 1..n_max over nonnegative integers.

    `counts[k]` is how many samples equal k (exact curves carry `pmf`
    instead and zero half-widths).  Cluster-size curves of a fixed vertex
    satisfy value(1) == 1; radius curves may not, since radius 0 happens.
    """

    n_max: int
    values: np.ndarray
    half_widths: np.ndarray
    n_samples: int
    provenance: str  # "exact" | "monte-carlo"
    confidence: float
    counts: np.ndarray | None = field(default=None, repr=False)
    pmf: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n_max < 1:
            raise InvalidSpecError("n_max must be >= 1")
        if self.values.shape != (self.n_max,) or self.half_widths.shape != (self.n_max,):
            raise InvalidSpecError("curve arrays must have length n_max")
        if np.any(np.diff(self.values) > 1e-12):
            raise InvalidSpecError("survival values must be nonincreasing")
        if self.provenance in ("exact", "synthetic"):
            if not np.all(self.half_widths == 0.0):
                raise InvalidSpecError("noise-free curves must have zero half-widths")
        else:
            # sampled curves have zero width only where the estimate is pinned
            pinned = (self.values <= 0.0) | (self.values >= 1.0)
            if np.any((self.half_widths == 0.0) & ~pinned):
                raise InvalidSpecError("sampled curves need positive half-widths off 0/1")

    @property
    def is_exact(self) -> bool:
        return self.provenance in ("exact", "synthetic")

    def value(self, n: int) -> float:
        if not 1 <= n <= self.n_max:
            raise DomainError(f"n={n} outside curve range 1..{self.n_max}")
        return float(self.values[n - 1])

    def half_width(self, n: int) -> float:
        if not 1 <= n <= self.n_max:
            raise DomainError(f"n={n} outside curve range 1..{self.n_max}")
        return float(self.half_widths[n - 1])

    def _dist(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(support values, probability mass) of the underlying samples, or
        None when the curve holds only the survival levels (e.g. loaded from
        CSV or constructed synthetically)."""
        if self.pmf is not None:
            ks = np.arange(self.pmf.size, dtype=np.float64)
            return ks, self.pmf
        if self.counts is None:
            return None
        ks = np.arange(self.counts.size, dtype=np.float64)
        return ks, self.counts / self.n_samples

    def _level_sum(self, m: int) -> tuple[float, float]:
        """Fallback partial sum over stored levels only; valid up to n_max,
        and beyond it only when the curve has already decayed to zero there.
        The half-width adds per-level widths (correlations unknown)."""
        if m > self.n_max and self.values[-1] > 0.0:
            raise DomainError(
                f"partial sum to {m} requested but the curve only covers levels "
                f"up to {self.n_max} and is still positive there"
            )
        upto = min(m, self.n_max)
        return float(np.sum(self.values[:upto])), float(np.sum(self.half_widths[:upto]))

    def partial_sum(self, m: int) -> tuple[float, float]:
        """(sum_{k<=m} P(X >= k), half-width) = stats of E[min(X, m)].

        Exact for the held distribution: the half-width is the honest
        delta-method width of a single sample mean, not a sum of correlated
        per-level widths.  Curves without distribution data fall back to
        summing stored levels.
        """
        if m < 1:
            raise DomainError("partial sums need m >= 1")
        dist = self._dist()
        if dist is None:
            return self._level_sum(m)
        ks, mass = dist
        clipped = np.minimum(ks, m)
        mean = float(np.dot(mass, clipped))
        if self.is_exact:
            return mean, 0.0
        var = float(np.dot(mass, clipped**2)) - mean**2
        z = _z(self.confidence)
        return mean, z * math.sqrt(max(var, 0.0) / self.n_samples)

    def mean(self) -> tuple[float, float]:
        """(E[X], half-width) from the held distribution; curves without
        distribution data sum their levels, which requires the curve to have
        decayed to zero by n_max."""
        dist = self._dist()
        if dist is None:
            if self.values[-1] > 0.0:
                raise DomainError(
                    "mean of a level-only curve is defined only when the tail "
                    "reaches zero within its range"
                )
            return self._level_sum(self.n_max)
        ks, mass = dist
        mean = float(np.dot(mass, ks))
        if self.is_exact:
            return mean, 0.0
        var = float(np.dot(mass, ks**2)) - mean**2
        z = _z(self.confidence)
        return mean, z * math.sqrt(max(var, 0.0) / self.n_samples)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "estimate", "half_width", "N"])
            for i in range(self.n_max):
                writer.writerow(
                    [i + 1, repr(float(self.values[i])), repr(float(self.half_widths[i])), self.n_samples]
                )

    @staticmethod
    def from_csv(path, provenance: str = "monte-carlo", confidence: float = DEFAULT_CONFIDENCE) -> "TailCurve":
        ns, vals, hws, n_samples = [], [], [], 0
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                ns.append(int(row["n"]))
                vals.append(float(row["estimate"]))
                hws.append(float(row["half_width"]))
                n_samples = int(row["N"])
        order = np.argsort(ns)
        return TailCurve(
            n_max=len(ns),
            values=np.asarray(vals)[order],
            half_widths=np.asarray(hws)[order],
            n_samples=n_samples,
            provenance=provenance,
            confidence=confidence,
        )


def _survival_from_counts(counts: np.ndarray, n_max: int, n_samples: int):
    suffix = np.cumsum(counts[::-1])[::-1]  # suffix[k] = #{X >= k}
    vals = np.zeros(n_max, dtype=np.float64)
    upto = min(n_max, counts.size - 1)
    vals[:upto] = suffix[1 : upto + 1] / n_samples
    return vals


def tail_curve(samples, n_max: int | None = None, confidence: float = DEFAULT_CONFIDENCE) -> TailCurve:
    """Empirical survival curve with normal-approximation half-widths."""
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size < 2:
        raise InsufficientDataError("tail curves need at least 2 samples")
    if samples.min() < 0:
        raise DomainError("samples must be nonnegative integers")
    n = samples.size
    if n_max is None:
        n_max = int(samples.max())
    if n_max < 1:
        raise InvalidSpecError("n_max must be >= 1")
    counts = np.bincount(samples, minlength=n_max + 1).astype(np.int64)
    vals = _survival_from_counts(counts, n_max, n)
    z = _z(confidence)
    hws = z * np.sqrt(vals * (1.0 - vals) / n)
    return TailCurve(
        n_max=n_max,
        values=vals,
        half_widths=hws,
        n_samples=n,
        provenance="monte-carlo",
        confidence=confidence,
        counts=counts,
    )


@dataclass(frozen=True)
class MomentTable:
    """E[min(X, truncation)^k] for k = 1..k_max with half-widths."""

    k_max: int
    estimates: np.ndarray
    half_widths: np.ndarray
    n_samples: int
    truncation: int | None
    provenance: str
    confidence: float

    def estimate(self, k: int) -> float:
        if not 1 <= k <= self.k_max:
            raise DomainError(f"k={k} outside 1..{self.k_max}")
        return float(self.estimates[k - 1])

    def half_width(self, k: int) -> float:
        return float(self.half_widths[k - 1])

    def is_log_convex(self, rtol: float = 1e-9) -> bool:
        """Lyapunov: m_k^2 <= m_{k-1} m_{k+1} (with m_0 = 1)."""
        ms = np.concatenate([[1.0], self.estimates])
        for k in range(1, len(ms) - 1):
            if ms[k] ** 2 > ms[k - 1] * ms[k + 1] * (1.0 + rtol):
                return False
        return True

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "estimate", "half_width", "N", "truncation"])
            for i in range(self.k_max):
                writer.writerow(
                    [
                        i + 1,
                        repr(float(self.estimates[i])),
                        repr(float(self.half_widths[i])),
                        self.n_samples,
                        "" if self.truncation is None else self.truncation,
                    ]
                )


def empirical_moments(
    samples,
    k_max: int,
    truncation: int | None = None,
    confidence: float = DEFAULT_CONFIDENCE,
) -> MomentTable:
    """Moment estimates from integer samples.

    Accumulation is exact (Python integers), so merge order can never change
    the result; only the final division rounds.
    """
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size < 2:
        raise InsufficientDataError("moment tables need at least 2 samples")
    if k_max < 1:
        raise InvalidSpecError("k_max must be >= 1")
    if truncation is not None and truncation < 1:
        raise DomainError("truncation must be >= 1")
    if k_max > 8:
        warnings.warn("moments beyond k = 8 are dominated by rare clusters; interpret with care")
    vals = samples if truncation is None else np.minimum(samples, truncation)
    n = vals.size
    counts = np.bincount(vals)
    support = np.arange(counts.size, dtype=object)
    ests, hws = [], []
    z = _z(confidence)
    for k in range(1, k_max + 1):
        total = int(sum(int(c) * int(s) ** k for s, c in zip(support, counts) if c))
        total2 = int(sum(int(c) * int(s) ** (2 * k) for s, c in zip(support, counts) if c))
        mean = total / n
        var = total2 / n - mean**2
        ests.append(mean)
        hws.append(z * math.sqrt(max(var, 0.0) / n))
    return MomentTable(
        k_max=k_max,
        estimates=np.asarray(ests),
        half_widths=np.asarray(hws),
        n_samples=n,
        truncation=truncation,
        provenance="monte-carlo",
        confidence=confidence,
    )


class TailAccumulator:
    """Mergeable histogram accumulator for chunked/parallel sampling.

    Counts are Python ints in a growable numpy array; merging is exact and
    associative, so results do not depend on worker count or merge order.
    """

    def __init__(self):
        self.counts = np.zeros(1, dtype=np.int64)
        self.n = 0

    def add(self, samples) -> "TailAccumulator":
        samples = np.asarray(samples, dtype=np.int64)
        if samples.size:
            top = int(samples.max())
            if top + 1 > self.counts.size:
                self.counts = np.concatenate(
                    [self.counts, np.zeros(top + 1 - self.counts.size, dtype=np.int64)]
                )
            self.counts += np.bincount(samples, minlength=self.counts.size)
            self.n += samples.size
        return self

    def merge(self, other: "TailAccumulator") -> "TailAccumulator":
        size = max(self.counts.size, other.counts.size)
        merged = np.zeros(size, dtype=np.int64)
        merged[: self.counts.size] += self.counts
        merged[: other.counts.size] += other.counts
        self.counts = merged
        self.n += other.n
        return self

    def curve(self, n_max: int | None = None, confidence: float = DEFAULT_CONFIDENCE) -> TailCurve:
        if self.n < 2:
            raise InsufficientDataError("accumulator holds fewer than 2 samples")
        if n_max is None:
            n_max = int(np.nonzero(self.counts)[0].max())
        vals = _survival_from_counts(self.counts, n_max, self.n)
        z = _z(confidence)
        hws = z * np.sqrt(vals * (1.0 - vals) / self.n)
        return TailCurve(
            n_max=n_max,
            values=vals,
            half_widths=hws,
            n_samples=self.n,
            provenance="monte-carlo",
            confidence=confidence,
            counts=self.counts.copy(),
        )

    def moments(
        self,
        k_max: int,
        truncation: int | None = None,
        confidence: float = DEFAULT_CONFIDENCE,
    ) -> MomentTable:
        if self.n < 2:
            raise InsufficientDataError("accumulator holds fewer than 2 samples")
        if k_max > 8:
            warnings.warn("moments beyond k = 8 are dominated by rare clusters; interpret with care")
        z = _z(confidence)
        ests, hws = [], []
        for k in range(1, k_max + 1):
            total = 0
            total2 = 0
            for s, c in enumerate(self.counts):
                if not c:
                    continue
                val = min(s, truncation) if truncation is not None else s
                total += int(c) * val**k
                total2 += int(c) * val ** (2 * k)
            mean = total / self.n
            var = total2 / self.n - mean**2
            ests.append(mean)
            hws.append(z * math.sqrt(max(var, 0.0) / self.n))
        return MomentTable(
            k_max=k_max,
            estimates=np.asarray(ests),
            half_widths=np.asarray(hws),
            n_samples=self.n,
            truncation=truncation,
            provenance="monte-carlo",
            confidence=confidence,
        )


def synthetic_tail(values, confidence: float = DEFAULT_CONFIDENCE) -> TailCurve:
    """Noise-free curve from given survival levels (planted power laws and
    other constructed inputs).  Carries no distribution data; partial sums
    and means fall back to level summation."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size < 1:
        raise InvalidSpecError("need a 1-d array of survival values")
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise DomainError("survival values must lie in [0, 1]")
    return TailCurve(
        n_max=values.size,
        values=values,
        half_widths=np.zeros(values.size),
        n_samples=0,
        provenance="synthetic",
        confidence=confidence,
    )


def synthetic_moments(moments, confidence: float = DEFAULT_CONFIDENCE) -> MomentTable:
    """Noise-free moment table from given values of E[X^k], k = 1.."""
    est = np.asarray(moments, dtype=np.float64)
    if est.ndim != 1 or est.size < 1:
        raise InvalidSpecError("need a 1-d array of moment values")
    if np.any(est <= 0.0):
        raise DomainError("moments of a positive-size cluster must be positive")
    return MomentTable(
        k_max=est.size,
        estimates=est,
        half_widths=np.zeros(est.size),
        n_samples=0,
        truncation=None,
        provenance="synthetic",
        confidence=confidence,
    )

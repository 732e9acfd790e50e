"""Cluster-volume sampling on the complete graph with edge probability p,
without materializing the quadratic edge set.

The cluster of a tagged vertex is grown generation by generation: with `a`
active vertices and `u` unexplored vertices, each unexplored vertex joins
independently with probability 1 - (1-p)^a, so the next generation size is
Binomial(u, 1-(1-p)^a).  This is an exact sampling of |K| (the union bound
is exact here because trials to distinct unexplored vertices are
independent), vectorized across replicas.
"""

from __future__ import annotations

import math

import numpy as np

from .clusters import MomentTable, TailCurve, empirical_moments, tail_curve
from .errors import DomainError, InvalidSpecError
from .rng import substream

__all__ = [
    "complete_cluster_sizes",
    "meanfield_tail",
    "meanfield_subcritical_scan",
]


def complete_cluster_sizes(
    n_vertices: int, p: float, n_samples: int, seed: int, key: int = 0, chunk: int = 1 << 17
) -> np.ndarray:
    """|K| samples for a tagged vertex of the complete graph on n_vertices
    vertices with i.i.d. edge retention probability p."""
    if n_vertices < 1:
        raise InvalidSpecError(f"need >= 1 vertex, got {n_vertices}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p}")
    if n_samples < 1:
        raise InvalidSpecError(f"need >= 1 sample, got {n_samples}")
    log1mp = math.log1p(-p) if p < 1.0 else -math.inf
    out = np.empty(n_samples, dtype=np.int64)
    pos = 0
    chunk_idx = 0
    while pos < n_samples:
        rows = min(chunk, n_samples - pos)
        rng = substream(seed, "meanfield", key, chunk_idx)
        size = np.ones(rows, dtype=np.int64)
        active = np.ones(rows, dtype=np.int64)
        unexplored = np.full(rows, n_vertices - 1, dtype=np.int64)
        alive = np.arange(rows)
        while alive.size:
            a = active[alive]
            u = unexplored[alive]
            if p >= 1.0:
                newly = u.copy()
            else:
                p_join = -np.expm1(a * log1mp)
                newly = rng.binomial(u, p_join)
            size[alive] += newly
            unexplored[alive] = u - newly
            active[alive] = newly
            alive = alive[(newly > 0) & (unexplored[alive] > 0)]
        out[pos : pos + rows] = size
        pos += rows
        chunk_idx += 1
    return out


def meanfield_tail(
    n_vertices: int,
    p: float,
    n_samples: int,
    seed: int,
    n_max: int | None = None,
    k_max: int = 4,
) -> tuple[TailCurve, MomentTable]:
    """Tail curve and moment table of |K| on the complete graph."""
    sizes = complete_cluster_sizes(n_vertices, p, n_samples, seed)
    curve = tail_curve(sizes, n_max=n_max if n_max is not None else n_vertices)
    return curve, empirical_moments(sizes, k_max)


def meanfield_subcritical_scan(
    n_vertices: int,
    c_values,
    n_samples: int,
    seed: int,
    k_max: int = 3,
) -> tuple[list[float], list[float], list[MomentTable]]:
    """Scan of p = c / n below the critical point p_c = 1/n.

    Returns (p values, mean |K| per point, moment tables per point); the
    distances to criticality are p_c - p = (1 - c) / n.
    """
    cs = list(c_values)
    if any(not 0.0 < c < 1.0 for c in cs):
        raise DomainError("subcritical scan needs 0 < c < 1")
    ps, means, tables = [], [], []
    for j, c in enumerate(cs):
        p = c / n_vertices
        sizes = complete_cluster_sizes(n_vertices, p, n_samples, seed=seed, key=j + 1)
        ps.append(p)
        means.append(float(sizes.mean()))
        tables.append(empirical_moments(sizes, k_max))
    return ps, means, tables

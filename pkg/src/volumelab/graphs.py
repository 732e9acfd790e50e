"""Finite weighted multigraphs and lattice builders.

A graph here is the combinatorial substrate every other module consumes:
indexed vertices, an explicitly ordered edge list (construction order is the
total order used for deterministic tie-breaks downstream), per-edge coupling
strengths, and nothing else.  Parallel edges and self-loops are legal; the
heavy numerical work happens elsewhere.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from math import expm1, prod

import numpy as np

from .errors import DomainError, InvalidSpecError

__all__ = [
    "WeightedGraph",
    "LatticeSpec",
    "BoundaryCondition",
    "build_lattice",
    "apply_boundary",
    "susceptibility_constant",
    "complete_graph",
    "named_graph",
    "small_graph_catalog",
    "to_edge_list_text",
    "from_edge_list_text",
]


@dataclass(frozen=True)
class WeightedGraph:
    """Finite multigraph with ordered edges and positive couplings.

    Parameters
    ----------
    n_vertices:
        Vertices are 0 .. n_vertices-1.
    edges:
        Tuple of (u, v) endpoint pairs; the tuple index is the edge's
        position in the fixed total edge order.
    couplings:
        Per-edge coupling strength J_e > 0, aligned with `edges`.
    name:
        Free-form label carried into reports.
    vertex_transitive:
        Set by constructors that guarantee it (tori, complete graphs); lets
        analysis code take one vertex as representative.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    couplings: tuple[float, ...]
    name: str = ""
    vertex_transitive: bool = False

    def __post_init__(self):
        if self.n_vertices < 1:
            raise InvalidSpecError("graph needs at least one vertex")
        if len(self.edges) != len(self.couplings):
            raise InvalidSpecError("edges and couplings length mismatch")
        for i, (u, v) in enumerate(self.edges):
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise InvalidSpecError(f"edge {i} endpoint out of range: {(u, v)}")
        for i, j in enumerate(self.couplings):
            if not (j > 0.0) or not np.isfinite(j):
                raise InvalidSpecError(f"coupling {i} must be positive and finite, got {j}")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(endpoints_u, endpoints_v, couplings) as numpy arrays for kernels."""
        eu = np.array([e[0] for e in self.edges], dtype=np.int64)
        ev = np.array([e[1] for e in self.edges], dtype=np.int64)
        js = np.array(self.couplings, dtype=np.float64)
        return eu, ev, js

    @cached_property
    def incident_edges(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices touching each vertex (self-loops listed once)."""
        inc: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, (u, v) in enumerate(self.edges):
            inc[u].append(i)
            if v != u:
                inc[v].append(i)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Adjacent vertices (parallel edges deduplicated, self-loops dropped)."""
        adj: list[set[int]] = [set() for _ in range(self.n_vertices)]
        for u, v in self.edges:
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        return tuple(tuple(sorted(s)) for s in adj)

    def distances_from(self, v: int) -> np.ndarray:
        """Ambient graph distances from v via BFS; unreachable -> -1."""
        if not 0 <= v < self.n_vertices:
            raise InvalidSpecError(f"vertex {v} out of range")
        dist = np.full(self.n_vertices, -1, dtype=np.int64)
        dist[v] = 0
        queue = deque([v])
        while queue:
            x = queue.popleft()
            for y in self.neighbors[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist

    def meta(self) -> dict:
        """Metadata block attached to serialized reports."""
        return {
            "name": self.name,
            "n_vertices": self.n_vertices,
            "n_edges": self.n_edges,
            "vertex_transitive": self.vertex_transitive,
        }


@dataclass(frozen=True)
class LatticeSpec:
    """Hypercubic box or torus specification.

    `wrap` may be a single bool (applied to every axis) or a per-axis tuple.
    A wrapped axis of length 2 yields the doubled parallel edge, length 1
    yields a self-loop; both follow the multigraph convention of keeping what
    the construction produces.
    """

    dimension: int
    lengths: tuple[int, ...]
    wrap: tuple[bool, ...] | bool = True
    coupling: float = 1.0

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidSpecError("lattice dimension must be >= 1")
        if len(self.lengths) != self.dimension:
            raise InvalidSpecError("lengths must list one extent per axis")
        if any(length < 1 for length in self.lengths):
            raise InvalidSpecError("axis lengths must be >= 1")
        if isinstance(self.wrap, bool):
            object.__setattr__(self, "wrap", (self.wrap,) * self.dimension)
        elif len(self.wrap) != self.dimension:
            raise InvalidSpecError("wrap must be a bool or one flag per axis")
        if not self.coupling > 0:
            raise InvalidSpecError("coupling must be positive")


@dataclass(frozen=True)
class BoundaryCondition:
    """Either `free` (plain induced subgraph) or `wired` (merge the rest)."""

    kind: str = "free"

    def __post_init__(self):
        if self.kind not in ("free", "wired"):
            raise InvalidSpecError(f"unknown boundary kind: {self.kind!r}")


def build_lattice(spec: LatticeSpec) -> WeightedGraph:
    """Build the nearest-neighbor graph of a hypercubic box/torus.

    Vertices are indexed in row-major coordinate order.  Edges are emitted
    lexicographically by (vertex index, axis): for each vertex, its +axis
    neighbor on every axis, skipping the seam on unwrapped axes.
    """
    lengths = spec.lengths
    n = prod(lengths)
    strides = [prod(lengths[a + 1 :]) for a in range(spec.dimension)]
    edges: list[tuple[int, int]] = []
    for v in range(n):
        coords = [(v // strides[a]) % lengths[a] for a in range(spec.dimension)]
        for a in range(spec.dimension):
            if coords[a] + 1 < lengths[a]:
                edges.append((v, v + strides[a]))
            elif spec.wrap[a]:
                # wrap seam: +1 ~ 0 on this axis (self-loop when L = 1)
                edges.append((v, v - (lengths[a] - 1) * strides[a]))
    all_wrapped = all(spec.wrap)
    label = "x".join(str(length) for length in lengths)
    return WeightedGraph(
        n_vertices=n,
        edges=tuple(edges),
        couplings=(spec.coupling,) * len(edges),
        name=f"{'torus' if all_wrapped else 'box'}-{label}",
        vertex_transitive=all_wrapped,
    )


def apply_boundary(g: WeightedGraph, bc: BoundaryCondition, retained) -> WeightedGraph:
    """Apply boundary surgery, keeping `retained` vertices.

    free: induced subgraph on `retained`.
    wired: every vertex outside `retained` merges into a single hub that
    inherits the smallest constituent index; edges internal to the merged set
    (the identification self-loops) are deleted, parallel edges are kept.

    Vertices are relabeled by ascending original index either way.
    """
    retained_set = set(retained)
    for v in retained_set:
        if not 0 <= v < g.n_vertices:
            raise InvalidSpecError(f"retained vertex {v} out of range")
    outside = [v for v in range(g.n_vertices) if v not in retained_set]

    if bc.kind == "free" or not outside:
        keep_sorted = sorted(retained_set) if bc.kind == "free" else list(range(g.n_vertices))
        relabel = {old: new for new, old in enumerate(keep_sorted)}
        edges = []
        couplings = []
        for (u, v), j in zip(g.edges, g.couplings):
            if u in relabel and v in relabel:
                edges.append((relabel[u], relabel[v]))
                couplings.append(j)
        return WeightedGraph(
            n_vertices=len(keep_sorted),
            edges=tuple(edges),
            couplings=tuple(couplings),
            name=f"{g.name}+free" if bc.kind == "free" else g.name,
        )

    hub = min(outside)
    keep_sorted = sorted(retained_set | {hub})
    relabel = {old: new for new, old in enumerate(keep_sorted)}

    def image(v: int) -> int:
        return relabel[v if v in retained_set else hub]

    edges = []
    couplings = []
    for (u, v), j in zip(g.edges, g.couplings):
        if u not in retained_set and v not in retained_set:
            continue  # identification self-loop
        edges.append((image(u), image(v)))
        couplings.append(j)
    return WeightedGraph(
        n_vertices=len(keep_sorted),
        edges=tuple(edges),
        couplings=tuple(couplings),
        name=f"{g.name}+wired",
    )


def susceptibility_constant(g: WeightedGraph, beta: float) -> float:
    """max over edges of (exp(beta*J_e) - 1) / J_e.

    Zero at beta = 0; grows like max J_e * exp(beta * max J_e) for large
    beta.  An edgeless graph has no edge-dependent dynamics, so 0 by
    convention.
    """
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    if g.n_edges == 0:
        return 0.0
    return max(expm1(beta * j) / j for j in g.couplings)


def complete_graph(n: int, coupling: float = 1.0) -> WeightedGraph:
    """Complete graph K_n with edges in lexicographic (u, v) order."""
    if n < 1:
        raise InvalidSpecError("complete graph needs n >= 1")
    edges = tuple((u, v) for u in range(n) for v in range(u + 1, n))
    return WeightedGraph(
        n_vertices=n,
        edges=edges,
        couplings=(coupling,) * len(edges),
        name=f"complete-{n}",
        vertex_transitive=True,
    )


def _wg(name, n, edges, transitive=False, coupling=1.0):
    return WeightedGraph(
        n_vertices=n,
        edges=tuple(edges),
        couplings=(coupling,) * len(edges),
        name=name,
        vertex_transitive=transitive,
    )


_NAMED = {
    "single-vertex": ("K1", 1, [], True),
    "single-edge": ("K2", 2, [(0, 1)], True),
    "path-3": ("P3", 3, [(0, 1), (1, 2)], False),
    "triangle": ("C3", 3, [(0, 1), (0, 2), (1, 2)], True),
    "path-4": ("P4", 4, [(0, 1), (1, 2), (2, 3)], False),
    "star-4": ("K1,3", 4, [(0, 1), (0, 2), (0, 3)], False),
    "cycle-4": ("C4", 4, [(0, 1), (0, 3), (1, 2), (2, 3)], True),
    "paw": ("triangle+pendant", 4, [(0, 1), (0, 2), (1, 2), (2, 3)], False),
    "diamond": ("K4 minus an edge", 4, [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)], False),
    "parallel-pair": ("doubled K2", 2, [(0, 1), (0, 1)], True),
    "triangle-doubled": ("C3 with one doubled side", 3, [(0, 1), (0, 1), (0, 2), (1, 2)], False),
}


def named_graph(name: str, coupling: float = 1.0) -> WeightedGraph:
    """Small catalog graphs used by the exhaustive oracle suites."""
    try:
        _, n, edges, transitive = _NAMED[name]
    except KeyError:
        raise InvalidSpecError(
            f"unknown graph name {name!r}; known: {sorted(_NAMED)}"
        ) from None
    return _wg(name, n, edges, transitive, coupling)


def small_graph_catalog() -> list[WeightedGraph]:
    """Every connected graph on <= 4 vertices with <= 5 edges, up to
    isomorphism, plus two multigraphs with a parallel pair."""
    return [named_graph(name) for name in _NAMED]


def to_edge_list_text(g: WeightedGraph) -> str:
    """Serialize to the plain edge-list interchange format."""
    lines = [f"vertices {g.n_vertices}"]
    if g.name:
        lines.append(f"name {g.name}")
    for (u, v), j in zip(g.edges, g.couplings):
        lines.append(f"{u} {v} {j!r}")
    return "\n".join(lines) + "\n"


def from_edge_list_text(text: str) -> WeightedGraph:
    """Parse the edge-list format written by `to_edge_list_text`."""
    n_vertices = None
    name = ""
    edges: list[tuple[int, int]] = []
    couplings: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "vertices":
            n_vertices = int(parts[1])
        elif parts[0] == "name":
            name = " ".join(parts[1:])
        else:
            if len(parts) != 3:
                raise InvalidSpecError(f"edge list line {lineno}: expected 'u v J'")
            edges.append((int(parts[0]), int(parts[1])))
            couplings.append(float(parts[2]))
    if n_vertices is None:
        raise InvalidSpecError("edge list is missing the 'vertices N' header")
    return WeightedGraph(
        n_vertices=n_vertices, edges=tuple(edges), couplings=tuple(couplings), name=name
    )


# kept here so downstream modules can reuse one implementation
@dataclass
class UnionFind:
    """Array union-find with path halving and union by size."""

    parent: list[int] = field(default_factory=list)
    size: list[int] = field(default_factory=list)

    @classmethod
    def of(cls, n: int) -> "UnionFind":
        return cls(parent=list(range(n)), size=[1] * n)

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def component_size(self, x: int) -> int:
        return self.size[self.find(x)]

    def n_components(self) -> int:
        return sum(1 for i, p in enumerate(self.parent) if self.find(i) == i)

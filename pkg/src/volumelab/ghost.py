"""Ghost vertices, exploration forests, and the two-point inequality checks.

The product space has one coordinate per edge (the cluster configuration)
and one per vertex (an independent Bernoulli(h) "green" field with
h = 1 - exp(-lambda/n)).  The exploration tree rooted at u first queries the
green bit of u; if green, it grows u's cluster by always querying the
edge-order-minimal unqueried edge touching the explored vertex set.  The
forest of all roots decides whether any green vertex lies in a given
cluster, and its per-coordinate revealments feed the two-function
inequality that turns covariance sums into tail lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EnumerationCapError, InvalidSpecError
from .exact import ExactMeasure, ModelParams, config_bits, enumerate_measure, exact_tail
from .graphs import UnionFind, WeightedGraph

__all__ = [
    "GhostParams",
    "GhostField",
    "sample_ghost",
    "ExplorationTree",
    "ExplorationForest",
    "SerializedTree",
    "serialize_forest",
    "covr",
    "GhostLab",
    "revealment_exact",
    "revealment_bound_check",
    "truncated_magnetization",
    "truncated_magnetization_bound",
    "verify_osss",
    "verify_prop31",
    "RevealmentProfile",
    "OSSSReport",
    "Prop31Report",
]

JOINT_ENUMERATION_CAP = 20  # edges + vertices


@dataclass(frozen=True)
class GhostParams:
    """Green-field intensity: lambda > 0 spread over volume scale n."""

    lam: float
    n: int

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidSpecError("lambda must be positive")
        if self.n < 1:
            raise InvalidSpecError("n must be >= 1")

    @property
    def h(self) -> float:
        """P(vertex is green) = 1 - exp(-lambda/n); always <= lambda/n."""
        return -math.expm1(-self.lam / self.n)


@dataclass(frozen=True)
class GhostField:
    bits: np.ndarray
    params: GhostParams


def sample_ghost(n_vertices: int, gp: GhostParams, rng: np.random.Generator) -> GhostField:
    bits = (rng.random(n_vertices) < gp.h).astype(np.uint8)
    return GhostField(bits=bits, params=gp)


VERTEX = "v"
EDGE = "e"


class ExplorationTree:
    """Decision tree rooted at u over the joint coordinate space.

    trace() returns the finite list of (coordinate, value) first queries; a
    halted tree would re-query its last coordinate forever, which never adds
    coordinates, so the finite trace carries all revealment information.
    """

    def __init__(self, graph: WeightedGraph, root: int):
        if not 0 <= root < graph.n_vertices:
            raise InvalidSpecError(f"root {root} out of range")
        self.graph = graph
        self.root_vertex = root
        self.root = (VERTEX, root)

    def trace(self, omega, eta) -> list[tuple[tuple[str, int], int]]:
        omega = np.asarray(omega)
        eta = np.asarray(eta)
        events = [((VERTEX, self.root_vertex), int(eta[self.root_vertex]))]
        if not eta[self.root_vertex]:
            return events
        explored = {self.root_vertex}
        queried: set[int] = set()
        edges = self.graph.edges
        while True:
            nxt = -1
            for e in range(len(edges)):
                if e in queried:
                    continue
                a, b = edges[e]
                if a in explored or b in explored:
                    nxt = e
                    break
            if nxt < 0:
                return events
            queried.add(nxt)
            val = int(omega[nxt])
            events.append(((EDGE, nxt), val))
            if val:
                a, b = edges[nxt]
                explored.add(a)
                explored.add(b)


class ExplorationForest:
    """One exploration tree per vertex; computes, for every target vertex v,
    whether the cluster of v contains a green vertex."""

    def __init__(self, graph: WeightedGraph):
        self.graph = graph
        self.trees = tuple(ExplorationTree(graph, u) for u in range(graph.n_vertices))

    def queried_coords(self, omega, eta) -> set[tuple[str, int]]:
        out: set[tuple[str, int]] = set()
        for tree in self.trees:
            out.update(coord for coord, _ in tree.trace(omega, eta))
        return out

    def g_value(self, v: int, omega, eta) -> int:
        """1 iff some green vertex lies in the cluster of v."""
        uf = UnionFind.of(self.graph.n_vertices)
        omega = np.asarray(omega)
        for e, (a, b) in enumerate(self.graph.edges):
            if omega[e]:
                uf.union(a, b)
        rv = uf.find(v)
        return int(any(eta[u] and uf.find(u) == rv for u in range(self.graph.n_vertices)))


def _first_primes(k: int) -> list[int]:
    primes: list[int] = []
    cand = 2
    while len(primes) < k:
        if all(cand % p for p in primes):
            primes.append(cand)
        cand += 1
    return primes


class SerializedTree:
    """Single decision tree equivalent to a forest.

    Tree i (1-based) runs its j-th step at time p_i^j, where p_i is the i-th
    prime; every other time re-queries the first tree's first coordinate.
    Distinct prime powers never collide, so the schedule is well defined, the
    queried set equals the union over the forest, and revealments are
    preserved exactly.
    """

    def __init__(self, trees):
        self.trees = tuple(trees)
        if not self.trees:
            raise InvalidSpecError("cannot serialize an empty forest")
        self.primes = _first_primes(len(self.trees))
        self.root = self.trees[0].root

    def schedule(self, t: int):
        """('step', i, j) when t = p_i^j, else ('requery',) (first tree's root)."""
        if t < 1:
            raise DomainError("schedule times start at 1")
        for i, p in enumerate(self.primes):
            if t % p == 0:
                j = 0
                while t % p == 0:
                    t //= p
                    j += 1
                return ("step", i, j) if t == 1 else ("requery",)
        return ("requery",)

    def trace(self, omega, eta) -> list[tuple[tuple[str, int], int]]:
        """First-query events in serialized time order."""
        subtraces = [tree.trace(omega, eta) for tree in self.trees]
        timed: list[tuple[int, tuple[str, int], int]] = []
        for i, sub in enumerate(subtraces):
            p = self.primes[i]
            t = 1
            for coord, val in sub:
                t *= p
                timed.append((t, coord, val))
        # time 1 re-queries the first tree's root, which is that tree's own
        # first query; mapping it to time 1 keeps the root at the front
        timed.append((1, subtraces[0][0][0], subtraces[0][0][1]))
        timed.sort(key=lambda x: x[0])
        seen: set[tuple[str, int]] = set()
        events = []
        for _, coord, val in timed:
            if coord not in seen:
                seen.add(coord)
                events.append((coord, val))
        return events

    def queried_coords(self, omega, eta) -> set[tuple[str, int]]:
        return {coord for coord, _ in self.trace(omega, eta)}

    def halt_time(self, omega, eta) -> int:
        return max(
            self.primes[i] ** len(tree.trace(omega, eta)) for i, tree in enumerate(self.trees)
        )


def serialize_forest(trees) -> SerializedTree:
    return SerializedTree(trees)


def covr(probs, f_values, g_values, binary_rtol: float = 1e-12) -> float:
    """CoVr[f, g] = E|f(X) - g(Y)| - E|f(X) - g(X)| with Y an independent copy.

    For {0,1}-valued f and g this equals 2 Cov[f, g]; the identity is checked
    internally whenever both are binary.
    """
    ps = np.asarray(probs, dtype=np.float64)
    fs = np.asarray(f_values, dtype=np.float64)
    gs = np.asarray(g_values, dtype=np.float64)
    if not (ps.shape == fs.shape == gs.shape) or ps.ndim != 1:
        raise InvalidSpecError("covr needs three aligned 1-d arrays")
    if abs(ps.sum() - 1.0) > 1e-9:
        raise InvalidSpecError("probabilities must sum to 1")
    cross = float(ps @ np.abs(fs[:, None] - gs[None, :]) @ ps)
    diag = float(ps @ np.abs(fs - gs))
    out = cross - diag
    f_binary = np.all((fs == 0.0) | (fs == 1.0))
    g_binary = np.all((gs == 0.0) | (gs == 1.0))
    if f_binary and g_binary:
        cov = float(ps @ (fs * gs)) - float(ps @ fs) * float(ps @ gs)
        if abs(out - 2.0 * cov) > binary_rtol * max(1.0, abs(out)):
            raise DomainError("binary CoVr identity violated; numerical trouble")
    return out


@dataclass(frozen=True)
class RevealmentProfile:
    """Per-coordinate revealment of the exploration forest."""

    vertex_revealments: np.ndarray
    edge_revealments: np.ndarray
    gp: GhostParams

    @property
    def max_edge_revealment(self) -> float:
        return float(self.edge_revealments.max()) if self.edge_revealments.size else 0.0


@dataclass(frozen=True)
class OSSSReport:
    v: int
    n: int
    lam: float
    lhs: float
    rhs: float
    edge_terms: np.ndarray
    max_vertex_cov_abs: float
    tolerance: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance


@dataclass(frozen=True)
class Prop31Report:
    v: int
    n: int
    lam: float
    lhs: float
    rhs: float
    tolerance: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance


class GhostLab:
    """Joint exact workspace for one (graph, params, ghost) triple.

    Enumerates the product of the cluster measure and the green field once,
    then answers revealment, two-function, and covariance-sum queries for any
    (target vertex, volume threshold) cell; the acceptance suites reuse one
    lab per parameter point.
    """

    def __init__(
        self,
        g: WeightedGraph,
        params: ModelParams,
        gp: GhostParams,
        measure: ExactMeasure | None = None,
        cap: int = JOINT_ENUMERATION_CAP,
    ):
        if g.n_edges + g.n_vertices > cap:
            raise EnumerationCapError(
                f"joint enumeration needs {g.n_edges}+{g.n_vertices} coordinates, cap {cap}"
            )
        self.graph = g
        self.params = params
        self.gp = gp
        self.measure = measure if measure is not None else enumerate_measure(g, params)
        self.forest = ExplorationForest(g)
        n_v = g.n_vertices
        h = gp.h
        eta_codes = np.arange(1 << n_v)
        pop = np.array([bin(c).count("1") for c in eta_codes])
        self.eta_codes = eta_codes
        self.p_eta = (h**pop) * ((1.0 - h) ** (n_v - pop))
        self._member_masks: np.ndarray | None = None
        self._profile: RevealmentProfile | None = None

    # ---- structure tables -------------------------------------------------

    def member_masks(self) -> np.ndarray:
        """masks[code, v] = vertex bitmask of the cluster of v under code."""
        if self._member_masks is None:
            g = self.graph
            n_cfg = self.measure.n_configs
            masks = np.zeros((n_cfg, g.n_vertices), dtype=np.int64)
            for code in range(n_cfg):
                uf = UnionFind.of(g.n_vertices)
                for e, (a, b) in enumerate(g.edges):
                    if (code >> e) & 1:
                        uf.union(a, b)
                roots = [uf.find(u) for u in range(g.n_vertices)]
                root_mask: dict[int, int] = {}
                for u, r in enumerate(roots):
                    root_mask[r] = root_mask.get(r, 0) | (1 << u)
                for u in range(g.n_vertices):
                    masks[code, u] = root_mask[roots[u]]
            self._member_masks = masks
        return self._member_masks

    def g_matrix(self, v: int) -> np.ndarray:
        """g[(omega, eta)] = cluster of v contains a green vertex."""
        masks = self.member_masks()[:, v]
        return (masks[:, None] & self.eta_codes[None, :]) != 0

    # ---- revealment -------------------------------------------------------

    def revealment_profile(self) -> RevealmentProfile:
        """Exact revealments by brute force over every (omega, eta) pair,
        running the actual exploration traces."""
        if self._profile is not None:
            return self._profile
        g = self.graph
        dv = np.zeros(g.n_vertices)
        de = np.zeros(g.n_edges)
        for code in range(self.measure.n_configs):
            p_omega = self.measure.probs[code]
            if p_omega == 0.0:
                continue
            omega = config_bits(code, g.n_edges)
            for eta_code in range(1 << g.n_vertices):
                p = p_omega * self.p_eta[eta_code]
                if p == 0.0:
                    continue
                eta = config_bits(eta_code, g.n_vertices)
                for kind, idx in self.forest.queried_coords(omega, eta):
                    if kind == VERTEX:
                        dv[idx] += p
                    else:
                        de[idx] += p
        self._profile = RevealmentProfile(
            vertex_revealments=dv, edge_revealments=de, gp=self.gp
        )
        return self._profile

    # ---- scalar functionals ----------------------------------------------

    def truncated_magnetization(self, v: int) -> float:
        """E[1 - exp(-lambda |K_v| / n)]."""
        sizes = self.measure.cluster_size_table(v)
        vals = -np.expm1(-self.gp.lam * sizes / self.gp.n)
        return float(np.dot(self.measure.probs, vals))

    def max_truncated_magnetization(self) -> float:
        return max(self.truncated_magnetization(u) for u in range(self.graph.n_vertices))

    # ---- the inequalities --------------------------------------------------

    def verify_osss(self, v: int, n: int, tolerance: float = 1e-9) -> OSSSReport:
        """Two-function inequality for f = [|K_v| >= n], g = [cluster of v
        holds a green vertex]: (1/2)|CoVr[f,g]| <= sum_x delta_x Cov[f, x]."""
        if n < 1:
            raise DomainError("n must be >= 1")
        measure = self.measure
        sizes = measure.cluster_size_table(v)
        f_omega = (sizes >= n).astype(np.float64)

        p_joint = (measure.probs[:, None] * self.p_eta[None, :]).ravel()
        f_joint = np.broadcast_to(
            f_omega[:, None], (measure.n_configs, self.eta_codes.size)
        ).ravel()
        g_joint = self.g_matrix(v).astype(np.float64).ravel()
        lhs = 0.5 * abs(covr(p_joint, f_joint, g_joint))

        profile = self.revealment_profile()
        edge_terms = np.array(
            [
                profile.edge_revealments[e] * self._edge_cov(f_omega, e)
                for e in range(self.graph.n_edges)
            ]
        )
        # vertex coordinates contribute delta_u * Cov[f, eta_u]; f never reads
        # eta, so these covariances vanish -- computed from the literal joint
        # sum anyway so the report records the fact numerically
        eta_bits = (
            (self.eta_codes[None, :] >> np.arange(self.graph.n_vertices)[:, None]) & 1
        ).astype(np.float64)
        ef = float(np.dot(measure.probs, f_omega))
        weighted_f = measure.probs * f_omega
        vertex_terms = np.empty(self.graph.n_vertices)
        max_vertex_cov = 0.0
        for u in range(self.graph.n_vertices):
            e_f_eta = float((weighted_f[:, None] * (self.p_eta * eta_bits[u])[None, :]).sum())
            cov_u = e_f_eta - ef * float(np.dot(self.p_eta, eta_bits[u]))
            vertex_terms[u] = profile.vertex_revealments[u] * cov_u
            max_vertex_cov = max(max_vertex_cov, abs(cov_u))
        rhs = float(edge_terms.sum() + vertex_terms.sum())
        return OSSSReport(
            v=v,
            n=n,
            lam=self.gp.lam,
            lhs=lhs,
            rhs=rhs,
            edge_terms=edge_terms,
            max_vertex_cov_abs=max_vertex_cov,
            tolerance=tolerance,
        )

    def _edge_cov(self, f_omega: np.ndarray, e: int) -> float:
        codes = np.arange(self.measure.n_configs)
        ind = ((codes >> e) & 1).astype(np.float64)
        probs = self.measure.probs
        return float(np.dot(probs, f_omega * ind) - np.dot(probs, f_omega) * np.dot(probs, ind))

    def verify_prop31(self, v: int, n: int, tolerance: float = 1e-9) -> Prop31Report:
        """Covariance-sum lower bound:
        sum_e Cov[f, omega_e] >= [(1-e^-lam) - M_v] / (2 sup_u M_u) * P(|K_v| >= n)."""
        if n < 1:
            raise DomainError("n must be >= 1")
        if self.gp.n != n:
            raise InvalidSpecError("ghost params were built for a different n")
        sizes = self.measure.cluster_size_table(v)
        f_omega = (sizes >= n).astype(np.float64)
        lhs = sum(self._edge_cov(f_omega, e) for e in range(self.graph.n_edges))
        m_v = self.truncated_magnetization(v)
        m_sup = self.max_truncated_magnetization()
        tail = float(np.dot(self.measure.probs, f_omega))
        numer = -math.expm1(-self.gp.lam) - m_v
        rhs = numer / (2.0 * m_sup) * tail
        return Prop31Report(v=v, n=n, lam=self.gp.lam, lhs=lhs, rhs=rhs, tolerance=tolerance)


# ---- module-level op wrappers ------------------------------------------------


def revealment_exact(
    g: WeightedGraph, params: ModelParams, gp: GhostParams, measure: ExactMeasure | None = None
) -> RevealmentProfile:
    return GhostLab(g, params, gp, measure).revealment_profile()


def revealment_bound_check(lab: GhostLab, tolerance: float = 1e-12):
    """Every edge revealment is at most twice the largest truncated
    magnetization; returns (passed, max revealment, bound)."""
    profile = lab.revealment_profile()
    bound = 2.0 * lab.max_truncated_magnetization()
    worst = profile.max_edge_revealment
    return worst <= bound + tolerance, worst, bound


def truncated_magnetization(
    g: WeightedGraph, params: ModelParams, gp: GhostParams, v: int, measure=None
) -> float:
    lab = GhostLab(g, params, gp, measure)
    return lab.truncated_magnetization(v)


def truncated_magnetization_bound(lab: GhostLab, v: int, tolerance: float = 1e-12):
    """M_v <= (lambda/n) sum_{m=1}^{ceil(n/lambda)} P(|K_v| >= m);
    returns (passed, M_v, bound)."""
    gp = lab.gp
    m_v = lab.truncated_magnetization(v)
    curve = exact_tail(lab.measure, v)
    m_top = math.ceil(gp.n / gp.lam)
    partial = sum(curve.value(m) for m in range(1, m_top + 1) if m <= curve.n_max)
    # survival beyond |V| is zero, so truncating the sum at n_max is exact
    bound = gp.lam / gp.n * partial
    return m_v <= bound + tolerance, m_v, bound


def verify_osss(
    g: WeightedGraph,
    params: ModelParams,
    gp: GhostParams,
    v: int,
    n: int,
    measure: ExactMeasure | None = None,
    tolerance: float = 1e-9,
) -> OSSSReport:
    return GhostLab(g, params, gp, measure).verify_osss(v, n, tolerance)


def verify_prop31(
    g: WeightedGraph,
    params: ModelParams,
    gp: GhostParams,
    v: int,
    n: int,
    measure: ExactMeasure | None = None,
    tolerance: float = 1e-9,
) -> Prop31Report:
    return GhostLab(g, params, gp, measure).verify_prop31(v, n, tolerance)

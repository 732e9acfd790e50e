"""Samplers for the cluster measures: coupled Bernoulli sheets for q = 1,
heat-bath Glauber dynamics, and coupling-from-the-past for exact q >= 1
samples on small graphs.

The single-edge heat-bath conditional opens edge e with probability
w_e / (w_e + 1) when its endpoints are connected off e and w_e / (w_e + q)
otherwise, with w_e = exp(beta J_e) - 1.  For q >= 1 this update is monotone,
which is what makes the sandwich coupling of CFTP work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import BudgetError, DomainError, InvalidSpecError
from .exact import ExactMeasure, ModelParams, config_code, enumerate_measure
from .graphs import UnionFind, WeightedGraph
from .rng import substream

__all__ = [
    "CouplingSheet",
    "sample_bernoulli_coupled",
    "heat_bath_probs",
    "heat_bath_step",
    "heat_bath_invariance_error",
    "ChainState",
    "glauber_chain",
    "glauber_configs",
    "glauber_size_samples",
    "cftp_sample",
    "cftp_sample_batch",
    "validate_sampler",
    "ValidationReport",
]


# ---- grand coupling ----------------------------------------------------------


@dataclass(frozen=True)
class CouplingSheet:
    """One sheet of uniforms per (replica, edge); thresholding the same sheet
    at increasing beta yields configurations coupled monotonically."""

    graph: WeightedGraph
    uniforms: np.ndarray  # (n_replicas, n_edges)

    def configs(self, beta: float) -> np.ndarray:
        if beta < 0:
            raise DomainError("beta must be nonnegative")
        probs = ModelParams(beta=beta, q=1.0).bernoulli_probs(self.graph)
        return (self.uniforms <= probs[None, :]).astype(np.uint8)

    def configs_at_p(self, p: float) -> np.ndarray:
        """Direct percolation threshold (uniform couplings only)."""
        if not 0.0 <= p <= 1.0:
            raise DomainError("p must be in [0, 1]")
        return (self.uniforms <= p).astype(np.uint8)


def sample_bernoulli_coupled(
    g: WeightedGraph, seed: int, n_replicas: int, stream_tag: str = "bernoulli", chunk: int = 0
) -> CouplingSheet:
    rng = substream(seed, stream_tag, chunk)
    return CouplingSheet(graph=g, uniforms=rng.random((n_replicas, g.n_edges)))


# ---- heat-bath conditional ---------------------------------------------------


def heat_bath_probs(
    g: WeightedGraph, params: ModelParams, miscalibrated: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """(p_connected, p_disconnected) per edge.

    `miscalibrated` swaps q -> 1/q in the disconnected branch: the negative
    control whose stationary law is the wrong-q measure.
    """
    w = params.edge_weights(g)
    q = (1.0 / params.q) if miscalibrated else params.q
    return w / (w + 1.0), w / (w + q)


def _connected_off_edge(g: WeightedGraph, config, e: int) -> bool:
    a, b = g.edges[e]
    if a == b:
        return True
    uf = UnionFind.of(g.n_vertices)
    for f, (x, y) in enumerate(g.edges):
        if f != e and config[f]:
            uf.union(x, y)
    return uf.find(a) == uf.find(b)


@lru_cache(maxsize=64)
def _connectivity_table(g: WeightedGraph) -> np.ndarray:
    """conn[code, e]: endpoints of e connected off e under configuration code."""
    if g.n_edges > 16:
        raise DomainError("connectivity tables are capped at 16 edges")
    n_cfg = 1 << g.n_edges
    table = np.zeros((n_cfg, max(g.n_edges, 1)), dtype=bool)
    for code in range(n_cfg):
        bits = [(code >> f) & 1 for f in range(g.n_edges)]
        for e in range(g.n_edges):
            table[code, e] = _connected_off_edge(g, bits, e)
    return table


def heat_bath_step(
    g: WeightedGraph,
    config: np.ndarray,
    e: int,
    params: ModelParams,
    u: float,
    miscalibrated: bool = False,
) -> np.ndarray:
    """Pure-Python reference single-edge update; returns a new configuration."""
    if not 0 <= e < g.n_edges:
        raise InvalidSpecError(f"edge {e} out of range")
    p_conn, p_disc = heat_bath_probs(g, params, miscalibrated)
    p = p_conn[e] if _connected_off_edge(g, config, e) else p_disc[e]
    out = np.array(config, dtype=np.uint8, copy=True)
    out[e] = 1 if u <= p else 0
    return out


def heat_bath_invariance_error(measure: ExactMeasure) -> float:
    """max_e max_s' | sum_s pi(s) P_e(s -> s') - pi(s') |.

    Each single-edge kernel must leave the exact measure invariant; this is
    the strongest cheap stationarity certificate for the dynamics.
    """
    g = measure.graph
    pi = measure.probs
    n_cfg = measure.n_configs
    conn = _connectivity_table(g)
    p_conn, p_disc = heat_bath_probs(g, measure.params)
    worst = 0.0
    codes = np.arange(n_cfg)
    for e in range(g.n_edges):
        p_open = np.where(conn[:, e], p_conn[e], p_disc[e])
        bit = 1 << e
        out = np.zeros(n_cfg)
        np.add.at(out, codes | bit, pi * p_open)
        np.add.at(out, codes & ~bit, pi * (1.0 - p_open))
        worst = max(worst, float(np.abs(out - pi).max()))
    return worst


# ---- Glauber dynamics --------------------------------------------------------


@dataclass
class ChainState:
    config: np.ndarray
    sweeps: int
    provenance: dict


def glauber_chain(
    g: WeightedGraph,
    params: ModelParams,
    n_sweeps: int,
    seed: int,
    initial: np.ndarray | None = None,
    miscalibrated: bool = False,
) -> ChainState:
    """Systematic-scan heat-bath sweeps (reference implementation).

    At q = 1 the conditional never looks at the rest of the configuration,
    so a single sweep already produces an exact product-measure sample.
    """
    config = (
        np.ones(g.n_edges, dtype=np.uint8)
        if initial is None
        else np.array(initial, dtype=np.uint8, copy=True)
    )
    if config.shape != (g.n_edges,):
        raise InvalidSpecError("initial config has wrong length")
    rng = substream(seed, "glauber-py")
    for _ in range(n_sweeps):
        us = rng.random(g.n_edges)
        for e in range(g.n_edges):
            config = heat_bath_step(g, config, e, params, us[e], miscalibrated)
    return ChainState(
        config=config,
        sweeps=n_sweeps,
        provenance={
            "kind": "glauber",
            "seed": seed,
            "sweeps": n_sweeps,
            "miscalibrated": miscalibrated,
        },
    )


def glauber_configs(
    g: WeightedGraph,
    params: ModelParams,
    n_samples: int,
    burn_in: int,
    thinning: int,
    seed: int,
    miscalibrated: bool = False,
) -> np.ndarray:
    """Thinned configurations from one long reference chain (small graphs)."""
    if thinning < 1 or burn_in < 0:
        raise InvalidSpecError("need thinning >= 1 and burn_in >= 0")
    rng = substream(seed, "glauber-py")
    config = np.ones(g.n_edges, dtype=np.uint8)
    p_conn, p_disc = heat_bath_probs(g, params, miscalibrated)
    use_table = g.n_edges <= 16
    conn = _connectivity_table(g) if use_table else None
    out = np.empty((n_samples, g.n_edges), dtype=np.uint8)
    taken = 0
    sweep = 0
    code = config_code(config)
    while taken < n_samples:
        us = rng.random(g.n_edges)
        for e in range(g.n_edges):
            if use_table:
                connected = conn[code, e]
            else:
                connected = _connected_off_edge(g, config, e)
            p = p_conn[e] if connected else p_disc[e]
            if us[e] <= p:
                config[e] = 1
                code |= 1 << e
            else:
                config[e] = 0
                code &= ~(1 << e)
        sweep += 1
        if sweep > burn_in and (sweep - burn_in) % thinning == 0:
            out[taken] = config
            taken += 1
    return out


def glauber_size_samples(
    g: WeightedGraph,
    params: ModelParams,
    v: int,
    n_samples: int,
    burn_in: int,
    thinning: int,
    seed: int,
    chunk_sweeps: int = 1024,
) -> np.ndarray:
    """|K_v| samples from the jitted systematic-scan chain.

    One long chain started all-open; sweeps are consumed chunk by chunk from
    a single substream, so the result depends only on (graph, params, seed).
    """
    if g.n_edges == 0:
        return np.ones(n_samples, dtype=np.int64)
    eu, ev, _ = g.edge_arrays
    inc_ptr = np.zeros(g.n_vertices + 1, dtype=np.int64)
    counts = np.array([len(t) for t in g.incident_edges], dtype=np.int64)
    inc_ptr[1:] = np.cumsum(counts)
    inc_idx = np.empty(int(inc_ptr[-1]), dtype=np.int64)
    cursor = inc_ptr[:-1].copy()
    for e, (a, b) in enumerate(g.edges):
        inc_idx[cursor[a]] = e
        cursor[a] += 1
        if b != a:
            inc_idx[cursor[b]] = e
            cursor[b] += 1
    p_conn, p_disc = heat_bath_probs(g, params)
    state = np.ones(g.n_edges, dtype=np.uint8)
    mark = np.zeros(g.n_vertices, dtype=np.int64)
    queue = np.empty(g.n_vertices, dtype=np.int64)
    sizes = np.empty(n_samples, dtype=np.int64)
    rng = substream(seed, "glauber")
    total_sweeps = burn_in + n_samples * thinning
    done = 0
    out_cursor = 0
    token = 0
    while done < total_sweeps:
        n_sw = min(chunk_sweeps, total_sweeps - done)
        u01 = rng.random((n_sw, g.n_edges))
        sweep_ids = np.arange(done, done + n_sw)
        record = (sweep_ids >= burn_in) & ((sweep_ids - burn_in + 1) % thinning == 0)
        out_cursor, token = _kernels.heat_bath_chunk(
            eu,
            ev,
            inc_ptr,
            inc_idx,
            p_conn,
            p_disc,
            state,
            u01,
            record.astype(np.uint8),
            v,
            sizes,
            out_cursor,
            mark,
            queue,
            token,
        )
        done += n_sw
    assert out_cursor == n_samples
    return sizes


# ---- coupling from the past --------------------------------------------------


def _cftp_block(seed: int, tag, k: int, n_edges: int, rows: int | None = None):
    """Randomness for times t in (2^{k-1}, 2^k]; regenerated identically on
    every doubling pass so the past never changes."""
    length = 1 if k == 0 else 1 << (k - 1)
    rng = substream(seed, "cftp", tag, k)
    if rows is None:
        return rng.integers(0, n_edges, size=length), rng.random(length)
    return (
        rng.integers(0, n_edges, size=(rows, length)).astype(np.int16),
        rng.random((rows, length)),
    )


def cftp_sample(
    g: WeightedGraph,
    params: ModelParams,
    seed: int,
    t_max: int = 1 << 30,
    sandwich_check: bool = False,
) -> np.ndarray:
    """One exact sample via monotone coupling from the past.

    Doubles the horizon until the all-open and all-closed chains, driven by
    the same (edge, uniform) sequence, coalesce at time 0.  Deterministic
    given the seed; raises BudgetError beyond t_max.
    """
    if g.n_edges == 0:
        return np.zeros(0, dtype=np.uint8)
    p_conn, p_disc = heat_bath_probs(g, params)
    use_table = g.n_edges <= 16
    conn = _connectivity_table(g) if use_table else None
    blocks: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def update(config: np.ndarray, code: int, e: int, u: float) -> tuple[np.ndarray, int]:
        if use_table:
            connected = conn[code, e]
        else:
            connected = _connected_off_edge(g, config, e)
        p = p_conn[e] if connected else p_disc[e]
        if u <= p:
            config[e] = 1
            code |= 1 << e
        else:
            config[e] = 0
            code &= ~(1 << e)
        return config, code

    horizon = 1
    while horizon <= t_max:
        k_top = horizon.bit_length() - 1
        for k in range(k_top + 1):
            if k not in blocks:
                blocks[k] = _cftp_block(seed, "single", k, g.n_edges)
        upper = np.ones(g.n_edges, dtype=np.uint8)
        lower = np.zeros(g.n_edges, dtype=np.uint8)
        up_code = (1 << g.n_edges) - 1
        lo_code = 0
        for t in range(horizon, 0, -1):
            k = (t - 1).bit_length()
            offset = t - 1 if k == 0 else t - (1 << (k - 1)) - 1
            e = int(blocks[k][0][offset])
            u = float(blocks[k][1][offset])
            upper, up_code = update(upper, up_code, e, u)
            lower, lo_code = update(lower, lo_code, e, u)
            if sandwich_check and (lo_code & ~up_code):
                raise DomainError("sandwich order violated; update is not monotone")
        if up_code == lo_code:
            return upper
        horizon *= 2
    raise BudgetError(f"no coalescence within horizon {t_max}", horizon=t_max)


def cftp_sample_batch(
    g: WeightedGraph,
    params: ModelParams,
    n_samples: int,
    seed: int,
    t_max: int = 1 << 18,
    batch_size: int = 8192,
    sandwich_check: bool = False,
) -> np.ndarray:
    """Configuration codes of n_samples independent CFTP samples.

    Table-driven and vectorized across replicas; needs <= 16 edges.  Each
    batch derives its own substreams, so results are independent of
    batch_size only through the (batch, replica) indexing -- fixed defaults
    keep runs byte-reproducible.
    """
    if g.n_edges == 0:
        return np.zeros(n_samples, dtype=np.int64)
    if g.n_edges > 16:
        raise DomainError("batched CFTP is table-driven; needs <= 16 edges")
    conn_flat = _connectivity_table(g).ravel()
    p_conn, p_disc = heat_bath_probs(g, params)
    n_e = g.n_edges
    full = (1 << n_e) - 1
    out = np.empty(n_samples, dtype=np.int64)
    pos = 0
    batch_idx = 0
    while pos < n_samples:
        rows = min(batch_size, n_samples - pos)
        blocks: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        pending = np.arange(rows)
        result = np.empty(rows, dtype=np.int64)
        horizon = 1
        while pending.size:
            if horizon > t_max:
                raise BudgetError(
                    f"{pending.size} replicas uncoalesced at horizon {t_max}", horizon=t_max
                )
            k_top = horizon.bit_length() - 1
            for k in range(k_top + 1):
                if k not in blocks:
                    blocks[k] = _cftp_block(seed, f"batch-{batch_idx}", k, n_e, rows)
            upper = np.full(pending.size, full, dtype=np.int64)
            lower = np.zeros(pending.size, dtype=np.int64)
            for t in range(horizon, 0, -1):
                k = (t - 1).bit_length()
                offset = t - 1 if k == 0 else t - (1 << (k - 1)) - 1
                e_col = blocks[k][0][pending, offset].astype(np.int64)
                u_col = blocks[k][1][pending, offset]
                bit = np.left_shift(1, e_col)
                for state in (upper, lower):
                    connected = conn_flat[state * n_e + e_col]
                    p = np.where(connected, p_conn[e_col], p_disc[e_col])
                    open_mask = u_col <= p
                    np.copyto(
                        state, np.where(open_mask, state | bit, state & ~bit)
                    )
                if sandwich_check and np.any(lower & ~upper):
                    raise DomainError("sandwich order violated; update is not monotone")
            coalesced = upper == lower
            result[pending[coalesced]] = upper[coalesced]
            pending = pending[~coalesced]
            horizon *= 2
        out[pos : pos + rows] = result
        pos += rows
        batch_idx += 1
    return out


# ---- validation --------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    tv: float
    half_width: float
    n_samples: int
    kind: str
    miscalibrated: bool

    def to_record(self) -> dict:
        return {
            "tv": self.tv,
            "half_width": self.half_width,
            "n_samples": self.n_samples,
            "kind": self.kind,
            "miscalibrated": self.miscalibrated,
        }


def validate_sampler(
    g: WeightedGraph,
    params: ModelParams,
    n_samples: int,
    seed: int,
    kind: str = "cftp",
    miscalibrated: bool = False,
    bootstrap: int = 200,
    burn_in: int = 64,
    thinning: int = 2,
) -> ValidationReport:
    """Total-variation distance between sampled configurations and the
    enumerated oracle, with a bootstrap half-width (3 sigma).

    The miscalibrated flag routes through the broken-conditional Glauber
    chain regardless of `kind`: the broken update is not monotone, so CFTP's
    coalescence rationale would not apply to it.
    """
    measure = enumerate_measure(g, params)
    n_cfg = measure.n_configs
    if miscalibrated or kind == "glauber":
        configs = glauber_configs(
            g, params, n_samples, burn_in, thinning, seed, miscalibrated=miscalibrated
        )
        codes = configs @ (1 << np.arange(g.n_edges, dtype=np.int64))
        label = "glauber"
    elif kind == "cftp":
        codes = cftp_sample_batch(g, params, n_samples, seed)
        label = "cftp"
    elif kind == "bernoulli":
        if params.q != 1.0:
            raise DomainError("the coupled Bernoulli sampler requires q = 1")
        sheet = sample_bernoulli_coupled(g, seed, n_samples)
        configs = sheet.configs(params.beta)
        codes = configs @ (1 << np.arange(g.n_edges, dtype=np.int64))
        label = "bernoulli"
    else:
        raise InvalidSpecError(f"unknown sampler kind {kind!r}")
    counts = np.bincount(codes, minlength=n_cfg).astype(np.float64)
    emp = counts / n_samples
    tv = 0.5 * float(np.abs(emp - measure.probs).sum())
    rng = substream(seed, "bootstrap")
    boot = np.empty(bootstrap)
    for b in range(bootstrap):
        resampled = rng.multinomial(n_samples, emp) / n_samples
        boot[b] = 0.5 * float(np.abs(resampled - measure.probs).sum())
    half_width = 3.0 * float(boot.std())
    return ValidationReport(
        tv=tv,
        half_width=half_width,
        n_samples=n_samples,
        kind=label,
        miscalibrated=miscalibrated,
    )

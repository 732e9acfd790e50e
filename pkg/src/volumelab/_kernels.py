"""Hot loops, jitted when numba is available.

Every function here has a plain-Python twin elsewhere in the package (the
union-find in `graphs`, `heat_bath_step` in `samplers`); tests cross-validate
the two routes, and the exact small-graph suites never depend on this module
being fast.

All kernels take flat int64/float64/uint8 arrays; callers own allocation.
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - exercised implicitly everywhere
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def count_clusters_all(n_v, eu, ev, out):
    """Number of clusters (isolated vertices included) for every edge
    configuration, configurations coded as integers with bit e = edge e open."""
    n_e = eu.shape[0]
    n_cfg = out.shape[0]
    parent = np.empty(n_v, np.int64)
    for cfg in range(n_cfg):
        for i in range(n_v):
            parent[i] = i
        comps = n_v
        for e in range(n_e):
            if (cfg >> e) & 1:
                a = eu[e]
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                b = ev[e]
                while parent[b] != b:
                    parent[b] = parent[parent[b]]
                    b = parent[b]
                if a != b:
                    parent[b] = a
                    comps -= 1
        out[cfg] = comps


@njit(cache=True)
def vertex_cluster_sizes_all(n_v, eu, ev, v, out):
    """|K_v| for every edge configuration (same coding as above)."""
    n_e = eu.shape[0]
    n_cfg = out.shape[0]
    parent = np.empty(n_v, np.int64)
    size = np.empty(n_v, np.int64)
    for cfg in range(n_cfg):
        for i in range(n_v):
            parent[i] = i
            size[i] = 1
        for e in range(n_e):
            if (cfg >> e) & 1:
                a = eu[e]
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                b = ev[e]
                while parent[b] != b:
                    parent[b] = parent[parent[b]]
                    b = parent[b]
                if a != b:
                    if size[a] < size[b]:
                        a, b = b, a
                    parent[b] = a
                    size[a] += size[b]
        r = v
        while parent[r] != r:
            parent[r] = parent[parent[r]]
            r = parent[r]
        out[cfg] = size[r]


@njit(cache=True)
def grand_coupled_stats(n_v, eu, ev, bins, n_levels, v, dists, want_radius, sizes_out, radii_out):
    """Cluster statistics of vertex v under the grand coupling.

    bins[rep, e] is the first grid level at which edge e is open (n_levels if
    never).  Edges are inserted level by level into a persistent union-find,
    so one replica costs one pass over the edges regardless of grid size.
    Radii use the precomputed ambient distances `dists` (from v).
    """
    n_reps, n_e = bins.shape
    parent = np.empty(n_v, np.int64)
    size = np.empty(n_v, np.int64)
    for rep in range(n_reps):
        for i in range(n_v):
            parent[i] = i
            size[i] = 1
        for level in range(n_levels):
            for e in range(n_e):
                if bins[rep, e] == level:
                    a = eu[e]
                    while parent[a] != a:
                        parent[a] = parent[parent[a]]
                        a = parent[a]
                    b = ev[e]
                    while parent[b] != b:
                        parent[b] = parent[parent[b]]
                        b = parent[b]
                    if a != b:
                        if size[a] < size[b]:
                            a, b = b, a
                        parent[b] = a
                        size[a] += size[b]
            r = v
            while parent[r] != r:
                parent[r] = parent[parent[r]]
                r = parent[r]
            sizes_out[rep, level] = size[r]
            if want_radius:
                rad = 0
                for x in range(n_v):
                    rx = x
                    while parent[rx] != rx:
                        parent[rx] = parent[parent[rx]]
                        rx = parent[rx]
                    if rx == r and dists[x] > rad:
                        rad = dists[x]
                radii_out[rep, level] = rad


@njit(cache=True)
def heat_bath_chunk(
    eu,
    ev,
    inc_ptr,
    inc_idx,
    p_conn,
    p_disc,
    state,
    u01,
    record_mask,
    v,
    sizes_out,
    cursor0,
    mark,
    queue,
    token0,
):
    """Systematic-scan heat-bath sweeps; records |K_v| after flagged sweeps.

    Connectivity of an edge's endpoints off that edge is decided by an
    early-exit BFS over currently open edges, which is never slower than a
    union-find rebuild and is far faster in the subcritical regimes this
    kernel is used in.  `mark`/`queue`/`token0` carry scratch state across
    chunk calls so marks never need clearing.
    """
    n_sweeps, n_e = u01.shape
    token = token0
    cursor = cursor0
    for s in range(n_sweeps):
        for e in range(n_e):
            a = eu[e]
            b = ev[e]
            if a == b:
                connected = True
            else:
                connected = False
                token += 1
                mark[a] = token
                queue[0] = a
                qh = 0
                qt = 1
                while qh < qt and not connected:
                    x = queue[qh]
                    qh += 1
                    for ii in range(inc_ptr[x], inc_ptr[x + 1]):
                        f = inc_idx[ii]
                        if f == e or state[f] == 0:
                            continue
                        y = eu[f] + ev[f] - x
                        if y == b:
                            connected = True
                            break
                        if mark[y] != token:
                            mark[y] = token
                            queue[qt] = y
                            qt += 1
            p = p_conn[e] if connected else p_disc[e]
            state[e] = 1 if u01[s, e] <= p else 0
        if record_mask[s]:
            token += 1
            mark[v] = token
            queue[0] = v
            qh = 0
            qt = 1
            count = 1
            while qh < qt:
                x = queue[qh]
                qh += 1
                for ii in range(inc_ptr[x], inc_ptr[x + 1]):
                    f = inc_idx[ii]
                    if state[f] == 0:
                        continue
                    y = eu[f] + ev[f] - x
                    if mark[y] != token:
                        mark[y] = token
                        queue[qt] = y
                        qt += 1
                        count += 1
            sizes_out[cursor] = count
            cursor += 1
    return cursor, token

"""Experiment orchestration: curves on a parameter grid, checks, persistence.

A run draws one size-tail curve (plus radius curve and moment table when
needed) per grid point with the configured engine, executes the requested
checks, and writes results into a fresh timestamped subdirectory together
with a manifest listing every file's SHA-256 digest.  Result files are
byte-identical across reruns of the same (config, seed); only the manifest
carries wall-clock data.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import _kernels
from ._version import __version__
from .clusters import (
    DEFAULT_CONFIDENCE,
    MomentTable,
    TailAccumulator,
    empirical_moments,
    tail_curve,
)
from .config import ExperimentConfig, config_hash
from .errors import (
    BudgetError,
    DomainError,
    EnumerationCapError,
    InsufficientDataError,
    InvalidSpecError,
)
from .exact import (
    ENUMERATION_CAP,
    ModelParams,
    check_fkg_lattice,
    check_monotonic,
    enumerate_measure,
    exact_radius_tail,
    exact_tail,
    verify_derivative_formula,
)
from .fits import (
    ExponentEstimates,
    check_exponent_inequalities,
    check_exponential_tail,
    estimate_beta_c,
    fit_Delta,
    fit_delta,
    fit_gamma,
)
from .ghost import JOINT_ENUMERATION_CAP, GhostParams, verify_osss, verify_prop31
from .graphs import BoundaryCondition, WeightedGraph
from .inequalities import (
    BetaGridCurves,
    check_diffineq,
    check_integrated,
    menshikov_check,
    sharpness_check,
)
from .meanfield import complete_cluster_sizes
from .rng import substream
from .samplers import cftp_sample_batch, glauber_size_samples

__all__ = [
    "RunManifest",
    "build_curves",
    "estimate_exponents",
    "run",
    "run_checks",
    "MOMENT_K_MAX",
]

MOMENT_K_MAX = 4
# complete graphs above this size skip materialization and use the
# generation-growth sampler (q = 1 only)
COMPLETE_DIRECT_CAP = 64
GRAND_CHUNK = 16384


# ---- per-point sampling -------------------------------------------------------


def _point_seed(seed: int, index: int) -> int:
    return int(substream(seed, "grid-point", index).integers(1 << 63))


def _params_at(cfg: ExperimentConfig, beta: float) -> ModelParams:
    return ModelParams(beta=beta, q=cfg.q, boundary=BoundaryCondition(cfg.boundary))


def _exact_moments(measure, v: int, k_max: int) -> MomentTable:
    pmf = measure.cluster_size_table(v)
    sizes = np.arange(pmf.size, dtype=np.float64)
    ests = np.array([float(np.dot(sizes**k, pmf)) for k in range(1, k_max + 1)])
    return MomentTable(
        k_max=k_max,
        estimates=ests,
        half_widths=np.zeros(k_max),
        n_samples=0,
        truncation=None,
        provenance="exact",
        confidence=DEFAULT_CONFIDENCE,
    )


def _exact_point(g, cfg, beta, want_radius):
    measure = enumerate_measure(g, _params_at(cfg, beta))
    tail = exact_tail(measure, cfg.vertex)
    radius = exact_radius_tail(measure, cfg.vertex) if want_radius else None
    return tail, radius, _exact_moments(measure, cfg.vertex, MOMENT_K_MAX)


def _glauber_point(g, cfg, beta, index):
    sizes = glauber_size_samples(
        g,
        _params_at(cfg, beta),
        cfg.vertex,
        n_samples=cfg.replicas,
        burn_in=cfg.burn_in,
        thinning=cfg.thinning,
        seed=_point_seed(cfg.seed, index),
    )
    return tail_curve(sizes, n_max=g.n_vertices), None, empirical_moments(sizes, MOMENT_K_MAX)


def _cftp_point(g, cfg, beta, index):
    codes = cftp_sample_batch(
        g, _params_at(cfg, beta), cfg.replicas, seed=_point_seed(cfg.seed, index), t_max=cfg.t_max
    )
    eu, ev, _ = g.edge_arrays
    table = np.empty(1 << g.n_edges, dtype=np.int64)
    _kernels.vertex_cluster_sizes_all(g.n_vertices, eu, ev, cfg.vertex, table)
    sizes = table[codes]
    return tail_curve(sizes, n_max=g.n_vertices), None, empirical_moments(sizes, MOMENT_K_MAX)


def _bernoulli_grid(g, cfg, betas, want_radius):
    """All grid levels in one pass per replica under the grand coupling.

    Every level thresholds the same uniform sheet, so curves at nearby
    levels are positively correlated and forward differences of the tail
    are far less noisy than independent runs would give.
    """
    eu, ev, _ = g.edge_arrays
    n_levels = len(betas)
    # p_level(e) rows; monotone in the level since couplings are fixed
    probs = np.stack([_params_at(cfg, b).bernoulli_probs(g) for b in betas])
    dists = np.asarray(g.distances_from(cfg.vertex), dtype=np.int64)
    size_accs = [TailAccumulator() for _ in range(n_levels)]
    radius_accs = [TailAccumulator() for _ in range(n_levels)] if want_radius else None
    done = 0
    chunk_idx = 0
    while done < cfg.replicas:
        rows = min(GRAND_CHUNK, cfg.replicas - done)
        u = substream(cfg.seed, "grand", chunk_idx).random((rows, g.n_edges))
        # first level at which each edge opens; n_levels means never
        bins = (u[:, :, None] >= probs.T[None, :, :]).sum(axis=2).astype(np.int64)
        sizes_out = np.zeros((rows, n_levels), dtype=np.int64)
        radii_out = np.zeros((rows, n_levels) if want_radius else (1, 1), dtype=np.int64)
        _kernels.grand_coupled_stats(
            g.n_vertices, eu, ev, bins, n_levels, cfg.vertex, dists, want_radius, sizes_out, radii_out
        )
        for level in range(n_levels):
            size_accs[level].add(sizes_out[:, level])
            if want_radius:
                radius_accs[level].add(radii_out[:, level])
        done += rows
        chunk_idx += 1
    tails = tuple(acc.curve(n_max=g.n_vertices) for acc in size_accs)
    moments = tuple(acc.moments(MOMENT_K_MAX) for acc in size_accs)
    radii = None
    if want_radius:
        radii = tuple(acc.curve(n_max=max(1, g.n_vertices - 1)) for acc in radius_accs)
    return tails, radii, moments


def _meanfield_grid(cfg, n_vertices, ps):
    tails, moments = [], []
    for i, p in enumerate(ps):
        sizes = complete_cluster_sizes(n_vertices, p, cfg.replicas, seed=cfg.seed, key=i + 1)
        tails.append(tail_curve(sizes, n_max=n_vertices))
        moments.append(empirical_moments(sizes, MOMENT_K_MAX))
    return tuple(tails), None, tuple(moments)


def build_curves(
    cfg: ExperimentConfig, workers: int = 1
) -> tuple[BetaGridCurves, WeightedGraph | None, int, dict]:
    """(curves, graph or None, n_vertices, flags).

    The graph is None only on large complete graphs, where the
    generation-growth sampler replaces materialization.  Grid points whose
    sampler exhausts its budget are dropped from the curves and recorded in
    flags["budget"]; other per-point errors land in flags["point_errors"].
    """
    flags: dict = {"budget": [], "point_errors": {}}
    want_radius = "menshikov" in cfg.checks and cfg.q == 1.0 and cfg.param == "p"
    n_complete = cfg.graph.get("complete")

    if n_complete is not None and n_complete > COMPLETE_DIRECT_CAP:
        if cfg.q != 1.0 or cfg.sampler_kind != "bernoulli":
            raise InvalidSpecError(
                "large complete graphs support only the q = 1 bernoulli engine"
            )
        n_vertices = int(n_complete)
        coupling = float(cfg.graph.get("coupling", 1.0))
        ps = (
            cfg.grid
            if cfg.param == "p"
            else tuple(-math.expm1(-b * coupling) for b in cfg.grid)
        )
        tails, radii, moments = _meanfield_grid(cfg, n_vertices, ps)
        meta = {
            "name": f"complete-{n_vertices}",
            "n_vertices": n_vertices,
            "n_edges": n_vertices * (n_vertices - 1) // 2,
        }
        curves = BetaGridCurves(
            param=cfg.param,
            values=cfg.grid,
            q=cfg.q,
            vertex=cfg.vertex,
            graph_meta=meta,
            tails=tails,
            radii=radii,
            moments=moments,
        )
        return curves, None, n_vertices, flags

    g = cfg.resolve_graph()
    if not 0 <= cfg.vertex < g.n_vertices:
        raise InvalidSpecError(f"vertex {cfg.vertex} out of range for {g.n_vertices} vertices")
    betas = cfg.grid if cfg.param == "beta" else tuple(-math.log1p(-p) for p in cfg.grid)

    if cfg.sampler_kind == "bernoulli":
        if cfg.q != 1.0:
            raise InvalidSpecError("the bernoulli engine is the q = 1 special case")
        tails, radii, moments = _bernoulli_grid(g, cfg, betas, want_radius)
        kept = list(range(len(betas)))
    else:
        if cfg.sampler_kind == "exact":
            point = lambda i: _exact_point(g, cfg, betas[i], want_radius)
        elif cfg.sampler_kind == "glauber":
            point = lambda i: _glauber_point(g, cfg, betas[i], i)
        elif cfg.sampler_kind == "cftp":
            point = lambda i: _cftp_point(g, cfg, betas[i], i)
        else:
            raise InvalidSpecError(f"unknown sampler kind {cfg.sampler_kind!r}")

        def safe(i):
            try:
                return point(i)
            except BudgetError as exc:
                return ("budget", str(exc))

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(safe, range(len(betas))))
        else:
            results = [safe(i) for i in range(len(betas))]
        kept, tails, radii, moments = [], [], [], []
        for i, res in enumerate(results):
            if isinstance(res, tuple) and len(res) == 2 and res[0] == "budget":
                flags["budget"].append({"index": i, "value": cfg.grid[i], "message": res[1]})
                continue
            kept.append(i)
            tails.append(res[0])
            radii.append(res[1])
            moments.append(res[2])
        tails = tuple(tails)
        moments = tuple(moments)
        radii = tuple(radii) if radii and all(r is not None for r in radii) else None

    curves = BetaGridCurves(
        param=cfg.param,
        values=tuple(cfg.grid[i] for i in kept),
        q=cfg.q,
        vertex=cfg.vertex,
        graph_meta={"name": g.name or "graph", "n_vertices": g.n_vertices, "n_edges": g.n_edges},
        tails=tails,
        radii=radii,
        moments=moments,
    )
    return curves, g, g.n_vertices, flags


# ---- exponent aggregation -----------------------------------------------------


def estimate_exponents(
    curves: BetaGridCurves,
    n_vertices: int,
    beta_c: float | None = None,
    provenance: str = "config",
    delta_window: tuple[int, int] | None = None,
) -> tuple[ExponentEstimates, dict]:
    """Fit the three cluster exponents off one grid of curves.

    beta_c is in grid units.  The tail exponent is fitted at the grid point
    nearest beta_c, the divergence and moment-gap exponents on the strictly
    subcritical points.  Fits that cannot be formed are None, with the
    reason recorded in the returned error map.
    """
    errors: dict = {}
    if beta_c is None:
        beta_c, provenance = estimate_beta_c(curves.values, curves.tails, n_vertices)
    vals = np.asarray(curves.values, dtype=np.float64)
    delta_fit = gamma_fit = big_delta_fit = None
    try:
        idx = int(np.argmin(np.abs(vals - beta_c)))
        tail = curves.tails[idx]
        if delta_window is None:
            # power-law behaviour ends near the finite-volume scale
            # n ~ |V|^(2/3); stay well inside it
            hi = min(tail.n_max, max(8, round(0.5 * n_vertices ** (2.0 / 3.0))))
            lo = min(max(2, round(n_vertices**0.25)), max(2, hi // 4))
            delta_window = (lo, hi)
        delta_fit = fit_delta(tail, window=delta_window)
    except (DomainError, InsufficientDataError) as exc:
        errors["delta"] = str(exc)
    sub = [i for i, x in enumerate(curves.values) if x < beta_c]
    try:
        if len(sub) < 3:
            raise InsufficientDataError("need >= 3 subcritical grid points")
        means = [curves.tails[i].mean()[0] for i in sub]
        gamma_fit = fit_gamma([curves.values[i] for i in sub], means, beta_c)
    except (DomainError, InsufficientDataError) as exc:
        errors["gamma"] = str(exc)
    try:
        if curves.moments is None:
            raise InsufficientDataError("no moment tables attached")
        if len(sub) < 3:
            raise InsufficientDataError("need >= 3 subcritical grid points")
        big_delta_fit = fit_Delta(
            [curves.values[i] for i in sub], [curves.moments[i] for i in sub], beta_c
        )
    except (DomainError, InsufficientDataError) as exc:
        errors["Delta"] = str(exc)
    est = ExponentEstimates(
        delta=delta_fit,
        gamma=gamma_fit,
        Delta=big_delta_fit,
        beta_c=beta_c,
        beta_c_provenance=provenance,
    )
    return est, errors


# ---- check execution ----------------------------------------------------------


def _default_n_values(n_max: int) -> tuple[int, ...]:
    out, n = [], 1
    while n <= max(1, n_max // 2):
        out.append(n)
        n *= 2
    return tuple(out)


def _beta_units(cfg: ExperimentConfig, value: float) -> float:
    return -math.log1p(-value) if cfg.param == "p" else value


def _increasing_edge_count(bits) -> float:
    return float(np.sum(bits))


def _enumerable(g: WeightedGraph | None, joint: bool = False) -> bool:
    if g is None:
        return False
    if joint:
        return g.n_edges + g.n_vertices <= JOINT_ENUMERATION_CAP
    return g.n_edges <= ENUMERATION_CAP


def run_checks(
    cfg: ExperimentConfig,
    g: WeightedGraph | None,
    curves: BetaGridCurves,
    n_vertices: int,
) -> tuple[list[dict], dict | None, dict]:
    """(report records, exponent-fit document or None, per-check errors).

    A failing check contributes an entry to the error map and nothing else;
    completed checks are unaffected.
    """
    records: list[dict] = []
    fits_doc: dict | None = None
    errors: dict = {}
    n_values = cfg.n_values or _default_n_values(n_vertices)
    betas = curves.betas()

    for check in cfg.checks:
        try:
            if check == "diffineq":
                for lam in cfg.lam_values:
                    for rep in check_diffineq(g, curves, n_values, lam=lam):
                        records.append(dict(rep.to_record(), check="diffineq"))
            elif check == "integrated":
                if g is None:
                    raise InvalidSpecError("integrated bounds need the graph's couplings")
                for kind in ("tail", "mean"):
                    for rep in check_integrated(g, curves, kind=kind, n_values=n_values):
                        records.append(dict(rep.to_record(), check="integrated"))
            elif check == "menshikov":
                if curves.radii is None:
                    raise InvalidSpecError(
                        "radius curves were not collected; the radius check needs "
                        "a q = 1 p-grid with the exact or bernoulli engine"
                    )
                for rep in menshikov_check(curves, n_values):
                    records.append(dict(rep.to_record(), check="menshikov"))
            elif check in ("osss", "prop31"):
                if not _enumerable(g, joint=True):
                    raise EnumerationCapError(
                        "decision-tree checks enumerate the joint edge/vertex space; "
                        "the graph exceeds that cap"
                    )
                verify = verify_osss if check == "osss" else verify_prop31
                for i, beta in enumerate(betas):
                    measure = enumerate_measure(g, _params_at(cfg, beta))
                    for lam in cfg.lam_values:
                        for n in n_values:
                            if not 1 <= n <= n_vertices:
                                continue
                            rep = verify(
                                g, _params_at(cfg, beta), GhostParams(lam, n),
                                cfg.vertex, n, measure=measure,
                            )
                            records.append(
                                {
                                    "check": check,
                                    "grid_index": i,
                                    "value": curves.values[i],
                                    "q": cfg.q,
                                    "lam": lam,
                                    "n": n,
                                    "v": cfg.vertex,
                                    "lhs": rep.lhs,
                                    "rhs": rep.rhs,
                                    "margin": rep.margin,
                                    "passed": rep.passed,
                                }
                            )
            elif check == "derivative":
                if not _enumerable(g):
                    raise EnumerationCapError("derivative check needs an enumerable graph")
                step = 1e-2
                for i, beta in enumerate(betas):
                    if beta <= 2.0 * step:
                        continue
                    params = _params_at(cfg, beta)
                    r1 = verify_derivative_formula(g, params, _increasing_edge_count, step)
                    r2 = verify_derivative_formula(g, params, _increasing_edge_count, step / 2.0)
                    ratio = r1.gap / r2.gap if r2.gap > 0.0 else math.nan
                    records.append(
                        {
                            "check": "derivative",
                            "grid_index": i,
                            "value": curves.values[i],
                            "step": step,
                            "finite_difference": r1.finite_difference,
                            "covariance_sum": r1.covariance_sum,
                            "gap": r1.gap,
                            "halving_ratio": ratio,
                        }
                    )
            elif check == "monotonic":
                if not _enumerable(g):
                    raise EnumerationCapError("monotonicity check needs an enumerable graph")
                for i, beta in enumerate(betas):
                    measure = enumerate_measure(g, _params_at(cfg, beta))
                    mono = check_monotonic(measure)
                    fkg = check_fkg_lattice(measure)
                    records.append(
                        {
                            "check": "monotonic",
                            "grid_index": i,
                            "value": curves.values[i],
                            "monotonic_passed": mono.passed,
                            "monotonic_worst": mono.worst_violation,
                            "fkg_passed": fkg.passed,
                            "fkg_worst": fkg.worst_violation,
                            "n_checked": mono.n_checked + fkg.n_checked,
                        }
                    )
            elif check == "exptail":
                for i in range(curves.n_points):
                    rep = check_exponential_tail(curves.tails[i])
                    records.append(
                        dict(rep.to_record(), check="exptail", grid_index=i, value=curves.values[i])
                    )
            elif check == "exponents":
                est, fit_errors = estimate_exponents(
                    curves, n_vertices, beta_c=cfg.beta_c, provenance=cfg.beta_c_provenance
                )
                ineqs = check_exponent_inequalities(est)
                for rep in ineqs:
                    records.append(dict(rep.to_record(), check="exponents"))
                fits_doc = {
                    "beta_c": est.beta_c,
                    "beta_c_provenance": est.beta_c_provenance,
                    "delta": est.delta.to_record() if est.delta else None,
                    "gamma": est.gamma.to_record() if est.gamma else None,
                    "Delta": est.Delta.to_record() if est.Delta else None,
                    "fit_errors": fit_errors,
                }
            elif check == "sharpness":
                if g is None:
                    raise InvalidSpecError("the sharpness bound needs the graph's couplings")
                if cfg.beta_c is not None:
                    beta_c, prov = cfg.beta_c, cfg.beta_c_provenance
                else:
                    beta_c, prov = estimate_beta_c(curves.values, curves.tails, n_vertices)
                for rep in sharpness_check(g, curves, _beta_units(cfg, beta_c)):
                    records.append(
                        dict(rep.to_record(), check="sharpness", beta_c_provenance=prov)
                    )
            else:
                raise InvalidSpecError(f"unknown check {check!r}")
        except Exception as exc:  # isolate: one broken check must not spoil the rest
            errors[check] = f"{type(exc).__name__}: {exc}"
    return records, fits_doc, errors


# ---- persistence --------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """Inventory of one run directory; digests are SHA-256 of file bytes."""

    directory: str
    config: dict
    config_hash: str
    code_version: str
    seed: int
    seed_source: str
    point_seeds: tuple[int, ...]
    files: dict
    flags: dict
    timings: dict
    created_utc: str

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @staticmethod
    def load(path) -> "RunManifest":
        with open(path) as fh:
            raw = json.load(fh)
        raw["point_seeds"] = tuple(raw.get("point_seeds", ()))
        return RunManifest(**raw)


def _jsonable(obj):
    """Plain JSON types only; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_grid_csv(path: Path, curves: BetaGridCurves) -> None:
    betas = curves.betas()
    ps = curves.ps() if curves.q == 1.0 else None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "param", "value", "beta", "p", "N", "mean", "mean_half_width"])
        for i in range(curves.n_points):
            mean, mean_hw = curves.tails[i].mean()
            writer.writerow(
                [
                    i,
                    curves.param,
                    repr(float(curves.values[i])),
                    repr(float(betas[i])),
                    repr(float(ps[i])) if ps is not None else "",
                    curves.tails[i].n_samples,
                    repr(float(mean)),
                    repr(float(mean_hw)),
                ]
            )


def _fresh_run_dir(base: Path, cfg_hash: str) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    candidate = base / f"{stamp}-{cfg_hash[:8]}"
    k = 1
    while candidate.exists():
        candidate = base / f"{stamp}-{cfg_hash[:8]}-{k}"
        k += 1
    candidate.mkdir(parents=True)
    return candidate


def run(
    cfg: ExperimentConfig,
    workers: int = 1,
    seed_source: str = "config",
    out_dir: str | None = None,
) -> RunManifest:
    """Execute the configured pipeline and persist everything.

    Writes tail_XX.csv (radius_XX.csv, moments_XX.csv) per grid point,
    grid.csv, reports.jsonl, fits.json when exponents were fitted, and
    manifest.json.  Returns the manifest.
    """
    t_start = time.perf_counter()
    timings: dict = {}
    curves, g, n_vertices, flags = build_curves(cfg, workers=workers)
    timings["build_curves_s"] = time.perf_counter() - t_start

    t_checks = time.perf_counter()
    records, fits_doc, check_errors = run_checks(cfg, g, curves, n_vertices)
    if check_errors:
        flags["check_errors"] = check_errors
    timings["checks_s"] = time.perf_counter() - t_checks

    t_write = time.perf_counter()
    base = Path(out_dir if out_dir is not None else cfg.out_dir)
    run_dir = _fresh_run_dir(base, config_hash(cfg))

    written: list[Path] = []
    _write_grid_csv(run_dir / "grid.csv", curves)
    written.append(run_dir / "grid.csv")
    for i in range(curves.n_points):
        p = run_dir / f"tail_{i:02d}.csv"
        curves.tails[i].to_csv(p)
        written.append(p)
        if curves.radii is not None:
            p = run_dir / f"radius_{i:02d}.csv"
            curves.radii[i].to_csv(p)
            written.append(p)
        if curves.moments is not None:
            p = run_dir / f"moments_{i:02d}.csv"
            curves.moments[i].to_csv(p)
            written.append(p)
    if cfg.checks:
        reports_path = run_dir / "reports.jsonl"
        with open(reports_path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")
        written.append(reports_path)
    if fits_doc is not None:
        fits_path = run_dir / "fits.json"
        with open(fits_path, "w") as fh:
            json.dump(_jsonable(fits_doc), fh, sort_keys=True, indent=2)
            fh.write("\n")
        written.append(fits_path)
    timings["write_s"] = time.perf_counter() - t_write
    timings["total_s"] = time.perf_counter() - t_start

    manifest = RunManifest(
        directory=str(run_dir),
        config=cfg.to_dict(),
        config_hash=config_hash(cfg),
        code_version=__version__,
        seed=cfg.seed,
        seed_source=seed_source,
        point_seeds=tuple(_point_seed(cfg.seed, i) for i in range(len(cfg.grid))),
        files={p.name: _sha256(p) for p in sorted(written)},
        flags=_jsonable(flags),
        timings=timings,
        created_utc=datetime.now(timezone.utc).isoformat(),
    )
    with open(run_dir / "manifest.json", "w") as fh:
        json.dump(_jsonable(manifest.to_dict()), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return manifest

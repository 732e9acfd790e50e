"""Run-directory digestion: integrity checks, summaries, figures.

Everything here consumes the files a run wrote (grid.csv, tail curves,
reports.jsonl, fits.json, manifest.json) and produces derived views: a
verified manifest, a plain-text summary with violations surfaced first,
and rendered figures next to the delimited output.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter, defaultdict
from pathlib import Path

from .errors import IntegrityError
from .runner import RunManifest, _sha256

__all__ = ["verify_manifest", "load_records", "summarize", "render_figures", "write_report"]


def _resolve_dir(target) -> Path:
    path = Path(target)
    if path.is_file():
        return path.parent
    return path


def verify_manifest(target) -> RunManifest:
    """Load manifest.json under `target` and check every listed digest."""
    run_dir = _resolve_dir(target)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.is_file():
        raise IntegrityError(f"no manifest.json under {run_dir}")
    try:
        manifest = RunManifest.load(manifest_path)
    except (json.JSONDecodeError, TypeError) as exc:
        raise IntegrityError(f"unreadable manifest: {exc}") from exc
    for name, digest in manifest.files.items():
        path = run_dir / name
        if not path.is_file():
            raise IntegrityError(f"{name} listed in manifest but missing")
        actual = _sha256(path)
        if actual != digest:
            raise IntegrityError(f"{name}: digest mismatch (manifest {digest[:12]}.., file {actual[:12]}..)")
    return manifest


def load_records(target) -> list[dict]:
    run_dir = _resolve_dir(target)
    path = run_dir / "reports.jsonl"
    if not path.is_file():
        return []
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _margin_of(rec: dict) -> float | None:
    m = rec.get("margin")
    return float(m) if isinstance(m, (int, float)) else None


def _verdict_of(rec: dict) -> str:
    if "verdict" in rec:
        return rec["verdict"]
    if "passed" in rec:
        return "holds" if rec["passed"] else "violated"
    if "monotonic_passed" in rec:
        return "holds" if (rec["monotonic_passed"] and rec["fkg_passed"]) else "violated"
    return "info"


def summarize(target) -> str:
    """Human-readable digest; violations come first if there are any."""
    manifest = verify_manifest(target)
    records = load_records(target)
    lines: list[str] = []

    by_check: dict[str, list[dict]] = defaultdict(list)
    for rec in records:
        by_check[rec.get("check", rec.get("name", "?"))].append(rec)
    violations = [rec for rec in records if _verdict_of(rec) == "violated"]

    if violations:
        lines.append(f"!! {len(violations)} VIOLATION(S)")
        for rec in violations[:20]:
            lines.append(
                "  - {check}: margin {margin} ({detail})".format(
                    check=rec.get("check", "?"),
                    margin=rec.get("margin", "n/a"),
                    detail=", ".join(
                        f"{k}={rec[k]}" for k in ("name", "n", "lam", "value", "grid_index") if k in rec
                    ),
                )
            )
        if len(violations) > 20:
            lines.append(f"  ... and {len(violations) - 20} more")
        lines.append("")

    cfg = manifest.config
    lines.append(f"run {manifest.directory}")
    lines.append(
        f"config {manifest.config_hash[:8]}  seed {manifest.seed} ({manifest.seed_source})"
        f"  engine {cfg.get('sampler_kind')}  q={cfg.get('q')}"
    )
    grid = cfg.get("grid", ())
    if grid:
        head = f"grid: {cfg.get('param')} from {grid[0]} to {grid[-1]} ({len(grid)} points)"
        if cfg.get("sampler_kind") != "exact":
            head += f", {cfg.get('replicas')} replicas"
        lines.append(head)
    lines.append("")
    lines.append(f"{'check':<14}{'records':>8}  verdicts{'':<30}worst margin")
    for check in sorted(by_check):
        recs = by_check[check]
        counts = Counter(_verdict_of(r) for r in recs)
        margins = [m for m in (_margin_of(r) for r in recs) if m is not None and math.isfinite(m)]
        worst = f"{min(margins):+.3e}" if margins else "n/a"
        verdict_str = ", ".join(f"{k}:{v}" for k, v in sorted(counts.items()))
        lines.append(f"{check:<14}{len(recs):>8}  {verdict_str:<38}{worst}")

    fits_path = _resolve_dir(target) / "fits.json"
    if fits_path.is_file():
        with open(fits_path) as fh:
            fits = json.load(fh)
        lines.append("")
        lines.append(
            f"critical point: {fits['beta_c']:.6g} ({fits['beta_c_provenance']})"
        )
        for key in ("delta", "gamma", "Delta"):
            fit = fits.get(key)
            if fit is None:
                reason = fits.get("fit_errors", {}).get(key, "not fitted")
                lines.append(f"  {key:<6} -- ({reason})")
            else:
                lines.append(
                    f"  {key:<6} {fit['value']:+.4f} +- {fit['stderr']:.4f}"
                    f"  (R2={fit['r_squared']:.4f}, window={fit['window']}, N={fit['n_points']})"
                )

    flags = manifest.flags or {}
    if flags.get("budget"):
        lines.append("")
        lines.append(f"budget exhausted at {len(flags['budget'])} grid point(s):")
        for item in flags["budget"]:
            lines.append(f"  - index {item['index']} (value {item['value']}): {item['message']}")
    if flags.get("check_errors"):
        lines.append("")
        lines.append("check errors:")
        for check, msg in sorted(flags["check_errors"].items()):
            lines.append(f"  - {check}: {msg}")
    if not violations:
        lines.append("")
        lines.append("0 violations")
    return "\n".join(lines) + "\n"


# ---- figures --------------------------------------------------------------------


def _load_tails(run_dir: Path) -> list[tuple[int, list[int], list[float], list[float]]]:
    out = []
    for path in sorted(run_dir.glob("tail_*.csv")):
        idx = int(path.stem.split("_")[1])
        ns, vals, hws = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                ns.append(int(row["n"]))
                vals.append(float(row["estimate"]))
                hws.append(float(row["half_width"]))
        out.append((idx, ns, vals, hws))
    return out


def _load_grid(run_dir: Path) -> list[dict]:
    path = run_dir / "grid.csv"
    if not path.is_file():
        return []
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def render_figures(target, out_subdir: str = "figures") -> list[str]:
    """Render tail curves, check margins, mean growth, and exponent fits to
    PNG files under <run dir>/<out_subdir>; returns the written paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    run_dir = _resolve_dir(target)
    fig_dir = run_dir / out_subdir
    fig_dir.mkdir(exist_ok=True)
    written: list[str] = []
    grid_rows = _load_grid(run_dir)
    labels = {int(r["index"]): r["value"] for r in grid_rows}
    param = grid_rows[0]["param"] if grid_rows else "value"

    tails = _load_tails(run_dir)
    if tails:
        fig, ax = plt.subplots(figsize=(7, 5))
        cmap = plt.get_cmap("viridis")
        for idx, ns, vals, _ in tails:
            pos = [(n, v) for n, v in zip(ns, vals) if v > 0]
            if not pos:
                continue
            color = cmap(idx / max(1, len(tails) - 1))
            ax.loglog(*zip(*pos), color=color, lw=1.2,
                      label=f"{param}={float(labels.get(idx, idx)):.4g}")
        ax.set_xlabel("cluster volume n")
        ax.set_ylabel("P(|K| >= n)")
        ax.set_title("size tails across the grid")
        if len(tails) <= 12:
            ax.legend(fontsize=7)
        fig.tight_layout()
        path = fig_dir / "tails.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(str(path))

    records = load_records(run_dir)
    margin_recs = [r for r in records if _margin_of(r) is not None and math.isfinite(_margin_of(r))]
    if margin_recs:
        checks = sorted({r.get("check", "?") for r in margin_recs})
        fig, ax = plt.subplots(figsize=(7, 5))
        for j, check in enumerate(checks):
            ms = [_margin_of(r) for r in margin_recs if r.get("check") == check]
            ax.scatter([j] * len(ms), ms, s=12, alpha=0.6)
        ax.axhline(0.0, color="red", lw=1.0, ls="--")
        ax.set_xticks(range(len(checks)))
        ax.set_xticklabels(checks, rotation=30, ha="right")
        ax.set_ylabel("margin (lhs - rhs)")
        ax.set_title("check margins (negative = violation direction)")
        ax.set_yscale("symlog", linthresh=1e-6)
        fig.tight_layout()
        path = fig_dir / "margins.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(str(path))

    if grid_rows:
        fig, ax = plt.subplots(figsize=(7, 5))
        xs = [float(r["value"]) for r in grid_rows]
        means = [float(r["mean"]) for r in grid_rows]
        hws = [float(r["mean_half_width"]) for r in grid_rows]
        ax.errorbar(xs, means, yerr=hws, fmt="o-", ms=4, capsize=3)
        ax.set_xlabel(param)
        ax.set_ylabel("E[|K|]")
        ax.set_title("mean cluster volume across the grid")
        fig.tight_layout()
        path = fig_dir / "means.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(str(path))

    fits_path = run_dir / "fits.json"
    if fits_path.is_file():
        with open(fits_path) as fh:
            fits = json.load(fh)
        rows = [(k, fits[k]) for k in ("delta", "gamma", "Delta") if fits.get(k)]
        if rows:
            fig, ax = plt.subplots(figsize=(5, 4))
            xs = range(len(rows))
            ax.bar(xs, [f["value"] for _, f in rows],
                   yerr=[2.0 * f["stderr"] for _, f in rows], capsize=4, color="#4878d0")
            ax.set_xticks(list(xs))
            ax.set_xticklabels([name for name, _ in rows])
            ax.set_ylabel("fitted exponent (2 stderr bars)")
            ax.set_title("cluster exponents")
            fig.tight_layout()
            path = fig_dir / "exponents.png"
            fig.savefig(path, dpi=130)
            plt.close(fig)
            written.append(str(path))
    return written


def write_report(target, figures: bool = True) -> str:
    """Verify, summarize to summary.txt, render figures; returns the text."""
    run_dir = _resolve_dir(target)
    text = summarize(run_dir)
    with open(run_dir / "summary.txt", "w") as fh:
        fh.write(text)
    if figures:
        render_figures(run_dir)
    return text

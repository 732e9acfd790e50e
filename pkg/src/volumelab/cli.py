"""Command-line face of the laboratory.

Subcommands: exact, sample, osss, diffineq, exponents (pipeline runs with
the check set forced to match the name), report (summarize + render figures
for a finished run directory), and verify (the exhaustive small-graph
oracle gate).  Seed precedence: --seed, then VOLUMELAB_SEED, then config.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from ._version import __version__
from .config import load_config
from .errors import VolumeLabError
from .reporting import write_report
from .runner import run
from .suite import full_verify

SEED_ENV = "VOLUMELAB_SEED"

_RUN_CHECKS = {
    "exact": None,  # keep configured checks, force the exact engine
    "sample": (),  # curves only
    "osss": ("osss", "prop31"),
    "diffineq": ("diffineq", "integrated", "menshikov"),
    "exponents": ("exponents", "exptail"),
}


def _resolve_seed(args, cfg) -> tuple[int, str]:
    if args.seed is not None:
        return args.seed, "cli"
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env), "env"
        except ValueError:
            raise VolumeLabError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return cfg.seed, "config"


def _add_run_flags(sub):
    sub.add_argument("--config", required=True, help="experiment config file (YAML/JSON)")
    sub.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    sub.add_argument("--workers", type=int, default=1, help="worker threads across grid points")
    sub.add_argument("--out", default=None, help="output root (overrides config out_dir)")


def _cmd_run(name: str, args) -> int:
    cfg = load_config(args.config)
    seed, source = _resolve_seed(args, cfg)
    overrides: dict = {"seed": seed}
    if name == "exact":
        overrides["sampler_kind"] = "exact"
    forced = _RUN_CHECKS[name]
    if forced is not None:
        known = set(forced)
        if name == "diffineq":
            # the radius check only exists on q = 1 p-grids
            known = {c for c in known if c != "menshikov" or (cfg.q == 1.0 and cfg.param == "p")}
        overrides["checks"] = tuple(sorted(known))
    cfg = dataclasses.replace(cfg, **overrides)
    manifest = run(cfg, workers=args.workers, seed_source=source, out_dir=args.out)
    print(f"run directory: {manifest.directory}")
    flags = manifest.flags or {}
    if flags.get("budget"):
        print(f"budget exhausted at {len(flags['budget'])} grid point(s)", file=sys.stderr)
    if flags.get("check_errors"):
        for check, msg in sorted(flags["check_errors"].items()):
            print(f"check error [{check}]: {msg}", file=sys.stderr)
    print(write_report(manifest.directory, figures=not args.no_figures), end="")
    return 0


def _cmd_report(args) -> int:
    print(write_report(args.run_dir, figures=not args.no_figures), end="")
    return 0


def _cmd_verify(args) -> int:
    results = full_verify(quick=args.quick, sampler_spot=not args.no_sampler)
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(("FAILED: " + ", ".join(r.name for r in failed)) if failed else "all suites passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volumelab",
        description="verification laboratory for cluster-volume differential inequalities",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("exact", "run the pipeline with the enumeration engine"),
        ("sample", "draw curves with the configured engine, no checks"),
        ("osss", "run the decision-tree inequality checks"),
        ("diffineq", "run the differential/integrated inequality checks"),
        ("exponents", "fit critical exponents and their inequalities"),
    ):
        sub = subs.add_parser(name, help=help_text)
        _add_run_flags(sub)
        sub.add_argument("--no-figures", action="store_true", help="skip figure rendering")
        sub.set_defaults(func=lambda a, n=name: _cmd_run(n, a))

    rep = subs.add_parser("report", help="summarize a finished run directory")
    rep.add_argument("run_dir", help="run directory (or its manifest.json)")
    rep.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    rep.set_defaults(func=_cmd_report)

    ver = subs.add_parser("verify", help="run the exhaustive small-graph oracle gate")
    ver.add_argument("--quick", action="store_true", help="reduced parameter grid")
    ver.add_argument("--no-sampler", action="store_true", help="skip the sampler spot check")
    ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VolumeLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

"""Experiment configuration: YAML loading, schema validation with dotted
field paths, grid expansion, graph resolution, and content hashing.

One file describes one experiment.  Grids are explicit lists or
{start, stop, step} mappings (endpoint included up to float rounding).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import yaml

from .errors import SchemaError
from .graphs import (
    BoundaryCondition,
    LatticeSpec,
    WeightedGraph,
    build_lattice,
    complete_graph,
    from_edge_list_text,
    named_graph,
)

__all__ = [
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "config_hash",
    "resolve_graph",
    "expand_grid",
    "KNOWN_CHECKS",
]

KNOWN_CHECKS = (
    "diffineq",
    "integrated",
    "menshikov",
    "osss",
    "prop31",
    "derivative",
    "monotonic",
    "exptail",
    "exponents",
    "sharpness",
)

_SAMPLER_KINDS = ("exact", "bernoulli", "glauber", "cftp")


def _get(d: dict, key: str, path: str, required: bool = True, default=None):
    if not isinstance(d, dict):
        raise SchemaError(path.rsplit(".", 1)[0] or path, "expected a mapping")
    if key not in d:
        if required:
            raise SchemaError(f"{path}.{key}" if path else key, "missing required field")
        return default
    return d[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, f"expected an integer, got {type(value).__name__}")
    return value


def expand_grid(spec, path: str) -> tuple[float, ...]:
    """A list of numbers, or {start, stop, step} with the endpoint included."""
    if isinstance(spec, (list, tuple)):
        if not spec:
            raise SchemaError(path, "grid list must be nonempty")
        values = tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(spec))
    elif isinstance(spec, dict):
        start = _number(_get(spec, "start", path), f"{path}.start")
        stop = _number(_get(spec, "stop", path), f"{path}.stop")
        step = _number(_get(spec, "step", path), f"{path}.step")
        if step <= 0:
            raise SchemaError(f"{path}.step", "step must be positive")
        if stop < start:
            raise SchemaError(f"{path}.stop", "stop must be >= start")
        count = int(round((stop - start) / step)) + 1
        values = tuple(round(start + i * step, 12) for i in range(count))
    else:
        raise SchemaError(path, "expected a list or a {start, stop, step} mapping")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise SchemaError(path, "grid values must be strictly increasing")
    return values


def resolve_graph(spec: dict, path: str = "graph") -> WeightedGraph:
    """graph: {name: ...} | {torus: [L, ...]} | {box: [L, ...]} |
    {complete: N} | {edges: "vertices N\\n u v J ..."}; optional coupling."""
    if not isinstance(spec, dict):
        raise SchemaError(path, "expected a mapping")
    keys = [k for k in ("name", "torus", "box", "complete", "edges") if k in spec]
    if len(keys) != 1:
        raise SchemaError(path, "exactly one of name/torus/box/complete/edges required")
    kind = keys[0]
    coupling = _number(spec.get("coupling", 1.0), f"{path}.coupling")
    if kind == "name":
        if not isinstance(spec["name"], str):
            raise SchemaError(f"{path}.name", "expected a string")
        try:
            return named_graph(spec["name"])
        except KeyError:
            raise SchemaError(f"{path}.name", f"unknown graph {spec['name']!r}") from None
    if kind in ("torus", "box"):
        lengths = spec[kind]
        if not isinstance(lengths, (list, tuple)) or not lengths:
            raise SchemaError(f"{path}.{kind}", "expected a nonempty list of side lengths")
        lengths = tuple(_int(v, f"{path}.{kind}[{i}]") for i, v in enumerate(lengths))
        return build_lattice(
            LatticeSpec(
                dimension=len(lengths),
                lengths=lengths,
                wrap=(kind == "torus"),
                coupling=coupling,
            )
        )
    if kind == "complete":
        return complete_graph(_int(spec["complete"], f"{path}.complete"), coupling=coupling)
    try:
        return from_edge_list_text(spec["edges"])
    except Exception as exc:
        raise SchemaError(f"{path}.edges", str(exc)) from None


@dataclass(frozen=True)
class ExperimentConfig:
    graph: dict
    param: str  # "beta" | "p"
    grid: tuple[float, ...]
    q: float
    vertex: int
    sampler_kind: str
    replicas: int
    burn_in: int
    thinning: int
    t_max: int
    lam_values: tuple[float, ...]
    n_values: tuple[int, ...]
    checks: tuple[str, ...]
    seed: int
    out_dir: str
    boundary: str = "free"
    beta_c: float | None = None
    beta_c_provenance: str = "config"

    def resolve_graph(self) -> WeightedGraph:
        return resolve_graph(self.graph)

    def to_dict(self) -> dict:
        return asdict(self)


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise SchemaError("", "top level must be a mapping")
    graph = _get(raw, "graph", "")
    # validate now, fail with the right path; a large complete graph is
    # checked without materializing its quadratic edge list
    kinds = (
        [k for k in ("name", "torus", "box", "complete", "edges") if k in graph]
        if isinstance(graph, dict)
        else []
    )
    if kinds == ["complete"] and _int(graph["complete"], "graph.complete") > 1024:
        _number(graph.get("coupling", 1.0), "graph.coupling")
    else:
        resolve_graph(graph)
    model = _get(raw, "model", "")
    param = _get(model, "param", "model")
    if param not in ("beta", "p"):
        raise SchemaError("model.param", f"must be 'beta' or 'p', got {param!r}")
    grid = expand_grid(_get(model, "grid", "model"), "model.grid")
    q = _number(_get(model, "q", "model", required=False, default=1.0), "model.q")
    if q < 1.0:
        raise SchemaError("model.q", f"q must be >= 1, got {q}")
    if param == "p":
        if q != 1.0:
            raise SchemaError("model.param", "a p-grid requires q = 1")
        if any(not 0.0 <= v < 1.0 for v in grid):
            raise SchemaError("model.grid", "p values must lie in [0, 1)")
    elif any(v < 0.0 for v in grid):
        raise SchemaError("model.grid", "beta values must be nonnegative")
    boundary = _get(model, "boundary", "model", required=False, default="free")
    if boundary not in ("free", "wired"):
        raise SchemaError("model.boundary", f"must be 'free' or 'wired', got {boundary!r}")
    BoundaryCondition(kind=boundary)

    sampler = _get(raw, "sampler", "", required=False, default={"kind": "exact"})
    kind = _get(sampler, "kind", "sampler")
    if kind not in _SAMPLER_KINDS:
        raise SchemaError("sampler.kind", f"must be one of {_SAMPLER_KINDS}, got {kind!r}")
    replicas = _int(
        _get(sampler, "replicas", "sampler", required=False, default=10000), "sampler.replicas"
    )
    if replicas < 1:
        raise SchemaError("sampler.replicas", "must be >= 1")
    burn_in = _int(_get(sampler, "burn_in", "sampler", required=False, default=64), "sampler.burn_in")
    thinning = _int(
        _get(sampler, "thinning", "sampler", required=False, default=2), "sampler.thinning"
    )
    if burn_in < 0:
        raise SchemaError("sampler.burn_in", "must be >= 0")
    if thinning < 1:
        raise SchemaError("sampler.thinning", "must be >= 1")
    t_max = _int(
        _get(sampler, "t_max", "sampler", required=False, default=1 << 30), "sampler.t_max"
    )
    if t_max < 1:
        raise SchemaError("sampler.t_max", "must be >= 1")

    ghost = _get(raw, "ghost", "", required=False, default={})
    lam_raw = _get(ghost, "lam", "ghost", required=False, default=[1.0])
    if not isinstance(lam_raw, (list, tuple)) or not lam_raw:
        raise SchemaError("ghost.lam", "expected a nonempty list")
    lam_values = tuple(_number(v, f"ghost.lam[{i}]") for i, v in enumerate(lam_raw))
    if any(v <= 0 for v in lam_values):
        raise SchemaError("ghost.lam", "all values must be positive")

    n_raw = _get(raw, "n_values", "", required=False, default=[1, 2, 4])
    if not isinstance(n_raw, (list, tuple)) or not n_raw:
        raise SchemaError("n_values", "expected a nonempty list")
    n_values = tuple(_int(v, f"n_values[{i}]") for i, v in enumerate(n_raw))
    if any(v < 0 for v in n_values):
        raise SchemaError("n_values", "levels must be >= 0")

    checks_raw = _get(raw, "checks", "", required=False, default=[])
    if not isinstance(checks_raw, (list, tuple)):
        raise SchemaError("checks", "expected a list")
    for i, c in enumerate(checks_raw):
        if c not in KNOWN_CHECKS:
            raise SchemaError(f"checks[{i}]", f"unknown check {c!r}; known: {KNOWN_CHECKS}")

    vertex = _int(_get(raw, "vertex", "", required=False, default=0), "vertex")
    seed = _int(_get(raw, "seed", "", required=False, default=0), "seed")
    if seed < 0:
        raise SchemaError("seed", "must be >= 0")
    out_dir = _get(raw, "out", "", required=False, default="runs")
    if not isinstance(out_dir, str):
        raise SchemaError("out", "expected a string path")

    beta_c = raw.get("beta_c")
    if beta_c is not None:
        beta_c = _number(beta_c, "beta_c")

    return ExperimentConfig(
        graph=graph,
        param=param,
        grid=grid,
        q=q,
        vertex=vertex,
        sampler_kind=kind,
        replicas=replicas,
        burn_in=burn_in,
        thinning=thinning,
        t_max=t_max,
        lam_values=lam_values,
        n_values=n_values,
        checks=tuple(checks_raw),
        seed=seed,
        out_dir=out_dir,
        boundary=boundary,
        beta_c=beta_c,
        beta_c_provenance="config",
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise SchemaError(path, "config file not found") from None
    except yaml.YAMLError as exc:
        raise SchemaError(path, f"not valid YAML: {exc}") from None
    return parse_config(raw)


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON rendering (sorted keys, repr floats)."""
    canon = json.dumps(cfg.to_dict(), sort_keys=True, default=repr)
    return hashlib.sha256(canon.encode()).hexdigest()

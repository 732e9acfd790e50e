"""Config schema, grid expansion, hashing, and the command-line surface."""

from __future__ import annotations

import json
import os

import pytest

from volumelab import SchemaError, config_hash, load_config, parse_config
from volumelab.cli import main
from volumelab.config import expand_grid, resolve_graph

BASE = {
    "graph": {"name": "triangle"},
    "model": {"param": "p", "grid": [0.5]},
    "sampler": {"kind": "exact"},
    "checks": ["osss"],
    "n_values": [2],
    "seed": 3,
}


def _with(**overrides) -> dict:
    raw = json.loads(json.dumps(BASE))
    raw.update(overrides)
    return raw


def test_expand_grid_accepts_lists_and_ranges():
    assert expand_grid([0.1, 0.2], "model.grid") == (0.1, 0.2)
    assert expand_grid({"start": 0.3, "stop": 0.48, "step": 0.02}, "model.grid") == (
        0.3,
        0.32,
        0.34,
        0.36,
        0.38,
        0.4,
        0.42,
        0.44,
        0.46,
        0.48,
    )
    assert expand_grid({"start": 1.0, "stop": 1.0, "step": 0.1}, "model.grid") == (1.0,)


def test_expand_grid_error_paths():
    with pytest.raises(SchemaError):
        expand_grid({"start": 1.0, "stop": 0.5, "step": 0.1}, "model.grid")
    with pytest.raises(SchemaError):
        expand_grid("nope", "model.grid")


def test_parse_config_fills_defaults():
    cfg = parse_config(BASE)
    assert cfg.param == "p"
    assert cfg.q == 1.0
    assert cfg.vertex == 0
    assert cfg.lam_values == (1.0,)
    assert cfg.out_dir == "runs"


def test_config_hash_ignores_key_order():
    shuffled = {k: BASE[k] for k in reversed(list(BASE))}
    assert config_hash(parse_config(BASE)) == config_hash(parse_config(shuffled))


def test_config_hash_separates_different_configs():
    assert config_hash(parse_config(BASE)) != config_hash(
        parse_config(_with(seed=4))
    )


def test_p_grid_requires_q1():
    raw = _with(model={"param": "p", "grid": [0.5], "q": 2.0})
    with pytest.raises(SchemaError):
        parse_config(raw)


def test_unknown_check_is_rejected():
    with pytest.raises(SchemaError):
        parse_config(_with(checks=["osss", "nope"]))


def test_unknown_sampler_is_rejected():
    with pytest.raises(SchemaError):
        parse_config(_with(sampler={"kind": "metropolis"}))


def test_graph_spec_requires_exactly_one_kind():
    with pytest.raises(SchemaError):
        parse_config(_with(graph={"torus": [4, 4], "name": "triangle"}))


def test_large_complete_graphs_validate_without_materializing():
    import time

    t0 = time.time()
    cfg = parse_config(
        _with(
            graph={"complete": 100_000},
            sampler={"kind": "bernoulli", "replicas": 100},
        )
    )
    assert time.time() - t0 < 1.0
    assert cfg.graph == {"complete": 100_000}


def test_load_config_yaml_and_json_agree(tmp_path):
    ypath = tmp_path / "c.yaml"
    ypath.write_text(
        "graph: {name: triangle}\n"
        "model: {param: p, grid: [0.5]}\n"
        "sampler: {kind: exact}\n"
        "checks: [osss]\n"
        "n_values: [2]\n"
        "seed: 3\n"
    )
    jpath = tmp_path / "c.json"
    jpath.write_text(json.dumps(BASE))
    assert config_hash(load_config(str(ypath))) == config_hash(load_config(str(jpath)))


def test_resolve_graph_builds_lattices_and_complete_graphs():
    assert resolve_graph({"torus": [4, 4]}).n_edges == 32
    assert resolve_graph({"complete": 6}).n_edges == 15


def _write_config(tmp_path, **overrides) -> str:
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(_with(**overrides)))
    return str(path)


def test_cli_exact_run_exits_clean(tmp_path, capsys):
    cfg = _write_config(tmp_path, out=str(tmp_path / "runs"))
    assert main(["exact", "--config", cfg, "--no-figures"]) == 0
    out = capsys.readouterr().out
    assert "0 violations" in out


def test_cli_seed_precedence(tmp_path, monkeypatch):
    from volumelab.runner import RunManifest

    cfg = _write_config(tmp_path, out=str(tmp_path / "r1"))
    monkeypatch.setenv("VOLUMELAB_SEED", "99")
    assert main(["exact", "--config", cfg, "--no-figures"]) == 0
    run_dir = next((tmp_path / "r1").iterdir())
    man = RunManifest.load(str(run_dir / "manifest.json"))
    assert (man.seed, man.seed_source) == (99, "env")

    assert main(["exact", "--config", cfg, "--seed", "123", "--no-figures"]) == 0
    newest = max((tmp_path / "r1").iterdir(), key=lambda p: p.name)
    man2 = RunManifest.load(str(newest / "manifest.json"))
    assert (man2.seed, man2.seed_source) == (123, "cli")


def test_cli_report_renders_summary_and_figures(tmp_path):
    cfg = _write_config(tmp_path, out=str(tmp_path / "runs"))
    assert main(["exact", "--config", cfg, "--no-figures"]) == 0
    run_dir = next((tmp_path / "runs").iterdir())
    assert main(["report", str(run_dir)]) == 0
    assert (run_dir / "summary.txt").exists()
    figures = list((run_dir / "figures").glob("*.png"))
    assert figures


def test_cli_verify_quick_passes(capsys):
    assert main(["verify", "--quick", "--no-sampler"]) == 0
    out = capsys.readouterr().out
    assert "all suites passed" in out
    assert "osss" in out and "prop31" in out


def test_cli_rejects_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(_with(checks=["nope"])))
    assert main(["exact", "--config", str(path)]) == 2
    assert "checks" in capsys.readouterr().err


def test_cli_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "volumelab.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    for sub in ("exact", "sample", "osss", "diffineq", "exponents", "report", "verify"):
        assert sub in proc.stdout

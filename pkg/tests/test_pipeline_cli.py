import json

import numpy as np
import pytest

from rmnklab import pipeline
from rmnklab.cli import main
from rmnklab.config import ConfigError, ExperimentConfig, Grid, load_config
from rmnklab.meta.forest import ForestModel
from rmnklab.metrics import read_performance
from rmnklab.plosnet import read_feature_table

MINI = {"grid": {"n": [8], "k": [1, 3], "m": [2], "rho": [0.0, 0.4]}, "instances_per_combo": 4,
        "runs_per_algorithm": 3, "gsemo_budget": 500, "nsga2_budget": 500, "nsga2_pop": 20, "sffs_trees": 8}


def mini_config(tmp_path, **extra):
    return ExperimentConfig.from_dict({**MINI, "output_dir": str(tmp_path / "out"), **extra})


@pytest.fixture(scope="module")
def mini_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("mini")
    cfg = mini_config(tmp)
    pipeline.cmd_all(cfg)
    return cfg, tmp / "out"


def test_default_config_matches_benchmark_grid():
    cfg = ExperimentConfig().validate()
    assert len(cfg.grid.combos()) == 18
    assert (cfg.instances_per_combo, cfg.runs_per_algorithm, cfg.gsemo_budget, cfg.nsga2_budget,
            cfg.nsga2_pop) == (10, 30, 10_000, 10_000, 100)


@pytest.mark.parametrize("bad", [
    {"grid": {"rho": [-0.6], "m": [3]}},
    {"grid": {"k": [16]}},
    {"instances_per_combo": 0},
    {"nsga2_pop": 11},
    {"metric": "igd"},
    {"unknown_key": 1},
    {"grid": {"k": []}},
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_load_config_with_overrides(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(MINI))
    cfg = load_config(p, {"master_seed": 5, "runs_per_algorithm": None})
    assert cfg.master_seed == 5 and cfg.runs_per_algorithm == 3 and cfg.grid == Grid(**MINI["grid"])
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_workers_env(monkeypatch):
    monkeypatch.setenv("RMNK_WORKERS", "3")
    assert ExperimentConfig().resolved_workers() == 3
    monkeypatch.setenv("RMNK_WORKERS", "x")
    with pytest.raises(ConfigError):
        ExperimentConfig().resolved_workers()


def test_generate_counts_and_manifest_determinism(tmp_path):
    one = ExperimentConfig.from_dict({"grid": {"n": [6], "k": [1], "m": [2], "rho": [0.0]},
                                      "instances_per_combo": 1, "output_dir": str(tmp_path / "a")})
    m = pipeline.cmd_generate(one)
    assert len(m["instances"]) == 1 and len(list((tmp_path / "a" / "instances").iterdir())) == 1
    a = mini_config(tmp_path / "x")
    b = mini_config(tmp_path / "y")
    pipeline.cmd_generate(a)
    pipeline.cmd_generate(b)
    text_a = (tmp_path / "x" / "out" / "manifest.json").read_text()
    text_b = (tmp_path / "y" / "out" / "manifest.json").read_text()
    assert text_a.replace(str(tmp_path / "x"), "") == text_b.replace(str(tmp_path / "y"), "")


def test_artifacts_present_and_reloadable(mini_run):
    cfg, out = mini_run
    assert len(read_feature_table(out / "features.csv")) == 16
    perf = read_performance(out / "performance.csv")
    assert len(perf) == 48 and all(r.run_count == 3 for r in perf)
    runs = pipeline.read_runs(out / "runs.csv")
    assert len(runs) == 16 * 3 * 3
    ex = out / "explain_reso"
    for name in ("model.json", "shap.csv", "clusters.csv", "footprint.csv", "scatter.csv", "decision_paths.csv",
                 "cluster_importance.csv", "evaluation.json", "summary.txt"):
        assert (ex / name).is_file(), name
    model = ForestModel.load(ex / "model.json")
    assert model.params.n_trees == 192
    assert len((ex / "scatter.csv").read_text().splitlines()) == 1 + 4 * 3
    evaluation = json.loads((ex / "evaluation.json").read_text())
    assert evaluation["local_accuracy_error"] < 1e-9
    svgs = sorted(p.name for p in (ex / "figures").iterdir())
    assert "scatter_clusters.svg" in svgs and "footprint_pls.svg" in svgs and "cluster_importance.svg" in svgs


def test_performance_matches_runs(mini_run):
    _, out = mini_run
    runs = pipeline.read_runs(out / "runs.csv")
    for rec in read_performance(out / "performance.csv"):
        mine = [r for r in runs if r["instance_id"] == rec.instance_id and r["algorithm"] == rec.algorithm]
        assert rec.reso_mean == pytest.approx(np.mean([r["reso"] for r in mine]), abs=1e-15)
        assert rec.hv_std == pytest.approx(np.std([r["hv"] for r in mine]), abs=1e-15)
    assert all(r["evaluations_used"] <= 500 for r in runs if r["algorithm"] != "pls")


def test_rerun_is_byte_identical_and_worker_independent(mini_run, tmp_path):
    cfg, out = mini_run
    cfg2 = mini_config(tmp_path, workers=2)
    pipeline.cmd_all(cfg2)
    out2 = tmp_path / "out"
    for name in ("features.csv", "runs.csv", "performance.csv", "explain_reso/shap.csv", "explain_reso/clusters.csv",
                 "explain_reso/footprint.csv", "explain_reso/model.json", "explain_reso/scatter.csv"):
        assert (out / name).read_bytes() == (out2 / name).read_bytes(), name


def test_cli_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({**MINI, "output_dir": str(tmp_path / "o")}))
    assert main(["features", "--config", str(cfg)]) == 3  # nothing generated yet
    assert main(["generate", "--config", str(cfg), "--instances", "0"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["generate", "--config", str(bad)]) == 2
    assert main(["generate", "--config", str(cfg)]) == 0
    assert main(["explain", "--config", str(cfg)]) == 3
    assert len(list((tmp_path / "o" / "instances").iterdir())) == 16


def test_explain_rejects_schema_mismatch(mini_run, tmp_path):
    cfg, out = mini_run
    broken = mini_config(tmp_path)
    dest = tmp_path / "out"
    dest.mkdir()
    (dest / "features.csv").write_text("instance_id,foo\nx,1\n")
    (dest / "performance.csv").write_bytes((out / "performance.csv").read_bytes())
    with pytest.raises(ValueError):
        pipeline.cmd_explain(broken)

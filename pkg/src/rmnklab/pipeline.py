"""End-to-end experiment pipeline: generate, features, run, explain, report.

Every stage reads its inputs from and writes its outputs to the configured
output directory, so stages can be run separately. Work units (instances)
are processed in parallel when more than one worker is configured, and
results are always written in manifest order.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import svg
from .config import ExperimentConfig
from .landscape import enumerate_landscape
from .meta import (
    DEFAULT_PARAMS,
    build_footprints,
    cluster_importance,
    cluster_meta,
    cross_validate,
    decision_path,
    load_dataset,
    meta_representations,
    project_2d,
    random_search,
    sffs,
    train_forest,
    tree_shap,
)
from .meta.forest import mae, r2, with_trees
from .metrics import aggregate, score_run, write_performance
from .moea import ALGORITHMS, run_algorithm, run_seed
from .plosnet import feature_table, landscape_features
from .rmnk import ProblemSpec, generate_instance, load_instance, save_instance
from .seeding import mix64

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
FEATURES = "features.csv"
RUNS = "runs.csv"
PERFORMANCE = "performance.csv"
RUNS_HEADER = ["instance_id", "algorithm", "run_index", "run_seed", "evaluations_used", "archive_size", "reso", "hv"]

# seed tags of the explain stage
_MODEL_TAG = 0xF02E57
_SFFS_TAG = 0x5FF5
_SEARCH_TAG = 0x5EA2C


class MissingInputError(FileNotFoundError):
    pass


def instance_id(rho: float, m: int, n: int, k: int, rep: int) -> str:
    return f"rho{rho:+.2f}_m{m}_n{n}_k{k}_{rep:02d}"


def instance_seed(master_seed: int, rho: float, m: int, n: int, k: int, rep: int) -> int:
    return mix64(master_seed, round(rho * 1000), m, n, k, rep)


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _require(path: Path) -> Path:
    if not path.is_file():
        raise MissingInputError(f"missing input {path}")
    return path


def _map(fn: Callable, items: list, workers: int) -> Iterable:
    if workers <= 1 or len(items) <= 1:
        return map(fn, items)
    pool = ProcessPoolExecutor(max_workers=workers)
    try:
        return list(pool.map(fn, items, chunksize=1))
    finally:
        pool.shutdown()


# -- generate ----------------------------------------------------------------


def cmd_generate(cfg: ExperimentConfig) -> dict:
    """Write one JSON per instance plus ``manifest.json``; returns the manifest."""
    out = Path(cfg.output_dir)
    (out / "instances").mkdir(parents=True, exist_ok=True)
    entries = []
    for rho, m, n, k in cfg.grid.combos():
        for rep in range(cfg.instances_per_combo):
            iid = instance_id(rho, m, n, k, rep)
            seed = instance_seed(cfg.master_seed, rho, m, n, k, rep)
            inst = generate_instance(ProblemSpec(rho=rho, m=m, n=n, k=k, instance_seed=seed))
            rel = f"instances/{iid}.json"
            save_instance(inst, out / rel)
            entries.append({"id": iid, "file": rel, "rho": rho, "m": m, "n": n, "k": k, "instance_seed": seed})
    manifest = {"master_seed": cfg.master_seed, "config": cfg.to_dict(), "instances": entries}
    _dump_json(manifest, out / MANIFEST)
    log.info("generated %d instances in %s", len(entries), out)
    return manifest


def load_manifest(out: str | Path) -> dict:
    path = _require(Path(out) / MANIFEST)
    doc = json.loads(path.read_text())
    if "instances" not in doc or "master_seed" not in doc:
        raise ValueError(f"{path}: not a manifest")
    return doc


def _load_entry(out: Path, entry: dict):
    return load_instance(_require(out / entry["file"]))


# -- features ----------------------------------------------------------------


def _features_unit(args):
    out, entry = args
    land = enumerate_landscape(_load_entry(out, entry))
    return entry["id"], {p: entry[p] for p in ("rho", "m", "n", "k")}, landscape_features(land)


def cmd_features(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    manifest = load_manifest(out)
    units = [(out, e) for e in manifest["instances"]]
    rows = list(_map(_features_unit, units, cfg.resolved_workers()))
    path = out / FEATURES
    feature_table(rows, path)
    log.info("wrote %s (%d rows)", path, len(rows))
    return path


# -- run ---------------------------------------------------------------------


def _run_unit(args):
    out, entry, master_seed, runs, budgets = args
    inst = _load_entry(out, entry)
    land = enumerate_landscape(inst)
    front = land.pareto_front()
    rows = []
    for alg in ALGORITHMS:
        for r in range(runs):
            seed = run_seed(master_seed, entry["instance_seed"], alg, r)
            res = run_algorithm(alg, inst, seed, table=land.objectives,
                                budget=budgets[alg], pop=budgets["pop"])
            reso, hv = score_run(res, land, front)
            rows.append((entry["id"], alg, r, seed, res.evaluations_used, res.archive_size, reso, hv))
    return rows


def cmd_run(cfg: ExperimentConfig) -> tuple[Path, Path]:
    out = Path(cfg.output_dir)
    manifest = load_manifest(out)
    budgets = {"pls": 0, "gsemo": cfg.gsemo_budget, "nsga2": cfg.nsga2_budget, "pop": cfg.nsga2_pop}
    units = [(out, e, manifest["master_seed"], cfg.runs_per_algorithm, budgets) for e in manifest["instances"]]
    runs_path, perf_path = out / RUNS, out / PERFORMANCE
    records = []
    with open(runs_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUNS_HEADER)
        for rows in _map(_run_unit, units, cfg.resolved_workers()):
            for row in rows:
                w.writerow([*row[:6], repr(row[6]), repr(row[7])])
            for alg in ALGORITHMS:
                mine = [r for r in rows if r[1] == alg]
                records.append(aggregate(mine[0][0], alg, [r[6] for r in mine], [r[7] for r in mine]))
    write_performance(records, perf_path)
    log.info("wrote %s and %s", runs_path, perf_path)
    return runs_path, perf_path


def read_runs(path: str | Path) -> list[dict]:
    with open(_require(Path(path)), newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RUNS_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [{"instance_id": r["instance_id"], "algorithm": r["algorithm"], "run_index": int(r["run_index"]),
                 "run_seed": int(r["run_seed"]), "evaluations_used": int(r["evaluations_used"]),
                 "archive_size": int(r["archive_size"]), "reso": float(r["reso"]), "hv": float(r["hv"])}
                for r in reader]


# -- explain -----------------------------------------------------------------


def explain_dir(cfg: ExperimentConfig, metric: str | None = None) -> Path:
    return Path(cfg.output_dir) / f"explain_{metric or cfg.metric}"


def _write_csv(path: Path, header: list[str], rows: Iterable[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _scores(cv) -> dict:
    return {"mae": cv.mae.tolist(), "r2": cv.r2.tolist(), "mean_mae": cv.score}


def cmd_explain(cfg: ExperimentConfig, metric: str | None = None) -> Path:
    """Model, attributions, clusters, footprints and plot data for one metric."""
    metric = metric or cfg.metric
    out = Path(cfg.output_dir)
    ds_full = load_dataset(_require(out / FEATURES), _require(out / PERFORMANCE), metric, cfg.master_seed,
                           include_params=cfg.include_benchmark_params)
    seed = mix64(cfg.master_seed, _MODEL_TAG)
    dest = explain_dir(cfg, metric)
    dest.mkdir(parents=True, exist_ok=True)
    report: dict = {"metric": metric, "n_train": int(ds_full.train_rows.size), "n_test": int(ds_full.test_rows.size),
                    "n_folds": ds_full.n_folds, "targets": ds_full.target_names}

    params = DEFAULT_PARAMS
    if cfg.search_trials > 0:
        params, history = random_search(ds_full, cfg.search_trials, mix64(cfg.master_seed, _SEARCH_TAG))
        report["search"] = [{"params": asdict(p), "score": s} for p, s in history]
    report["params"] = asdict(params)

    report["cv_all_features"] = _scores(cross_validate(ds_full, params, seed))
    report["cv_baseline"] = _scores(cross_validate(ds_full, predictor="mean"))

    ds = ds_full
    if cfg.sffs:
        sel = sffs(ds_full, with_trees(params, cfg.sffs_trees), mix64(cfg.master_seed, _SFFS_TAG))
        report["sffs"] = {"order": sel.order, "scores": sel.scores, "best_size": sel.best_size,
                          "n_trees": cfg.sffs_trees or params.n_trees}
        ds = ds_full.select_features(sel.selected)
        report["cv_selected"] = _scores(cross_validate(ds, params, seed))
    report["features"] = ds.feature_names

    model = train_forest(ds, params, seed)
    model.save(dest / "model.json")
    test = ds.test_rows
    pred_test = model.predict(ds.X[test])
    report["test"] = {"mae": mae(ds.Y[test], pred_test).tolist(), "r2": r2(ds.Y[test], pred_test).tolist()}

    rows = np.arange(len(ds.instance_ids)) if cfg.explain_all_rows else test
    expl = tree_shap(model, ds.X[rows])
    report["local_accuracy_error"] = expl.local_accuracy_error()
    meta = meta_representations(expl, ds, rows)
    clusters = cluster_meta(meta.vectors, meta.predicted)
    report["clusters"] = {"n_clusters": clusters.n_clusters, "silhouette": clusters.silhouette,
                          "silhouette_by_count": {str(k): v for k, v in clusters.scores.items()},
                          "cluster_mean_prediction": clusters.cluster_means.tolist()}

    _write_csv(dest / "shap.csv", ["instance_id", "algorithm", "feature", "value"],
               ([ds.instance_ids[r], alg, f, expl.values[i, j, t]]
                for i, r in enumerate(rows) for t, alg in enumerate(ds.target_names)
                for j, f in enumerate(ds.feature_names)))
    _write_csv(dest / "clusters.csv", ["meta_rep_id", "cluster"], zip(meta.ids, clusters.labels.tolist()))

    fps = build_footprints(clusters, meta, ds)
    _write_csv(dest / "footprint.csv", ["algorithm", "cluster", "combo", "count", "mean_pred"],
               ([alg, c, combo, int(fp.counts[i, j]), fp.mean_pred[i, j]]
                for alg, fp in fps.items() for i, c in enumerate(fp.clusters) for j, combo in enumerate(fp.combos)))

    xy = project_2d(meta.vectors)
    _write_csv(dest / "scatter.csv",
               ["meta_rep_id", "instance_id", "algorithm", "rho", "m", "k", "combo", "cluster", "pc1", "pc2",
                "predicted", "actual"],
               ([meta.ids[i], ds.instance_ids[r], ds.target_names[t], float(ds.combo_params[r][0]),
                 int(ds.combo_params[r][1]), int(ds.combo_params[r][2]), ds.combos[r], int(clusters.labels[i]),
                 xy[i, 0], xy[i, 1], meta.predicted[i], ds.Y[r, t]]
                for i, (r, t) in enumerate(zip(meta.rows, meta.targets))))

    imp = cluster_importance(clusters, meta, ds.feature_names)
    _write_csv(dest / "cluster_importance.csv", ["cluster", "rank", "feature", "importance"],
               ([c, rank + 1, f, v] for c, items in imp.items() for rank, (f, v) in enumerate(items)))

    def path_rows():
        for i, r in enumerate(rows):
            dp = decision_path(expl, i)
            for t, alg in enumerate(ds.target_names):
                yield [ds.instance_ids[r], alg, 0, "base", dp.cumulative[t, 0]]
                for s, f in enumerate(dp.features):
                    yield [ds.instance_ids[r], alg, s + 1, f, dp.cumulative[t, s + 1]]

    _write_csv(dest / "decision_paths.csv", ["instance_id", "algorithm", "step", "feature", "cumulative"],
               path_rows())
    _dump_json(report, dest / "evaluation.json")
    log.info("explain[%s]: %d clusters, silhouette %.3f", metric, clusters.n_clusters, clusters.silhouette)
    return dest


# -- report ------------------------------------------------------------------


def _read_csv(path: Path) -> list[dict]:
    with open(_require(path), newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(cfg: ExperimentConfig, metric: str | None = None) -> Path:
    """Render the plot data of an explain stage to SVG plus a short text summary."""
    src = explain_dir(cfg, metric)
    figs = src / "figures"
    figs.mkdir(exist_ok=True)
    evaluation = json.loads(_require(src / "evaluation.json").read_text())
    algs = evaluation["targets"]

    scat = _read_csv(src / "scatter.csv")
    xy = np.array([[float(r["pc1"]), float(r["pc2"])] for r in scat])
    n_clusters = max(int(r["cluster"]) for r in scat)
    (figs / "scatter_clusters.svg").write_text(svg.scatter(
        xy, [int(r["cluster"]) - 1 for r in scat], [algs.index(r["algorithm"]) for r in scat],
        "Meta-representations by cluster", [f"cluster {c}" for c in range(1, n_clusters + 1)], algs))
    combos = sorted({(float(r["rho"]), int(r["m"]), int(r["k"]), r["combo"]) for r in scat})
    k_vals = sorted({c[2] for c in combos})
    (figs / "scatter_k.svg").write_text(svg.scatter(
        xy, [k_vals.index(int(r["k"])) for r in scat], [algs.index(r["algorithm"]) for r in scat],
        "Meta-representations by k", [f"k={k}" for k in k_vals], algs))

    foot = _read_csv(src / "footprint.csv")
    combo_names = [c[3] for c in combos]
    for alg in algs:
        counts = np.zeros((n_clusters, len(combo_names)), dtype=int)
        means = np.full(counts.shape, math.nan)
        for r in foot:
            if r["algorithm"] == alg:
                i, j = int(r["cluster"]) - 1, combo_names.index(r["combo"])
                counts[i, j] = int(r["count"])
                means[i, j] = float(r["mean_pred"])
        (figs / f"footprint_{alg}.svg").write_text(svg.heatmap(
            counts, [f"C{c}" for c in range(1, n_clusters + 1)], combo_names, f"Footprint of {alg}", means))

    paths: dict[str, dict[str, list]] = {}
    for r in _read_csv(src / "decision_paths.csv"):
        paths.setdefault(r["instance_id"], {}).setdefault(r["algorithm"], []).append((r["feature"], float(r["cumulative"])))
    for iid, series in paths.items():
        labels = [f for f, _ in next(iter(series.values()))[1:]]
        (figs / f"decision_{iid}.svg").write_text(svg.line_paths(
            {a: [v for _, v in s] for a, s in series.items()}, labels, f"Decision paths: {iid}"))

    imp: dict[str, list] = {}
    for r in _read_csv(src / "cluster_importance.csv"):
        if int(r["rank"]) <= 5:
            imp.setdefault(f"cluster {r['cluster']}", []).append((r["feature"], float(r["importance"])))
    (figs / "cluster_importance.svg").write_text(svg.bars(imp, "Top features per cluster (mean |attribution|)"))

    lines = [f"metric: {evaluation['metric']}",
             f"train rows: {evaluation['n_train']}, test rows: {evaluation['n_test']}, folds: {evaluation['n_folds']}"]
    for key in ("cv_all_features", "cv_selected", "cv_baseline"):
        if key in evaluation:
            lines.append(f"{key} MAE: " + ", ".join(f"{a}={v:.4f}" for a, v in zip(algs, evaluation[key]["mae"])))
    lines.append("test MAE: " + ", ".join(f"{a}={v:.4f}" for a, v in zip(algs, evaluation["test"]["mae"])))
    if "sffs" in evaluation:
        lines.append(f"selected features ({evaluation['sffs']['best_size']}): {', '.join(evaluation['features'])}")
    c = evaluation["clusters"]
    lines.append(f"clusters: {c['n_clusters']} (silhouette {c['silhouette']:.4f})")
    lines.append(f"local accuracy error: {evaluation['local_accuracy_error']:.3e}")
    (src / "summary.txt").write_text("\n".join(lines) + "\n")
    return figs


def cmd_all(cfg: ExperimentConfig, metrics: Iterable[str] | None = None) -> None:
    cmd_generate(cfg)
    cmd_features(cfg)
    cmd_run(cfg)
    for metric in metrics or [cfg.metric]:
        cmd_explain(cfg, metric)
        if cfg.render_svg:
            cmd_report(cfg, metric)

"""Meta-learning dataset: scaled landscape features and per-algorithm performance targets."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ..metrics import PerformanceRecord, read_performance
from ..moea import ALGORITHMS
from ..plosnet import FEATURE_NAMES, read_feature_table
from ..seeding import mix64, philox

METRICS = ("reso", "hv")
_SPLIT_TAG = 0x5EED


def combo_label(rho: float, m: int, k: int) -> str:
    return f"rho{float(rho):+.2g}_m{int(m)}_k{int(k)}"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rows are instances; ``fold`` is -1 on test rows."""

    instance_ids: list[str]
    combos: list[str]
    combo_params: list[tuple[float, int, int]]
    feature_names: list[str]
    target_names: list[str]
    metric: str
    X_raw: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    is_test: np.ndarray
    fold: np.ndarray
    scale_min: np.ndarray
    scale_range: np.ndarray

    @property
    def train_rows(self) -> np.ndarray:
        return np.flatnonzero(~self.is_test)

    @property
    def test_rows(self) -> np.ndarray:
        return np.flatnonzero(self.is_test)

    @property
    def n_folds(self) -> int:
        return int(self.fold.max()) + 1

    def select_features(self, names: Sequence[str]) -> "Dataset":
        idx = [self.feature_names.index(f) for f in names]
        return replace(self, feature_names=list(names), X_raw=self.X_raw[:, idx], X=self.X[:, idx],
                       scale_min=self.scale_min[idx], scale_range=self.scale_range[idx])


def minmax_fit(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    return lo, span


def minmax_apply(X: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Scale with train-fitted parameters; constant train columns map to 0."""
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (X - lo) / safe, 0.0)


def build_dataset(
    feature_rows: list[dict],
    performance: list[PerformanceRecord],
    metric: str,
    master_seed: int,
    algorithms: Sequence[str] = ALGORITHMS,
    include_params: bool = False,
) -> Dataset:
    """Assemble, split and scale the dataset.

    One random instance per (rho, m, k) combination is held out for testing;
    the remaining ``r - 1`` instances of each combination are dealt to
    ``r - 1`` folds, so each fold holds one instance per combination.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    perf = {(p.instance_id, p.algorithm): getattr(p, f"{metric}_mean") for p in performance}
    feature_names = list(FEATURE_NAMES) + (["rho", "m", "n", "k"] if include_params else [])

    by_combo: dict[tuple, list[dict]] = defaultdict(list)
    for row in feature_rows:
        by_combo[(row["rho"], row["m"], row["k"])].append(row)
    sizes = {len(v) for v in by_combo.values()}
    if len(sizes) != 1 or min(sizes) < 3:
        raise ValueError(f"every combination needs the same number (>= 3) of instances, got sizes {sorted(sizes)}")
    per_combo = sizes.pop()

    rng = philox(mix64(master_seed, _SPLIT_TAG))
    ids, combos, params, is_test, fold, xs, ys = [], [], [], [], [], [], []
    for key in sorted(by_combo):
        rows = sorted(by_combo[key], key=lambda r: r["instance_id"])
        test_pos = int(rng.integers(per_combo))
        folds = rng.permutation(per_combo - 1)
        rest = iter(folds)
        for pos, row in enumerate(rows):
            iid = row["instance_id"]
            try:
                ys.append([perf[(iid, a)] for a in algorithms])
            except KeyError as exc:
                raise ValueError(f"no {metric} performance for {exc.args[0]}") from None
            feats = row["features"]
            xs.append([feats[f] for f in FEATURE_NAMES] + ([row[p] for p in ("rho", "m", "n", "k")] if include_params else []))
            ids.append(iid)
            combos.append(combo_label(*key))
            params.append(key)
            is_test.append(pos == test_pos)
            fold.append(-1 if pos == test_pos else int(next(rest)))

    X_raw = np.array(xs, dtype=float)
    is_test = np.array(is_test)
    lo, span = minmax_fit(X_raw[~is_test])
    return Dataset(
        instance_ids=ids, combos=combos, combo_params=params, feature_names=feature_names,
        target_names=list(algorithms), metric=metric, X_raw=X_raw, X=minmax_apply(X_raw, lo, span),
        Y=np.array(ys, dtype=float), is_test=is_test, fold=np.array(fold, dtype=np.int64),
        scale_min=lo, scale_range=span,
    )


def load_dataset(features_csv: str | Path, performance_csv: str | Path, metric: str, master_seed: int,
                 include_params: bool = False) -> Dataset:
    return build_dataset(read_feature_table(features_csv), read_performance(performance_csv), metric,
                         master_seed, include_params=include_params)

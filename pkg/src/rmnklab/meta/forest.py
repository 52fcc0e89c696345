"""Multi-target random forest regression, cross-validation and feature selection.

Trees are grown with scikit-learn's ``RandomForestRegressor`` (bootstrap
samples, squared-error criterion summed over targets) and copied into plain
arrays, which is the form used for prediction, TreeSHAP and ``model.json``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.ensemble import RandomForestRegressor

from ..seeding import philox
from .dataset import Dataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 192
    max_depth: int = 7
    min_split: int = 3
    min_leaf: int = 1
    max_features: float = 1.0


DEFAULT_PARAMS = ForestParams()

# random search space; the preset is always evaluated first
SEARCH_GRID = {
    "n_trees": [32, 64, 128, 192, 256],
    "max_depth": [3, 4, 5, 6, 7, 8, 10],
    "min_split": [2, 3, 4, 6, 8],
    "min_leaf": [1, 2, 3, 4],
    "max_features": [0.33, 0.5, 0.75, 1.0],
}


def as_split_input(X) -> np.ndarray:
    # scikit-learn compares float32 feature values against float64 thresholds
    return np.asarray(X, dtype=np.float32).astype(np.float64)


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Binary tree in array form; leaves have ``left == right == -1``.

    Samples go left when ``x[feature] <= threshold``. ``value`` holds the
    per-target mean of the (bootstrap) training rows reaching each node and
    ``cover`` their count.
    """

    left: np.ndarray
    right: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    value: np.ndarray
    cover: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.left.shape[0])

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.left[node] >= 0:
                stack.append((int(self.left[node]), d + 1))
                stack.append((int(self.right[node]), d + 1))
        return best

    def leaves_of(self, X: np.ndarray) -> np.ndarray:
        Xs = as_split_input(X)
        node = np.zeros(Xs.shape[0], dtype=np.int64)
        rows = np.arange(Xs.shape[0])
        while True:
            internal = self.left[node] >= 0
            if not internal.any():
                return node
            f = np.where(internal, self.feature[node], 0)
            go_left = Xs[rows, f] <= self.threshold[node]
            node = np.where(internal, np.where(go_left, self.left[node], self.right[node]), node)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.leaves_of(X)]

    def expected_value(self) -> np.ndarray:
        """Cover-weighted mean of leaf values."""
        leaves = self.left < 0
        w = self.cover[leaves]
        return (w[:, None] * self.value[leaves]).sum(axis=0) / w.sum()

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("left", "right", "feature", "threshold", "value", "cover")}

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(
            left=np.array(d["left"], dtype=np.int64), right=np.array(d["right"], dtype=np.int64),
            feature=np.array(d["feature"], dtype=np.int64), threshold=np.array(d["threshold"], dtype=float),
            value=np.array(d["value"], dtype=float).reshape(len(d["left"]), -1),
            cover=np.array(d["cover"], dtype=float),
        )


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: list[RegressionTree]
    params: ForestParams
    feature_names: list[str]
    target_names: list[str]
    train_mean: np.ndarray
    seed: int = 0

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def expected_value(self) -> np.ndarray:
        return np.mean([t.expected_value() for t in self.trees], axis=0)

    def to_dict(self) -> dict:
        return {
            "params": asdict(self.params),
            "feature_names": self.feature_names,
            "target_names": self.target_names,
            "train_mean": self.train_mean.tolist(),
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(
            trees=[RegressionTree.from_dict(t) for t in d["trees"]],
            params=ForestParams(**d["params"]),
            feature_names=list(d["feature_names"]),
            target_names=list(d["target_names"]),
            train_mean=np.array(d["train_mean"], dtype=float),
            seed=int(d["seed"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), separators=(",", ":")) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ForestModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _from_sklearn(est) -> RegressionTree:
    t = est.tree_
    left = t.children_left.astype(np.int64)
    return RegressionTree(
        left=left,
        right=t.children_right.astype(np.int64),
        feature=np.where(left >= 0, t.feature, -1).astype(np.int64),
        threshold=np.where(left >= 0, t.threshold, 0.0).astype(float),
        value=t.value[:, :, 0].astype(float).copy(),
        cover=t.weighted_n_node_samples.astype(float).copy(),
    )


def fit_forest(X, Y, params: ForestParams = DEFAULT_PARAMS, seed: int = 0,
               feature_names: Sequence[str] | None = None,
               target_names: Sequence[str] | None = None) -> ForestModel:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    feature_names = list(feature_names) if feature_names is not None else [f"x{i}" for i in range(X.shape[1])]
    target_names = list(target_names) if target_names is not None else [f"y{i}" for i in range(Y.shape[1])]
    mean = Y.mean(axis=0)
    if params.max_depth == 0:
        # a single leaf per tree; bootstrapping a constant model only adds noise
        leaf = RegressionTree(
            left=np.array([-1]), right=np.array([-1]), feature=np.array([-1]), threshold=np.array([0.0]),
            value=mean[None, :].copy(), cover=np.array([float(X.shape[0])]),
        )
        trees = [leaf] * params.n_trees
    else:
        rf = RandomForestRegressor(
            n_estimators=params.n_trees,
            max_depth=params.max_depth,
            min_samples_split=params.min_split,
            min_samples_leaf=params.min_leaf,
            max_features=params.max_features,
            bootstrap=True,
            random_state=int(seed) % (2**32),
            n_jobs=1,
        )
        rf.fit(X, Y[:, 0] if Y.shape[1] == 1 else Y)
        trees = [_from_sklearn(est) for est in rf.estimators_]
    return ForestModel(trees=trees, params=params, feature_names=feature_names, target_names=target_names,
                       train_mean=mean, seed=int(seed))


def train_forest(dataset: Dataset, params: ForestParams = DEFAULT_PARAMS, seed: int = 0,
                 rows: np.ndarray | None = None) -> ForestModel:
    """Fit on ``rows`` (default: all training rows) of ``dataset``."""
    rows = dataset.train_rows if rows is None else rows
    return fit_forest(dataset.X[rows], dataset.Y[rows], params, seed, dataset.feature_names, dataset.target_names)


def mae(y_true: np.ndarray, y_pred: np.ndarray) -> np.ndarray:
    return np.abs(y_true - y_pred).mean(axis=0)


def r2(y_true: np.ndarray, y_pred: np.ndarray) -> np.ndarray:
    """Per-target ``1 - SSE/SST``; a constant target scores 1 if predicted exactly, else 0."""
    sse = ((y_true - y_pred) ** 2).sum(axis=0)
    sst = ((y_true - y_true.mean(axis=0)) ** 2).sum(axis=0)
    out = np.empty(sse.shape)
    for t in range(sse.shape[0]):
        if sst[t] > 0:
            out[t] = 1.0 - sse[t] / sst[t]
        else:
            out[t] = 1.0 if sse[t] == 0 else 0.0
    return out


@dataclass
class CVScores:
    mae: np.ndarray
    r2: np.ndarray
    fold_mae: list[np.ndarray] = field(default_factory=list)

    @property
    def score(self) -> float:
        """Mean MAE over targets (lower is better)."""
        return float(self.mae.mean())


def cross_validate(dataset: Dataset, params: ForestParams = DEFAULT_PARAMS, seed: int = 0,
                   predictor: str = "forest") -> CVScores:
    """Fold-averaged held-out MAE and R^2 per target over the training folds.

    ``predictor="mean"`` scores the baseline that always predicts the
    training-fold mean.
    """
    maes, r2s = [], []
    for k in range(dataset.n_folds):
        tr = np.flatnonzero((dataset.fold >= 0) & (dataset.fold != k))
        va = np.flatnonzero(dataset.fold == k)
        if predictor == "forest":
            model = train_forest(dataset, params, seed, rows=tr)
            pred = model.predict(dataset.X[va])
        elif predictor == "mean":
            pred = np.broadcast_to(dataset.Y[tr].mean(axis=0), dataset.Y[va].shape)
        else:
            raise ValueError(f"unknown predictor {predictor!r}")
        maes.append(mae(dataset.Y[va], pred))
        r2s.append(r2(dataset.Y[va], pred))
    return CVScores(mae=np.mean(maes, axis=0), r2=np.mean(r2s, axis=0), fold_mae=maes)


@dataclass
class SelectionResult:
    order: list[str]
    scores: list[float]
    best_size: int

    @property
    def selected(self) -> list[str]:
        return self.order[: self.best_size]


def sffs(dataset: Dataset, params: ForestParams = DEFAULT_PARAMS, seed: int = 0) -> SelectionResult:
    """Sequential forward selection over all features.

    Each step adds the feature with the lowest CV score (earlier catalog
    position wins ties) until every feature is in; the prefix with the best
    score is selected, preferring the shorter prefix on ties.
    """
    remaining = list(dataset.feature_names)
    order: list[str] = []
    scores: list[float] = []
    while remaining:
        best_f, best_s = None, np.inf
        for f in remaining:
            s = cross_validate(dataset.select_features(order + [f]), params, seed).score
            if s < best_s:
                best_f, best_s = f, s
        order.append(best_f)
        remaining.remove(best_f)
        scores.append(best_s)
        log.debug("sffs step %d: +%s score %.6f", len(order), best_f, best_s)
    best_size = int(np.argmin(scores)) + 1
    return SelectionResult(order=order, scores=scores, best_size=best_size)


def random_search(dataset: Dataset, n_trials: int, seed: int = 0) -> tuple[ForestParams, list[tuple[ForestParams, float]]]:
    """Seeded random search over ``SEARCH_GRID``; trial 0 is the default preset."""
    rng = philox(seed, 0x5EA)
    trials = [DEFAULT_PARAMS]
    for _ in range(max(0, n_trials - 1)):
        trials.append(ForestParams(**{k: v[int(rng.integers(len(v)))] for k, v in SEARCH_GRID.items()}))
    history = []
    best, best_s = DEFAULT_PARAMS, np.inf
    for p in trials:
        s = cross_validate(dataset, p, seed).score
        history.append((p, s))
        if s < best_s:
            best, best_s = p, s
    return best, history


def with_trees(params: ForestParams, n_trees: int | None) -> ForestParams:
    return params if n_trees is None else replace(params, n_trees=n_trees)

"""Exact path-dependent TreeSHAP for multi-target forests.

Polynomial-time Shapley attribution over the tree structure: the expectation
of a tree given a feature subset follows the decision path for features in
the subset and splits by training cover otherwise. Leaf values are vectors
(one entry per target), and attributions are averaged over the trees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .forest import ForestModel, RegressionTree, as_split_input


@njit(cache=True)
def _extend(feat, zf, of, pw, depth, zero, one, fi):
    feat[depth] = fi
    zf[depth] = zero
    of[depth] = one
    pw[depth] = 1.0 if depth == 0 else 0.0
    for i in range(depth - 1, -1, -1):
        pw[i + 1] += one * pw[i] * (i + 1) / (depth + 1)
        pw[i] = zero * pw[i] * (depth - i) / (depth + 1)


@njit(cache=True)
def _unwind(feat, zf, of, pw, depth, idx):
    one = of[idx]
    zero = zf[idx]
    nxt = pw[depth]
    for i in range(depth - 1, -1, -1):
        if one != 0.0:
            tmp = pw[i]
            pw[i] = nxt * (depth + 1) / ((i + 1) * one)
            nxt = tmp - pw[i] * zero * (depth - i) / (depth + 1)
        else:
            pw[i] = pw[i] * (depth + 1) / (zero * (depth - i))
    for i in range(idx, depth):
        feat[i] = feat[i + 1]
        zf[i] = zf[i + 1]
        of[i] = of[i + 1]


@njit(cache=True)
def _unwound_sum(zf, of, pw, depth, idx):
    one = of[idx]
    zero = zf[idx]
    nxt = pw[depth]
    total = 0.0
    for i in range(depth - 1, -1, -1):
        if one != 0.0:
            tmp = nxt * (depth + 1) / ((i + 1) * one)
            total += tmp
            nxt = pw[i] - tmp * zero * (depth - i) / (depth + 1)
        else:
            total += (pw[i] / zero) / ((depth - i) / (depth + 1))
    return total


@njit(cache=True)
def _recurse(left, right, feature, threshold, value, cover, x, phi, node, depth,
             pfeat, pzf, pof, ppw, zero, one, fi):
    size = pfeat.shape[0]
    feat = np.empty(size, dtype=np.int64)
    zf = np.empty(size)
    of = np.empty(size)
    pw = np.empty(size)
    feat[:depth] = pfeat[:depth]
    zf[:depth] = pzf[:depth]
    of[:depth] = pof[:depth]
    pw[:depth] = ppw[:depth]
    _extend(feat, zf, of, pw, depth, zero, one, fi)

    if left[node] < 0:
        for i in range(1, depth + 1):
            w = _unwound_sum(zf, of, pw, depth, i)
            scale = w * (of[i] - zf[i])
            for t in range(value.shape[1]):
                phi[feat[i], t] += scale * value[node, t]
        return

    split = feature[node]
    if x[split] <= threshold[node]:
        hot, cold = left[node], right[node]
    else:
        hot, cold = right[node], left[node]
    in_zero = 1.0
    in_one = 1.0
    k = -1
    for i in range(1, depth + 1):
        if feat[i] == split:
            k = i
            break
    if k >= 0:
        in_zero = zf[k]
        in_one = of[k]
        _unwind(feat, zf, of, pw, depth, k)
        depth -= 1
    _recurse(left, right, feature, threshold, value, cover, x, phi, hot, depth + 1,
             feat, zf, of, pw, in_zero * cover[hot] / cover[node], in_one, split)
    _recurse(left, right, feature, threshold, value, cover, x, phi, cold, depth + 1,
             feat, zf, of, pw, in_zero * cover[cold] / cover[node], 0.0, split)


def tree_shap_single(tree: RegressionTree, x: np.ndarray, n_features: int) -> np.ndarray:
    """``(n_features, n_targets)`` attributions of one tree for one split-ready row."""
    T = tree.value.shape[1]
    phi = np.zeros((n_features + 1, T))
    if tree.left[0] < 0:
        return phi[:n_features]
    size = tree.depth() + 2
    feat = np.zeros(size, dtype=np.int64)
    zf = np.zeros(size)
    of = np.zeros(size)
    pw = np.zeros(size)
    # the root path element is a placeholder for "no feature", routed to the extra slot
    _recurse(tree.left, tree.right, tree.feature, tree.threshold, tree.value, tree.cover,
             x, phi, 0, 0, feat, zf, of, pw, 1.0, 1.0, n_features)
    return phi[:n_features]


@dataclass(frozen=True, eq=False)
class ShapExplanation:
    """Attributions for explained rows.

    Attributes:
        values: ``(rows, features, targets)``.
        base_value: ``(targets,)`` expected model output.
        predictions: ``(rows, targets)``.
    """

    values: np.ndarray
    base_value: np.ndarray
    predictions: np.ndarray
    feature_names: list[str]
    target_names: list[str]

    def local_accuracy_error(self) -> float:
        recon = self.base_value[None, :] + self.values.sum(axis=1)
        return float(np.abs(recon - self.predictions).max()) if self.values.size else 0.0


def tree_shap(model: ForestModel, X) -> ShapExplanation:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    Xs = as_split_input(X)
    F = model.n_features
    T = len(model.target_names)
    values = np.zeros((X.shape[0], F, T))
    for r in range(X.shape[0]):
        acc = np.zeros((F, T))
        for tree in model.trees:
            acc += tree_shap_single(tree, Xs[r], F)
        values[r] = acc / len(model.trees)
    return ShapExplanation(values=values, base_value=model.expected_value(), predictions=model.predict(X),
                           feature_names=list(model.feature_names), target_names=list(model.target_names))

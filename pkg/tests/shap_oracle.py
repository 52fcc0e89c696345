"""Brute-force path-dependent Shapley values by enumerating every coalition."""

import math

import numpy as np

from rmnklab.meta.forest import as_split_input


def conditional_expectation(tree, x, S, node=0):
    """Tree output with features in ``S`` fixed to ``x`` and the rest averaged by cover."""
    if tree.left[node] < 0:
        return tree.value[node]
    f = tree.feature[node]
    l, r = tree.left[node], tree.right[node]
    if f in S:
        return conditional_expectation(tree, x, S, l if x[f] <= tree.threshold[node] else r)
    return (tree.cover[l] * conditional_expectation(tree, x, S, l)
            + tree.cover[r] * conditional_expectation(tree, x, S, r)) / tree.cover[node]


def brute_shap(model, x):
    """``(F, T)`` Shapley values of the forest for one row."""
    xs = as_split_input(np.atleast_2d(x))[0]
    F = model.n_features
    T = len(model.target_names)
    v = np.zeros((1 << F, T))
    for mask in range(1 << F):
        S = {j for j in range(F) if mask >> j & 1}
        v[mask] = np.mean([conditional_expectation(t, xs, S) for t in model.trees], axis=0)
    sizes = np.array([bin(s).count("1") for s in range(1 << F)])
    w = np.array([math.factorial(s) * math.factorial(F - s - 1) / math.factorial(F) for s in range(F)])
    phi = np.zeros((F, T))
    for j in range(F):
        without = np.array([s for s in range(1 << F) if not s >> j & 1])
        phi[j] = (w[sizes[without]][:, None] * (v[without | (1 << j)] - v[without])).sum(axis=0)
    return phi

"""Agglomerative clustering of meta-representations (cosine distance, average linkage)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage
from scipy.spatial.distance import squareform


def cosine_distances(V) -> np.ndarray:
    """Pairwise ``1 - cos`` distances.

    Computed as half the squared distance between unit vectors so identical
    directions give exactly 0. An all-zero vector is at distance 1 from
    every other vector.
    """
    V = np.asarray(V, dtype=float)
    norms = np.linalg.norm(V, axis=1)
    zero = norms == 0
    U = np.where(zero[:, None], 0.0, V / np.where(zero, 1.0, norms)[:, None])
    diff = U[:, None, :] - U[None, :, :]
    D = 0.5 * np.einsum("ijk,ijk->ij", diff, diff)
    D[zero, :] = 1.0
    D[:, zero] = 1.0
    np.fill_diagonal(D, 0.0)
    return np.clip(D, 0.0, 2.0)


def silhouette(D: np.ndarray, labels) -> float:
    """Mean silhouette over all points for a precomputed distance matrix.

    Points in singleton clusters score 0.
    """
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if uniq.shape[0] < 2:
        raise ValueError("silhouette needs at least two clusters")
    onehot = (labels[:, None] == uniq[None, :]).astype(float)
    sizes = onehot.sum(axis=0)
    sums = D @ onehot
    own = np.searchsorted(uniq, labels)
    rows = np.arange(labels.shape[0])
    own_size = sizes[own]
    a = np.where(own_size > 1, sums[rows, own] / np.maximum(own_size - 1, 1), 0.0)
    means = sums / sizes[None, :]
    means[rows, own] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own_size > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(s.mean())


@dataclass
class ClusterModel:
    """Cluster ids are 1-based and ordered by descending mean predicted performance."""

    labels: np.ndarray
    n_clusters: int
    silhouette: float
    scores: dict[int, float] = field(default_factory=dict)
    cluster_means: np.ndarray | None = None
    linkage_method: str = "average"
    metric: str = "cosine"


def relabel_by_performance(raw: np.ndarray, predicted: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map raw labels to 1..K by descending mean of ``predicted`` (raw order breaks ties)."""
    uniq = np.unique(raw)
    means = np.array([predicted[raw == u].mean() for u in uniq])
    order = sorted(range(len(uniq)), key=lambda i: (-means[i], i))
    mapping = {uniq[i]: new + 1 for new, i in enumerate(order)}
    return np.array([mapping[v] for v in raw], dtype=np.int64), means[order]


def cluster_meta(meta_reps, predicted, max_clusters: int = 20) -> ClusterModel:
    """Cluster meta-representations, choosing the count (2..min(20, N-1)) with the best silhouette.

    ``predicted`` holds the model prediction attached to each meta-representation
    and only affects the final label order. The smaller count wins ties.
    """
    V = np.asarray(meta_reps, dtype=float)
    N = V.shape[0]
    if N < 3:
        raise ValueError("need at least 3 meta-representations")
    D = cosine_distances(V)
    Z = linkage(squareform(D, checks=False), method="average")
    scores: dict[int, float] = {}
    best_k, best_s, best_labels = None, -np.inf, None
    for k in range(2, min(max_clusters, N - 1) + 1):
        labels = cut_tree(Z, n_clusters=k).ravel()
        s = silhouette(D, labels)
        scores[k] = s
        if s > best_s:
            best_k, best_s, best_labels = k, s, labels
    labels, means = relabel_by_performance(best_labels, np.asarray(predicted, dtype=float))
    return ClusterModel(labels=labels, n_clusters=int(best_k), silhouette=float(best_s), scores=scores,
                        cluster_means=means)

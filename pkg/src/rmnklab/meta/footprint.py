"""Meta-representations, 2D projection, algorithm footprints and importance summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster import ClusterModel
from .dataset import Dataset
from .treeshap import ShapExplanation


@dataclass(frozen=True, eq=False)
class MetaRepresentations:
    """One SHAP vector per (explained row, target), row-major over targets."""

    rows: np.ndarray
    targets: np.ndarray
    vectors: np.ndarray
    predicted: np.ndarray
    ids: list[str]

    def __len__(self) -> int:
        return int(self.rows.shape[0])


def meta_representations(explanation: ShapExplanation, dataset: Dataset, rows: np.ndarray) -> MetaRepresentations:
    R, F, T = explanation.values.shape
    if R != len(rows):
        raise ValueError("explanation rows do not match the requested dataset rows")
    r_idx = np.repeat(np.arange(R), T)
    t_idx = np.tile(np.arange(T), R)
    return MetaRepresentations(
        rows=np.asarray(rows)[r_idx],
        targets=t_idx,
        vectors=explanation.values[r_idx, :, t_idx],
        predicted=explanation.predictions[r_idx, t_idx],
        ids=[f"{dataset.instance_ids[rows[r]]}:{explanation.target_names[t]}" for r, t in zip(r_idx, t_idx)],
    )


def project_2d(V) -> np.ndarray:
    """Coordinates on the top two principal axes of the centred data.

    Each axis is signed so that its largest-magnitude loading is positive.
    """
    V = np.asarray(V, dtype=float)
    if V.shape[0] < 2:
        raise ValueError("need at least two points")
    Xc = V - V.mean(axis=0)
    _, _, Vt = np.linalg.svd(Xc, full_matrices=False)
    comps = np.zeros((2, V.shape[1]))
    comps[: min(2, Vt.shape[0])] = Vt[:2]
    for c in comps:
        if np.any(c):
            if c[np.argmax(np.abs(c))] < 0:
                c *= -1.0
    return Xc @ comps.T


@dataclass(frozen=True, eq=False)
class Footprint:
    """Contingency matrix of one algorithm's meta-representations: clusters x combinations."""

    algorithm: str
    clusters: list[int]
    combos: list[str]
    counts: np.ndarray
    mean_pred: np.ndarray


def build_footprints(cluster_model: ClusterModel, meta: MetaRepresentations, dataset: Dataset) -> dict[str, Footprint]:
    clusters = list(range(1, cluster_model.n_clusters + 1))
    combos = sorted(set(dataset.combos), key=lambda c: dataset.combo_params[dataset.combos.index(c)])
    col = {c: i for i, c in enumerate(combos)}
    out = {}
    for t, alg in enumerate(dataset.target_names):
        counts = np.zeros((len(clusters), len(combos)), dtype=np.int64)
        sums = np.zeros(counts.shape)
        for i in np.flatnonzero(meta.targets == t):
            r = cluster_model.labels[i] - 1
            c = col[dataset.combos[meta.rows[i]]]
            counts[r, c] += 1
            sums[r, c] += meta.predicted[i]
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        out[alg] = Footprint(alg, clusters, combos, counts, mean)
    return out


def cluster_importance(cluster_model: ClusterModel, meta: MetaRepresentations,
                       feature_names: list[str]) -> dict[int, list[tuple[str, float]]]:
    """Per cluster, mean absolute attribution per feature, most important first."""
    out = {}
    for c in range(1, cluster_model.n_clusters + 1):
        members = meta.vectors[cluster_model.labels == c]
        imp = np.abs(members).mean(axis=0)
        order = sorted(range(len(feature_names)), key=lambda j: (-imp[j], j))
        out[c] = [(feature_names[j], float(imp[j])) for j in order]
    return out


@dataclass(frozen=True, eq=False)
class DecisionPath:
    """Cumulative contribution paths of one explained row.

    ``cumulative[t]`` starts at the base value of target ``t`` and adds the
    attributions of ``features`` in order, ending at the prediction.
    """

    features: list[str]
    base_value: np.ndarray
    cumulative: np.ndarray
    predictions: np.ndarray


def decision_path(explanation: ShapExplanation, row: int, ordering: list[str] | None = None) -> DecisionPath:
    """Features ordered by summed |attribution| over targets, ascending, unless ``ordering`` is given."""
    phi = explanation.values[row]
    names = explanation.feature_names
    if ordering is None:
        agg = np.abs(phi).sum(axis=1)
        idx = sorted(range(len(names)), key=lambda j: (agg[j], j))
    else:
        idx = [names.index(f) for f in ordering]
    steps = phi[idx].T
    cumulative = explanation.base_value[:, None] + np.concatenate([np.zeros((steps.shape[0], 1)), np.cumsum(steps, axis=1)], axis=1)
    return DecisionPath([names[j] for j in idx], explanation.base_value.copy(), cumulative,
                        explanation.predictions[row].copy())

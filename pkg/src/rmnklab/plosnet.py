"""PLOS-net and compressed C-PLOS-net models and the landscape feature catalog.

The PLOS-net links Pareto local optimal solutions (PLOS) that differ in one
bit. Its connected components become the nodes ("cnodes") of the compressed
network. A directed escape edge ``A -> B`` carries one unit of weight for
every ordered pair ``(u, v)`` with ``u`` in ``A``, ``v`` in ``B``,
``Hamming(u, v) == 2`` and ``v`` not dominated by ``u``.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .landscape import EnumeratedLandscape

FEATURE_NAMES: tuple[str, ...] = (
    "pos_num",
    "pos_strength",
    "node_pareto_n",
    "plos_num",
    "cnode_num",
    "cc_n",
    "cc_avg",
    "edge_cmpr",
    "edge_weight_avg",
    "sink_num",
    "sink_strength",
    "dist_pareto_avg",
    "dist_max",
    "path_length_avg",
    "path_pareto_avg",
    "rank_strength_cor",
    "rdc",
    "assort_degree",
)
PARAM_COLUMNS: tuple[str, ...] = ("rho", "m", "n", "k")

_PAIR_CHUNK = 512


@dataclass(frozen=True, eq=False)
class PlosNet:
    """Undirected unit-weight graph over PLOS.

    Attributes:
        nodes: Ascending integer genotypes of all PLOS.
        edges: ``(E, 2)`` genotype pairs ``u < v`` at Hamming distance 1.
    """

    nodes: np.ndarray
    edges: np.ndarray

    def node_index(self, genotypes) -> np.ndarray:
        return np.searchsorted(self.nodes, genotypes)


@dataclass(frozen=True, eq=False)
class CPlosNet:
    """Compressed network: PLOS-net components joined by weighted escape edges.

    Attributes:
        labels: Component id of each PLOS-net node (aligned with ``PlosNet.nodes``).
        sizes: Members per component.
        pareto_count: Members of rank 0 per component.
        node_rank: Minimum non-dominated-sorting rank per component.
        src, dst, weight: Directed edges between distinct components, sorted by (src, dst).
    """

    labels: np.ndarray
    sizes: np.ndarray
    pareto_count: np.ndarray
    node_rank: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    @property
    def n_cnodes(self) -> int:
        return int(self.sizes.shape[0])

    def members(self, plosnet: PlosNet, c: int) -> np.ndarray:
        return plosnet.nodes[self.labels == c]

    def in_strength(self) -> np.ndarray:
        return np.bincount(self.dst, weights=self.weight, minlength=self.n_cnodes)

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n_cnodes)


def build_plos_net(landscape: EnumeratedLandscape) -> PlosNet:
    nodes = landscape.plos().astype(np.int64)
    pairs = []
    for j in range(landscape.n):
        v = nodes ^ (1 << j)
        keep = (v > nodes) & landscape.is_plos[v]
        pairs.append(np.column_stack([nodes[keep], v[keep]]))
    edges = np.concatenate(pairs) if pairs else np.empty((0, 2), dtype=np.int64)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return PlosNet(nodes=nodes, edges=edges[order].reshape(-1, 2))


def _dominates_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.all(A >= B, axis=1) & np.any(A > B, axis=1)


def compress(plosnet: PlosNet, landscape: EnumeratedLandscape) -> CPlosNet:
    nodes = plosnet.nodes
    N = nodes.shape[0]
    if plosnet.edges.shape[0]:
        iu = plosnet.node_index(plosnet.edges[:, 0])
        iv = plosnet.node_index(plosnet.edges[:, 1])
        adj = coo_matrix((np.ones(iu.shape[0]), (iu, iv)), shape=(N, N)).tocsr()
        C, labels = connected_components(adj, directed=False)
    else:
        C, labels = N, np.arange(N)
    labels = labels.astype(np.int64)

    sizes = np.bincount(labels, minlength=C)
    ranks = landscape.rank[nodes]
    pareto_count = np.bincount(labels, weights=(ranks == 0), minlength=C).astype(np.int64)
    node_rank = np.full(C, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(node_rank, labels, ranks)

    comp_of = np.full(landscape.objectives.shape[0], -1, dtype=np.int64)
    comp_of[nodes] = labels
    F = landscape.objectives
    codes = []
    for a, b in itertools.combinations(range(landscape.n), 2):
        v = nodes ^ ((1 << a) | (1 << b))
        cv = comp_of[v]
        keep = (cv >= 0) & (cv != labels)
        if not keep.any():
            continue
        u_sel, v_sel = nodes[keep], v[keep]
        accept = ~_dominates_rows(F[u_sel], F[v_sel])
        codes.append(labels[keep][accept] * C + cv[keep][accept])
    if codes:
        uniq, counts = np.unique(np.concatenate(codes), return_counts=True)
    else:
        uniq, counts = np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return CPlosNet(
        labels=labels,
        sizes=sizes,
        pareto_count=pareto_count,
        node_rank=node_rank,
        src=(uniq // C).astype(np.int64),
        dst=(uniq % C).astype(np.int64),
        weight=counts.astype(np.float64),
    )


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return 0.0
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= 0.0 or syy <= 0.0:
        return 0.0
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def _undirected(cnet: CPlosNet):
    C = cnet.n_cnodes
    rows = np.concatenate([cnet.src, cnet.dst])
    cols = np.concatenate([cnet.dst, cnet.src])
    return coo_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(C, C)).tocsr()


def pareto_distances(cnet: CPlosNet, unreachable: float) -> np.ndarray:
    """Hop distance from every cnode to its nearest Pareto cnode on the undirected view."""
    C = cnet.n_cnodes
    sources = np.flatnonzero(cnet.pareto_count > 0)
    rows = np.concatenate([cnet.src, cnet.dst, np.full(sources.shape[0], C)])
    cols = np.concatenate([cnet.dst, cnet.src, sources])
    aug = coo_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(C + 1, C + 1)).tocsr()
    d = shortest_path(aug, directed=False, unweighted=True, indices=C)[:C] - 1.0
    d[~np.isfinite(d)] = unreachable
    return d


def mean_pairwise_hops(cnet: CPlosNet) -> float:
    """Mean hop distance over ordered pairs of distinct, mutually reachable cnodes."""
    if cnet.n_cnodes < 2 or cnet.src.shape[0] == 0:
        return 0.0
    adj = _undirected(cnet)
    _, comp = connected_components(adj, directed=False)
    total = 0.0
    count = 0
    for c in np.unique(comp):
        members = np.flatnonzero(comp == c)
        if members.shape[0] < 2:
            continue
        sub = adj[members][:, members]
        for start in range(0, members.shape[0], _PAIR_CHUNK):
            idx = np.arange(start, min(start + _PAIR_CHUNK, members.shape[0]))
            d = shortest_path(sub, directed=False, unweighted=True, indices=idx)
            total += float(d.sum())
            count += d.size - idx.shape[0]
    return total / count if count else 0.0


def degree_assortativity(plosnet: PlosNet) -> float:
    if plosnet.edges.shape[0] == 0:
        return 0.0
    iu = plosnet.node_index(plosnet.edges[:, 0])
    iv = plosnet.node_index(plosnet.edges[:, 1])
    deg = np.bincount(np.concatenate([iu, iv]), minlength=plosnet.nodes.shape[0])
    x = np.concatenate([deg[iu], deg[iv]])
    y = np.concatenate([deg[iv], deg[iu]])
    return _pearson(x, y)


def compute_features(plosnet: PlosNet, cnet: CPlosNet, landscape: EnumeratedLandscape) -> dict[str, float]:
    """The feature catalog, keyed and ordered as ``FEATURE_NAMES``.

    Degenerate values are mapped to finite numbers: unreachable Pareto
    distances count as ``n`` and undefined correlations as 0.
    """
    C = cnet.n_cnodes
    strength = cnet.in_strength()
    is_pareto_c = cnet.pareto_count > 0
    is_sink = cnet.out_degree() == 0
    dist = pareto_distances(cnet, unreachable=float(landscape.n))
    n_cedges = cnet.src.shape[0]

    feats = {
        "pos_num": float(landscape.is_pareto.sum()),
        "pos_strength": float(strength[is_pareto_c].sum()),
        "node_pareto_n": float(is_pareto_c.sum()),
        "plos_num": float(plosnet.nodes.shape[0]),
        "cnode_num": float(C),
        "cc_n": float(C),
        "cc_avg": float(cnet.sizes.mean()),
        "edge_cmpr": n_cedges / max(1, plosnet.edges.shape[0]),
        "edge_weight_avg": float(cnet.weight.mean()) if n_cedges else 0.0,
        "sink_num": float(is_sink.sum()),
        "sink_strength": float(strength[is_sink].sum()),
        "dist_pareto_avg": float(dist.mean()),
        "dist_max": float(dist.max()),
        "path_length_avg": mean_pairwise_hops(cnet),
        "path_pareto_avg": float(dist[~is_pareto_c].mean()) if (~is_pareto_c).any() else 0.0,
        "rank_strength_cor": _pearson(cnet.node_rank, strength),
        "rdc": _pearson(cnet.node_rank, dist),
        "assort_degree": degree_assortativity(plosnet),
    }
    return {name: float(feats[name]) for name in FEATURE_NAMES}


def landscape_features(landscape: EnumeratedLandscape) -> dict[str, float]:
    net = build_plos_net(landscape)
    return compute_features(net, compress(net, landscape), landscape)


def feature_table(rows: Iterable[tuple[str, Mapping[str, float], Mapping[str, float]]], path: str | Path) -> None:
    """Write ``features.csv``.

    Each row is ``(instance_id, params, features)`` where ``params`` holds
    rho, m, n, k. Column order is ``instance_id``, ``PARAM_COLUMNS`` and
    ``FEATURE_NAMES``; floats are written with ``repr``.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance_id", *PARAM_COLUMNS, *FEATURE_NAMES])
        for instance_id, params, feats in rows:
            missing = [f for f in FEATURE_NAMES if f not in feats]
            if missing:
                raise ValueError(f"{instance_id}: missing features {missing}")
            w.writerow([
                instance_id,
                repr(float(params["rho"])), int(params["m"]), int(params["n"]), int(params["k"]),
                *[repr(float(feats[f])) for f in FEATURE_NAMES],
            ])


def read_feature_table(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        expected = ["instance_id", *PARAM_COLUMNS, *FEATURE_NAMES]
        if header != expected:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for row in reader:
            out.append({
                "instance_id": row["instance_id"],
                "rho": float(row["rho"]), "m": int(row["m"]), "n": int(row["n"]), "k": int(row["k"]),
                "features": {f: float(row[f]) for f in FEATURE_NAMES},
            })
        return out

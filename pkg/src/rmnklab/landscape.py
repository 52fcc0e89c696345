"""Exhaustive enumeration, Pareto dominance and non-dominated sorting."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import ens_ranks, ens_ranks_2d, ens_ranks_3d
from .rmnk import RhoMnkInstance, evaluate_all, int_to_genotype

MAX_ENUM_N = 24


def dominates(a, b) -> bool:
    """Pareto dominance for maximization: ``a >= b`` everywhere and ``a > b`` somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a >= b) and np.any(a > b))


def nondominated_sort(points) -> np.ndarray:
    """Front index of every point; 0 marks the mutually non-dominated maximal set."""
    F = np.asarray(points, dtype=np.float64)
    if F.ndim != 2 or F.shape[0] == 0:
        raise ValueError("nondominated_sort needs a non-empty (N, m) array")
    order = np.lexsort(tuple(-F[:, c] for c in range(F.shape[1] - 1, -1, -1)))
    S = np.ascontiguousarray(F[order])
    if S.shape[1] == 2:
        sorted_ranks = ens_ranks_2d(S)
    elif S.shape[1] == 3:
        _, r2 = np.unique(S[:, 1], return_inverse=True)
        sorted_ranks = ens_ranks_3d(S, r2.astype(np.int64).ravel(), int(r2.max()) + 1)
    else:
        sorted_ranks = ens_ranks(S)
    ranks = np.empty(F.shape[0], dtype=np.int64)
    ranks[order] = sorted_ranks
    return ranks


def nondominated_mask(points) -> np.ndarray:
    """True where a point is not dominated by any other point."""
    return nondominated_sort(points) == 0


@dataclass(frozen=True, eq=False)
class EnumeratedLandscape:
    """Every genotype of an instance with its objective vector and dominance status.

    Row ``s`` of ``objectives`` is the genotype whose integer encoding is ``s``.
    """

    instance: RhoMnkInstance
    objectives: np.ndarray
    rank: np.ndarray
    is_pareto: np.ndarray
    is_plos: np.ndarray

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def m(self) -> int:
        return self.instance.m

    def pareto_set(self) -> np.ndarray:
        """Integer genotypes of the Pareto set, ascending."""
        return np.flatnonzero(self.is_pareto)

    def pareto_front(self) -> np.ndarray:
        """Distinct objective vectors of the Pareto set (lexicographically sorted rows)."""
        return np.unique(self.objectives[self.is_pareto], axis=0)

    def plos(self) -> np.ndarray:
        return np.flatnonzero(self.is_plos)


def plos_mask(objectives: np.ndarray, n: int) -> np.ndarray:
    """True where no Hamming-1 neighbour dominates the genotype."""
    N = objectives.shape[0]
    idx = np.arange(N, dtype=np.int64)
    dominated = np.zeros(N, dtype=bool)
    for j in range(n):
        nb = objectives[idx ^ (1 << j)]
        dominated |= np.all(nb >= objectives, axis=1) & np.any(nb > objectives, axis=1)
    return ~dominated


def enumerate_landscape(instance: RhoMnkInstance) -> EnumeratedLandscape:
    if instance.n > MAX_ENUM_N:
        raise ValueError(f"enumeration limited to n <= {MAX_ENUM_N}, got n={instance.n}")
    F = evaluate_all(instance)
    rank = nondominated_sort(F)
    is_pareto = rank == 0
    is_plos = plos_mask(F, instance.n)
    for arr in (F, rank, is_pareto, is_plos):
        arr.setflags(write=False)
    return EnumeratedLandscape(instance, F, rank, is_pareto, is_plos)


def pareto_set(landscape: EnumeratedLandscape) -> list[str]:
    return [int_to_genotype(int(g), landscape.n) for g in landscape.pareto_set()]


def pareto_front(landscape: EnumeratedLandscape) -> np.ndarray:
    return landscape.pareto_front()


def write_landscape_csv(landscape: EnumeratedLandscape, path: str | Path) -> None:
    m = landscape.m
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["genotype_int", *[f"f_{i + 1}" for i in range(m)], "rank", "is_pareto", "is_plos"])
        for s in range(landscape.objectives.shape[0]):
            w.writerow([s, *[repr(float(v)) for v in landscape.objectives[s]], int(landscape.rank[s]),
                        int(landscape.is_pareto[s]), int(landscape.is_plos[s])])

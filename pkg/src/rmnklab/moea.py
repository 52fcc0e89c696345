"""PLS, GSEMO and NSGA-II on rho-MNK instances.

All three algorithms read objective vectors from the full objective table of
the instance (``evaluate_all``), so an evaluation is a row lookup; every
lookup is counted, including neighbourhood scans and initialisation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .landscape import nondominated_sort
from .rmnk import RhoMnkInstance, evaluate_all
from .seeding import mix64, philox

ALGORITHMS: tuple[str, ...] = ("pls", "gsemo", "nsga2")
ALGORITHM_IDS = {"pls": 1, "gsemo": 2, "nsga2": 3}

PLS_MAX_EVALS = 10**7


@dataclass
class Archive:
    """Unbounded archive of mutually non-dominated, genotype-unique solutions.

    Entries keep insertion order. ``visited`` is only used by PLS.
    """

    m: int
    genotypes: list[int] = field(default_factory=list)
    vectors: list[np.ndarray] = field(default_factory=list)
    visited: list[bool] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.genotypes)

    def matrix(self) -> np.ndarray:
        return np.array(self.vectors, dtype=float).reshape(len(self), self.m)


def archive_insert(archive: Archive, genotype: int, vector) -> tuple[Archive, bool]:
    """Offer a candidate to ``archive`` (updated in place and returned).

    Rejected when an entry has the same genotype or dominates the candidate.
    On acceptance, entries dominated by the candidate are dropped.
    """
    f = np.asarray(vector, dtype=float)
    g = int(genotype)
    if g in archive.genotypes:
        return archive, False
    if len(archive):
        A = archive.matrix()
        if np.any(np.all(A >= f, axis=1) & np.any(A > f, axis=1)):
            return archive, False
        keep = ~(np.all(f >= A, axis=1) & np.any(f > A, axis=1))
        archive.genotypes = [x for x, k in zip(archive.genotypes, keep) if k]
        archive.vectors = [x for x, k in zip(archive.vectors, keep) if k]
        archive.visited = [x for x, k in zip(archive.visited, keep) if k]
    archive.genotypes.append(g)
    archive.vectors.append(f)
    archive.visited.append(False)
    return archive, True


@dataclass(frozen=True, eq=False)
class RunResult:
    algorithm: str
    run_seed: int
    genotypes: np.ndarray
    vectors: np.ndarray
    evaluations_used: int

    @property
    def archive_size(self) -> int:
        return int(self.genotypes.shape[0])


def run_seed(master_seed: int, instance_seed: int, algorithm: str, run_index: int) -> int:
    return mix64(master_seed, instance_seed, ALGORITHM_IDS[algorithm], run_index)


def _table(instance: RhoMnkInstance, table: np.ndarray | None) -> np.ndarray:
    if table is None:
        table = evaluate_all(instance)
    return np.ascontiguousarray(table, dtype=np.float64)


def run_pls(instance: RhoMnkInstance, seed: int, table: np.ndarray | None = None,
            max_evals: int = PLS_MAX_EVALS) -> RunResult:
    """Pareto local search from one uniform random genotype.

    Repeatedly explores the full 1-bit-flip neighbourhood of the unvisited
    archive entry with the smallest genotype integer, until every archive
    entry is visited (a Pareto local optimum set).
    """
    T = _table(instance, table)
    g0 = int(philox(seed).integers(0, 1 << instance.n))
    genos, evals = _kernels.pls_loop(T, instance.n, g0, max_evals)
    return RunResult("pls", seed, genos, T[genos], int(evals))


def run_gsemo(instance: RhoMnkInstance, seed: int, budget: int = 10_000,
              table: np.ndarray | None = None) -> RunResult:
    """Global SEMO: uniform parent from the archive, independent bit flips with rate 1/n."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    T = _table(instance, table)
    rng = philox(seed)
    g0 = int(rng.integers(0, 1 << instance.n))
    sel_u = rng.random(budget - 1)
    mut_u = rng.random((budget - 1, instance.n))
    genos, evals = _kernels.gsemo_loop(T, instance.n, g0, sel_u, mut_u, budget)
    return RunResult("gsemo", seed, genos, T[genos], int(evals))


def _bits_to_int(bits: np.ndarray) -> np.ndarray:
    weights = np.left_shift(np.int64(1), np.arange(bits.shape[1], dtype=np.int64))
    return bits.astype(np.int64) @ weights


def _survivors(F: np.ndarray, size: int) -> np.ndarray:
    """Indices of the ``size`` rows kept by rank then crowding distance."""
    rank = nondominated_sort(F)
    crowd = _kernels.crowding_distances(F, rank)
    # lexsort: last key primary; stable for remaining ties
    order = np.lexsort((np.arange(F.shape[0]), -crowd, rank))
    return np.sort(order[:size])


def run_nsga2(instance: RhoMnkInstance, seed: int, budget: int = 10_000, pop: int = 100,
              crossover_rate: float = 0.9, table: np.ndarray | None = None,
              return_log: bool = False):
    """Generational NSGA-II on bit strings.

    Binary tournament on (rank, crowding), uniform crossover, bit-flip
    mutation with rate 1/n, elitist (mu + lambda) replacement. Only whole
    generations are run, so ``evaluations_used <= budget``. The returned
    archive is the non-dominated filter of every evaluated genotype.
    """
    if pop < 2 or pop % 2:
        raise ValueError(f"population size must be even and >= 2, got {pop}")
    if budget < pop:
        raise ValueError("budget must cover the initial population")
    T = _table(instance, table)
    n = instance.n
    rng = philox(seed)

    P = rng.integers(0, 2, size=(pop, n), dtype=np.int8)
    G = _bits_to_int(P)
    F = T[G]
    evals = pop
    log = [G]

    rank = nondominated_sort(F)
    crowd = _kernels.crowding_distances(F, rank)
    while evals + pop <= budget:
        a = rng.integers(0, pop, size=pop)
        b = rng.integers(0, pop, size=pop)
        a_wins = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowd[a] >= crowd[b]))
        parents = P[np.where(a_wins, a, b)]
        p1, p2 = parents[0::2], parents[1::2]
        do_cx = rng.random(pop // 2) < crossover_rate
        swap = (rng.random((pop // 2, n)) < 0.5) & do_cx[:, None]
        c1 = np.where(swap, p2, p1)
        c2 = np.where(swap, p1, p2)
        Q = np.empty_like(P)
        Q[0::2], Q[1::2] = c1, c2
        Q ^= (rng.random((pop, n)) < 1.0 / n).astype(np.int8)
        GQ = _bits_to_int(Q)
        FQ = T[GQ]
        evals += pop
        log.append(GQ)

        RP = np.concatenate([P, Q])
        RG = np.concatenate([G, GQ])
        RF = np.concatenate([F, FQ])
        keep = _survivors(RF, pop)
        P, G, F = RP[keep], RG[keep], RF[keep]
        rank = nondominated_sort(F)
        crowd = _kernels.crowding_distances(F, rank)

    stream = np.concatenate(log)
    archive = nondominated_filter(stream, T[stream])
    result = RunResult("nsga2", seed, archive, T[archive], int(evals))
    if return_log:
        return result, stream
    return result


def nondominated_filter(genotypes: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Distinct genotypes of a stream that no streamed vector dominates, in first-seen order."""
    _, first = np.unique(genotypes, return_index=True)
    first = np.sort(first)
    g = genotypes[first]
    keep = nondominated_sort(vectors[first]) == 0
    return g[keep]


def run_algorithm(name: str, instance: RhoMnkInstance, seed: int, table: np.ndarray | None = None,
                  budget: int = 10_000, pop: int = 100) -> RunResult:
    if name == "pls":
        return run_pls(instance, seed, table=table)
    if name == "gsemo":
        return run_gsemo(instance, seed, budget=budget, table=table)
    if name == "nsga2":
        return run_nsga2(instance, seed, budget=budget, pop=pop, table=table)
    raise ValueError(f"unknown algorithm {name!r}")

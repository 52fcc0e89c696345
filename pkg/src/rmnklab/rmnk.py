"""rho-MNK landscape instances: definition, generation, evaluation and JSON I/O.

A genotype ``x`` of length ``n`` is handled either as a 0/1 string, where
character ``j`` is ``x_j``, or as an integer whose bit ``j`` is ``x_j``.
The string "10" is therefore the integer 1.

Each variable ``j`` owns a contribution table per objective, indexed by the
bit pattern ``(x_j, x_links[j][0], ..., x_links[j][k-1])`` read as a binary
number with ``x_j`` as the most significant bit.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.special import ndtr

from .seeding import MASK64, philox

log = logging.getLogger(__name__)

GenotypeLike = Union[str, Sequence[int], np.ndarray]

# substream tags
_LINKS = 0
_CONTRIB = 1


@dataclass(frozen=True)
class ProblemSpec:
    """Benchmark parameters of one instance.

    Attributes:
        rho: Correlation between the objectives' contribution values.
        m: Number of objectives.
        n: Number of binary variables.
        k: Number of epistatic links per variable.
        instance_seed: 64-bit seed of the instance.
    """

    rho: float
    m: int
    n: int
    k: int
    instance_seed: int = 0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.k < self.n:
            raise ValueError(f"k must satisfy 0 <= k < n, got k={self.k}, n={self.n}")
        if not self.rho > -1.0 / (self.m - 1):
            raise ValueError(f"rho must exceed -1/(m-1) = {-1.0 / (self.m - 1):.6g}, got {self.rho}")
        if self.rho >= 1.0:
            raise ValueError(f"rho must be < 1, got {self.rho}")
        if not 0 <= self.instance_seed <= MASK64:
            raise ValueError("instance_seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {"rho": self.rho, "m": self.m, "n": self.n, "k": self.k, "instance_seed": self.instance_seed}


@dataclass(frozen=True, eq=False)
class RhoMnkInstance:
    """An immutable rho-MNK instance.

    Attributes:
        spec: Generating parameters.
        links: ``(n, k)`` int array, row ``j`` holds the sorted co-variables of ``x_j``.
        tables: ``(m, n, 2**(k+1))`` contribution values in [0, 1].
    """

    spec: ProblemSpec
    links: np.ndarray
    tables: np.ndarray

    def __post_init__(self):
        n, k, m = self.spec.n, self.spec.k, self.spec.m
        links = np.asarray(self.links, dtype=np.int64).reshape(n, k)
        tables = np.asarray(self.tables, dtype=np.float64)
        if tables.shape != (m, n, 1 << (k + 1)):
            raise ValueError(f"tables must have shape {(m, n, 1 << (k + 1))}, got {tables.shape}")
        for j in range(n):
            row = links[j]
            if len(set(row.tolist())) != k or j in row or np.any(row < 0) or np.any(row >= n):
                raise ValueError(f"invalid links for variable {j}: {row.tolist()}")
        if np.any(tables < 0.0) or np.any(tables > 1.0):
            raise ValueError("contribution values must lie in [0, 1]")
        links.setflags(write=False)
        tables.setflags(write=False)
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "tables", tables)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def k(self) -> int:
        return self.spec.k

    def same_as(self, other: "RhoMnkInstance") -> bool:
        return (
            self.spec == other.spec
            and np.array_equal(self.links, other.links)
            and np.array_equal(self.tables, other.tables)
        )


def copula_correlation(rho: float) -> float:
    """Normal-scale correlation giving uniform-scale Pearson correlation ``rho``."""
    return 2.0 * math.sin(math.pi * rho / 6.0)


def _equicorrelation_cholesky(m: int, rho: float) -> np.ndarray:
    r = copula_correlation(rho)
    bound = -1.0 / (m - 1)
    if r <= bound + 1e-9:
        # rho is admissible but its normal-scale image is not positive definite
        log.warning("copula correlation %.6g for rho=%.6g clipped to the m=%d bound", r, rho, m)
        r = bound + 1e-9
    corr = np.full((m, m), r)
    np.fill_diagonal(corr, 1.0)
    return np.linalg.cholesky(corr)


def generate_instance(spec: ProblemSpec) -> RhoMnkInstance:
    """Draw links and correlated contribution tables for ``spec``.

    Links of variable ``j`` come from substream ``(seed, 0, j)``; the
    independent normals of objective ``i`` and variable ``j`` come from
    substream ``(seed, 1, i, j)``. Normals are correlated across objectives
    through the Cholesky factor of an equicorrelation matrix and mapped to
    uniforms with the standard normal CDF.
    """
    n, k, m = spec.n, spec.k, spec.m
    links = np.empty((n, k), dtype=np.int64)
    for j in range(n):
        others = np.array([v for v in range(n) if v != j], dtype=np.int64)
        pick = philox(spec.instance_seed, _LINKS, j).choice(others, size=k, replace=False)
        links[j] = np.sort(pick)

    size = 1 << (k + 1)
    eps = np.empty((m, n, size))
    for i in range(m):
        for j in range(n):
            eps[i, j] = philox(spec.instance_seed, _CONTRIB, i, j).standard_normal(size)
    chol = _equicorrelation_cholesky(m, spec.rho)
    z = np.einsum("ab,bjc->ajc", chol, eps)
    tables = np.clip(ndtr(z), 0.0, 1.0)
    return RhoMnkInstance(spec=spec, links=links, tables=tables)


# -- genotypes ---------------------------------------------------------------


def genotype_to_int(x: GenotypeLike) -> int:
    if isinstance(x, str):
        if any(c not in "01" for c in x):
            raise ValueError(f"genotype string must be 0/1, got {x!r}")
        return sum(1 << j for j, c in enumerate(x) if c == "1")
    return sum(int(b) << j for j, b in enumerate(x))


def int_to_genotype(g: int, n: int) -> str:
    return "".join("1" if (g >> j) & 1 else "0" for j in range(n))


def hamming_neighbors(x: str) -> list[str]:
    """All 1-bit-flip neighbours of ``x``, ordered by flipped position."""
    out = []
    for j, c in enumerate(x):
        out.append(x[:j] + ("0" if c == "1" else "1") + x[j + 1 :])
    return out


def neighbor_ints(g: int, n: int) -> list[int]:
    return [g ^ (1 << j) for j in range(n)]


# -- evaluation --------------------------------------------------------------


def _patterns(instance: RhoMnkInstance, genotypes: np.ndarray) -> np.ndarray:
    """``(len(genotypes), n)`` table indices for integer genotypes."""
    k = instance.k
    g = genotypes.astype(np.int64)
    idx = np.empty((g.shape[0], instance.n), dtype=np.int64)
    for j in range(instance.n):
        p = ((g >> j) & 1) << k
        for t, v in enumerate(instance.links[j]):
            p |= ((g >> int(v)) & 1) << (k - 1 - t)
        idx[:, j] = p
    return idx


def evaluate_ints(instance: RhoMnkInstance, genotypes: np.ndarray) -> np.ndarray:
    """Objective vectors of integer genotypes, shape ``(len(genotypes), m)``."""
    idx = _patterns(instance, np.asarray(genotypes))
    cols = np.arange(instance.n)
    out = np.empty((idx.shape[0], instance.m))
    for i in range(instance.m):
        out[:, i] = instance.tables[i][cols, idx].mean(axis=1)
    # guard against ulp overshoot of the mean
    return np.clip(out, 0.0, 1.0)


def evaluate(instance: RhoMnkInstance, x: GenotypeLike) -> np.ndarray:
    """Objective vector ``f(x)``: per objective, the mean contribution over variables."""
    if len(x) != instance.n:
        raise ValueError(f"genotype length {len(x)} does not match n={instance.n}")
    g = genotype_to_int(x)
    return evaluate_ints(instance, np.array([g]))[0]


def evaluate_all(instance: RhoMnkInstance) -> np.ndarray:
    """``(2**n, m)`` matrix of every genotype's objective vector."""
    return evaluate_ints(instance, np.arange(1 << instance.n, dtype=np.int64))


# -- persistence -------------------------------------------------------------


def instance_to_dict(instance: RhoMnkInstance) -> dict:
    return {
        "spec": instance.spec.to_dict(),
        "links": instance.links.tolist(),
        "tables": instance.tables.tolist(),
    }


def instance_from_dict(doc: dict) -> RhoMnkInstance:
    s = doc["spec"]
    spec = ProblemSpec(rho=float(s["rho"]), m=int(s["m"]), n=int(s["n"]), k=int(s["k"]),
                       instance_seed=int(s["instance_seed"]))
    links = np.array(doc["links"], dtype=np.int64).reshape(spec.n, spec.k)
    return RhoMnkInstance(spec=spec, links=links, tables=np.array(doc["tables"], dtype=np.float64))


def save_instance(instance: RhoMnkInstance, path: str | Path) -> None:
    # float repr is the shortest string that round-trips exactly
    Path(path).write_text(json.dumps(instance_to_dict(instance), separators=(",", ":")) + "\n")


def load_instance(path: str | Path) -> RhoMnkInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))

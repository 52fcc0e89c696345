"""Resolution, exact hypervolume (2 and 3 objectives) and per-instance aggregation."""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def resolution(archive_genotypes: Iterable[int], pareto_set: Iterable[int]) -> float:
    """Fraction of the Pareto set present in the archive."""
    target = {int(g) for g in pareto_set}
    if not target:
        raise ValueError("Pareto set is empty")
    found = target.intersection(int(g) for g in archive_genotypes)
    return len(found) / len(target)


def _hv2d(P: np.ndarray) -> float:
    order = np.lexsort((-P[:, 1], -P[:, 0]))
    x = P[order, 0]
    y = P[order, 1]
    top = np.maximum.accumulate(y)
    prev = np.concatenate([[0.0], top[:-1]])
    return float(np.sum(x * (top - prev)))


class _Staircase:
    """Union area of origin-anchored boxes; points kept with x ascending, y descending."""

    def __init__(self):
        self.xs: list[float] = []
        self.ys: list[float] = []
        self.area = 0.0

    def add(self, px: float, py: float) -> None:
        xs, ys = self.xs, self.ys
        pos = bisect.bisect_left(xs, px)
        if pos < len(xs) and ys[pos] >= py:
            return
        hi = pos
        while hi < len(xs) and xs[hi] == px:
            hi += 1
        lo = pos
        while lo > 0 and ys[lo - 1] <= py:
            lo -= 1
        left_x = xs[lo - 1] if lo > 0 else 0.0
        old = 0.0
        x_prev = left_x
        for i in range(lo, hi):
            old += (xs[i] - x_prev) * ys[i]
            x_prev = xs[i]
        new = (px - left_x) * py
        if hi < len(xs):
            old += (xs[hi] - x_prev) * ys[hi]
            new += (xs[hi] - px) * ys[hi]
        del xs[lo:hi]
        del ys[lo:hi]
        xs.insert(lo, px)
        ys.insert(lo, py)
        self.area += new - old


def _hv3d(P: np.ndarray) -> float:
    order = np.lexsort((-P[:, 1], -P[:, 0], -P[:, 2]))
    P = P[order]
    stair = _Staircase()
    vol = 0.0
    N = P.shape[0]
    for i in range(N):
        stair.add(float(P[i, 0]), float(P[i, 1]))
        z_next = P[i + 1, 2] if i + 1 < N else 0.0
        vol += stair.area * (P[i, 2] - z_next)
    return float(vol)


def hypervolume(points, ref=None) -> float:
    """Volume dominated by ``points`` above ``ref`` (maximization, default origin).

    Two objectives use a sorted sweep; three objectives sweep the third axis
    and maintain the 2D union area incrementally.
    """
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        return 0.0
    if P.ndim != 2:
        raise ValueError("points must be an (N, m) array")
    m = P.shape[1]
    if m not in (2, 3):
        raise ValueError(f"hypervolume supports m in {{2, 3}}, got m={m}")
    r = np.zeros(m) if ref is None else np.asarray(ref, dtype=float)
    if r.shape != (m,):
        raise ValueError("reference point has the wrong dimension")
    if np.any(P < r):
        raise ValueError("every point must weakly dominate the reference point")
    P = P - r
    return _hv2d(P) if m == 2 else _hv3d(P)


def relative_hypervolume(archive_vectors, exact_front, ref=None) -> float:
    front = np.asarray(exact_front, dtype=float)
    if front.size == 0:
        raise ValueError("exact front is empty")
    A = np.asarray(archive_vectors, dtype=float)
    if A.size == 0:
        return 0.0
    hv_front = hypervolume(front, ref)
    if hv_front == 0.0:
        if np.array_equal(np.unique(A, axis=0), np.unique(front, axis=0)):
            return 1.0
        raise ValueError("exact front has zero hypervolume")
    return hypervolume(A, ref) / hv_front


@dataclass(frozen=True)
class PerformanceRecord:
    instance_id: str
    algorithm: str
    reso_mean: float
    reso_std: float
    hv_mean: float
    hv_std: float
    run_count: int


def aggregate(instance_id: str, algorithm: str, reso: Sequence[float], hv: Sequence[float]) -> PerformanceRecord:
    """Mean and population standard deviation of per-run scores."""
    reso = np.asarray(reso, dtype=float)
    hv = np.asarray(hv, dtype=float)
    if reso.size == 0 or reso.shape != hv.shape:
        raise ValueError("need the same positive number of reso and hv scores")
    return PerformanceRecord(instance_id, algorithm, float(reso.mean()), float(reso.std()),
                             float(hv.mean()), float(hv.std()), int(reso.size))


def score_run(result, landscape, front: np.ndarray | None = None) -> tuple[float, float]:
    """(resolution, relative hypervolume) of a run on an enumerated landscape."""
    if front is None:
        front = landscape.pareto_front()
    reso = resolution(result.genotypes, landscape.pareto_set())
    hv = relative_hypervolume(result.vectors, front)
    # a subset cannot exceed the front; clamp ulp-level overshoot
    return reso, min(hv, 1.0)


PERFORMANCE_HEADER = ["instance_id", "algorithm", "reso_mean", "reso_std", "hv_mean", "hv_std", "runs"]


def write_performance(records: Iterable[PerformanceRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PERFORMANCE_HEADER)
        for r in records:
            w.writerow([r.instance_id, r.algorithm, repr(r.reso_mean), repr(r.reso_std),
                        repr(r.hv_mean), repr(r.hv_std), r.run_count])


def read_performance(path: str | Path) -> list[PerformanceRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != PERFORMANCE_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [PerformanceRecord(r["instance_id"], r["algorithm"], float(r["reso_mean"]), float(r["reso_std"]),
                                  float(r["hv_mean"]), float(r["hv_std"]), int(r["runs"])) for r in reader]

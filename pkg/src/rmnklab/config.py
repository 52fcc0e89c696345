"""Experiment configuration (a single JSON document)."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

WORKERS_ENV = "RMNK_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass
class Grid:
    n: list[int] = field(default_factory=lambda: [16])
    k: list[int] = field(default_factory=lambda: [1, 2, 4])
    m: list[int] = field(default_factory=lambda: [2, 3])
    rho: list[float] = field(default_factory=lambda: [-0.4, 0.0, 0.4])

    def combos(self) -> list[tuple[float, int, int, int]]:
        """(rho, m, n, k) in a fixed order: rho, then m, then n, then k."""
        return [(r, m, n, k) for r in self.rho for m in self.m for n in self.n for k in self.k]


@dataclass
class ExperimentConfig:
    grid: Grid = field(default_factory=Grid)
    instances_per_combo: int = 10
    runs_per_algorithm: int = 30
    gsemo_budget: int = 10_000
    nsga2_budget: int = 10_000
    nsga2_pop: int = 100
    metric: str = "reso"
    master_seed: int = 20250101
    output_dir: str = "rmnk_out"
    workers: int = 1
    search_trials: int = 0
    sffs: bool = True
    sffs_trees: int | None = 64
    explain_all_rows: bool = False
    include_benchmark_params: bool = False
    render_svg: bool = True

    def validate(self) -> "ExperimentConfig":
        g = self.grid
        for name in ("n", "k", "m", "rho"):
            if not getattr(g, name):
                raise ConfigError(f"grid.{name} must not be empty")
        for rho, m, n, k in g.combos():
            if m < 2 or n < 1 or not 0 <= k < n:
                raise ConfigError(f"invalid combination m={m}, n={n}, k={k}")
            if not rho > -1.0 / (m - 1) or rho >= 1:
                raise ConfigError(f"rho={rho} not admissible for m={m}")
            if n > 24:
                raise ConfigError(f"n={n} too large for exhaustive enumeration")
        for name in ("instances_per_combo", "runs_per_algorithm", "gsemo_budget", "nsga2_budget", "nsga2_pop", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.nsga2_pop % 2:
            raise ConfigError("nsga2_pop must be even")
        if self.nsga2_budget < self.nsga2_pop:
            raise ConfigError("nsga2_budget must cover the initial population")
        if self.metric not in ("reso", "hv"):
            raise ConfigError("metric must be 'reso' or 'hv'")
        if self.master_seed < 0 or self.master_seed >= 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        return self

    def resolved_workers(self) -> int:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
        return self.workers

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        grid = doc.pop("grid", None) or {}
        try:
            cfg = cls(grid=Grid(**grid), **doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        return cfg.validate()


def load_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    for key, value in (overrides or {}).items():
        if value is not None:
            doc[key] = value
    return ExperimentConfig.from_dict(doc)

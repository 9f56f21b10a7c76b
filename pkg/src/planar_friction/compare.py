"""Model comparison against a fine distributed oracle over a velocity profile."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bench import run_bench
from .contact_geometry import SurfaceSpec, discretize
from .distributed import FrictionParams
from .integrators import FixedStep
from .limit_surface import precompute
from .metrics import BoxStats, abs_error_stats, nrmse
from .simulation import VelocityProfile, make_friction, simulate_kinematic

COMPONENTS = ("fx", "fy", "tau")


@dataclass
class ComparisonRow:
    label: str
    model: str
    n: int
    n_ls: int | None
    nrmse: np.ndarray
    stats: list[BoxStats]
    throughput: float | None = None


@dataclass
class ComparisonReport:
    oracle_n: int
    rows: list[ComparisonRow] = field(default_factory=list)

    def row(self, label: str) -> ComparisonRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def to_csv(self, path) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "model", "n", "n_ls", "component", "nrmse",
                        "whisker_lo", "q1", "median", "q3", "whisker_hi", "throughput_its"])
            for r in self.rows:
                for j, comp in enumerate(COMPONENTS):
                    w.writerow([
                        r.label, r.model, r.n, "" if r.n_ls is None else r.n_ls, comp,
                        f"{r.nrmse[j]:.17g}", *(f"{v:.17g}" for v in r.stats[j].as_tuple()),
                        "" if r.throughput is None else f"{r.throughput:.6g}",
                    ])
        tmp.replace(path)


def oracle_trace(surface: SurfaceSpec, params: FrictionParams, profile: VelocityProfile,
                 n_oracle: int = 101, dt: float = 1e-5, f_N: float = 1.0):
    grid = discretize(surface, n_oracle, f_N)
    return simulate_kinematic(profile, make_friction("distributed", grid, params), FixedStep(dt), f_N)


def run_comparison(
    surface: SurfaceSpec,
    params: FrictionParams,
    profile: VelocityProfile,
    n: int = 21,
    n_oracle: int = 101,
    candidates=("reduced_ls", "reduced_ellipsoid"),
    candidate_n=(),
    candidate_n_ls=(),
    n_ls: int = 20,
    dt: float = 1e-5,
    f_N: float = 1.0,
    throughput: bool = False,
    seed: int = 0,
) -> ComparisonReport:
    """Per-component nRMSE and absolute-error box statistics against the oracle.

    ``candidates`` are evaluated on an ``n x n`` grid; ``candidate_n`` adds
    distributed runs at other resolutions and ``candidate_n_ls`` reduced-LS
    runs with other table resolutions.
    """
    oracle = oracle_trace(surface, params, profile, n_oracle, dt, f_N).wrench
    report = ComparisonReport(n_oracle)
    grid = discretize(surface, n, f_N)

    def add(label, kind, g, table=None, table_n_ls=None):
        fr = make_friction(kind, g, params, table=table, n_ls=n_ls)
        wr = simulate_kinematic(profile, fr, FixedStep(dt), f_N).wrench
        tp = None
        if throughput:
            rows = run_bench((g.n,), surface, params, warmup=1000, iterations=10_000, repeats=3,
                             n_ls=n_ls, seed=seed, models=(kind,))
            tp = rows[0].mean_its
        report.rows.append(ComparisonRow(label, kind, g.n, table_n_ls, nrmse(wr, oracle),
                                         abs_error_stats(wr, oracle), tp))

    for kind in candidates:
        add(f"{kind}@{n}", kind, grid, table_n_ls=n_ls if kind == "reduced_ls" else None)
    for k in candidate_n:
        add(f"distributed@{k}", "distributed", discretize(surface, k, f_N))
    for k in candidate_n_ls:
        add(f"reduced_ls@{n}/ls{k}", "reduced_ls", grid, precompute(grid, k), k)
    return report

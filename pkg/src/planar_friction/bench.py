"""Throughput of one friction evaluation (bristle rate plus wrench).

Both models run their compiled kernels in a tight loop over a fixed set of
twists sampled from the canonical profile, so the numbers compare the models
and not the Python call overhead.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .contact_geometry import SurfaceSpec, circle, discretize
from .distributed import DistributedModel, FrictionParams, P1
from .limit_surface import precompute
from .simulation import canonical_profile


@dataclass(frozen=True)
class BenchRow:
    model: str
    n: int
    n_states: int
    mean_its: float
    std_its: float


def _twists(n_samples: int, seed: int) -> np.ndarray:
    prof = canonical_profile()
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0.0, prof.duration, n_samples))
    return np.ascontiguousarray([prof(s) for s in t])


def _time(fn, warmup: int, iterations: int, repeats: int) -> tuple[float, float]:
    fn(warmup)
    rates = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(iterations)
        rates.append(iterations / (time.perf_counter() - t0))
    return float(np.mean(rates)), float(np.std(rates))


def run_bench(
    sizes=(5, 11, 21, 33),
    surface: SurfaceSpec | None = None,
    params: FrictionParams = P1,
    warmup: int = 10_000,
    iterations: int = 100_000,
    repeats: int = 10,
    n_ls: int = 20,
    seed: int = 0,
    models=("distributed", "reduced_ls"),
) -> list[BenchRow]:
    """Mean iterations per second for each model and grid size."""
    surface = surface or circle(0.01)
    prm = K.pack_params(params)
    twists = _twists(1000, seed)
    rng = np.random.default_rng(seed + 1)
    rows = []
    for n in sizes:
        grid = discretize(surface, n)
        if "distributed" in models:
            m = DistributedModel(grid, params)
            z = rng.normal(scale=1e-7, size=(2, m.n_cells))

            def dist(k, m=m, z=z):
                K.bench_distributed(m.x, m.y, m.w, z, twists, prm, 1.0, k)

            mean, std = _time(dist, warmup, iterations, repeats)
            rows.append(BenchRow("distributed", n, m.n_states, mean, std))
        for kind in ("reduced_ls", "reduced_ellipsoid"):
            if kind not in models:
                continue
            mode = K.MODE_LS if kind == "reduced_ls" else K.MODE_ELLIPSOID
            corners = precompute(grid, n_ls).corners if mode == K.MODE_LS else np.zeros((1, 4, 3))
            nl = n_ls if mode == K.MODE_LS else 1
            z3 = rng.normal(scale=1e-7, size=3)

            def red(k, corners=corners, nl=nl, z3=z3, grid=grid, mode=mode):
                K.bench_reduced(z3, twists, grid.r, grid.u, mode, corners, nl, prm, 1.0, k)

            mean, std = _time(red, warmup, iterations, repeats)
            rows.append(BenchRow(kind, n, 3, mean, std))
    return rows

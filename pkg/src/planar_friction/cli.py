"""Command-line front end: ``precompute``, ``simulate``, ``compare`` and ``bench``.

Every command reads one TOML run configuration.  Exit codes are 0 on
success, 2 for configuration problems (including a missing table cache) and
3 when the numerics fail.  The thread cap comes from ``--threads`` or the
``PLANAR_FRICTION_THREADS`` environment variable and is applied before any
numerical library is imported.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

THREADS_ENV = "PLANAR_FRICTION_THREADS"
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class CacheMissingError(Exception):
    pass


def _apply_thread_cap(threads: int | None) -> None:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if not env:
            return
        try:
            threads = int(env)
        except ValueError:
            raise SystemExit(f"error: {THREADS_ENV} must be an integer, got {env!r}")
    if threads < 1:
        raise SystemExit("error: thread count must be at least 1")
    for var in _THREAD_VARS:
        os.environ[var] = str(threads)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planar-friction", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "precompute": "sample the limit surface and write the table cache",
        "simulate": "run the configured scenario and write a trace CSV",
        "compare": "compare models against a fine distributed oracle",
        "bench": "measure friction evaluations per second",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", help="output directory (overrides [output] dir)")
        p.add_argument("--threads", type=int, help=f"thread cap (default: ${THREADS_ENV})")
        p.add_argument("--seed", type=int, help="random seed (overrides config)")
    return parser


# -- helpers -----------------------------------------------------------------

def _out_dir(cfg, args) -> Path:
    base = Path(args.out) if args.out else Path(cfg.output.dir)
    if not base.is_absolute() and not args.out and cfg.base_dir:
        base = Path(cfg.base_dir) / base
    base.mkdir(parents=True, exist_ok=True)
    return base


def _stem(cfg, default: str) -> str:
    return cfg.output.name or default


def _cache_path(cfg, out: Path) -> Path:
    if cfg.output.cache:
        p = Path(cfg.output.cache)
        if not p.is_absolute():
            p = out / p
        return p
    return out / f"{_stem(cfg, cfg.surface.shape)}_ls{cfg.n_ls}.pfls"


def _write_rows(path: Path, header, rows) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    tmp.replace(path)


def _load_table(cfg, out: Path):
    from .limit_surface import LimitSurfaceTable

    path = _cache_path(cfg, out)
    if not path.exists():
        raise CacheMissingError(
            f"limit surface cache {path} not found; run "
            f"'planar-friction precompute --config <same config>' first"
        )
    table = LimitSurfaceTable.load(path)
    if table.n_ls != cfg.n_ls:
        raise CacheMissingError(
            f"cache {path} has n_ls={table.n_ls} but the config asks for {cfg.n_ls}; "
            f"rerun 'planar-friction precompute'"
        )
    return table


# -- commands ----------------------------------------------------------------

def cmd_precompute(cfg, args) -> int:
    import numpy as np

    from .contact_geometry import discretize
    from .limit_surface import (
        SkewIterationError,
        check_positive_definite,
        find_zero_tangential_cor,
        precompute,
        skew_variables,
    )

    out = _out_dir(cfg, args)
    spec = cfg.surface_spec()
    t0 = time.perf_counter()
    grid = discretize(spec, cfg.n, cfg.scenario.f_N)
    table = precompute(grid, cfg.n_ls, cfg.params())
    path = _cache_path(cfg, out)
    table.save(path)
    elapsed = time.perf_counter() - t0

    print(f"cache      {path} ({table.n_cells} cells, n_ls={table.n_ls})")
    print(f"r          {grid.r:.9g} m")
    print(f"u          {grid.u:.9g}")
    try:
        p_s = find_zero_tangential_cor(grid, cfg.params())
        print(f"p_s        ({p_s[0] + 0.0:.6e}, {p_s[1] + 0.0:.6e}) m")
        s_x, s_y = skew_variables(p_s, grid.r, grid.r, (0.0, 0.0, 1.0))
    except SkewIterationError as exc:
        print(f"warning: {exc}; eigenvalue check uses s = 0", file=sys.stderr)
        s_x = s_y = 0.0
    eig = check_positive_definite(grid.r, grid.r, s_x, s_y)
    lam = ", ".join(f"{v:.6g}" for v in eig.eigenvalues)
    status = "positive" if eig.positive else "NOT positive"
    print(f"eigen      [{lam}] {status} (s_x={s_x + 0.0:.3e}, s_y={s_y + 0.0:.3e})")
    print(f"wall time  {elapsed:.3f} s")
    if not np.all(np.isfinite(table.corners)):
        print("error: table contains non-finite values", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _run_scenario(cfg, out: Path):
    from .contact_geometry import discretize
    from .simulation import (
        canonical_profile,
        drift_normal,
        drift_tangential,
        gripper_scenario,
        make_friction,
        simulate_kinematic,
    )

    sc = cfg.scenario
    params = cfg.params()
    integrator = cfg.integrator_config()
    ep = cfg.friction.elasto_plastic
    if sc.id == "kinematic":
        spec = cfg.surface_spec()
        grid = discretize(spec, cfg.n, sc.f_N)
        table = _load_table(cfg, out) if cfg.model == "reduced_ls" else None
        profile = canonical_profile(sc.short_profile)
        if sc.duration is not None:
            profile = profile.time_scaled(profile.duration / sc.duration)
        friction = make_friction(cfg.model, grid, params, table=table, n_ls=cfg.n_ls)
        return simulate_kinematic(profile, friction, integrator, sc.f_N, sc.output_dt)
    if sc.id == "drift_tangential":
        kw = {"frequency": sc.frequency} if sc.frequency else {}
        res = drift_tangential(cfg.model, ep, params, sc.duration or 5.0, n=cfg.n,
                               integrator=integrator, output_dt=sc.output_dt, **kw)
        res.trace.meta["net_drift"] = res.net_drift
        return res.trace
    if sc.id == "drift_normal":
        kw = {"frequency": sc.frequency} if sc.frequency else {}
        return drift_normal(cfg.model, ep, params, sc.duration or 5.0, n=cfg.n,
                            integrator=integrator, output_dt=sc.output_dt, **kw)
    # gripper
    spec = cfg.surface_spec()
    table = None
    if cfg.model == "reduced_ls" and not spec.force_dependent:
        table = _load_table(cfg, out)
    return gripper_scenario(sc.case, spec, sc.normal_profile, cfg.model, params,
                            sc.duration or 2.0, cfg.n, cfg.n_ls, integrator,
                            output_dt=sc.output_dt, table=table)


def cmd_simulate(cfg, args) -> int:
    import numpy as np

    out = _out_dir(cfg, args)
    trace = _run_scenario(cfg, out)
    if not (np.all(np.isfinite(trace.wrench)) and np.all(np.isfinite(trace.pose))):
        print("error: simulation produced non-finite values", file=sys.stderr)
        return EXIT_NUMERICAL
    path = out / f"{_stem(cfg, cfg.scenario.id)}.csv"
    trace.to_csv(path)
    x, y, th = trace.pose[-1]
    peak = np.max(np.abs(trace.wrench), axis=0)
    print(f"trace      {path} ({len(trace.t)} rows)")
    print(f"final pose x={x:.6e} m, y={y:.6e} m, theta={th:.6e} rad")
    print(f"peak       |fx|={peak[0]:.6g} N, |fy|={peak[1]:.6g} N, |tau|={peak[2]:.6g} N m")
    if "net_drift" in trace.meta:
        print(f"net drift  {trace.meta['net_drift']:.6e} m")
    return EXIT_OK


def cmd_compare(cfg, args) -> int:
    from .compare import COMPONENTS, run_comparison
    from .simulation import canonical_profile

    out = _out_dir(cfg, args)
    c = cfg.compare
    report = run_comparison(
        cfg.surface_spec(), cfg.params(), canonical_profile(cfg.scenario.short_profile),
        n=cfg.n, n_oracle=c.n_oracle, candidates=c.candidates, candidate_n=c.candidate_n,
        candidate_n_ls=c.candidate_n_ls, n_ls=cfg.n_ls, dt=c.dt, f_N=cfg.scenario.f_N,
        throughput=c.throughput, seed=cfg.seed,
    )
    path = out / f"{_stem(cfg, 'compare')}.csv"
    report.to_csv(path)
    print(f"report     {path} (oracle n={report.oracle_n})")
    for row in report.rows:
        parts = "  ".join(f"{comp}: nrmse={row.nrmse[j]:.3e} median={row.stats[j].median:.3e}"
                          for j, comp in enumerate(COMPONENTS))
        print(f"{row.label:24s} {parts}")
    return EXIT_OK


def cmd_bench(cfg, args) -> int:
    from .bench import run_bench

    out = _out_dir(cfg, args)
    b = cfg.bench
    rows = run_bench(b.sizes, cfg.surface_spec(), cfg.params(), b.warmup, b.iterations,
                     b.repeats, cfg.n_ls, cfg.seed)
    path = out / f"{_stem(cfg, 'bench')}.csv"
    dist = {r.n: r.mean_its for r in rows if r.model == "distributed"}
    table = []
    for r in rows:
        ratio = r.mean_its / dist[r.n] if r.model != "distributed" and r.n in dist else 1.0
        table.append([r.model, r.n, r.n_states, f"{r.mean_its:.6g}", f"{r.std_its:.6g}", f"{ratio:.4g}"])
    _write_rows(path, ["model", "n", "n_states", "mean_its", "std_its", "speedup"], table)
    print(f"table      {path}")
    print(f"{'model':12s} {'n':>4s} {'states':>7s} {'it/s':>12s} {'speedup':>8s}")
    for m, n, ns, mean, _, ratio in table:
        print(f"{m:12s} {n:4d} {ns:7d} {float(mean):12.4g} {float(ratio):8.3g}")
    return EXIT_OK


COMMANDS = {
    "precompute": cmd_precompute,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _apply_thread_cap(args.threads)
    except SystemExit as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG

    from .config import ConfigError, RunConfig
    from .integrators import IntegrationError
    from .limit_surface import SkewIterationError

    try:
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, CacheMissingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, SkewIterationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        # bad surfaces, unreadable files and out-of-range scenario settings
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

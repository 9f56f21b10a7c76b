"""Kinematic and rigid-body simulations with either friction model.

Friction models are wrapped in small adapters exposing ``zero_state``,
``rate_and_wrench(z, twist, f_N)`` and ``set_normal_force(f_N)``; the latter
refreshes force-dependent surfaces (r, u and, when the pressure shape
changes, the limit-surface table).

Traces hold one row per output step.  For kinematic runs the pose columns
are the time integral of the imposed twist; for rigid-body runs they are the
CoM pose in the world frame.  Wrench columns always hold the friction acting
on the moving body (summed over contacts, world frame for rigid bodies).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import _kernels as K
from .contact_geometry import PressureGrid, SurfaceSpec, circle, discretize
from .distributed import DistributedModel, FrictionParams, P0, P1
from .integrators import Adaptive, FixedStep, IntegrationError, IntegratorConfig, integrate
from .limit_surface import LimitSurfaceTable, precompute
from .reduced import ReducedModel, ScalingMatrices

GRAVITY = 9.81
TRACE_HEADER = ("t", "x", "y", "theta", "vx", "vy", "omega", "fx", "fy", "tau", "fn")
MODEL_KINDS = ("distributed", "reduced_ls", "reduced_ellipsoid")
# relative change of f_N above which a shape-changing surface gets a new table
RECOMPUTE_THRESHOLD = 1e-3


# -- data --------------------------------------------------------------------

def _read_csv_columns(name: str) -> np.ndarray:
    with resources.files("planar_friction").joinpath("data").joinpath(name).open("r") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in row] for row in rows[1:]])


@dataclass(frozen=True)
class VelocityProfile:
    """Piecewise-linear twist ``(v_x, v_y, omega)`` at the CoP."""

    t: np.ndarray
    twist: np.ndarray  # (k, 3)

    @property
    def duration(self) -> float:
        return float(self.t[-1])

    def __call__(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, self.t, self.twist[:, j]) for j in range(3)])

    def time_scaled(self, factor: float) -> "VelocityProfile":
        """Same velocity waypoints visited ``factor`` times faster."""
        return VelocityProfile(self.t / factor, self.twist.copy())

    @classmethod
    def constant(cls, twist, duration: float) -> "VelocityProfile":
        tw = np.asarray(twist, dtype=float)
        return cls(np.array([0.0, duration]), np.stack([tw, tw]))


def canonical_profile(short: bool = False) -> VelocityProfile:
    """The shipped 5 s test profile, or its 1 s time-compressed copy."""
    data = _read_csv_columns("canonical_profile.csv")
    prof = VelocityProfile(data[:, 0].copy(), np.ascontiguousarray(data[:, 1:4]))
    return prof.time_scaled(5.0) if short else prof


def normal_force_profile(which: int) -> Callable[[float], float]:
    if which not in (1, 2):
        raise ValueError("normal force profile must be 1 or 2")
    data = _read_csv_columns(f"normal_force_{which}.csv")
    t, fn = data[:, 0].copy(), data[:, 1].copy()
    return lambda s: float(np.interp(s, t, fn))


# -- traces ------------------------------------------------------------------

@dataclass
class Trace:
    t: np.ndarray
    pose: np.ndarray  # (k, 3)
    twist: np.ndarray  # (k, 3)
    wrench: np.ndarray  # (k, 3)
    fn: np.ndarray
    meta: dict = field(default_factory=dict)

    def rows(self) -> np.ndarray:
        return np.column_stack([self.t, self.pose, self.twist, self.wrench, self.fn])

    def to_csv(self, path) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", newline="") as fh:
            fh.write(",".join(TRACE_HEADER) + "\n")
            for row in self.rows():
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        tmp.replace(path)

    @classmethod
    def from_csv(cls, path) -> "Trace":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != TRACE_HEADER:
                raise ValueError("not a trace file")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(data[:, 0], data[:, 1:4], data[:, 4:7], data[:, 7:10], data[:, 10])


# -- friction adapters -------------------------------------------------------

class DistributedFriction:
    """Compiled distributed model.  Force-dependent surfaces keep their cells
    and only re-weight them, so the bristle state survives f_N changes."""

    kind = "distributed"

    def __init__(self, grid: PressureGrid, params: FrictionParams, spec: SurfaceSpec | None = None):
        self.spec = spec
        self.params = params
        self._prm = K.pack_params(params)
        self._set_grid(grid)
        self.f_N = grid.f_N

    def _set_grid(self, grid):
        self.grid = grid
        self.model = DistributedModel(grid, self.params)
        self.x, self.y, self.w = self.model.x, self.model.y, self.model.w
        self.n_states = 2 * self.model.n_cells

    def zero_state(self) -> np.ndarray:
        return np.zeros(self.n_states)

    def set_normal_force(self, f_N: float) -> None:
        if f_N == self.f_N:
            return
        self.f_N = f_N
        if self.spec is not None and self.spec.force_dependent and f_N > 0:
            new = discretize(self.spec, self.grid.n, f_N)
            if new.extent != self.grid.extent:
                raise ValueError("force-dependent surfaces need a fixed extent")
            # cells that leave the contact keep their state but carry no weight
            w = np.ascontiguousarray(new.p_n[self.model._mask] * new.cell_area)
            if not np.isclose(w.sum(), 1.0):
                raise ValueError("contact grew beyond the initial support; use a larger initial f_N")
            self.w = w

    def rate_and_wrench(self, z, twist, f_N: float):
        z2 = z.reshape(2, -1)
        dz = np.empty_like(z2)
        out = np.empty(3)
        K.dist_rate_wrench(self.x, self.y, self.w, z2, float(twist[0]), float(twist[1]), float(twist[2]),
                           self._prm, float(f_N), dz, out)
        return dz.reshape(-1), out


class ReducedFriction:
    kind = "reduced"

    def __init__(
        self,
        grid: PressureGrid,
        params: FrictionParams,
        mode: str = "ls",
        table: LimitSurfaceTable | None = None,
        spec: SurfaceSpec | None = None,
        n_ls: int = 20,
    ):
        self.spec = spec
        self.n = grid.n
        self.n_ls = n_ls
        self.params = params
        if mode == "ls" and table is None:
            table = precompute(grid, n_ls)
        self.model = ReducedModel(ScalingMatrices.from_grid(grid), params, mode, table)
        self.n_states = 3
        self.f_N = grid.f_N
        self._table_f_N = grid.f_N
        self.recomputes = 0

    @property
    def kind(self):
        return "reduced_" + self.model.mode

    def zero_state(self) -> np.ndarray:
        return np.zeros(3)

    def set_normal_force(self, f_N: float) -> None:
        if f_N == self.f_N or self.spec is None or not self.spec.force_dependent or f_N <= 0:
            self.f_N = f_N
            return
        self.f_N = f_N
        grid = discretize(self.spec, self.n, f_N)
        self.model.set_scaling(ScalingMatrices.from_grid(grid))
        shape_changes = self.spec.k_per_newton is not None
        if (
            self.model.mode == "ls"
            and shape_changes
            and abs(f_N - self._table_f_N) > RECOMPUTE_THRESHOLD * self._table_f_N
        ):
            self.model.set_table(precompute(grid, self.n_ls))
            self._table_f_N = f_N
            self.recomputes += 1

    def rate_and_wrench(self, z, twist, f_N: float):
        return self.model.rate_and_wrench(z, twist, f_N)


def make_friction(
    kind: str,
    grid: PressureGrid,
    params: FrictionParams,
    table: LimitSurfaceTable | None = None,
    spec: SurfaceSpec | None = None,
    n_ls: int = 20,
):
    if kind == "distributed":
        return DistributedFriction(grid, params, spec)
    if kind == "reduced_ls":
        return ReducedFriction(grid, params, "ls", table, spec, n_ls)
    if kind == "reduced_ellipsoid":
        return ReducedFriction(grid, params, "ellipsoid", None, spec, n_ls)
    raise ValueError(f"unknown model {kind!r}; expected one of {', '.join(MODEL_KINDS)}")


# -- kinematic runs ----------------------------------------------------------

DIVERGENCE_FACTOR = 1e3

def _integrated_pose(t, twist):
    pose = np.zeros_like(twist)
    if len(t) > 1:
        inc = 0.5 * (twist[1:] + twist[:-1]) * np.diff(t)[:, None]
        pose[1:] = np.cumsum(inc, axis=0)
    return pose


def simulate_kinematic(
    profile: VelocityProfile,
    friction,
    integrator: IntegratorConfig = FixedStep(1e-5),
    f_N: float = 1.0,
    output_dt: float = 1e-3,
) -> Trace:
    """Integrate the bristle state along an imposed twist and record wrenches."""
    duration = profile.duration
    if isinstance(integrator, FixedStep):
        n_steps = int(round(duration / integrator.dt))
        if not math.isclose(n_steps * integrator.dt, duration, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError("profile duration must be a whole number of steps")
        every = max(1, int(round(output_dt / integrator.dt)))
        kt = np.ascontiguousarray(profile.t, dtype=float)
        kv = np.ascontiguousarray(profile.twist, dtype=float)
        if isinstance(friction, DistributedFriction):
            z = np.zeros((2, friction.model.n_cells))
            wr = K.dist_kinematic_rk4(friction.x, friction.y, friction.w, friction._prm, float(f_N),
                                      kt, kv, integrator.dt, n_steps, every, z)
        else:
            m = friction.model
            z = np.zeros(3)
            wr = K.reduced_kinematic_rk4(m.r, m.u, m._mode, m._corners, m._n_ls, m._prm, float(f_N),
                                         kt, kv, integrator.dt, n_steps, every, z)
        if not np.all(np.isfinite(wr)):
            bad = int(np.argmax(~np.all(np.isfinite(wr), axis=1)))
            raise IntegrationError("non-finite wrench; stiffness limit exceeded, reduce dt",
                                   bad * every * integrator.dt)
        # a stable run keeps |z| <= mu_s / sigma0; an unstable one may still be finite
        z_bound = DIVERGENCE_FACTOR * friction.params.mu_s / friction.params.sigma0
        if not np.all(np.abs(z) <= z_bound):
            raise IntegrationError("bristle state diverged; stiffness limit exceeded, reduce dt", duration)
        t = np.arange(wr.shape[0]) * every * integrator.dt
    else:
        t = np.arange(0.0, duration + 0.5 * output_dt, output_dt)
        t[-1] = min(t[-1], duration)

        def rhs(s, z):
            return friction.rate_and_wrench(z, profile(s), f_N)[0]

        sol = integrate(rhs, friction.zero_state(), (0.0, duration), integrator, t_eval=t)
        wr = np.array([friction.rate_and_wrench(z, profile(s), f_N)[1] for s, z in zip(sol.t, sol.y)])
    tw = np.array([profile(s) for s in t])
    return Trace(t, _integrated_pose(t, tw), tw, wr, np.full(t.shape, float(f_N)),
                 meta={"model": friction.kind})


# -- rigid bodies ------------------------------------------------------------

@dataclass
class RigidBody2D:
    mass: float
    inertia: float
    pose: tuple[float, float, float] = (0.0, 0.0, 0.0)
    twist: tuple[float, float, float] = (0.0, 0.0, 0.0)
    com_offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.mass > 0 and self.inertia > 0):
            raise ValueError("mass and inertia must be positive")

    @classmethod
    def disc(cls, mass: float = 1.0, radius: float = 0.05) -> "RigidBody2D":
        return cls(mass, 0.5 * mass * radius**2)

    @classmethod
    def box(cls, mass: float, width: float, height: float, com_offset=(0.0, 0.0)) -> "RigidBody2D":
        return cls(mass, mass * (width**2 + height**2) / 12.0, com_offset=tuple(com_offset))


@dataclass
class LoadProfile:
    """Normal force and external wrench (world frame, at the CoM) over time.

    With ``update_rate`` set, the normal force is held constant between
    samples taken at that rate; otherwise it is evaluated continuously.
    """

    normal_force: Callable[[float], float]
    external: Callable[[float], tuple[float, float, float]] = lambda t: (0.0, 0.0, 0.0)
    update_rate: float | None = None

    def f_N(self, t: float) -> float:
        if self.update_rate:
            t = math.floor(t * self.update_rate + 1e-9) / self.update_rate
        f = float(self.normal_force(t))
        if f < 0:
            raise ValueError(f"negative normal force at t = {t:.6g} s")
        return f


def _rot(th):
    c, s = math.cos(th), math.sin(th)
    return c, s


def simulate_dynamic(
    body: RigidBody2D,
    loads: LoadProfile,
    friction,
    integrator: IntegratorConfig = Adaptive(),
    duration: float = 1.0,
    output_dt: float = 1e-3,
    contact_frame: str = "body",
    n_contacts: int = 1,
) -> Trace:
    """Planar rigid body driven by external loads and contact friction.

    ``contact_frame="body"``: the pressure patch travels with the body (an
    object sliding on a table).  ``"world"``: the patch is fixed in the world
    and the body slides across it (an object held by gripper pads).  The CoP
    sits at ``-com_offset`` from the CoM in the body frame at t = 0.
    """
    if not duration > 0:
        raise ValueError("duration must be positive")
    if contact_frame not in ("body", "world"):
        raise ValueError("contact_frame must be 'body' or 'world'")
    m, inertia = body.mass, body.inertia
    cb = -np.asarray(body.com_offset, dtype=float)
    c0, s0 = _rot(body.pose[2])
    cop_world = np.array([body.pose[0] + c0 * cb[0] - s0 * cb[1], body.pose[1] + s0 * cb[0] + c0 * cb[1]])

    def contact(y):
        px, py, th, vx, vy, om = y[:6]
        c, s = _rot(th)
        if contact_frame == "body":
            rx, ry = c * cb[0] - s * cb[1], s * cb[0] + c * cb[1]
        else:
            rx, ry = cop_world[0] - px, cop_world[1] - py
        # velocity of the body's material point at the CoP, world frame
        ux, uy = vx - om * ry, vy + om * rx
        if contact_frame == "body":
            return (c * ux + s * uy, -s * ux + c * uy, om), (c, s), (rx, ry)
        return (ux, uy, om), (1.0, 0.0), (rx, ry)

    def evaluate(t, y, f_N):
        twist, (c, s), (rx, ry) = contact(y)
        dz, w = friction.rate_and_wrench(y[6:], twist, f_N)
        fx = n_contacts * (c * w[0] - s * w[1])
        fy = n_contacts * (s * w[0] + c * w[1])
        tau = n_contacts * w[2]
        return dz, (fx, fy, tau), (rx, ry)

    def rhs_factory(f_N):
        def rhs(t, y):
            dz, (fx, fy, tau), (rx, ry) = evaluate(t, y, f_N if f_N is not None else loads.f_N(t))
            ex, ey, et = loads.external(t)
            out = np.empty_like(y)
            out[0], out[1], out[2] = y[3], y[4], y[5]
            out[3] = (ex + fx) / m
            out[4] = (ey + fy) / m
            out[5] = (et + tau + rx * fy - ry * fx) / inertia
            out[6:] = dz
            return out

        return rhs

    y = np.concatenate([np.array(body.pose, float), np.array(body.twist, float), friction.zero_state()])
    # bristle deflections are ~mu_s / sigma0, far below the pose tolerance
    z_scale = friction.params.mu_s / friction.params.sigma0
    abs_scale = np.concatenate([np.ones(6), np.full(y.size - 6, z_scale)])
    n_out = int(round(duration / output_dt))
    t_out = np.linspace(0.0, duration, n_out + 1)
    if loads.update_rate:
        n_seg = int(math.ceil(duration * loads.update_rate - 1e-9))
        edges = np.minimum(np.arange(n_seg + 1) / loads.update_rate, duration)
    else:
        edges = np.array([0.0, duration])

    # continuous loads scale the wrench directly; the contact shape only
    # follows f_N at the sampled updates
    held = bool(loads.update_rate)
    ts, ys, fns = [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        f_N = loads.f_N(a)
        friction.set_normal_force(f_N)
        last = b == edges[-1]
        sel = (t_out >= a - 1e-12) & ((t_out < b - 1e-12) | last)
        t_eval = t_out[sel]
        if not np.any(sel):
            t_eval = None
        sol = integrate(rhs_factory(f_N if held else None), y, (a, b), integrator,
                        t_eval=None if t_eval is None else np.union1d(t_eval, [b]), abs_scale=abs_scale)
        for s, row in zip(sol.t, sol.y):
            if t_eval is not None and np.any(np.isclose(s, t_eval, atol=1e-12, rtol=0)):
                ts.append(s)
                ys.append(row)
                fns.append(f_N if held else loads.f_N(s))
        y = sol.y[-1].copy()
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state", float(b))

    ts = np.array(ts)
    ys = np.array(ys)
    fns = np.array(fns)
    wrench = np.array([evaluate(s, row, f)[1] for s, row, f in zip(ts, ys, fns)])
    return Trace(ts, ys[:, 0:3], ys[:, 3:6], wrench, fns, meta={"model": friction.kind})


# -- scenarios ---------------------------------------------------------------

def breakaway(grid: PressureGrid, params: FrictionParams, f_N: float, speed: float = 1e-9):
    """Force and torque needed to initiate slip, from the steady state at tiny speed."""
    model = DistributedModel(grid, params)
    f = model.steady_state((speed, 0.0, 0.0), f_N)
    tau = model.steady_state((0.0, 0.0, speed / grid.r), f_N)
    return float(math.hypot(f[0], f[1])), float(abs(tau[2]))


@dataclass
class DriftResult:
    trace: Trace
    net_drift: float
    f_breakaway: float
    tau_breakaway: float
    elastic_scale: float


# drift is a few nm per period, below the default pose tolerance
DRIFT_INTEGRATOR = Adaptive(abs_tol=1e-10, rel_tol=1e-8)


def disc_setup(params: FrictionParams, n: int = 21, mass: float = 1.0, radius: float = 0.05):
    body = RigidBody2D.disc(mass, radius)
    grid = discretize(circle(radius), n, mass * GRAVITY)
    return body, grid


def drift_tangential(
    model: str = "distributed",
    elasto_plastic: bool = False,
    params: FrictionParams = P1,
    duration: float = 5.0,
    frequency: float = 5.0,
    n: int = 21,
    integrator: IntegratorConfig = DRIFT_INTEGRATOR,
    output_dt: float = 1e-3,
) -> DriftResult:
    """Disc under a sub-breakaway tangential load, oscillating from t = 1 s,
    plus an oscillating torque from t = 3 s.

    Net drift is the CoM displacement between t = 1 s and the last instant
    with the same load phase, so reversible elastic motion cancels.
    """
    params = params.with_elasto_plastic(elasto_plastic)
    body, grid = disc_setup(params, n)
    f_N = body.mass * GRAVITY
    f_ba, tau_ba = breakaway(grid, params, f_N)
    f0 = f_ba / 12.0
    t0 = tau_ba / 6.0
    w = 2.0 * math.pi * frequency

    def external(t):
        fx = f0 + (f0 * math.sin(w * (t - 1.0)) if t >= 1.0 else 0.0)
        tau = t0 * math.sin(w * (t - 3.0)) if t >= 3.0 else 0.0
        return fx, 0.0, tau

    friction = make_friction(model, grid, params)
    loads = LoadProfile(lambda t: f_N, external)
    trace = simulate_dynamic(body, loads, friction, integrator, duration, output_dt)
    net = _net_drift(trace, 1.0, frequency)
    z_ba = params.s_ba * params.mu_s / params.sigma0
    trace.meta.update(scenario="drift_tangential", elasto_plastic=elasto_plastic)
    return DriftResult(trace, net, f_ba, tau_ba, z_ba)


def _net_drift(trace: Trace, t_start: float, frequency: float) -> float:
    period = 1.0 / frequency
    k = math.floor((trace.t[-1] - t_start) / period + 1e-9)
    t_end = t_start + k * period
    i0 = int(np.argmin(np.abs(trace.t - t_start)))
    i1 = int(np.argmin(np.abs(trace.t - t_end)))
    return float(np.hypot(*(trace.pose[i1, :2] - trace.pose[i0, :2])))


def drift_normal(
    model: str = "distributed",
    elasto_plastic: bool = False,
    params: FrictionParams = P1,
    duration: float = 5.0,
    frequency: float = 2.0,
    amplitude: float = 1.0,
    f_x: float = 1.0,
    f_tau: float = 0.03,
    n: int = 21,
    integrator: IntegratorConfig = DRIFT_INTEGRATOR,
    output_dt: float = 1e-3,
) -> Trace:
    """Disc with constant tangential load and torque under an oscillating normal load."""
    params = params.with_elasto_plastic(elasto_plastic)
    body, grid = disc_setup(params, n)
    base = body.mass * GRAVITY
    w = 2.0 * math.pi * frequency
    loads = LoadProfile(lambda t: base + amplitude * math.sin(w * t), lambda t: (f_x, 0.0, f_tau))
    friction = make_friction(model, grid, params)
    trace = simulate_dynamic(body, loads, friction, integrator, duration, output_dt)
    trace.meta.update(scenario="drift_normal", elasto_plastic=elasto_plastic, frequency=frequency)
    return trace


GRIPPER_OBJECT = {"mass": 0.2, "width": 0.15, "height": 0.08}
GRIPPER_COM_OFFSET = {1: 0.025, 2: 0.002}


def gripper_scenario(
    case: int,
    surface: SurfaceSpec,
    normal_profile: int | Callable[[float], float],
    model: str = "reduced_ls",
    params: FrictionParams = P1,
    duration: float = 2.0,
    n: int = 21,
    n_ls: int = 20,
    integrator: IntegratorConfig = Adaptive(),
    update_rate: float = 100.0,
    output_dt: float = 1e-3,
    table: LimitSurfaceTable | None = None,
) -> Trace:
    """Object hanging between two gripper pads in the vertical plane.

    Gravity acts along -y; the CoM sits ``GRIPPER_COM_OFFSET[case]`` from the
    contact centre along +x.  Each pad carries the commanded normal force.
    """
    if case not in GRIPPER_COM_OFFSET:
        raise ValueError("gripper case must be 1 or 2")
    fn = normal_force_profile(normal_profile) if isinstance(normal_profile, int) else normal_profile
    obj = GRIPPER_OBJECT
    body = RigidBody2D.box(obj["mass"], obj["width"], obj["height"], (GRIPPER_COM_OFFSET[case], 0.0))
    body.pose = (GRIPPER_COM_OFFSET[case], 0.0, 0.0)
    f_grid = float(fn(0.0))
    if surface.force_dependent:
        # one fixed grid big enough for the largest force in the run
        ts = np.linspace(0.0, duration, int(duration * update_rate) + 1)
        f_grid = max(fn(t) for t in ts)
        surface = replace(surface, extent=1.05 * surface.bounding_extent(f_grid))
    grid = discretize(surface, n, f_grid)
    friction = make_friction(model, grid, params, table=table, spec=surface, n_ls=n_ls)
    gravity = obj["mass"] * GRAVITY
    loads = LoadProfile(fn, lambda t: (0.0, -gravity, 0.0), update_rate)
    trace = simulate_dynamic(body, loads, friction, integrator, duration, output_dt,
                             contact_frame="world", n_contacts=2)
    trace.meta.update(scenario="gripper", case=case, surface=surface.shape)
    return trace

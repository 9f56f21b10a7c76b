"""ODE integration: classical fixed-step RK4 or scipy's adaptive RK45."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t = {t:.6g} s")
        self.t = t


@dataclass(frozen=True)
class FixedStep:
    dt: float = 1e-5

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class Adaptive:
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    max_step: float = 1e-3

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.max_step > 0):
            raise ValueError("integrator tolerances and max_step must be positive")


IntegratorConfig = FixedStep | Adaptive


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray  # (len(t), n)
    n_rhs: int


def rk4_step(rhs, t, y, dt):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_span: tuple[float, float],
    config: IntegratorConfig,
    t_eval=None,
    abs_scale=None,
) -> Solution:
    """Integrate ``y' = rhs(t, y)`` over ``t_span``.

    Fixed-step mode reports the state at every step that lands on ``t_eval``
    (default: every step); the last step is shortened to hit ``t_span[1]``.
    Adaptive mode uses dense output at ``t_eval`` (default: the accepted
    steps).  ``abs_scale`` multiplies ``abs_tol`` per component, for states
    of very different magnitude.
    """
    t0, t1 = map(float, t_span)
    y0 = np.asarray(y0, dtype=float)
    if t1 < t0:
        raise ValueError("t_span must be increasing")
    calls = 0

    def f(t, y):
        nonlocal calls
        calls += 1
        return rhs(t, y)

    if isinstance(config, FixedStep):
        n = max(1, int(round((t1 - t0) / config.dt)))
        times = t0 + config.dt * np.arange(n + 1)
        times[-1] = t1
        if t_eval is None:
            keep = np.ones(n + 1, dtype=bool)
        else:
            keep = np.zeros(n + 1, dtype=bool)
            idx = np.searchsorted(times, np.asarray(t_eval, dtype=float) - 0.5 * config.dt)
            keep[np.clip(idx, 0, n)] = True
        ts, ys = [], []
        y = y0.copy()
        for i in range(n + 1):
            if keep[i]:
                ts.append(times[i])
                ys.append(y.copy())
            if i == n:
                break
            with np.errstate(over="ignore", invalid="ignore"):
                y = rk4_step(f, times[i], y, times[i + 1] - times[i])
            if not np.all(np.isfinite(y)):
                raise IntegrationError("non-finite state; stiffness limit exceeded, reduce dt", times[i + 1])
        return Solution(np.array(ts), np.array(ys), calls)

    if t1 == t0:
        return Solution(np.array([t0]), y0[None, :].copy(), 0)
    res = solve_ivp(
        f,
        (t0, t1),
        y0,
        method="RK45",
        t_eval=None if t_eval is None else np.asarray(t_eval, dtype=float),
        rtol=config.rel_tol,
        atol=config.abs_tol if abs_scale is None else config.abs_tol * np.asarray(abs_scale, dtype=float),
        max_step=config.max_step,
    )
    if not res.success:
        t_fail = float(res.t[-1]) if res.t.size else t0
        raise IntegrationError(
            f"adaptive step failed ({res.message}); stiffness limit reached: "
            "increase damping, lower sigma1 or use fixed-step mode",
            t_fail,
        )
    return Solution(res.t, res.y.T, calls)

"""Reduced 3-bristle planar friction model.

The twist is scaled to ``v_S = S v`` with ``S = diag(1, 1, r)``.  Without a
limit surface the steady bristle direction is the ellipsoid ``S v_S/|v_S|``;
with one, it is ``-S h(r, v)`` from a pre-computed table.  Forces follow

    f = -(sigma0 z + sigma1 z_dot + sigma2 U v) f_N,    U = diag(1, 1, u).

The functions here are the straightforward numpy formulation.
:class:`ReducedModel` runs the same equations through compiled kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .contact_geometry import PressureGrid
from .distributed import FrictionParams, FrictionWrench, elasto_plastic_beta, g_curve
from .limit_surface import LimitSurfaceTable, lookup

MODES = ("ellipsoid", "ls")


@dataclass(frozen=True)
class ScalingMatrices:
    r: float
    u: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not self.u >= 0:
            raise ValueError("u must be non-negative")

    @classmethod
    def from_grid(cls, grid: PressureGrid) -> "ScalingMatrices":
        return cls(grid.r, grid.u)

    @property
    def S(self) -> np.ndarray:
        return np.diag([1.0, 1.0, self.r])

    @property
    def U(self) -> np.ndarray:
        return np.diag([1.0, 1.0, self.u])

    def scale(self, twist) -> np.ndarray:
        vx, vy, om = twist
        return np.array([vx, vy, self.r * om], dtype=float)


def _r_of(S) -> float:
    if isinstance(S, ScalingMatrices):
        return S.r
    S = np.asarray(S, dtype=float)
    return float(S[2, 2]) if S.ndim == 2 else float(S)


def ellipsoid_wrench(twist, r: float, mu_c: float, f_N: float) -> FrictionWrench:
    """Coulomb wrench on the ellipsoid ``diag(1, 1, r)``, opposing the motion."""
    if f_N < 0:
        raise ValueError("normal force must be non-negative")
    vs = np.array([twist[0], twist[1], r * twist[2]], dtype=float)
    n = math.sqrt(vs @ vs)
    if n == 0.0:
        return FrictionWrench(0.0, 0.0, 0.0)
    f = -mu_c * f_N * np.array([vs[0], vs[1], r * vs[2]]) / n
    return FrictionWrench(*map(float, f))


def reduced_rate_ellipsoid(state, twist, S, params: FrictionParams) -> np.ndarray:
    r = _r_of(S)
    z = np.asarray(state, dtype=float)
    vs = np.array([twist[0], twist[1], r * twist[2]], dtype=float)
    n = math.sqrt(vs @ vs)
    if n == 0.0:
        return np.zeros(3)
    g = float(g_curve(n, params))
    direction = np.array([vs[0], vs[1], r * vs[2]]) / n
    k = params.sigma0 / g
    if params.elasto_plastic:
        zs = z / np.array([1.0, 1.0, r])
        k *= elasto_plastic_beta(zs, vs / n, g / params.sigma0, params.s_ba)
    return (direction - z * k) * n


def _ls_rate(z, twist, r, table, params, elasto_plastic):
    z = np.asarray(z, dtype=float)
    vs = np.array([twist[0], twist[1], r * twist[2]], dtype=float)
    n = math.sqrt(vs @ vs)
    if n == 0.0:
        return np.zeros(3)
    h = lookup(table, r, twist)
    g = float(g_curve(n, params))
    sh = np.array([h[0], h[1], r * h[2]])
    k = params.sigma0 / g
    if elasto_plastic:
        zs = z / np.array([1.0, 1.0, r])
        z_max = float(np.linalg.norm(h)) * g / params.sigma0
        k *= elasto_plastic_beta(zs, -h * n, z_max, params.s_ba)
    return -(sh + z * k) * n


def reduced_rate_ls(state, twist, S, table: LimitSurfaceTable, r: float, params: FrictionParams) -> np.ndarray:
    """Bristle rate following the pre-computed limit surface (LuGre form)."""
    return _ls_rate(state, twist, r, table, params, False)


def reduced_rate_ls_elastoplastic(
    state, twist, S, table: LimitSurfaceTable, r: float, params: FrictionParams
) -> np.ndarray:
    """Elasto-Plastic variant; plasticity is judged on ``S^-1 z`` against ``-h``."""
    return _ls_rate(state, twist, r, table, params, True)


def reduced_wrench(state, rate, twist, U, params: FrictionParams, f_N: float) -> FrictionWrench:
    if f_N < 0:
        raise ValueError("normal force must be non-negative")
    u = U.u if isinstance(U, ScalingMatrices) else float(np.asarray(U)[2, 2])
    z = np.asarray(state, dtype=float)
    dz = np.asarray(rate, dtype=float)
    v = np.array([twist[0], twist[1], u * twist[2]], dtype=float)
    f = -(params.sigma0 * z + params.sigma1 * dz + params.sigma2 * v) * f_N
    return FrictionWrench(*map(float, f))


class ReducedModel:
    """Compiled 3-state model for one surface.

    ``mode`` is ``"ellipsoid"`` or ``"ls"``; the latter needs a table.  The
    Elasto-Plastic variant is selected through ``params.elasto_plastic``.
    """

    n_states = 3

    def __init__(
        self,
        scaling: ScalingMatrices,
        params: FrictionParams,
        mode: str = "ls",
        table: LimitSurfaceTable | None = None,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown reduced model mode {mode!r}")
        if mode == "ls" and table is None:
            raise ValueError("the limit-surface mode needs a pre-computed table")
        self.params = params
        self.mode = mode
        self.table = table
        self._prm = K.pack_params(params)
        self._mode = K.MODE_LS if mode == "ls" else K.MODE_ELLIPSOID
        if table is None:
            self._corners = np.zeros((1, 4, 3))
            self._n_ls = 1
        else:
            self._corners = np.ascontiguousarray(table.corners)
            self._n_ls = table.n_ls
        self.set_scaling(scaling)
        self._dz = np.empty(3)
        self._f = np.empty(3)

    def set_scaling(self, scaling: ScalingMatrices) -> None:
        self.scaling = scaling
        self.r = float(scaling.r)
        self.u = float(scaling.u)

    def set_table(self, table: LimitSurfaceTable) -> None:
        self.table = table
        self._corners = np.ascontiguousarray(table.corners)
        self._n_ls = table.n_ls

    def zero_state(self) -> np.ndarray:
        return np.zeros(3)

    def rate(self, z, twist) -> np.ndarray:
        dz = np.empty(3)
        K.reduced_rate(
            np.asarray(z, dtype=float), float(twist[0]), float(twist[1]), float(twist[2]),
            self.r, self._mode, self._corners, self._n_ls, self._prm, dz,
        )
        return dz

    def wrench(self, z, dz, twist, f_N: float) -> np.ndarray:
        out = np.empty(3)
        K.reduced_wrench(
            np.asarray(z, dtype=float), np.asarray(dz, dtype=float),
            float(twist[0]), float(twist[1]), float(twist[2]), self.u, self._prm, float(f_N), out,
        )
        return out

    def rate_and_wrench(self, z, twist, f_N: float):
        dz = np.empty(3)
        out = np.empty(3)
        K.reduced_rate_wrench(
            np.asarray(z, dtype=float), float(twist[0]), float(twist[1]), float(twist[2]),
            self.r, self.u, self._mode, self._corners, self._n_ls, self._prm, float(f_N), dz, out,
        )
        return dz, out

    def steady_state(self, twist) -> np.ndarray:
        """Deflection at which the rate vanishes for a constant twist."""
        vs = self.scaling.scale(twist)
        n = math.sqrt(vs @ vs)
        if n == 0.0:
            return np.zeros(3)
        g = float(g_curve(n, self.params))
        if self.mode == "ellipsoid":
            d = np.array([vs[0], vs[1], self.r * vs[2]]) / n
        else:
            h = lookup(self.table, self.r, twist)
            d = -np.array([h[0], h[1], self.r * h[2]])
        return d * g / self.params.sigma0

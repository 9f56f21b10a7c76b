"""Distributed planar LuGre / Elasto-Plastic friction over a pressure grid.

Every active cell of a :class:`~planar_friction.contact_geometry.PressureGrid`
carries a 2D bristle.  The cell forces are summed into a wrench at the CoP.

Public functions take bristle fields shaped ``(n, n, 2)``.  The
:class:`DistributedModel` works on a compact ``(2, m)`` state holding only the
``m`` cells with positive pressure, which is what the simulators integrate.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .contact_geometry import PressureGrid

# below this |omega| the CoR is treated as being at infinity
OMEGA_EPS = 1e-12


@dataclass(frozen=True)
class FrictionParams:
    sigma0: float = 1e6
    sigma1: float = 8e2
    sigma2: float = 0.2
    mu_c: float = 1.0
    mu_s: float = 1.2
    gamma: float = 2.0
    v_s: float = 1e-3
    s_ba: float = 0.9
    elasto_plastic: bool = False

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not (self.sigma1 >= 0 and self.sigma2 >= 0):
            raise ValueError("sigma1 and sigma2 must be non-negative")
        if not (self.mu_s >= self.mu_c > 0):
            raise ValueError("need mu_s >= mu_c > 0")
        if not (self.v_s > 0 and self.gamma > 0):
            raise ValueError("v_s and gamma must be positive")
        if not 0 <= self.s_ba < 1:
            raise ValueError("s_ba must lie in [0, 1)")

    @classmethod
    def preset(cls, name: str, **overrides) -> "FrictionParams":
        try:
            base = PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown friction preset {name!r}") from None
        return replace(base, **overrides)

    def with_elasto_plastic(self, flag: bool = True) -> "FrictionParams":
        return replace(self, elasto_plastic=flag)


PRESETS = {
    "p0": FrictionParams(sigma0=1e6, sigma1=8e2, sigma2=0.0, mu_c=1.0, mu_s=1.0, gamma=2.0, v_s=1e-3, s_ba=0.9),
    "p1": FrictionParams(sigma0=1e6, sigma1=8e2, sigma2=0.2, mu_c=1.0, mu_s=1.2, gamma=2.0, v_s=1e-3, s_ba=0.9),
}
P0 = PRESETS["p0"]
P1 = PRESETS["p1"]


class VelocityTwist(NamedTuple):
    vx: float
    vy: float
    omega: float


class FrictionWrench(NamedTuple):
    fx: float
    fy: float
    tau: float


def g_curve(speed, params: FrictionParams):
    """Stribeck steady-state friction coefficient."""
    s = np.abs(speed) / params.v_s
    if params.gamma == 2.0:
        e = s * s
    else:
        e = s**params.gamma
    return params.mu_c + (params.mu_s - params.mu_c) * np.exp(-e)


def cell_velocity(twist, cell_center):
    """Sliding velocity of a point under a planar rigid twist at the CoP."""
    vx, vy, om = twist
    x, y = cell_center[0], cell_center[1]
    return np.array([vx - om * y, vy + om * x])


def _alpha(zn, z_ba, z_max):
    return 0.5 * np.sin(np.pi * (zn - 0.5 * (z_max + z_ba)) / (z_max - z_ba)) + 0.5


def _beta_bar(zn, z_max, s_ba):
    z_max = np.asarray(z_max, dtype=float)
    z_ba = s_ba * z_max
    span = np.where(z_max > z_ba, z_max - z_ba, 1.0)
    mid = _alpha(zn, z_ba, z_ba + span)
    return np.where(zn <= z_ba, 0.0, np.where(zn >= z_max, 1.0, mid))


def elasto_plastic_beta(z, v, z_max, s_ba: float):
    """Plasticity factor for bristle deflection ``z`` moving with velocity ``v``.

    ``z`` and ``v`` are vectors along the last axis (any dimension).  The
    alignment ``(v_hat . z_hat + 1) / 2`` scales the norm-based transition
    between purely elastic (0) and fully plastic (1) behaviour.
    """
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    zn = np.linalg.norm(z, axis=-1)
    vn = np.linalg.norm(v, axis=-1)
    bar = _beta_bar(zn, z_max, s_ba)
    # bar == 0 whenever zn == 0, so the unit vectors below are never 0/0 where it matters
    zh = z / np.where(zn > 0, zn, 1.0)[..., None]
    vh = v / np.where(vn > 0, vn, 1.0)[..., None]
    eps = 0.5 * (np.sum(zh * vh, axis=-1) + 1.0)
    out = eps * bar
    return float(out) if out.ndim == 0 else out


class DistributedModel:
    """Per-cell planar bristle model on a fixed pressure grid."""

    def __init__(self, grid: PressureGrid, params: FrictionParams):
        self.grid = grid
        self.params = params
        self._mask = grid.active
        self.x = np.ascontiguousarray(grid.x[self._mask])
        self.y = np.ascontiguousarray(grid.y[self._mask])
        self.w = np.ascontiguousarray(grid.p_n[self._mask] * grid.cell_area)
        self._xw = self.x * self.w
        self._yw = self.y * self.w
        self.n_cells = int(self.x.size)

    @property
    def n_states(self) -> int:
        return 2 * self.n_cells

    def zero_state(self) -> np.ndarray:
        return np.zeros((2, self.n_cells))

    def to_field(self, z) -> np.ndarray:
        z = np.asarray(z).reshape(2, self.n_cells)
        field = np.zeros(self.grid.x.shape + (2,))
        field[self._mask, 0] = z[0]
        field[self._mask, 1] = z[1]
        return field

    def from_field(self, field) -> np.ndarray:
        field = np.asarray(field, dtype=float)
        return np.stack([field[..., 0][self._mask], field[..., 1][self._mask]])

    def velocity(self, twist):
        vx, vy, om = twist
        return vx - om * self.y, vy + om * self.x

    def relaxation(self, ux, uy):
        """Per-cell ``sigma0 |v| / g(|v|)`` and the speed."""
        speed = np.sqrt(ux * ux + uy * uy)
        return self.params.sigma0 * speed / g_curve(speed, self.params), speed

    def rate(self, z, twist) -> np.ndarray:
        ux, uy = self.velocity(twist)
        k, speed = self.relaxation(ux, uy)
        return self._rate(z, ux, uy, k, speed)

    def _rate(self, z, ux, uy, k, speed) -> np.ndarray:
        z = np.asarray(z).reshape(2, self.n_cells)
        if self.params.elasto_plastic:
            k = k * self._beta(z, ux, uy, speed)
        out = np.empty_like(z)
        out[0] = ux - z[0] * k
        out[1] = uy - z[1] * k
        return out

    def _beta(self, z, ux, uy, speed):
        p = self.params
        z_max = g_curve(speed, p) / p.sigma0
        zn = np.sqrt(z[0] * z[0] + z[1] * z[1])
        bar = _beta_bar(zn, z_max, p.s_ba)
        with np.errstate(invalid="ignore", divide="ignore"):
            cos = (z[0] * ux + z[1] * uy) / (zn * speed)
        cos = np.where((zn > 0) & (speed > 0), cos, 0.0)
        return 0.5 * (cos + 1.0) * bar

    def wrench(self, z, dz, twist, f_N: float | None = None) -> np.ndarray:
        p = self.params
        f_N = self.grid.f_N if f_N is None else f_N
        z = np.asarray(z).reshape(2, self.n_cells)
        dz = np.asarray(dz).reshape(2, self.n_cells)
        ux, uy = self.velocity(twist)
        lx = p.sigma0 * z[0] + p.sigma1 * dz[0] + p.sigma2 * ux
        ly = p.sigma0 * z[1] + p.sigma1 * dz[1] + p.sigma2 * uy
        return -f_N * np.array([lx @ self.w, ly @ self.w, ly @ self._xw - lx @ self._yw])

    def rate_and_wrench(self, z, twist, f_N: float | None = None):
        dz = self.rate(z, twist)
        return dz, self.wrench(z, dz, twist, f_N)

    def steady_state_deflection(self, twist) -> np.ndarray:
        ux, uy = self.velocity(twist)
        speed = np.sqrt(ux * ux + uy * uy)
        scale = np.divide(g_curve(speed, self.params), self.params.sigma0 * speed,
                          out=np.zeros_like(speed), where=speed > 0)
        return np.stack([ux * scale, uy * scale])

    def steady_state(self, twist, f_N: float | None = None) -> np.ndarray:
        return self.steady_state_batch(np.asarray(twist, dtype=float)[None, :], f_N)[0]

    def steady_state_batch(self, twists, f_N: float | None = None, chunk: int = 2_000_000) -> np.ndarray:
        """Steady-state wrenches for an array of twists shaped ``(k, 3)``."""
        p = self.params
        f_N = self.grid.f_N if f_N is None else f_N
        twists = np.atleast_2d(np.asarray(twists, dtype=float))
        out = np.empty_like(twists)
        step = max(1, chunk // max(self.n_cells, 1))
        for s in range(0, len(twists), step):
            t = twists[s:s + step]
            vx, vy, om = t[:, 0:1], t[:, 1:2], t[:, 2:3]
            ux = vx - om * self.y
            uy = vy + om * self.x
            speed = np.sqrt(ux * ux + uy * uy)
            scale = np.divide(g_curve(speed, p), speed, out=np.zeros_like(speed), where=speed > 0)
            scale += p.sigma2
            lx = ux * scale
            ly = uy * scale
            out[s:s + step, 0] = lx @ self.w
            out[s:s + step, 1] = ly @ self.w
            out[s:s + step, 2] = ly @ self._xw - lx @ self._yw
        return -f_N * out

    def bilinear_corners(self, twists):
        """Corner twists and weights for bilinear CoR interpolation.

        Returns ``(corner_twists (k, 4, 3), weights (k, 4))``.  Twists whose CoR
        is undefined or outside the grid get their own twist with weight 1.
        """
        twists = np.atleast_2d(np.asarray(twists, dtype=float))
        k = len(twists)
        h = self.grid.cell_size
        n = self.grid.n
        x0, y0 = self.grid.edges
        vx, vy, om = twists[:, 0], twists[:, 1], twists[:, 2]
        rot = np.abs(om) > OMEGA_EPS
        safe = np.where(rot, om, 1.0)
        cx = np.where(rot, -vy / safe, 0.0)
        cy = np.where(rot, vx / safe, 0.0)
        gx = (cx - x0) / h
        gy = (cy - y0) / h
        inside = rot & (gx >= 0) & (gx <= n) & (gy >= 0) & (gy <= n)
        jx = np.clip(np.floor(gx), 0, n - 1)
        jy = np.clip(np.floor(gy), 0, n - 1)
        dx = np.where(inside, gx - jx, 0.0)
        dy = np.where(inside, gy - jy, 0.0)

        corners = np.repeat(twists[:, None, :], 4, axis=1)
        offsets = ((0, 0), (0, 1), (1, 0), (1, 1))
        for c, (ox, oy) in enumerate(offsets):
            px = x0 + (jx + ox) * h
            py = y0 + (jy + oy) * h
            # rotation at the commanded omega about the corner point
            corners[inside, c, 0] = om[inside] * py[inside]
            corners[inside, c, 1] = -om[inside] * px[inside]
        weights = np.stack([(1 - dx) * (1 - dy), (1 - dx) * dy, dx * (1 - dy), dx * dy], axis=1)
        weights[~inside] = (1.0, 0.0, 0.0, 0.0)
        return corners, weights

    def steady_state_bilinear_batch(self, twists, f_N: float | None = None) -> np.ndarray:
        corners, weights = self.bilinear_corners(twists)
        k = len(corners)
        needed = weights.reshape(-1) != 0.0
        flat = corners.reshape(-1, 3)
        vals = np.zeros_like(flat)
        if needed.any():
            vals[needed] = self.steady_state_batch(flat[needed], f_N)
        return np.einsum("kc,kcj->kj", weights, vals.reshape(k, 4, 3))

    def steady_state_bilinear(self, twist, f_N: float | None = None) -> np.ndarray:
        return self.steady_state_bilinear_batch(np.asarray(twist, dtype=float)[None, :], f_N)[0]


# -- functional API on full (n, n, 2) fields --------------------------------

def bristle_rate(twist, field, grid: PressureGrid, params: FrictionParams) -> np.ndarray:
    """Deflection rate for every cell (zero-pressure cells included)."""
    field = np.asarray(field, dtype=float)
    if field.shape != grid.x.shape + (2,):
        raise ValueError("bristle field does not match the grid")
    vx, vy, om = twist
    ux = vx - om * grid.y
    uy = vy + om * grid.x
    speed = np.sqrt(ux * ux + uy * uy)
    k = params.sigma0 * speed / g_curve(speed, params)
    if params.elasto_plastic:
        z_max = g_curve(speed, params) / params.sigma0
        k = k * elasto_plastic_beta(field, np.stack([ux, uy], axis=-1), z_max, params.s_ba)
    return np.stack([ux - field[..., 0] * k, uy - field[..., 1] * k], axis=-1)


def wrench(twist, field, field_rate, grid: PressureGrid, params: FrictionParams) -> FrictionWrench:
    field = np.asarray(field, dtype=float)
    field_rate = np.asarray(field_rate, dtype=float)
    vx, vy, om = twist
    ux = vx - om * grid.y
    uy = vy + om * grid.x
    wgt = grid.p_n * grid.cell_area * grid.f_N
    lx = (params.sigma0 * field[..., 0] + params.sigma1 * field_rate[..., 0] + params.sigma2 * ux) * wgt
    ly = (params.sigma0 * field[..., 1] + params.sigma1 * field_rate[..., 1] + params.sigma2 * uy) * wgt
    return FrictionWrench(
        -float(np.sum(lx)), -float(np.sum(ly)), -float(np.sum(grid.x * ly - grid.y * lx))
    )


def steady_state_wrench(twist, grid: PressureGrid, params: FrictionParams) -> FrictionWrench:
    return FrictionWrench(*DistributedModel(grid, params).steady_state(twist))


def steady_state_bilinear(twist, grid: PressureGrid, params: FrictionParams) -> FrictionWrench:
    """Steady-state wrench with the CoR interpolated between cell corners."""
    return FrictionWrench(*DistributedModel(grid, params).steady_state_bilinear(twist))


def write_field_csv(path, grid: PressureGrid, field) -> None:
    """Debug snapshot: one row per cell with ``x, y, z_x, z_y``."""
    field = np.asarray(field, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "z_x", "z_y"])
        for x, y, zx, zy in zip(grid.x.ravel(), grid.y.ravel(), field[..., 0].ravel(), field[..., 1].ravel()):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(zx)), repr(float(zy))])


"""Pre-computed, normalised limit surface ``h(r, v)`` and skew-point tools.

The table samples the upper half of the velocity sphere on a uniform
``(theta, phi)`` grid,

    v = (r' cos(theta) sin(phi), r' sin(theta) sin(phi), cos(phi)),

so ``phi = 0`` is pure rotation and ``phi = pi/2`` pure translation.  Every
cell stores its four corner wrenches (normalised per component) under the
index ``i_c = n_ls * i_theta + i_phi``.
"""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .contact_geometry import EmptyContactError, PressureGrid
from .distributed import P0, DistributedModel, FrictionParams

MAGIC = b"PFLS"
VERSION = 1
_HEADER = struct.Struct("<4sII d 3d")
# table coordinates closer than this to a sample node are placed on it
NODE_SNAP = 1e-9


class SkewIterationError(RuntimeError):
    """The zero-tangential-force CoR search did not converge."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(f"skew iteration diverged (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class LimitSurfaceTable:
    n_ls: int
    r_prime: float
    max_f: np.ndarray
    corners: np.ndarray  # (4 * n_ls * n_ls, 4, 3)

    @property
    def n_cells(self) -> int:
        return 4 * self.n_ls * self.n_ls

    def __eq__(self, other):
        if not isinstance(other, LimitSurfaceTable):
            return NotImplemented
        return (
            self.n_ls == other.n_ls
            and self.r_prime == other.r_prime
            and np.array_equal(self.max_f, other.max_f)
            and np.array_equal(self.corners, other.corners)
        )

    def __hash__(self):
        return id(self)

    def lookup(self, r: float, twist) -> np.ndarray:
        return lookup(self, r, twist)

    def save(self, path) -> None:
        """Binary cache: header then corner records in ``i_c`` order, little-endian."""
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, self.n_ls, self.r_prime, *map(float, self.max_f)))
            fh.write(np.ascontiguousarray(self.corners, dtype="<f8").tobytes())
        tmp.replace(path)

    @classmethod
    def load(cls, path) -> "LimitSurfaceTable":
        data = Path(path).read_bytes()
        if len(data) < _HEADER.size:
            raise ValueError("truncated limit surface cache")
        magic, version, n_ls, r_prime, *max_f = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ValueError("not a limit surface cache (bad magic)")
        if version != VERSION:
            raise ValueError(f"unsupported limit surface cache version {version}")
        body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
        expected = 4 * n_ls * n_ls * 12
        if body.size != expected:
            raise ValueError("limit surface cache size does not match its header")
        corners = body.reshape(4 * n_ls * n_ls, 4, 3).astype(float)
        return cls(n_ls, r_prime, np.array(max_f), corners)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i_theta", "i_phi", "corner", "hx", "hy", "htau"])
            for ic in range(self.n_cells):
                i_theta, i_phi = divmod(ic, self.n_ls)
                for c in range(4):
                    w.writerow([i_theta, i_phi, c + 1, *(repr(float(v)) for v in self.corners[ic, c])])


def sample_twists(n_ls: int, r_prime: float) -> np.ndarray:
    """Corner sample twists shaped ``(4 * n_ls, n_ls + 1, 3)``."""
    theta = np.arange(4 * n_ls) * (math.pi / 2) / n_ls
    phi = np.arange(n_ls + 1) * (math.pi / 2) / n_ls
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    return np.stack(
        [r_prime * np.cos(th) * np.sin(ph), r_prime * np.sin(th) * np.sin(ph), np.cos(ph)], axis=-1
    )


def precompute(
    grid: PressureGrid,
    n_ls: int = 20,
    params: FrictionParams = P0,
    bilinear: bool = True,
) -> LimitSurfaceTable:
    """Sample the steady-state Coulomb wrench over the half velocity sphere."""
    if n_ls < 2:
        raise ValueError("n_ls must be at least 2")
    if not (np.any(grid.p_n > 0) and grid.r > 0):
        raise EmptyContactError("empty contact")
    model = DistributedModel(grid, params)
    r_prime = grid.r
    twists = sample_twists(n_ls, r_prime).reshape(-1, 3)
    if bilinear:
        f = model.steady_state_bilinear_batch(twists)
    else:
        f = model.steady_state_batch(twists)
    max_f = np.max(np.abs(f), axis=0)
    max_f = np.where(max_f > 0, max_f, 1.0)
    samples = (f / max_f).reshape(4 * n_ls, n_ls + 1, 3)

    it = np.arange(4 * n_ls)
    it_next = (it + 1) % (4 * n_ls)
    ip = np.arange(n_ls)
    corners = np.stack(
        [
            samples[it][:, ip],
            samples[it_next][:, ip],
            samples[it][:, ip + 1],
            samples[it_next][:, ip + 1],
        ],
        axis=2,
    ).reshape(4 * n_ls * n_ls, 4, 3)
    return LimitSurfaceTable(n_ls, float(r_prime), max_f, np.ascontiguousarray(corners))


def _snap(a: float) -> float:
    """Move grid coordinates within rounding of a node onto the node."""
    k = math.floor(a + 0.5)
    return float(k) if abs(a - k) < NODE_SNAP else a


def table_coordinates(n_ls: int, r: float, twist):
    """``(i_c, d_theta, d_phi, sign)`` for a query twist, or ``None`` for a zero twist."""
    vx, vy, om = (float(c) for c in twist)
    vt = math.hypot(vx, vy)
    if vt == 0.0 and om == 0.0:
        return None
    theta = math.atan2(vy, vx)
    if om < 0:
        theta += math.pi
    theta %= 2 * math.pi
    phi = math.atan2(vt, r * abs(om))
    a = _snap(2 * theta * n_ls / math.pi)
    b = _snap(2 * phi * n_ls / math.pi)
    i_theta = math.floor(a)
    i_phi = min(math.floor(b), n_ls - 1)
    d_theta = a - i_theta
    d_phi = b - i_phi
    i_theta %= 4 * n_ls
    return n_ls * i_theta + i_phi, d_theta, d_phi, (1.0 if om >= 0 else -1.0)


def lookup(table: LimitSurfaceTable, r: float, twist) -> np.ndarray:
    """Normalised wrench direction for ``twist`` on a surface of radius ``r``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    coords = table_coordinates(table.n_ls, r, twist)
    if coords is None:
        return np.zeros(3)
    ic, dt, dp, sgn = coords
    c = table.corners[ic]
    return sgn * (
        (1 - dt) * (1 - dp) * c[0] + dt * (1 - dp) * c[1] + (1 - dt) * dp * c[2] + dt * dp * c[3]
    )


class SteadyStateEvaluator:
    """Normalised steady-state wrench evaluated directly on the grid.

    Used as the ``h`` evaluator for the skew-point search when exact
    (non-interpolated) values are wanted.
    """

    def __init__(self, grid: PressureGrid, params: FrictionParams = P0, max_f=None, bilinear: bool = True):
        self.model = DistributedModel(grid, params)
        self.bilinear = bilinear
        if max_f is None:
            max_f = precompute(grid, 20, params, bilinear).max_f
        self.max_f = np.asarray(max_f, dtype=float)

    def __call__(self, twist) -> np.ndarray:
        if self.bilinear:
            f = self.model.steady_state_bilinear(twist)
        else:
            f = self.model.steady_state(twist)
        return f / self.max_f


def find_zero_tangential_cor(
    grid: PressureGrid,
    params: FrictionParams = P0,
    tol: float = 1e-8,
    max_iter: int = 100,
    h: Callable | None = None,
    r_prime: float | None = None,
) -> np.ndarray:
    """Locate the rotation centre ``p_s`` with zero tangential friction.

    ``h`` maps a twist to a normalised wrench; it defaults to the direct
    steady-state evaluator.  The velocity at the CoP is rescaled
    multiplicatively until the normalised tangential force falls below
    ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if h is None:
        h = SteadyStateEvaluator(grid, params)
    r_a = grid.r if r_prime is None else r_prime
    omega = 1.0
    hx, hy, _ = h((0.0, 0.0, omega))
    vx0 = vx = r_a * omega * hx
    vy0 = vy = r_a * omega * hy
    # velocity at which the current residual was evaluated
    ex = ey = 0.0
    residual = math.hypot(hx, hy)
    it = 0
    while residual > tol:
        if it >= max_iter or not math.isfinite(residual):
            raise SkewIterationError(residual, it)
        ex, ey = vx, vy
        hx, hy, _ = h((ex, ey, omega))
        residual = math.hypot(hx, hy)
        it += 1
        if vx0 != 0:
            vx = vx * (r_a * omega * hx + vx0) / vx0
        if vy0 != 0:
            vy = vy * (r_a * omega * hy + vy0) / vy0
    return np.array([-ey / omega, ex / omega])


def skew_variables(p_s, r_a: float, r_a_prime: float, twist) -> tuple[float, float]:
    """Virtual tangential velocity gains ``(s_x, s_y)`` for the skew point ``p_s``."""
    if not (r_a > 0 and r_a_prime > 0):
        raise ValueError("radii must be positive")
    dx, dy = float(p_s[0]), float(p_s[1])
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return 0.0, 0.0
    s_n = skew_scale(p_s, r_a, twist)
    ratio = r_a / r_a_prime
    return -ratio * s_n * dy, ratio * s_n * dx


def skew_scale(p_s, r_a: float, twist) -> float:
    """``s_n`` in [0, 1]: 1 for pure rotation, falling off as the CoR leaves the CoP."""
    vx, vy, om = twist
    dx, dy = float(p_s[0]), float(p_s[1])
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return 0.0
    tangential = math.hypot(vx * dx / norm, vy * dy / norm)
    return 2.0 / math.pi * math.atan2(abs(om) * r_a, tangential)


@dataclass(frozen=True)
class EigenCheck:
    eigenvalues: tuple[float, float, float]
    positive: bool
    complex: bool
    condition: bool


def check_positive_definite(r: float, r_a: float, s_x: float, s_y: float) -> EigenCheck:
    """Eigenvalues of the symmetric part of the skewed ellipsoid matrix.

    One eigenvalue is 1; the other two are
    ``(r^2+1)/2 +- sqrt(((r^2+1)/2)^2 - (r_a^2 - s_x^2/4 - s_y^2/4))``.
    A negative discriminant yields a complex pair whose real part is reported.
    """
    mid = 0.5 * (r * r + 1.0)
    disc = mid * mid - (r_a * r_a - 0.25 * s_x * s_x - 0.25 * s_y * s_y)
    if disc >= 0:
        root = math.sqrt(disc)
        lam = (1.0, mid + root, mid - root)
        is_complex = False
    else:
        lam = (1.0, mid, mid)
        is_complex = True
    return EigenCheck(
        eigenvalues=lam,
        positive=all(v > 0 for v in lam),
        complex=is_complex,
        condition=4 * r_a * r_a > s_x * s_x + s_y * s_y,
    )

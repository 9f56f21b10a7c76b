"""Contact pressure distributions and their per-surface summary quantities.

A :class:`SurfaceSpec` describes a pressure field analytically (or through a
sampled mask); :func:`discretize` samples it on an ``n x n`` grid of cell
centres, renormalises it so that ``sum(p_n * A) == 1`` and re-centres the cell
coordinates on the centre of pressure (CoP).

Coordinates on a :class:`PressureGrid` are always relative to the CoP; the CoP
itself is stored in the frame of the bounding box centre.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

HERTZ_PEAK_COEFF = 1.144

SHAPES = (
    "circle",
    "square",
    "line",
    "line_grad",
    "non_convex_1",
    "non_convex_2",
    "hertzian",
    "custom",
)


class EmptyContactError(ValueError):
    """Raised when a surface has no positive pressure on the grid."""


@dataclass(frozen=True)
class SurfaceSpec:
    """Description of a contact pressure distribution.

    ``size`` is the radius of a circle, the side of a square or the length of a
    (gradient) line. ``extent`` is the side of the square bounding box that is
    discretised; when omitted it is derived from the shape.

    Hertzian surfaces follow ``a = radius_coeff * f_N**(1/3) * length_unit``
    with exponent ``k`` either constant or ``k_per_newton * f_N``.
    """

    shape: str
    size: float = 0.01
    extent: float | None = None
    reverse: bool = False
    k: float = 2.0
    k_per_newton: float | None = None
    radius_coeff: float = 6.0
    length_unit: float = 1e-3
    pressure_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = field(
        default=None, compare=False, repr=False
    )
    source: str | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown surface shape {self.shape!r}")
        if not self.size > 0:
            raise ValueError("surface size must be positive")
        if self.extent is not None and not self.extent > 0:
            raise ValueError("surface extent must be positive")
        if self.shape == "hertzian":
            if self.k_per_newton is None and not self.k > 0:
                raise ValueError("Hertzian exponent k must be positive")
            if self.k_per_newton is not None and not self.k_per_newton > 0:
                raise ValueError("Hertzian k_per_newton must be positive")
            if not (self.radius_coeff > 0 and self.length_unit > 0):
                raise ValueError("Hertzian radius coefficient must be positive")
        if self.shape == "custom" and self.pressure_fn is None:
            raise ValueError("custom surfaces need a pressure function")

    @property
    def force_dependent(self) -> bool:
        return self.shape == "hertzian"

    def hertz_exponent(self, f_N: float) -> float:
        if self.k_per_newton is not None:
            k = self.k_per_newton * f_N
        else:
            k = self.k
        if not k > 0:
            raise ValueError("Hertzian exponent must be positive")
        return k

    def contact_radius(self, f_N: float) -> float:
        """Hertzian contact radius in metres."""
        return hertzian_radius(f_N, self.radius_coeff) * self.length_unit

    def bounding_extent(self, f_N: float = 1.0) -> float:
        if self.extent is not None:
            return self.extent
        if self.shape == "circle":
            return 2.0 * self.size
        if self.shape == "hertzian":
            return 2.0 * self.contact_radius(f_N)
        return self.size

    def pressure(self, x, y, f_N: float = 1.0) -> np.ndarray:
        """Raw (un-normalised) pressure at box-centred coordinates ``x, y``.

        Only the Hertzian field is dimensional (Pa); the other shapes return a
        relative weight that :func:`discretize` normalises.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        s = self.size
        if self.shape == "circle":
            return np.where(x**2 + y**2 <= s**2, 1.0, 0.0)
        if self.shape == "square":
            return np.where((np.abs(x) <= s / 2) & (np.abs(y) <= s / 2), 1.0, 0.0)
        if self.shape in ("line", "line_grad"):
            # lines have no width; the row of cells nearest y = 0 carries them
            on_line = np.abs(x) <= s / 2
            if self.shape == "line":
                return np.where(on_line, 1.0, 0.0)
            t = (x + s / 2) / s
            if self.reverse:
                t = 1.0 - t
            return np.where(on_line, np.clip(t, 0.0, 1.0), 0.0)
        if self.shape == "hertzian":
            a = self.contact_radius(f_N)
            k = self.hertz_exponent(f_N)
            rho = np.hypot(x, y) / a
            inside = rho <= 1.0
            core = np.clip(1.0 - np.where(inside, rho, 1.0) ** k, 0.0, None)
            peak = HERTZ_PEAK_COEFF * f_N / (math.pi * a**2)
            return np.where(inside, peak * core ** (1.0 / k), 0.0)
        # custom and bundled masks
        return np.asarray(self.pressure_fn(x, y), dtype=float)


@dataclass(frozen=True, eq=False)
class PressureGrid:
    """Discretised, normalised pressure field.

    ``x`` and ``y`` are ``n x n`` arrays of cell centres relative to the CoP
    (rows index y, columns index x); ``p_n`` has units 1/m^2 and satisfies
    ``sum(p_n) * cell_area == 1``.
    """

    n: int
    cell_size: float
    x: np.ndarray
    y: np.ndarray
    p_n: np.ndarray
    f_N: float
    cop: tuple[float, float]
    r: float
    u: float

    @property
    def cell_area(self) -> float:
        return self.cell_size**2

    @property
    def extent(self) -> float:
        return self.n * self.cell_size

    @property
    def cell_centers(self) -> np.ndarray:
        return np.stack([self.x, self.y], axis=-1)

    @property
    def active(self) -> np.ndarray:
        return self.p_n > 0

    @property
    def edges(self) -> tuple[float, float]:
        """CoP-relative coordinates of the lower-left grid corner."""
        return (
            float(self.x[0, 0] - self.cell_size / 2),
            float(self.y[0, 0] - self.cell_size / 2),
        )

    @classmethod
    def from_pressure(cls, p, cell_size: float, f_N: float = 1.0) -> "PressureGrid":
        """Build a grid from an ``n x n`` array of non-negative pressure weights."""
        p = np.array(p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("pressure array must be square")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("pressure must be finite and non-negative")
        n = p.shape[0]
        total = p.sum()
        if not total > 0:
            raise EmptyContactError("empty contact")
        area = cell_size**2
        p_n = p / (total * area)
        c = (np.arange(n) + 0.5) * cell_size - n * cell_size / 2
        xb, yb = np.meshgrid(c, c)
        w = p_n * area
        cop = (float(np.sum(w * xb)), float(np.sum(w * yb)))
        x = xb - cop[0]
        y = yb - cop[1]
        # a cell centred on the CoP up to rounding must not slide under pure rotation
        snap = 1e-9 * cell_size
        x[np.abs(x) < snap] = 0.0
        y[np.abs(y) < snap] = 0.0
        for a in (x, y, p_n):
            a.flags.writeable = False
        grid = cls(n, cell_size, x, y, p_n, f_N, cop, 0.0, 0.0)
        object.__setattr__(grid, "r", equivalent_radius(grid))
        object.__setattr__(grid, "u", viscous_scale(grid))
        return grid

    def with_normal_force(self, f_N: float) -> "PressureGrid":
        """Same normalised distribution at a different normal force."""
        if not f_N >= 0:
            raise ValueError("normal force must be non-negative")
        return PressureGrid(
            self.n, self.cell_size, self.x, self.y, self.p_n, f_N, self.cop, self.r, self.u
        )


def discretize(spec: SurfaceSpec, n: int, f_N: float = 1.0) -> PressureGrid:
    """Sample ``spec`` at the centres of an ``n x n`` grid."""
    if n < 2:
        raise ValueError("grid needs at least 2 cells per side")
    if not f_N > 0:
        raise ValueError("normal force must be positive")
    extent = spec.bounding_extent(f_N)
    h = extent / n
    c = (np.arange(n) + 0.5) * h - extent / 2
    xb, yb = np.meshgrid(c, c)
    if spec.shape in ("line", "line_grad"):
        p = np.zeros((n, n))
        row = n // 2
        p[row] = spec.pressure(c, np.zeros(n), f_N)
    else:
        p = np.broadcast_to(spec.pressure(xb, yb, f_N), (n, n))
    return PressureGrid.from_pressure(np.clip(p, 0.0, None), h, f_N)


def equivalent_radius(grid: PressureGrid) -> float:
    """Radius of the circular rim contact with the same pure-rotation torque."""
    rho = np.hypot(grid.x, grid.y)
    safe = np.where(rho > 0, rho, 1.0)
    # unit velocity of a unit rotation about the CoP
    vx = np.where(rho > 0, -grid.y / safe, 0.0)
    vy = np.where(rho > 0, grid.x / safe, 0.0)
    cross = grid.x * vy - grid.y * vx
    return float(abs(np.sum(cross * grid.p_n) * grid.cell_area))


def viscous_scale(grid: PressureGrid) -> float:
    """Second pressure moment about the CoP (viscous torque scale)."""
    return float(np.sum((grid.x**2 + grid.y**2) * grid.p_n) * grid.cell_area)


def hertzian_radius(f_N: float, radius_coeff: float = 6.0) -> float:
    """Contact radius ``radius_coeff * f_N**(1/3)`` in the coefficient's units."""
    if not f_N > 0:
        raise ValueError("normal force must be positive")
    return radius_coeff * f_N ** (1.0 / 3.0)


# -- constructors ----------------------------------------------------------

def circle(radius: float = 0.01, extent: float | None = None) -> SurfaceSpec:
    return SurfaceSpec("circle", size=radius, extent=extent)


def square(side: float = 0.02, extent: float | None = None) -> SurfaceSpec:
    return SurfaceSpec("square", size=side, extent=extent)


def line(length: float = 0.02, extent: float | None = None) -> SurfaceSpec:
    return SurfaceSpec("line", size=length, extent=extent)


def gradient_line(length: float = 0.02, extent: float | None = None, reverse: bool = False) -> SurfaceSpec:
    """Line with pressure rising linearly from zero at ``-L/2`` (or ``+L/2`` if reversed)."""
    return SurfaceSpec("line_grad", size=length, extent=extent, reverse=reverse)


def hertzian(
    k: float = 2.0,
    k_per_newton: float | None = None,
    radius_coeff: float = 6.0,
    length_unit: float = 1e-3,
) -> SurfaceSpec:
    return SurfaceSpec(
        "hertzian", k=k, k_per_newton=k_per_newton, radius_coeff=radius_coeff, length_unit=length_unit
    )


def custom(pressure_fn, extent: float, source: str | None = None) -> SurfaceSpec:
    return SurfaceSpec("custom", size=extent, extent=extent, pressure_fn=pressure_fn, source=source)


def non_convex(which: int, extent: float = 0.02) -> SurfaceSpec:
    """One of the bundled non-convex masks, scaled to ``extent``."""
    if which not in (1, 2):
        raise ValueError("non-convex surface must be 1 or 2")
    name = f"non_convex_{which}.csv"
    with resources.files("planar_friction").joinpath("data").joinpath(name).open("r") as fh:
        pts = _read_xyp(fh)
    fn = _nearest_sampler(pts * np.array([extent, extent, 1.0]))
    return SurfaceSpec(f"non_convex_{which}", size=extent, extent=extent, pressure_fn=fn, source=name)


def load_pressure_csv(path, extent: float | None = None) -> SurfaceSpec:
    """Custom surface from a CSV with an ``x,y,p`` header (coordinates in metres)."""
    with open(path, newline="") as fh:
        pts = _read_xyp(fh)
    if extent is None:
        span = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]))
        extent = span + _spacing(pts)
    centre = (pts[:, :2].max(axis=0) + pts[:, :2].min(axis=0)) / 2
    pts = pts.copy()
    pts[:, :2] -= centre
    return custom(_nearest_sampler(pts), extent, source=str(Path(path)))


def _read_xyp(fh) -> np.ndarray:
    reader = csv.reader(fh)
    header = [h.strip().lower() for h in next(reader)]
    if header[:3] != ["x", "y", "p"]:
        raise ValueError("pressure CSV needs an 'x,y,p' header line")
    rows = [[float(v) for v in row[:3]] for row in reader if row]
    if not rows:
        raise EmptyContactError("empty contact")
    return np.array(rows)


def _spacing(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return 0.0
    d, _ = cKDTree(pts[:, :2]).query(pts[:, :2], k=2)
    return float(np.median(d[:, 1]))


def _nearest_sampler(pts: np.ndarray):
    tree = cKDTree(pts[:, :2])
    cutoff = 0.5 * math.sqrt(2.0) * _spacing(pts) * (1 + 1e-9) + 1e-15
    values = pts[:, 2]

    def sample(x, y):
        q = np.stack([np.ravel(x), np.ravel(y)], axis=-1)
        d, i = tree.query(q)
        out = np.where(d <= cutoff, values[i], 0.0)
        return out.reshape(np.shape(x))

    return sample

"""Periodic grids, mask functions and the penalized diffusivity.

All grids cover the periodic box [0, 2*pi) (or its square) with points
``x_i = i * h``.  In 2D, fields are stored as ``(ny, nx)`` arrays and
flattened in C order, so the linear index of point ``(i, j)`` is
``k = j * nx + i``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO

import numpy as np

TWO_PI = 2.0 * np.pi

#: Tolerance used to decide that a grid point lies on the circle r = pi.
DISC_INTERFACE_TOL = 1e-12 * np.pi


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid of ``n`` points on [0, 2*pi)."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"grid needs an integer n >= 4, got {self.n!r}")

    @property
    def h(self) -> float:
        return TWO_PI / self.n

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    @property
    def size(self) -> int:
        return self.n


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product periodic grid on [0, 2*pi)^2."""

    nx: int
    ny: int

    def __post_init__(self):
        for name in ("nx", "ny"):
            v = getattr(self, name)
            if int(v) != v or v < 4:
                raise ValueError(f"grid needs an integer {name} >= 4, got {v!r}")

    @property
    def hx(self) -> float:
        return TWO_PI / self.nx

    @property
    def hy(self) -> float:
        return TWO_PI / self.ny

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` coordinate arrays of shape ``(ny, nx)``."""
        x = np.arange(self.nx) * self.hx
        y = np.arange(self.ny) * self.hy
        return np.meshgrid(x, y)

    def index(self, i: int, j: int) -> int:
        return (j % self.ny) * self.nx + (i % self.nx)


@dataclass(frozen=True)
class MaskField:
    """Mask values chi in [0, 1] on the points of ``grid`` (flattened in 2D)."""

    values: np.ndarray
    grid: Grid1D | Grid2D = field(repr=False)

    def __post_init__(self):
        vals = _freeze(np.ravel(self.values))
        if vals.size != self.grid.size:
            raise ValueError(f"mask has {vals.size} values for a grid of {self.grid.size} points")
        if np.any((vals < 0) | (vals > 1)) or not np.all(np.isfinite(vals)):
            raise ValueError("mask values must lie in [0, 1]")
        if not np.any(vals == 0) or not np.any(vals == 1):
            raise ValueError("mask needs both fluid (chi=0) and solid (chi=1) points")
        object.__setattr__(self, "values", vals)

    @property
    def fluid(self) -> np.ndarray:
        """Boolean selector of fluid and interface points (chi < 1)."""
        return self.values < 1

    @property
    def fluid_weights(self) -> np.ndarray:
        return 1.0 - self.values


@dataclass(frozen=True)
class DiffusivityField:
    """theta = (1 - chi) + eta * chi."""

    values: np.ndarray
    eta: float

    def __post_init__(self):
        vals = _freeze(np.ravel(self.values))
        if np.any(vals <= 0):
            raise ValueError("diffusivity must be positive")
        object.__setattr__(self, "values", vals)


def build_mask_1d(grid: Grid1D, interface_value: float = 0.5) -> MaskField:
    """Mask of the fluid interval (0, pi) inside the periodic box.

    Points strictly inside (0, pi) get 0, the two interface points x = 0
    and x = pi get `interface_value`, the rest 1.  The default 1/2 can be
    replaced by 0 or 1 to check sensitivity to the interface treatment.
    """
    if grid.n % 2:
        raise ValueError(f"1D mask needs an even n so that x=pi is a grid point, got n={grid.n}")
    n = grid.n
    chi = np.ones(n)
    chi[1 : n // 2] = 0.0
    chi[0] = chi[n // 2] = interface_value
    return MaskField(chi, grid)


def build_mask_square(grid: Grid2D, edge_value: float = 0.5,
                      corner_value: float = 0.25) -> MaskField:
    """Mask of the fluid square [pi/2, 3pi/2]^2.

    Open edges carry `edge_value`, the four corners `corner_value`.
    """
    if grid.nx % 4 or grid.ny % 4:
        raise ValueError(
            f"square mask needs nx, ny divisible by 4 (edges on grid lines), got {grid.nx}x{grid.ny}")

    def classify(m):
        i = np.arange(m)
        lo, hi = m // 4, 3 * m // 4
        # 0 inside, 1 on an edge line, 2 outside
        return np.where((i > lo) & (i < hi), 0, np.where((i == lo) | (i == hi), 1, 2))

    cx = classify(grid.nx)[np.newaxis, :]
    cy = classify(grid.ny)[:, np.newaxis]
    chi = np.ones((grid.ny, grid.nx))
    chi[(cx == 0) & (cy == 0)] = 0.0
    chi[((cx == 1) & (cy == 0)) | ((cx == 0) & (cy == 1))] = edge_value
    chi[(cx == 1) & (cy == 1)] = corner_value
    return MaskField(chi, grid)


def disc_radius(grid: Grid2D) -> np.ndarray:
    """Distance of every grid point to the box centre (pi, pi), shape (ny, nx)."""
    X, Y = grid.mesh()
    return np.hypot(X - np.pi, Y - np.pi)


def build_mask_disc(grid: Grid2D, tol: float = DISC_INTERFACE_TOL,
                    interface_value: float = 0.5) -> MaskField:
    """Mask of the fluid disc r < pi centred at (pi, pi).

    Points within `tol` of the circle get `interface_value`; with the
    default tolerance this practically never happens and the mask is
    binary.
    """
    r = disc_radius(grid)
    chi = np.where(r < np.pi, 0.0, 1.0)
    chi[np.abs(r - np.pi) <= tol] = interface_value
    return MaskField(chi, grid)


def diffusivity(mask: MaskField, eta: float) -> DiffusivityField:
    if not eta > 0:
        raise ValueError(f"penalization parameter must be positive, got eta={eta!r}")
    chi = mask.values
    return DiffusivityField((1.0 - chi) + eta * chi, float(eta))


def write_mask_csv(mask: MaskField, fh: IO[str]) -> None:
    """Write ``index,x[,y],chi`` rows for `mask`."""
    w = csv.writer(fh, lineterminator="\n")
    g = mask.grid
    if isinstance(g, Grid1D):
        w.writerow(["index", "x", "chi"])
        for k, (x, c) in enumerate(zip(g.points, mask.values)):
            w.writerow([k, f"{x:.17g}", f"{c:.17g}"])
    else:
        X, Y = g.mesh()
        w.writerow(["index", "x", "y", "chi"])
        for k, (x, y, c) in enumerate(zip(X.ravel(), Y.ravel(), mask.values)):
            w.writerow([k, f"{x:.17g}", f"{y:.17g}", f"{c:.17g}"])

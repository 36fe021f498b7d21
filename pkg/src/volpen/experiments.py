"""Convergence and spectrum studies for the penalized Neumann problems.

Each study builds mask, diffusivity and operator for one resolution,
solves, and compares against the closed-form reference on the fluid
points (chi < 1, interface included).  Independent runs may be spread
over threads; set ``VOLPEN_JOBS`` to cap the pool size (default 1).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .geometry import (Grid1D, Grid2D, MaskField, build_mask_1d, build_mask_disc,
                       build_mask_square, diffusivity, disc_radius)
from .operator import assemble_1d, assemble_2d
from .solver import (LeastSquaresAugment, ReplaceRow, SpectrumResult, eigen_decompose,
                     solve_constrained)

STRATEGIES = ("replace-first", "replace-mid", "replace-mid-shift", "least-squares")
DISC_STRATEGIES = ("replace-first", "replace-mid", "replace-mid-shift")

#: Branch fits use modes with at least 8 grid points per wavelength.
RESOLVED_FRACTION = 1 / 8


def jobs_from_env() -> int:
    try:
        return max(1, int(os.environ.get("VOLPEN_JOBS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items, jobs=None):
    jobs = jobs_from_env() if jobs is None else max(1, jobs)
    items = list(items)
    if jobs == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- fitting and error measurement ---------------------------------------------

def fit_slope(xs, ys) -> tuple[float, float]:
    """Least-squares line through ``(log x, log y)``; returns (slope, intercept)."""
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size < 3:
        raise ValueError("slope fit needs at least 3 matching points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("slope fit needs positive values")
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope), float(intercept)


def asymptotic_slope(hs, errs) -> float:
    """Slope of error vs h, dropping the two coarsest runs when there are 5 or more."""
    hs, errs = np.asarray(hs, dtype=float), np.asarray(errs, dtype=float)
    order = np.argsort(hs)
    hs, errs = hs[order], errs[order]
    if hs.size >= 5:
        hs, errs = hs[:-2], errs[:-2]
    return fit_slope(hs, errs)[0]


def error_norms(u, exact, mask: MaskField, grid) -> tuple[float, float]:
    """Discrete L2 and Linf distance on the fluid points after mean alignment.

    `exact` has the layout of `u`; entries outside the fluid are ignored.
    The constant offset is removed using the fluid weights (1 - chi).
    """
    sel = mask.fluid
    if not np.any(sel):
        raise ValueError("empty fluid set")
    d = np.asarray(u, dtype=float)[sel] - np.asarray(exact, dtype=float)[sel]
    w = mask.fluid_weights[sel]
    d = d - (w @ d) / w.sum()
    cell = grid.h if isinstance(grid, Grid1D) else grid.hx * grid.hy
    return float(np.sqrt(cell * (d @ d))), float(np.max(np.abs(d)))


# -- strategies ---------------------------------------------------------------

def make_strategy(name: str, grid, weights=None):
    """Constraint strategy from its CLI name.

    ``replace-first`` replaces equation 0, ``replace-mid`` equation
    ``N // 2`` and ``replace-mid-shift`` equation ``N // 2 + nx // 2``
    (N total unknowns, C-ordered flattening; 2D only), ``replace-index=K``
    equation K, ``least-squares`` appends the constraint.
    """
    n_total = grid.size
    nx = grid.n if isinstance(grid, Grid1D) else grid.nx
    if name == "least-squares":
        return LeastSquaresAugment(weights)
    if name == "replace-first":
        return ReplaceRow(0, weights)
    if name == "replace-mid":
        return ReplaceRow(n_total // 2, weights)
    if name == "replace-mid-shift":
        if isinstance(grid, Grid1D):
            raise ValueError("replace-mid-shift needs a 2D grid")
        return ReplaceRow(n_total // 2 + nx // 2, weights)
    if name.startswith("replace-index="):
        try:
            k = int(name.split("=", 1)[1])
        except ValueError:
            raise ValueError(f"bad row index in strategy {name!r}") from None
        if not 0 <= k < n_total:
            raise ValueError(f"row index {k} outside 0..{n_total - 1}")
        return ReplaceRow(k, weights)
    raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGIES} or replace-index=K")


# -- 1D -------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    h: float
    eta: float
    l2: float
    linf: float
    case: str
    strategy: str

    def astuple(self):
        return (self.n, self.h, self.eta, self.l2, self.linf, self.case, self.strategy)


@dataclass
class Solve1D:
    grid: Grid1D
    mask: MaskField
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    exact: analytic.ExactPenalizedSolution1D
    err_w: tuple[float, float]
    err_v: tuple[float, float]


def solve_1d(m: int, eta: float, n: int, strategy: str = "replace-first",
             interface_value: float = 0.5) -> Solve1D:
    """Discrete penalized solve for the mode-m forcing, compared with v and w."""
    grid = Grid1D(n)
    mask = build_mask_1d(grid, interface_value)
    A = assemble_1d(diffusivity(mask, eta), grid)
    x = grid.points
    f = mask.fluid_weights * analytic.rhs_1d(m, x)
    u = solve_constrained(A, f, make_strategy(strategy, grid))
    sol = analytic.penalized_coefficients(m, eta)
    v = sol(x)
    w = np.where(mask.fluid, analytic.exact_solution_1d(m, np.minimum(x, np.pi)), np.nan)
    return Solve1D(grid, mask, u, v, w, sol,
                   error_norms(u, w, mask, grid), error_norms(u, v, mask, grid))


def convergence_study_1d(m: int, eta: float, n_list, target: str = "w",
                         strategy: str = "replace-first", jobs=None) -> list[ConvergenceRow]:
    """Fluid errors against w (Neumann solution) or v (exact penalized solution)."""
    if target not in ("w", "v"):
        raise ValueError("target must be 'w' or 'v'")
    n_list = list(n_list)
    if n_list != sorted(n_list) or any(n % 2 for n in n_list):
        raise ValueError("n_list must be ascending and even")

    def run(n):
        res = solve_1d(m, eta, n, strategy)
        l2, linf = res.err_w if target == "w" else res.err_v
        return ConvergenceRow(n, res.grid.h, eta, l2, linf, f"1d-m{m}-{target}", strategy)

    return _pmap(run, n_list, jobs)


# -- spectrum -------------------------------------------------------------------

@dataclass
class SpectrumReport:
    """Branch analysis of the discrete penalized spectrum.

    Indices are 0-based over all eigenvalues sorted ascending (index 0 is
    the kernel).  The lower branch is indices 1 .. n/2-3 and fits
    ``eta * i^2``; the upper branch starts at index n/2-2 and is fitted
    against the shifted index ``i' = index - n/2 + 3`` (which equals
    ``i - n/2 + 2`` in 1-based numbering), so its first entries track
    1, 4, 9.
    """

    n: int
    eta: float
    spectrum: SpectrumResult = field(repr=False)
    lower: tuple[float, float]
    upper: tuple[float, float]
    zero_mode: float
    kernel_dim: int

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def lower_slice(self) -> slice:
        return slice(1, self.n // 2 - 2)

    @property
    def upper_start(self) -> int:
        return self.n // 2 - 2

    def upper_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.upper_start:]

    def branches(self) -> list[str]:
        out = []
        for i in range(self.n):
            if i == 0:
                out.append("zero")
            elif i < self.upper_start:
                out.append("lower")
            else:
                out.append("upper")
        return out


def spectrum_study(n: int, eta: float) -> SpectrumReport:
    """Dense spectrum of the 1D penalized operator with power-law branch fits.

    Fits use the first ``n * RESOLVED_FRACTION`` modes of each branch;
    'lower' and 'upper' hold (slope, prefactor).
    """
    if n % 2:
        raise ValueError("spectrum study needs even n")
    grid = Grid1D(n)
    mask = build_mask_1d(grid)
    A = assemble_1d(diffusivity(mask, eta), grid)
    spec = eigen_decompose(A)
    lam = spec.eigenvalues
    nfit = max(3, int(n * RESOLVED_FRACTION))
    idx = np.arange(1, nfit + 1)
    s_lo, c_lo = fit_slope(idx, lam[idx])
    up = lam[n // 2 - 2:]
    s_up, c_up = fit_slope(idx, up[:nfit])
    return SpectrumReport(n, eta, spec, (s_lo, float(np.exp(c_lo))), (s_up, float(np.exp(c_up))),
                          float(lam[0]), spec.kernel_dim)


EIGDIST_MODES = (2, 3, 4)


def eigenfunction_distances(n: int, eta: float) -> list[tuple]:
    """Distances between discrete eigenvectors N/2, N/2+1, N/2+2 and cos 2x, 3x, 4x.

    Eigenvectors are numbered from 1 with the kernel first, so vector N/2
    is column N/2 - 1.  Both sides are restricted to the fluid points,
    normalized in the discrete L2(0, pi) norm and sign-aligned.
    Returns rows ``(n, h, mode, l2, linf)``.
    """
    grid = Grid1D(n)
    mask = build_mask_1d(grid)
    spec = eigen_decompose(assemble_1d(diffusivity(mask, eta), grid))
    sel = mask.fluid
    x = grid.points[sel]
    h = grid.h
    rows = []
    for offset, mode in enumerate(EIGDIST_MODES):
        q = spec.eigenvectors[sel, n // 2 - 1 + offset]
        _, psi = analytic.neumann_eigenpair(mode)
        target = psi(x)
        q = q / np.sqrt(h * (q @ q))
        if q @ target < 0:
            q = -q
        d = q - target
        rows.append((n, h, mode, float(np.sqrt(h * (d @ d))), float(np.max(np.abs(d)))))
    return rows


def eigenfunction_study(n_list, eta: float, jobs=None) -> list[tuple]:
    out = []
    for rows in _pmap(lambda n: eigenfunction_distances(n, eta), list(n_list), jobs):
        out.extend(rows)
    return out


# -- 2D -------------------------------------------------------------------------

@dataclass
class Solve2D:
    case: str
    grid: Grid2D
    mask: MaskField
    u: np.ndarray
    exact: np.ndarray
    strategy: str
    err: tuple[float, float]


def setup_2d(case: str, eta: float, n: int):
    """Grid, mask, operator, right-hand side and reference for a 2D case."""
    grid = Grid2D(n, n)
    X, Y = grid.mesh()
    if case == "square":
        mask = build_mask_square(grid)
        f = analytic.rhs_2d_square(X.ravel(), Y.ravel(), mask.values)
        exact = np.full(grid.size, np.nan)
        sel = mask.fluid
        exact[sel] = analytic.exact_2d_square(X.ravel()[sel], Y.ravel()[sel])
    elif case == "disc":
        mask = build_mask_disc(grid)
        r = disc_radius(grid).ravel()
        f = analytic.rhs_2d_disc(r, mask.values)
        exact = np.where(mask.fluid, analytic.exact_2d_disc(r), np.nan)
    else:
        raise ValueError(f"unknown 2D case {case!r}; expected 'square' or 'disc'")
    A = assemble_2d(diffusivity(mask, eta), grid)
    return grid, mask, A, f, exact


def solve_2d(case: str, eta: float, n: int, strategy: str = "replace-first") -> Solve2D:
    grid, mask, A, f, exact = setup_2d(case, eta, n)
    u = solve_constrained(A, f, make_strategy(strategy, grid, mask.fluid_weights))
    return Solve2D(case, grid, mask, u, exact, strategy, error_norms(u, exact, mask, grid))


def convergence_study_2d(case: str, eta: float, n_list, strategy: str = "replace-first",
                         jobs=None) -> list[ConvergenceRow]:
    n_list = list(n_list)
    if case == "square" and any(n % 4 for n in n_list):
        raise ValueError("square case needs n divisible by 4")

    def run(n):
        res = solve_2d(case, eta, n, strategy)
        return ConvergenceRow(n, res.grid.hx, eta, res.err[0], res.err[1], case, strategy)

    return _pmap(run, n_list, jobs)


def fluid_difference(a: Solve2D, b: Solve2D) -> float:
    """Max fluid-point difference of two solutions after aligning their fluid means."""
    sel = a.mask.fluid
    w = a.mask.fluid_weights[sel]
    d = a.u[sel] - b.u[sel]
    d = d - (w @ d) / w.sum()
    return float(np.max(np.abs(d)))

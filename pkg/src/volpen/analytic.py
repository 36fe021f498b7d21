"""Closed-form solutions of the 1D and 2D model problems.

The 1D model is -w'' = m^2 cos(mx) on the fluid interval (0, pi) with
homogeneous Neumann conditions, embedded in the periodic box (0, 2 pi)
where the solid half carries diffusivity eta.  Everything here is
normalized to zero mean over [0, 2 pi] in 1D; the Neumann solution is
only defined up to a constant.

The penalized eigenproblem has no closed-form spectrum; its eigenvalues
are the zeros of the characteristic determinant G(lambda; eta), located
by scanning and bisection.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

PI = np.pi


def exact_solution_1d(m, x):
    """Neumann solution cos(mx) on [0, pi] (zero fluid mean); 0 for m = 0."""
    x = np.asarray(x, dtype=float)
    if m == 0:
        return np.zeros_like(x)
    return np.cos(m * x)


def rhs_1d(m, x):
    return m * m * np.cos(m * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ExactPenalizedSolution1D:
    """Piecewise exact solution of the penalized 1D Poisson problem.

    ``v(x) = cos(mx) + a1 x + a2`` on [0, pi] and ``b1 x + b2`` on (pi, 2 pi).
    """

    m: int
    eta: float
    a1: float
    a2: float
    b1: float
    b2: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        fluid = np.cos(self.m * x) + self.a1 * x + self.a2
        solid = self.b1 * x + self.b2
        return np.where(x <= PI, fluid, solid)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        fluid = -self.m * np.sin(self.m * x) + self.a1
        return np.where(x <= PI, fluid, self.b1 + 0.0 * x)

    def interface_residuals(self) -> dict[str, float]:
        """Jumps of v and of the flux theta v' at x = pi and x = 0 (= 2 pi)."""
        m, eta = self.m, self.eta
        v_pi_f = np.cos(m * PI) + self.a1 * PI + self.a2
        v_pi_s = self.b1 * PI + self.b2
        v_0_f = 1.0 + self.a2
        v_0_s = self.b1 * 2 * PI + self.b2
        dv_pi_f = -m * np.sin(m * PI) + self.a1
        dv_0_f = self.a1
        return {
            "value_pi": float(v_pi_f - v_pi_s),
            "value_0": float(v_0_f - v_0_s),
            "flux_pi": float(dv_pi_f - eta * self.b1),
            "flux_0": float(dv_0_f - eta * self.b1),
        }


def penalized_coefficients(m: int, eta: float) -> ExactPenalizedSolution1D:
    """Coefficients of the exact penalized solution, zero mean over [0, 2 pi].

    The slopes follow from flux continuity; a2 from continuity at x = 0;
    b2, the free constant, from the zero-mean condition.
    """
    if m < 0 or int(m) != m:
        raise ValueError(f"mode m must be a nonnegative integer, got {m!r}")
    if not eta > 0:
        raise ValueError(f"penalization parameter must be positive, got eta={eta!r}")
    m = int(m)
    a1 = (1 - (-1) ** m) / (PI * (1 + 1 / eta))
    b1 = a1 / eta
    fluid_cos_integral = PI if m == 0 else 0.0
    # integral over [0, 2pi] of v, with a2 = 2 pi b1 - 1 + b2, set to zero
    b2 = (-fluid_cos_integral - a1 * PI**2 / 2 + PI - 3.5 * PI**2 * b1) / (2 * PI)
    a2 = 2 * PI * b1 - 1 + b2
    return ExactPenalizedSolution1D(m, float(eta), a1, a2, b1, b2)


def penalized_solution_1d(sol: ExactPenalizedSolution1D, x):
    return sol(x)


def penalization_error(m: int, eta: float, norm: str = "L2") -> float:
    """Distance between the Neumann and penalized solutions on (0, pi).

    After removing the fluid means the difference is -a1 (x - pi/2), so
    both norms are closed-form in the slope a1.
    """
    a1 = abs(penalized_coefficients(m, eta).a1)
    if norm == "Linf":
        return a1 * PI / 2
    if norm == "L2":
        return a1 * np.sqrt(PI**3 / 12)
    raise ValueError(f"norm must be 'L2' or 'Linf', got {norm!r}")


def fourier_coefficient(k: int, m: int, eta: float) -> complex:
    """Coefficient ``(1/2pi) int_0^{2pi} v(x) exp(-ikx) dx`` of the penalized solution.

    Only odd `m` is covered by the closed form; k = 0 is the free constant
    and is 0 under the zero-mean convention.
    """
    if m % 2 == 0:
        raise ValueError(f"closed-form Fourier coefficients need odd m, got m={m}")
    if k == 0:
        return 0j
    if k % 2 == 0:
        return 1j / PI * m * m / (k * (m * m - k * k))
    val = 2.0 / (PI**2 * k * k) * (1 - eta) / (1 + eta)
    if abs(k) == abs(m):
        val += 0.25
    return complex(val)


# -- exact penalized eigenproblem -------------------------------------------

def characteristic_blocks(lam, eta):
    """Entries (a, b, c, d) of the 2x2 system for the solid-side coefficients.

    Works elementwise on arrays and also on complex `lam` (used for
    complex-step derivatives).
    """
    return blocks_from_frequencies(np.sqrt(lam), np.sqrt(lam / eta), eta)


def blocks_from_frequencies(s, t, eta):
    """(a, b, c, d) in terms of the fluid and solid wavenumbers ``s`` and ``t``.

    The solid wavenumber enters only through angles pi t and 2 pi t, so
    the blocks are 2-periodic in ``t`` at fixed ``s``.
    """
    r = np.sqrt(eta)
    c2, s2 = np.cos(2 * PI * t), np.sin(2 * PI * t)
    cs, ss = np.cos(PI * s), np.sin(PI * s)
    ct, st = np.cos(PI * t), np.sin(PI * t)
    a = c2 * cs - r * s2 * ss - ct
    b = s2 * cs + r * c2 * ss - st
    c = -c2 * ss - r * s2 * cs + r * st
    d = -s2 * ss + r * c2 * cs - r * ct
    return a, b, c, d


def characteristic_G(lam, eta):
    """Determinant ``ad - bc``; its zeros are the penalized eigenvalues."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")
    a, b, c, d = characteristic_blocks(lam, eta)
    return a * d - b * c


def _dG(lam, eta, step=1e-30):
    a, b, c, d = characteristic_blocks(complex(lam, step), eta)
    return (a * d - b * c).imag / step


def exact_eigenvalues(eta: float, lambda_max: float, tol: float = 1e-12,
                      g_tol: float = 1e-10, max_iter: int = 200) -> list[float]:
    """All zeros of G in (0, lambda_max], sorted, with lambda = 0 prepended.

    G is sampled with a step fine enough to resolve its oscillation in
    sqrt(lambda/eta); every sign change is bisected to `tol`.  Double
    roots, where G touches zero without changing sign, are found by
    bisecting G' at local minima of |G| and kept when |G| <= `g_tol`
    there.  Brackets that fail to converge are reported with a warning.
    """
    if not lambda_max > 0 or not tol > 0:
        raise ValueError("lambda_max and tol must be positive")
    step = min(eta, 1.0) * PI**2 / 100
    npts = int(np.ceil(lambda_max / step)) + 1
    grid = np.linspace(0.0, lambda_max, npts)[1:]
    grid = np.r_[grid[0] * 1e-3, grid]
    g = characteristic_G(grid, eta)

    roots, failed = [], []

    def solve(fun, lo, hi):
        x, res = optimize.bisect(fun, lo, hi, xtol=tol, maxiter=max_iter,
                                 full_output=True, disp=False)
        if not res.converged:
            failed.append((lo, hi))
            return None
        return x

    for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
        x = solve(lambda z: float(characteristic_G(z, eta)), grid[i], grid[i + 1])
        if x is not None:
            roots.append(x)

    absg = np.abs(g)
    for i in range(1, len(grid) - 1):
        if g[i] == 0.0:
            roots.append(float(grid[i]))
            continue
        if not (absg[i] <= absg[i - 1] and absg[i] <= absg[i + 1]):
            continue
        if np.sign(g[i - 1]) != np.sign(g[i]) or np.sign(g[i + 1]) != np.sign(g[i]):
            continue
        lo, hi = grid[i - 1], grid[i + 1]
        if np.sign(_dG(lo, eta)) == np.sign(_dG(hi, eta)):
            continue
        x = solve(lambda z: _dG(z, eta), lo, hi)
        if x is not None and abs(characteristic_G(x, eta)) <= g_tol:
            roots.append(x)

    if failed:
        warnings.warn(f"bisection did not converge on brackets {failed}", RuntimeWarning,
                      stacklevel=2)
    roots = sorted(r for r in roots if 0 < r <= lambda_max)
    out = [0.0]
    for r in roots:
        if r - out[-1] > 10 * tol:
            out.append(r)
    return out


def _sq_integrals(k, lo, hi):
    """Integrals of cos^2, sin^2 and 2 sin cos of (k x) over [lo, hi]."""
    L = hi - lo
    if k == 0:
        return L, 0.0, 0.0
    s2 = (np.sin(2 * k * hi) - np.sin(2 * k * lo)) / (4 * k)
    cross = (np.cos(2 * k * lo) - np.cos(2 * k * hi)) / (2 * k)
    return L / 2 + s2, L / 2 - s2, cross


@dataclass(frozen=True)
class ExactEigenmode:
    """Eigenfunction of the penalized operator, unit L2 norm on [0, 2 pi].

    ``A1 cos(sqrt(lam) x) + B1 sin(sqrt(lam) x)`` on (0, pi) and
    ``A2 cos(sqrt(lam/eta) x) + B2 sin(sqrt(lam/eta) x)`` on (pi, 2 pi).
    """

    lam: float
    eta: float
    a1: float
    b1: float
    a2: float
    b2: float

    @property
    def wavenumbers(self) -> tuple[float, float]:
        return np.sqrt(self.lam), np.sqrt(self.lam / self.eta)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s, t = self.wavenumbers
        fluid = self.a1 * np.cos(s * x) + self.b1 * np.sin(s * x)
        solid = self.a2 * np.cos(t * x) + self.b2 * np.sin(t * x)
        return np.where(x <= PI, fluid, solid)

    def _pieces(self, x):
        s, t = self.wavenumbers
        f = self.a1 * np.cos(s * x) + self.b1 * np.sin(s * x)
        df = s * (-self.a1 * np.sin(s * x) + self.b1 * np.cos(s * x))
        g = self.a2 * np.cos(t * x) + self.b2 * np.sin(t * x)
        dg = t * (-self.a2 * np.sin(t * x) + self.b2 * np.cos(t * x))
        return f, df, g, dg

    def flux(self, x):
        """theta * phi' (fluid diffusivity 1, solid eta)."""
        x = np.asarray(x, dtype=float)
        _, df, _, dg = self._pieces(x)
        return np.where(x <= PI, df, self.eta * dg)

    def interface_residuals(self) -> dict[str, float]:
        """Relative jumps of phi and theta phi' at x = pi and x = 0 (= 2 pi)."""
        out = {}
        for name, xf, xs in (("pi", PI, PI), ("0", 0.0, 2 * PI)):
            f, df, _, _ = self._pieces(xf)
            _, _, g, dg = self._pieces(xs)
            vscale = max(abs(f), abs(g), 1.0 / np.sqrt(2 * PI))
            fscale = max(abs(df), abs(self.eta * dg), np.sqrt(self.lam) / np.sqrt(2 * PI), 1e-300)
            out["value_" + name] = float(abs(f - g) / vscale)
            out["flux_" + name] = float(abs(df - self.eta * dg) / fscale)
        return out

    def norm(self) -> float:
        s, t = self.wavenumbers
        cc, ss, sc = _sq_integrals(s, 0.0, PI)
        fluid = self.a1**2 * cc + self.b1**2 * ss + self.a1 * self.b1 * sc
        cc, ss, sc = _sq_integrals(t, PI, 2 * PI)
        solid = self.a2**2 * cc + self.b2**2 * ss + self.a2 * self.b2 * sc
        return float(np.sqrt(fluid + solid))


def exact_eigenmode(lam: float, eta: float, rank_tol: float = 1e-6) -> ExactEigenmode:
    """Eigenfunction for a root `lam` of G, normalized to unit L2 norm.

    (A2, B2) spans the null space of the 2x2 system; (A1, B1) follow from
    continuity of value and flux at x = 0 = 2 pi.  At a double root the
    system vanishes identically and the cosine-type solution is returned.
    """
    if lam < 0:
        raise ValueError("eigenvalue must be nonnegative")
    if lam == 0:
        c = 1.0 / np.sqrt(2 * PI)
        return ExactEigenmode(0.0, eta, c, 0.0, c, 0.0)
    a, b, c, d = characteristic_blocks(lam, eta)
    M = np.array([[a, b], [c, d]])
    _, sv, vt = np.linalg.svd(M)
    if sv[0] < 1e-8:
        a2, b2 = 1.0, 0.0
    elif sv[1] > rank_tol * sv[0]:
        raise ValueError(f"lambda={lam!r} is not a root of G (singular values {sv})")
    else:
        a2, b2 = vt[-1]
    t = np.sqrt(lam / eta)
    c2, s2 = np.cos(2 * PI * t), np.sin(2 * PI * t)
    a1 = a2 * c2 + b2 * s2
    b1 = np.sqrt(eta) * (-a2 * s2 + b2 * c2)
    mode = ExactEigenmode(float(lam), eta, a1, b1, a2, b2)
    nrm = mode.norm()
    return ExactEigenmode(float(lam), eta, a1 / nrm, b1 / nrm, a2 / nrm, b2 / nrm)


def neumann_eigenpair(n: int):
    """Eigenvalue n^2 and L2(0, pi)-normalized eigenfunction of the Neumann Laplacian."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 0.0, lambda x: np.full_like(np.asarray(x, dtype=float), 1 / np.sqrt(PI))
    amp = np.sqrt(2 / PI)
    return float(n * n), lambda x: amp * np.cos(n * np.asarray(x, dtype=float))


# -- 2D test cases ------------------------------------------------------------

_LO, _HI = PI / 2, 3 * PI / 2
_POS_TOL = 1e-9


def exact_2d_square(x, y):
    """sin x cos 2y on the closed fluid square [pi/2, 3pi/2]^2."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any((x < _LO - _POS_TOL) | (x > _HI + _POS_TOL) | (y < _LO - _POS_TOL) | (y > _HI + _POS_TOL)):
        raise ValueError("exact square solution is only defined on the closed fluid square")
    return np.sin(x) * np.cos(2 * y)


def rhs_2d_square(x, y, mask_value=None):
    """Right-hand side of the square test case.

    Points are classified as interior, edge, corner or outside either by
    their position or, when `mask_value` is given, by the mask value
    (0, 1/2, 1/4, 1) with the position only choosing which edge/corner.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    on_lo_x, on_hi_x = np.abs(x - _LO) < _POS_TOL, np.abs(x - _HI) < _POS_TOL
    on_lo_y, on_hi_y = np.abs(y - _LO) < _POS_TOL, np.abs(y - _HI) < _POS_TOL
    in_x = (x > _LO + _POS_TOL) & (x < _HI - _POS_TOL)
    in_y = (y > _LO + _POS_TOL) & (y < _HI - _POS_TOL)
    on_x, on_y = on_lo_x | on_hi_x, on_lo_y | on_hi_y
    if mask_value is None:
        interior = in_x & in_y
        edge = (on_x & in_y) | (on_y & in_x)
        corner = on_x & on_y
    else:
        chi = np.broadcast_to(np.asarray(mask_value, dtype=float), x.shape)
        interior, edge, corner = chi == 0, chi == 0.5, chi == 0.25
        if np.any(edge & ~(on_x | on_y)) or np.any(corner & ~(on_x & on_y)):
            raise ValueError("interface mask values found off the square boundary")

    f = np.zeros(x.shape)
    f = np.where(interior, 5 * np.sin(x) * np.cos(2 * y), f)
    f = np.where(edge & on_lo_x, 2.5 * np.cos(2 * y), f)
    f = np.where(edge & on_hi_x, -2.5 * np.cos(2 * y), f)
    f = np.where(edge & on_y & ~on_x, -2.5 * np.sin(x), f)
    f = np.where(corner & on_lo_x, -1.25, f)
    f = np.where(corner & on_hi_x, 1.25, f)
    return f


def exact_2d_disc(r):
    """cos 2r + 4/pi^2 inside the fluid disc."""
    return np.cos(2 * np.asarray(r, dtype=float)) + 4 / PI**2


def rhs_2d_disc(r, mask_value=None, tol: float = 1e-12 * PI):
    """4 cos 2r + 2 sin(2r)/r inside the disc, -1/2 on the circle, 0 outside.

    The r = 0 singularity is removable (limit 8).  Branches follow the
    mask value when given, else r compared against pi within `tol`.
    """
    r = np.asarray(r, dtype=float)
    if mask_value is None:
        on = np.abs(r - PI) <= tol
        inside = (r < PI) & ~on
    else:
        chi = np.broadcast_to(np.asarray(mask_value, dtype=float), r.shape)
        inside, on = chi == 0, chi == 0.5
    safe = np.where(r == 0, 1.0, r)
    sinc_term = np.where(r == 0, 4.0, 2 * np.sin(2 * safe) / safe)
    f = np.where(inside, 4 * np.cos(2 * r) + sinc_term, 0.0)
    return np.where(on, -0.5, f)

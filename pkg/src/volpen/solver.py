"""Singular-system solves, dense spectra and condition estimates.

The penalized operator has the constants as its kernel.  A unique
solution is selected by a weighted zero-mean condition, either by
replacing one equation with it or by appending it and solving the
overdetermined system in the least-squares sense.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DENSE_LIMIT = 4096
ZERO_RTOL = 1e-13


class SolverError(RuntimeError):
    """Raised when a factorization or solve breaks down."""


@dataclass(frozen=True)
class ReplaceRow:
    """Replace equation `index` by ``weights . u = 0`` (weights default to ones)."""

    index: int
    weights: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class LeastSquaresAugment:
    """Append ``weights . u = 0`` and solve in the least-squares sense."""

    weights: np.ndarray | None = field(default=None, repr=False)


ConstraintStrategy = ReplaceRow | LeastSquaresAugment


def _weights(strategy, n):
    w = np.ones(n) if strategy.weights is None else np.asarray(strategy.weights, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"mean weights have shape {w.shape}, expected ({n},)")
    if np.any(w < 0) or not w.sum() > 0:
        raise ValueError("mean weights must be nonnegative with a positive sum")
    return w


def constrained_matrix(A, strategy: ReplaceRow) -> sp.csc_matrix:
    """Copy of `A` with row ``strategy.index`` replaced by the mean weights."""
    n = A.shape[0]
    k = strategy.index
    if not 0 <= k < n:
        raise ValueError(f"replacement row {k} outside 0..{n - 1}")
    w = _weights(strategy, n)
    keep = np.ones(n)
    keep[k] = 0.0
    nz = np.nonzero(w)[0]
    row = sp.csr_matrix((w[nz], (np.full(nz.size, k), nz)), shape=(n, n))
    return (sp.diags(keep) @ sp.csr_matrix(A) + row).tocsc()


def _factor(M):
    try:
        return spla.splu(sp.csc_matrix(M))
    except RuntimeError as exc:
        raise SolverError(f"sparse LU factorization failed: {exc}") from None


def solve_constrained(A, f, strategy: ConstraintStrategy) -> np.ndarray:
    """Solve ``A u = f`` on the complement of the kernel fixed by `strategy`."""
    n = A.shape[0]
    f = np.asarray(f, dtype=float)
    if A.shape != (n, n) or f.shape != (n,):
        raise ValueError(f"operator {A.shape} and right-hand side {f.shape} do not match")
    if not np.all(np.isfinite(f)):
        raise ValueError("right-hand side has non-finite entries")

    if isinstance(strategy, ReplaceRow):
        C = constrained_matrix(A, strategy)
        rhs = f.copy()
        rhs[strategy.index] = 0.0
        u = _factor(C).solve(rhs)
    elif isinstance(strategy, LeastSquaresAugment):
        w = _weights(strategy, n)
        M = sp.vstack([sp.csr_matrix(A), sp.csr_matrix(w)])
        # residual form of the normal equations: [I M; M^T 0] [r; u] = [b; 0]
        K = sp.bmat([[sp.identity(n + 1), M], [M.T, None]], format="csc")
        z = _factor(K).solve(np.concatenate([f, [0.0], np.zeros(n)]))
        u = z[n + 1:]
    else:
        raise TypeError(f"unknown constraint strategy {strategy!r}")

    if not np.all(np.isfinite(u)):
        raise SolverError("constrained system is numerically singular (non-finite solution)")
    return u


@dataclass(frozen=True)
class SpectrumResult:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    zero_rtol: float = ZERO_RTOL

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def lambda_max(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    @property
    def kernel_dim(self) -> int:
        return int(np.sum(np.abs(self.eigenvalues) < self.zero_rtol * self.lambda_max))

    @property
    def zero_mode(self) -> float:
        return float(self.eigenvalues[0])

    def residuals(self, A) -> np.ndarray:
        """``||A q_i - lambda_i q_i||_2`` for every pair."""
        Q = self.eigenvectors
        return np.linalg.norm(A @ Q - Q * self.eigenvalues, axis=0)


def eigen_decompose(A, dense_limit: int = DENSE_LIMIT, zero_rtol: float = ZERO_RTOL) -> SpectrumResult:
    """Full symmetric eigendecomposition of `A` through a dense LAPACK solver."""
    n = A.shape[0]
    if n > dense_limit:
        raise ValueError(f"dimension {n} exceeds the dense eigensolver limit {dense_limit}")
    dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    asym = np.max(np.abs(dense - dense.T))
    if asym > 1e-12 * np.max(np.abs(dense)):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    lam, Q = np.linalg.eigh(dense)
    return SpectrumResult(lam, Q, zero_rtol)


def condition_estimate(A_constrained, max_iter: int = 100, rtol: float = 1e-4,
                       seed: int = 0) -> float:
    """2-norm condition number sigma_max / sigma_min by power iterations.

    sigma_max comes from power iteration on A^T A, sigma_min from inverse
    iteration reusing one LU factorization of A.  Iteration stops when the
    estimate changes by less than `rtol`; otherwise a RuntimeWarning
    reports the last relative change.
    """
    A = sp.csc_matrix(A_constrained)
    lu = _factor(A)
    rng = np.random.default_rng(seed)
    n = A.shape[0]

    def power(step):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        est, gap = 0.0, np.inf
        for _ in range(max_iter):
            y = step(x)
            new = np.linalg.norm(y)
            x = y / new
            gap = abs(new - est) / new
            est = new
            if gap < rtol:
                return est, gap
        warnings.warn(f"power iteration stopped after {max_iter} steps, last relative change {gap:.3g}",
                      RuntimeWarning, stacklevel=3)
        return est, gap

    smax2, _ = power(lambda x: A.T @ (A @ x))
    sinv2, _ = power(lambda x: lu.solve(lu.solve(x, trans="T")))
    return float(max(np.sqrt(smax2 * sinv2), 1.0))

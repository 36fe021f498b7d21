"""Sparse finite-difference assembly of -div(theta grad .) with periodic wrap.

The symmetrized scheme -1/2 (D_F Theta D_B + D_B Theta D_F) reduces to a
three-point stencil whose face coefficient is the arithmetic mean of the
two adjacent theta values; the 2D operator applies it along each axis.
"""

from __future__ import annotations

import csv
from typing import IO

import numpy as np
import scipy.sparse as sp

from .geometry import DiffusivityField, Grid1D, Grid2D


def _check_len(theta, grid):
    if theta.values.size != grid.size:
        raise ValueError(f"diffusivity has {theta.values.size} values, grid has {grid.size} points")


def _from_faces(n, rows, cols, face):
    """Symmetric matrix from face couplings ``rows[f] <-> cols[f]`` with weight ``face[f]``."""
    r = np.concatenate([rows, cols, rows, cols])
    c = np.concatenate([cols, rows, rows, cols])
    v = np.concatenate([-face, -face, face, face])
    return sp.csr_matrix((v, (r, c)), shape=(n, n))


def assemble_1d(theta: DiffusivityField, grid: Grid1D) -> sp.csr_matrix:
    """Three-point periodic stencil; face i+1/2 couples points i and i+1."""
    _check_len(theta, grid)
    th = theta.values
    face = 0.5 * (th + np.roll(th, -1)) / grid.h**2
    i = np.arange(grid.n)
    return _from_faces(grid.n, i, (i + 1) % grid.n, face)


def assemble_2d(theta: DiffusivityField, grid: Grid2D) -> sp.csr_matrix:
    """Five-point periodic stencil on the C-ordered ``(ny, nx)`` layout."""
    _check_len(theta, grid)
    th = theta.values.reshape(grid.ny, grid.nx)
    k = np.arange(grid.size).reshape(grid.ny, grid.nx)
    fx = 0.5 * (th + np.roll(th, -1, axis=1)) / grid.hx**2
    fy = 0.5 * (th + np.roll(th, -1, axis=0)) / grid.hy**2
    rows = np.concatenate([k.ravel(), k.ravel()])
    cols = np.concatenate([np.roll(k, -1, axis=1).ravel(), np.roll(k, -1, axis=0).ravel()])
    return _from_faces(grid.size, rows, cols, np.concatenate([fx.ravel(), fy.ravel()]))


def apply(matrix, vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (matrix.shape[1],):
        raise ValueError(f"vector of shape {vec.shape} does not match operator of shape {matrix.shape}")
    return matrix @ vec


def write_coo(matrix, fh: IO[str]) -> None:
    """Dump nonzeros as ``row,col,value`` lines."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["row", "col", "value"])
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        w.writerow([int(r), int(c), f"{v:.17g}"])

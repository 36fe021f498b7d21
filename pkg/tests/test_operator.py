import io

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from volpen.geometry import (DiffusivityField, Grid1D, Grid2D, build_mask_1d, build_mask_disc,
                             build_mask_square, diffusivity)
from volpen.operator import apply, assemble_1d, assemble_2d, write_coo
from volpen.solver import eigen_decompose


def _diff_matrices(n, h):
    """Periodic backward and forward first differences as dense matrices."""
    eye = np.eye(n)
    DB = (eye - np.roll(eye, -1, axis=1)) / h
    DF = (np.roll(eye, 1, axis=1) - eye) / h
    return DB, DF


def _product_form_1d(theta, h):
    DB, DF = _diff_matrices(theta.size, h)
    T = np.diag(theta)
    return -0.5 * (DF @ T @ DB + DB @ T @ DF)


def _product_form_2d(theta, grid):
    DBx, DFx = _diff_matrices(grid.nx, grid.hx)
    DBy, DFy = _diff_matrices(grid.ny, grid.hy)
    Ix, Iy = np.eye(grid.nx), np.eye(grid.ny)
    # C order: x is the fast index
    DBx, DFx = np.kron(Iy, DBx), np.kron(Iy, DFx)
    DBy, DFy = np.kron(DBy, Ix), np.kron(DFy, Ix)
    T = np.diag(theta)
    return -0.5 * (DFx @ T @ DBx + DBx @ T @ DFx + DFy @ T @ DBy + DBy @ T @ DFy)


def test_difference_matrices_are_what_they_claim():
    n, h = 6, 0.5
    DB, DF = _diff_matrices(n, h)
    u = np.arange(n, dtype=float) ** 2
    np.testing.assert_allclose(DB @ u, (u - np.roll(u, 1)) / h)
    np.testing.assert_allclose(DF @ u, (np.roll(u, -1) - u) / h)


def test_1d_matches_product_form():
    g = Grid1D(8)
    th = diffusivity(build_mask_1d(g), 1e-2)
    A = assemble_1d(th, g).toarray()
    np.testing.assert_allclose(A, _product_form_1d(th.values, g.h), rtol=1e-14, atol=1e-14 * np.abs(A).max())


@pytest.mark.parametrize("mask_fn", [build_mask_square, build_mask_disc])
def test_2d_matches_product_form(mask_fn):
    g = Grid2D(8, 8)
    th = diffusivity(mask_fn(g), 1e-2)
    A = assemble_2d(th, g).toarray()
    np.testing.assert_allclose(A, _product_form_2d(th.values, g), rtol=1e-14, atol=1e-14 * np.abs(A).max())


def test_2d_rectangular_matches_product_form():
    g = Grid2D(8, 12)
    rng = np.random.default_rng(3)
    th = DiffusivityField(rng.uniform(0.1, 1.0, g.size), 0.1)
    A = assemble_2d(th, g).toarray()
    np.testing.assert_allclose(A, _product_form_2d(th.values, g), atol=1e-13 * np.abs(A).max())


def test_constant_coefficient_1d():
    g = Grid1D(16)
    A = assemble_1d(DiffusivityField(np.ones(16), 1.0), g).toarray()
    assert np.allclose(np.diag(A), 2 / g.h**2)
    assert np.allclose(np.diag(A, 1), -1 / g.h**2)
    assert A[0, -1] == pytest.approx(-1 / g.h**2)


def test_constant_coefficient_2d():
    g = Grid2D(8, 16)
    A = assemble_2d(DiffusivityField(np.ones(g.size), 1.0), g)
    np.testing.assert_allclose(A.diagonal(), 2 / g.hx**2 + 2 / g.hy**2)


def test_nonzeros_per_row():
    g = Grid1D(16)
    A = assemble_1d(diffusivity(build_mask_1d(g), 1e-8), g)
    assert np.all(A.getnnz(axis=1) == 3)
    g = Grid2D(8, 8)
    A = assemble_2d(diffusivity(build_mask_square(g), 1e-8), g)
    assert np.all(A.getnnz(axis=1) == 5)


@pytest.mark.parametrize("eta", [1e-8, 1e-2, 1.0])
def test_entrywise_symmetry(eta):
    for g, A in ((Grid1D(32), None), (Grid2D(16, 16), None)):
        if isinstance(g, Grid1D):
            A = assemble_1d(diffusivity(build_mask_1d(g), eta), g)
        else:
            A = assemble_2d(diffusivity(build_mask_square(g), eta), g)
        diff = abs(A - A.T).max()
        assert diff <= 1e-14 * abs(A).max()


def test_constants_in_kernel():
    for eta in (1e-8, 0.3):
        g = Grid1D(32)
        A = assemble_1d(diffusivity(build_mask_1d(g), eta), g)
        assert np.abs(apply(A, np.ones(32))).max() <= 1e-14 * abs(A).max()
        g = Grid2D(16, 16)
        A = assemble_2d(diffusivity(build_mask_disc(g), eta), g)
        assert np.abs(apply(A, np.ones(g.size))).max() <= 1e-14 * abs(A).max()


def test_apply_unit_vector_gives_column():
    g = Grid1D(8)
    A = assemble_1d(diffusivity(build_mask_1d(g), 0.1), g)
    e = np.zeros(8)
    e[3] = 1.0
    np.testing.assert_array_equal(apply(A, e), A.toarray()[:, 3])


def test_apply_discrete_symbol():
    g = Grid1D(32)
    A = assemble_1d(DiffusivityField(np.ones(32), 1.0), g)
    u = np.cos(g.points)
    np.testing.assert_allclose(apply(A, u), (2 - 2 * np.cos(g.h)) / g.h**2 * u, atol=1e-12)


def test_apply_rejects_wrong_length():
    A = assemble_1d(diffusivity(build_mask_1d(Grid1D(8)), 0.1), Grid1D(8))
    with pytest.raises(ValueError):
        apply(A, np.ones(9))


def test_assembly_rejects_size_mismatch():
    th = diffusivity(build_mask_1d(Grid1D(8)), 0.1)
    with pytest.raises(ValueError):
        assemble_1d(th, Grid1D(16))
    with pytest.raises(ValueError):
        assemble_2d(th, Grid2D(4, 4))


def test_consistency_second_order():
    errs, hs = [], []
    for n in (16, 32, 64, 128, 256):
        g = Grid1D(n)
        x = g.points
        u = np.exp(np.sin(x))
        lap = np.exp(np.sin(x)) * (np.cos(x) ** 2 - np.sin(x))
        A = assemble_1d(DiffusivityField(np.ones(n), 1.0), g)
        errs.append(np.abs(apply(A, u) + lap).max())
        hs.append(g.h)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope == pytest.approx(2, abs=0.1)


@pytest.mark.parametrize("n, eta", [(8, 1e-2), (32, 1e-8), (64, 1e-3), (128, 1.0)])
def test_kernel_dimension_one(n, eta):
    g = Grid1D(n)
    spec = eigen_decompose(assemble_1d(diffusivity(build_mask_1d(g), eta), g), zero_rtol=1e-10)
    assert spec.kernel_dim == 1


def test_kernel_dimension_one_2d():
    g = Grid2D(8, 8)
    spec = eigen_decompose(assemble_2d(diffusivity(build_mask_square(g), 1e-2), g), zero_rtol=1e-10)
    assert spec.kernel_dim == 1


_theta = st.lists(st.floats(1e-8, 1.0), min_size=4, max_size=24)


@settings(max_examples=60, deadline=None)
@given(_theta, st.integers(0, 2**31 - 1))
def test_property_symmetric_psd_constant_kernel(vals, seed):
    n = len(vals)
    g = Grid1D(n)
    A = assemble_1d(DiffusivityField(np.array(vals), 1e-8), g)
    rng = np.random.default_rng(seed)
    u, w = rng.standard_normal(n), rng.standard_normal(n)
    Au, Aw = A @ u, A @ w
    norm = np.linalg.norm(A.toarray(), 2)
    assert abs(Au @ w - u @ Aw) <= 1e-12 * np.linalg.norm(Au) * np.linalg.norm(w) + 1e-300
    assert Au @ u >= -1e-12 * norm * (u @ u)
    assert np.abs(A @ np.ones(n)).max() <= 1e-14 * abs(A).max()


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4).map(lambda k: 4 * k), st.integers(1, 4).map(lambda k: 4 * k),
       st.integers(0, 2**31 - 1))
def test_property_2d_symmetric_psd(nx, ny, seed):
    g = Grid2D(nx, ny)
    rng = np.random.default_rng(seed)
    A = assemble_2d(DiffusivityField(rng.uniform(1e-6, 1, g.size), 1e-6), g)
    u, w = rng.standard_normal(g.size), rng.standard_normal(g.size)
    assert abs((A @ u) @ w - u @ (A @ w)) <= 1e-12 * np.linalg.norm(A @ u) * np.linalg.norm(w)
    assert (A @ u) @ u >= -1e-12 * abs(A).sum(axis=1).max() * (u @ u)


def test_coo_export_round_trip():
    g = Grid1D(8)
    A = assemble_1d(diffusivity(build_mask_1d(g), 1e-2), g)
    buf = io.StringIO()
    write_coo(A, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "row,col,value"
    data = np.array([[float(t) for t in ln.split(",")] for ln in lines[1:]])
    B = sp.coo_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=A.shape)
    assert (abs(A - B)).max() == 0.0

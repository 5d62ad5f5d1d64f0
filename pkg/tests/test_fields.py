import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sector_homog.errors import NotNormalizableError
from sector_homog.fields import (CheckerboardField, ConstantField, GenericPeriodicField,
                                 RotatedPeriodicField, default_periodic_cell, eval_coeff,
                                 normalize_to_identity)


def test_constant_identity():
    f = ConstantField()
    assert np.allclose(eval_coeff(f, [0.3, -2.0]), np.eye(2))


def test_default_cell_values():
    cell = default_periodic_cell()
    assert math.isclose(cell(np.array([0.0, 0.0])), 1.0)
    assert math.isclose(cell(np.array([0.25, 0.25])), math.exp(1.5), rel_tol=1e-12)
    assert math.isclose(cell(np.array([0.25, 0.75])), math.exp(-1.5), rel_tol=1e-12)


def test_default_cell_swap_symmetry():
    cell = default_periodic_cell()
    pts = np.random.default_rng(0).random((64, 2))
    swapped = pts[:, ::-1]
    assert np.allclose(cell(pts), cell(swapped))


def test_rotated_periodic_formula():
    cell = default_periodic_cell()
    f = RotatedPeriodicField(cell, 0.35, 0.07, normalization=1.3)
    pts = np.random.default_rng(1).random((32, 2)) * 3.0
    S = f.S
    expected = cell((pts @ S) / 0.07) / 1.3
    got = f.eval(pts)
    assert np.allclose(got[:, 0, 0], expected)
    assert np.allclose(got[:, 0, 1], 0.0)
    assert np.allclose(got[:, 1, 1], expected)


def test_checkerboard_values():
    f = CheckerboardField(contrast=4.0, epsilon=1.0, seed=0)
    a_high = eval_coeff(f, [0.5, 0.5])   # tile (0,0): parity even -> high
    a_low = eval_coeff(f, [1.5, 0.5])    # tile (1,0): parity odd -> low
    assert np.allclose(a_high, 2.0 * np.eye(2))
    assert np.allclose(a_low, 0.5 * np.eye(2))


def test_checkerboard_cell_consistency():
    f = CheckerboardField(contrast=4.0, epsilon=0.25, seed=5)
    pts = np.random.default_rng(2).random((256, 2)) * 2.0 - 0.5
    direct = f.scalar_values(pts)
    via_cell = f.cell_scalar_at(f.to_cell_coords(pts))
    assert np.allclose(direct, via_cell)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(-4, 4), st.integers(-4, 4))
def test_periodicity(x, y, kx, ky):
    eps = 0.21
    f = RotatedPeriodicField(default_periodic_cell(), 0.35, eps)
    p = np.array([x, y])
    shift = eps * (f.S @ np.array([kx, ky], dtype=float))
    a0 = eval_coeff(f, p)
    a1 = eval_coeff(f, p + shift)
    assert np.allclose(a0, a1, rtol=1e-10, atol=1e-12)


def test_symmetry_and_ellipticity_bounds():
    f = RotatedPeriodicField(default_periodic_cell(), 0.35, 0.1, normalization=1.02)
    pts = np.random.default_rng(3).random((10_000, 2)) * 10.0 - 5.0
    mats = f.eval(pts)
    assert np.allclose(mats, np.swapaxes(mats, -1, -2))
    lam = f.ellipticity
    eigs = mats[:, 0, 0]  # isotropic: both eigenvalues equal the scalar
    assert np.all(eigs >= lam * (1.0 - 1e-12))
    assert np.all(eigs <= 1.0 / lam * (1.0 + 1e-12))


def test_normalize_constant():
    f = ConstantField(2.0 * np.eye(2))
    g = normalize_to_identity(f, 2.0 * np.eye(2))
    assert np.allclose(g.matrix, np.eye(2))


def test_normalize_rejects_anisotropic():
    f = ConstantField()
    with pytest.raises(NotNormalizableError):
        normalize_to_identity(f, np.array([[2.0, 0.0], [0.0, 0.5]]))


def test_generic_periodic_normalized():
    g = GenericPeriodicField(cell=lambda y: 2.0 * np.ones(y.shape[:-1]))
    gn = g.normalized(2.0)
    pts = np.zeros((4, 2))
    assert np.allclose(gn.scalar_values(pts), 1.0)

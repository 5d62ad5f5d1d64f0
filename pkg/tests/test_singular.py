import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sector_homog.errors import SingularityError
from sector_homog.singular import (CutoffBump, SingularFunction, eval_cutoff, eval_tau,
                                   smoothstep)

OMEGA = 1.95 * math.pi


def test_half_plane_mode_is_linear():
    sf = SingularFunction(1, math.pi)
    pts = np.random.default_rng(0).random((32, 2)) * 2 - 1
    pts[:, 1] = np.abs(pts[:, 1]) + 0.01
    val, grad = eval_tau(sf, pts)
    assert np.allclose(val, pts[:, 1], atol=1e-12)
    assert np.allclose(grad, np.array([0.0, 1.0]), atol=1e-12)


def test_slit_first_exponent():
    sf = SingularFunction(1, 2.0 * math.pi)
    assert math.isclose(sf.rho, 0.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.01, 0.99), st.integers(1, 4))
def test_homogeneity(r, tfrac, n):
    sf = SingularFunction(n, OMEGA)
    th = tfrac * OMEGA
    x = np.array([r * math.cos(th), r * math.sin(th)])
    v1 = sf.value(2.0 * x)
    v2 = 2.0 ** sf.rho * sf.value(x)
    assert math.isclose(v1, v2, rel_tol=1e-12, abs_tol=1e-13)


def test_edge_vanishing():
    for n in (1, 2, 3):
        sf = SingularFunction(n, OMEGA)
        for r in (1e-6, 1e-3, 1.0, 1e3):
            lower = np.array([r, 0.0])
            upper = r * np.array([math.cos(OMEGA), math.sin(OMEGA)])
            assert abs(sf.value(lower)) <= 1e-12 * max(1.0, r ** sf.rho)
            assert abs(sf.value(upper)) <= 1e-12 * max(1.0, r ** sf.rho)


def test_finite_difference_harmonicity_rate():
    sf = SingularFunction(1, OMEGA)
    x = np.array([0.3 * math.cos(0.4 * OMEGA), 0.3 * math.sin(0.4 * OMEGA)])

    def fd_laplacian(h):
        pts = x + np.array([[h, 0], [-h, 0], [0, h], [0, -h], [0, 0]])
        v = sf.value(pts)
        return (v[0] + v[1] + v[2] + v[3] - 4 * v[4]) / h**2

    l1, l2 = abs(fd_laplacian(1e-3)), abs(fd_laplacian(5e-4))
    assert l1 < 1e-3
    assert l2 < l1  # decays under h refinement


def test_dual_harmonic_and_singular():
    sf = SingularFunction(2, OMEGA, dual=True)
    x = np.array([0.5 * math.cos(0.3 * OMEGA), 0.5 * math.sin(0.3 * OMEGA)])
    h = 1e-4
    pts = x + np.array([[h, 0], [-h, 0], [0, h], [0, -h], [0, 0]])
    v = sf.value(pts)
    assert abs((v[:4].sum() - 4 * v[4]) / h**2) < 1e-2
    with pytest.raises(SingularityError):
        sf.value(np.zeros(2))


def test_gradient_and_hessian_match_finite_differences():
    for dual in (False, True):
        sf = SingularFunction(2, OMEGA, dual=dual)
        x = np.array([0.7 * math.cos(0.6 * OMEGA), 0.7 * math.sin(0.6 * OMEGA)])
        h = 1e-6
        g = sf.gradient(x)
        for k in range(2):
            dx = np.zeros(2)
            dx[k] = h
            fd = (sf.value(x + dx) - sf.value(x - dx)) / (2 * h)
            assert math.isclose(g[k], fd, rel_tol=1e-6, abs_tol=1e-8)
        H = sf.hessian(x)
        h2 = 1e-5
        for k in range(2):
            dx = np.zeros(2)
            dx[k] = h2
            fd = (sf.gradient(x + dx) - sf.gradient(x - dx)) / (2 * h2)
            assert np.allclose(H[k], fd, rtol=1e-4, atol=1e-6)
        assert abs(H[0, 0] + H[1, 1]) < 1e-7 * (abs(H[0, 0]) + 1)  # harmonic


def test_mode_orthogonality_on_shell():
    # angular factors integrate to zero for distinct modes
    th = np.linspace(0.0, OMEGA, 20001)
    w = np.gradient(th)
    for n, m in [(1, 2), (1, 3), (2, 3)]:
        rn, rm = n * math.pi / OMEGA, m * math.pi / OMEGA
        val = np.sum(np.sin(rn * th) * np.sin(rm * th) * w)
        assert abs(val) < 1e-10


def test_cutoff_plateau_and_outside():
    bump = CutoffBump(0.8)
    v, g, lap = eval_cutoff(bump, np.array([0.1, 0.1]))
    assert v == 1.0 and np.allclose(g, 0.0) and lap == 0.0
    v, g, lap = eval_cutoff(bump, np.array([1.0, 0.8]))
    assert v == 0.0 and np.allclose(g, 0.0) and lap == 0.0


def test_cutoff_midtransition_values():
    R = 0.6
    bump = CutoffBump(R)
    x = np.array([0.75 * R, 0.0])
    v, g, _ = eval_cutoff(bump, x)
    assert math.isclose(v, 0.5, abs_tol=1e-12)
    assert math.isclose(np.linalg.norm(g), (15.0 / 4.0) / R, rel_tol=1e-12)
    assert g[0] < 0  # points inward


def test_cutoff_gradient_bound():
    R = 0.37
    bump = CutoffBump(R)
    r = np.linspace(0.0, 1.2 * R, 4001)
    pts = np.stack([r, np.zeros_like(r)], axis=1)
    gn = np.linalg.norm(bump.gradient(pts), axis=1)
    assert gn.max() <= 4.0 / R


def test_cutoff_laplacian_finite_and_continuous():
    bump = CutoffBump(1.0)
    r = np.linspace(0.0, 1.1, 2001)
    pts = np.stack([r, np.zeros_like(r)], axis=1)
    lap = bump.laplacian(pts)
    assert np.all(np.isfinite(lap))
    assert abs(lap[0]) == 0.0


def test_cutoff_dirichlet_energy_scale_invariance():
    def energy(R):
        bump = CutoffBump(R)
        r = np.linspace(1e-6, R, 40001)
        d1 = bump.profile_d1(r)
        return np.trapezoid(d1**2 * 2.0 * np.pi * r, r)

    e1, e2, e3 = energy(0.2), energy(0.4), energy(0.8)
    assert math.isclose(e1, e2, rel_tol=1e-10)
    assert math.isclose(e2, e3, rel_tol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2.0, 3.0))
def test_smoothstep_range_and_flats(t):
    v = float(smoothstep(t))
    assert 0.0 <= v <= 1.0
    if t <= 0:
        assert v == 0.0
    if t >= 1:
        assert v == 1.0

import numpy as np
import pytest
from scipy.special import roots_legendre

from loghls.grids import make_sphere_grid
from loghls.sht import (SphereTransform, assoc_legendre_single_m,
                        legendre_analyze, legendre_synthesize,
                        normalized_assoc_legendre)


def test_normalized_assoc_legendre_orthonormal():
    z, w = roots_legendre(64)
    Q = normalized_assoc_legendre(40, z)
    for m in range(0, 9):
        B = Q[m:41, m, :]
        G = (B * (w / 2.0)) @ B.T
        assert np.max(np.abs(G - np.eye(G.shape[0]))) <= 1e-12


def test_single_m_matches_table():
    z = np.linspace(-0.99, 0.99, 37)
    Q = normalized_assoc_legendre(20, z)
    for m in (0, 1, 5, 17):
        rows = assoc_legendre_single_m(20, m, z)
        assert np.max(np.abs(rows - Q[m:, m, :])) <= 1e-13


def test_transform_roundtrip_band_limited():
    grid = make_sphere_grid(32, 64)
    tr = SphereTransform(grid, lmax=10)
    rng = np.random.default_rng(5)
    c = np.zeros((11, 11))
    s = np.zeros((11, 11))
    for l in range(11):
        c[l, : l + 1] = rng.normal(size=l + 1)
        s[l, 1: l + 1] = rng.normal(size=l)
    vals = tr.synthesize(c, s)
    c2, s2 = tr.analyze(vals)
    assert np.max(np.abs(c2 - c)) <= 1e-12
    assert np.max(np.abs(s2 - s)) <= 1e-12
    # pointwise evaluation agrees with grid synthesis
    pts_z = np.repeat(grid.z[:, None], grid.n_phi, axis=1)
    pts_phi = np.repeat(grid.phi[None, :], grid.n_z, axis=0)
    again = tr.evaluate(c, s, pts_z, pts_phi)
    assert np.max(np.abs(again - vals)) <= 1e-12


def test_dirichlet_energy_eigenvalues():
    grid = make_sphere_grid(32, 64)
    tr = SphereTransform(grid, lmax=12)
    vals = np.repeat(grid.z[:, None], grid.n_phi, axis=1)   # u = z
    c, s = tr.analyze(vals)
    assert tr.dirichlet_energy(c, s) == pytest.approx(2.0 / 3.0, abs=1e-13)
    # an orthonormal harmonic has energy l(l+1)
    c = np.zeros((13, 13))
    s = np.zeros((13, 13))
    c[7, 3] = 1.0
    vals = tr.synthesize(c, s)
    c2, s2 = tr.analyze(vals)
    assert tr.dirichlet_energy(c2, s2) == pytest.approx(56.0, rel=1e-12)


def test_legendre_analyze_exact_for_polynomials():
    grid = make_sphere_grid(32, 8)
    coeffs = np.array([1.0, 0.5, 0.0, -0.25])
    vals = legendre_synthesize(coeffs, grid.z)
    back = legendre_analyze(vals, grid, 8)
    assert np.max(np.abs(back[:4] - coeffs)) <= 1e-13
    assert np.max(np.abs(back[4:])) <= 1e-13

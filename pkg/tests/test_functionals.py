import numpy as np
import pytest
from scipy.special import i0

from loghls.errors import (DomainError, NormalizationError, PositivityError,
                           PreconditionError)
from loghls.fields import (CircleField, SphereField, gaussian_radial,
                           planar_from_profile, radial_from_profile)
from loghls.functionals import (LOG_PI, dirichlet_energy, entropy_term,
                                half_laplacian_energy, lebedev_milin_functional,
                                log_interaction, onofri_entropy_form_gap,
                                onofri_functional, planar_free_energy,
                                planar_free_energy_report, sphere_green_apply,
                                sphere_log_interaction,
                                sphere_log_interaction_zkernel,
                                spherical_free_energy)
from loghls.geometry import lift_T, sphere_optimizer_values
from loghls.grids import make_cartesian_grid, make_radial_grid
from loghls.optimizers import (CircleOptimizerParams, PlanarOptimizerParams,
                               circle_optimizer, planar_optimizer)

EULER_GAMMA = float(np.euler_gamma)


# ----------------------------------------------------------------------
# planar interaction / free energy
# ----------------------------------------------------------------------

def test_angular_mean_identity_oracle():
    """Numeric azimuthal mean of log|x - x'| equals log max(|x|, |x'|)."""
    rng = np.random.default_rng(4)
    theta = 2 * np.pi * np.arange(4096) / 4096
    for _ in range(20):
        r1, r2 = rng.uniform(0.1, 5.0, size=2)
        if abs(r1 - r2) < 0.05:
            r2 = r1 + 0.5
        d2 = r1**2 + r2**2 - 2 * r1 * r2 * np.cos(theta)
        mean = float(np.mean(0.5 * np.log(d2)))
        assert abs(mean - np.log(max(r1, r2))) <= 1e-8


def test_uniform_disk_interaction():
    g = make_radial_grid(1.0, 2048, scheme="uniform")
    disk = radial_from_profile(g, lambda r: np.full_like(np.asarray(r), 1.0 / np.pi))
    assert log_interaction(disk) == pytest.approx(-0.25, abs=1e-6)


def test_gaussian_values(radial_fine):
    rho = gaussian_radial(radial_fine)
    inter = log_interaction(rho)
    assert inter == pytest.approx(np.log(2.0) - EULER_GAMMA / 2.0, abs=1e-8)
    rep = planar_free_energy_report(rho)
    assert rep.entropy == pytest.approx(-np.log(2 * np.pi) - 1.0, abs=1e-8)
    assert rep.total == pytest.approx(np.log(2.0) - EULER_GAMMA, abs=1e-6)


def test_gaussian_dilation_invariance(radial_fine):
    vals = [planar_free_energy(gaussian_radial(radial_fine, s)) for s in (0.5, 1.0, 2.0)]
    assert max(vals) - min(vals) <= 1e-5


def test_optimizer_family_values(radial_fine):
    h = radial_from_profile(radial_fine, lambda r: (1 / np.pi) * (1 + r**2) ** -2)
    assert log_interaction(h) == pytest.approx(0.5, abs=1e-6)
    assert entropy_term(h) == pytest.approx(-LOG_PI - 2.0, abs=1e-6)
    for s in (0.5, 1.0, 2.0):
        rho = planar_optimizer(PlanarOptimizerParams(s), radial_fine)
        assert abs(planar_free_energy(rho)) <= 1e-6


def test_cartesian_free_energy_offcenter():
    grid = make_cartesian_grid(40.0, 512)
    rho = planar_optimizer(PlanarOptimizerParams(1.0, (1.0, -1.0)), grid)
    assert abs(planar_free_energy(rho)) <= 1e-3


def test_cartesian_matches_radial_for_gaussian(radial_fine):
    grid = make_cartesian_grid(20.0, 256)
    rho_c = planar_from_profile(
        grid, lambda x, y: np.exp(-(x**2 + y**2) / 2) / (2 * np.pi)).normalized()
    rho_r = gaussian_radial(radial_fine)
    assert log_interaction(rho_c) == pytest.approx(log_interaction(rho_r), abs=1e-8)


def test_radial_interaction_consistent_with_double_sum(radial_fine):
    """The cumulative-mass evaluation agrees with the plain product-rule
    double sum built from the same angular-mean identity (the double sum
    itself carries an O(n^-2) diagonal-kink error, hence the tolerance)."""
    rho = gaussian_radial(radial_fine)
    m = radial_fine.weights * rho.values
    logr = np.log(radial_fine.nodes)
    S1 = np.cumsum(m)
    S2 = np.concatenate((np.cumsum((m * logr)[::-1])[::-1][1:], [0.0]))
    brute = float(np.sum(m * (logr * S1 + S2)))
    assert log_interaction(rho) == pytest.approx(brute, abs=1e-5)


def test_free_energy_mass_precondition(radial_fine):
    rho = radial_from_profile(radial_fine, lambda r: 2 * np.exp(-r**2) / np.pi)
    with pytest.raises(NormalizationError):
        planar_free_energy(rho)


def test_divergent_log_moment_rejected(radial_fine):
    heavy = radial_from_profile(radial_fine, lambda r: 1.0 / (1.0 + r**2))
    with pytest.raises(DomainError):
        log_interaction(heavy)


# ----------------------------------------------------------------------
# sphere
# ----------------------------------------------------------------------

def test_spherical_free_energy_zero_field(sphere_grid):
    f = SphereField(sphere_grid, np.zeros(sphere_grid.shape), axisymmetric=True)
    rep = spherical_free_energy(f)
    assert rep.total == 0.0 and rep.entropy == 0.0 and rep.interaction == 0.0


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_spherical_free_energy_on_optimizers(sphere_grid, t):
    vals = np.exp(sphere_optimizer_values(t, np.array([0, 0, 1.0]), sphere_grid.points()))
    f = SphereField(sphere_grid, vals - 1.0, axisymmetric=True)
    assert abs(spherical_free_energy(f, mean_tol=1e-6).total) <= 1e-5


def test_spherical_free_energy_tilted_optimizer(sphere_grid):
    n = np.array([0.6, 0.0, 0.8])
    vals = np.exp(sphere_optimizer_values(1.0, n, sphere_grid.points()))
    f = SphereField(sphere_grid, vals - 1.0)
    assert abs(spherical_free_energy(f, mean_tol=1e-6).total) <= 1e-4


def test_sphere_interaction_zkernel_cross_check(sphere_grid, radial_fine):
    lifted = lift_T(gaussian_radial(radial_fine))
    f = SphereField(lifted.grid, lifted.values - lifted.mean(), axisymmetric=True)
    a = sphere_log_interaction(f)
    b = sphere_log_interaction_zkernel(f)
    assert a == pytest.approx(b, abs=1e-5)


def test_sphere_interaction_degree_one(sphere_grid):
    f = SphereField.from_zonal(sphere_grid, lambda z: z)
    # f = z has the orthonormal coefficient 1/sqrt(3): value -1/2 * (1/3) / 2
    assert sphere_log_interaction(f) == pytest.approx(-1.0 / 12.0, abs=1e-12)
    # the z-kernel oracle has an O(n_z^-2) endpoint-log quadrature error
    assert sphere_log_interaction_zkernel(f) == pytest.approx(-1.0 / 12.0, abs=1e-4)


def test_spherical_free_energy_preconditions(sphere_grid):
    with pytest.raises(PreconditionError):
        spherical_free_energy(SphereField.from_zonal(sphere_grid, lambda z: 0.1 + 0 * z))
    bad = SphereField.from_zonal(sphere_grid, lambda z: 1.5 * z)  # f+1 < 0 somewhere
    with pytest.raises(PositivityError):
        spherical_free_energy(bad, mean_tol=1e-6)


def test_green_function_eigenvalues(sphere_small):
    for ell, eig in ((1, 2.0), (2, 6.0), (3, 12.0)):
        coeffs = np.zeros(ell + 1)
        coeffs[ell] = 1.0
        f = SphereField.from_legendre(sphere_small, coeffs)
        g = sphere_green_apply(f)
        assert np.max(np.abs(g.values - f.values / eig)) <= 1e-4
    with pytest.raises(PreconditionError):
        sphere_green_apply(SphereField.from_zonal(sphere_small, lambda z: 1.0 + z))


def test_onofri_functional_values(sphere_grid):
    zero = SphereField(sphere_grid, np.zeros(sphere_grid.shape), axisymmetric=True)
    assert onofri_functional(zero) == pytest.approx(0.0, abs=1e-14)
    u1 = SphereField.from_fn(sphere_grid,
                             lambda p: sphere_optimizer_values(1.0, np.array([0, 0, 1.0]), p),
                             axisymmetric=True)
    assert abs(onofri_functional(u1)) <= 1e-6
    assert u1.mean() == pytest.approx(2.0 - 2.0 / np.tanh(1.0), abs=1e-12)
    assert dirichlet_energy(u1) == pytest.approx(8.0 / np.tanh(1.0) - 8.0, abs=1e-10)


def test_onofri_constant_invariance(sphere_grid):
    u = SphereField.from_zonal(sphere_grid, lambda z: 0.4 * z - 0.2 * z**2)
    J = onofri_functional(u)
    for c in (1.0, -3.5, 100.0):
        assert onofri_functional(u.shifted(c)) == pytest.approx(J, abs=1e-10)


def test_onofri_small_perturbation_series(sphere_grid):
    eps = 0.1
    u = SphereField.from_zonal(sphere_grid, lambda z: eps * z)
    J = onofri_functional(u)
    exact = eps**2 / 6.0 - np.log(np.sinh(eps) / eps)
    assert J == pytest.approx(exact, abs=1e-12)
    assert J == pytest.approx(eps**4 / 180.0, rel=2e-3)


def test_onofri_entropy_form(sphere_grid):
    one = SphereField(sphere_grid, np.ones(sphere_grid.shape), axisymmetric=True)
    assert abs(onofri_entropy_form_gap(one)) <= 1e-12
    vals = np.exp(sphere_optimizer_values(1.0, np.array([0, 0, 1.0]), sphere_grid.points()))
    rho = SphereField(sphere_grid, vals, axisymmetric=True)
    assert abs(onofri_entropy_form_gap(rho)) <= 1e-5
    rho2 = SphereField.from_zonal(sphere_grid, lambda z: 1.0 + 0.5 * z)
    assert onofri_entropy_form_gap(rho2) > 0.0
    with pytest.raises(PositivityError):
        onofri_entropy_form_gap(SphereField.from_zonal(sphere_grid, lambda z: 1.5 * z))


# ----------------------------------------------------------------------
# circle
# ----------------------------------------------------------------------

def test_circle_zero_field():
    u = CircleField(np.zeros(8, dtype=complex))
    assert half_laplacian_energy(u) == 0.0
    assert lebedev_milin_functional(u) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
def test_poisson_kernel_values(r):
    u = circle_optimizer(CircleOptimizerParams(r, 0.3))
    assert half_laplacian_energy(u) == pytest.approx(-2.0 * np.log1p(-r * r), abs=1e-12)
    assert u.mean() == pytest.approx(np.log1p(-r * r), abs=1e-15)
    assert abs(lebedev_milin_functional(u)) <= 1e-8


def test_poisson_half_energy_value():
    u = circle_optimizer(CircleOptimizerParams(0.5, 0.0))
    assert half_laplacian_energy(u) == pytest.approx(0.575364, abs=1e-6)
    assert u.mean() == pytest.approx(-0.287682, abs=1e-6)


def test_cos_field_energy_and_lm():
    for eps in (0.1, 0.3):
        coeffs = np.zeros(8, dtype=complex)
        coeffs[1] = eps / 2.0
        u = CircleField(coeffs)
        assert half_laplacian_energy(u) == pytest.approx(eps**2 / 2.0, abs=1e-15)
        lm = lebedev_milin_functional(u)
        assert lm == pytest.approx(eps**2 / 4.0 - np.log(i0(eps)), abs=1e-10)

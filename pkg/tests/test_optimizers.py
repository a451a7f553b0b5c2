import numpy as np
import pytest

from loghls.errors import DomainError, NormalizationError
from loghls.fields import SphereField, gaussian_radial, planar_from_profile
from loghls.functionals import planar_free_energy
from loghls.geometry import sphere_optimizer_values
from loghls.grids import make_cartesian_grid
from loghls.optimizers import (CircleOptimizerParams, PlanarOptimizerParams,
                               SphereOptimizerParams, circle_optimizer,
                               golden_section, nearest_circle_L1,
                               nearest_planar_L1, nearest_sphere_entropy,
                               planar_optimizer, recenter, sphere_optimizer)
from loghls.specs import RunConfig, parse_input_spec, realize_sphere

GAUSSIAN_NEAREST_DISTANCE = 0.35954192       # frozen from a 10^4-point log-s sweep


def test_golden_section_quadratic():
    x, f = golden_section(lambda x: (x - 0.7) ** 2 + 1.0, -2.0, 3.0, tol=1e-12)
    assert x == pytest.approx(0.7, abs=1e-6)
    assert f == pytest.approx(1.0, abs=1e-15)


def test_planar_optimizer_radial(radial_fine):
    rho = planar_optimizer(PlanarOptimizerParams(1.0), radial_fine)
    assert abs(rho.mass - 1.0) <= 1e-6
    rho2 = planar_optimizer(PlanarOptimizerParams(2.0), radial_fine)
    assert abs(rho2.mass - 1.0) <= 1e-6
    assert rho2.profile(0.0) == pytest.approx(1.0 / (4.0 * np.pi), abs=1e-15)
    assert abs(planar_free_energy(rho2)) <= 1e-6
    with pytest.raises(DomainError):
        planar_optimizer(PlanarOptimizerParams(1.0, (1.0, 0.0)), radial_fine)
    with pytest.raises(DomainError):
        PlanarOptimizerParams(-1.0)


def test_planar_optimizer_cartesian():
    grid = make_cartesian_grid(30.0, 256)
    rho = planar_optimizer(PlanarOptimizerParams(1.0, (1.0, -1.0)), grid)
    assert abs(rho.mass - 1.0) <= 1e-12      # normalized on the grid


def test_nearest_planar_recovers_member(radial_fine):
    rho = planar_optimizer(PlanarOptimizerParams(1.7), radial_fine)
    params, dist, diag = nearest_planar_L1(rho)
    assert params.s == pytest.approx(1.7, abs=1e-6)
    assert dist <= 1e-5
    assert not diag.boundary_hit


def test_nearest_planar_gaussian_oracle(radial_fine):
    rho = gaussian_radial(radial_fine)
    params, dist, _ = nearest_planar_L1(rho)
    assert dist == pytest.approx(GAUSSIAN_NEAREST_DISTANCE, abs=1e-4)
    # dense-sweep oracle on the same grid, 2001 points around the optimum
    w, r = radial_fine.weights, radial_fine.nodes
    best = np.inf
    for ls in np.linspace(np.log(params.s) - 0.5, np.log(params.s) + 0.5, 2001):
        s = np.exp(ls)
        prof = (1.0 / (np.pi * s * s)) * (1.0 + (r / s) ** 2) ** -2
        best = min(best, float(np.sum(w * np.abs(rho.values - prof))))
    assert dist <= best + 1e-10
    assert abs(dist - best) <= 1e-4


def test_nearest_planar_bimodal_cartesian():
    grid = make_cartesian_grid(12.0, 128)
    mix = planar_from_profile(grid, lambda x, y: 0.5 * (1 / np.pi) * (1 + x**2 + y**2) ** -2
                              + 0.5 * (1 / np.pi) * (1 + (x - 4.0) ** 2 + y**2) ** -2)
    mix = mix.normalized()
    params, dist, _ = nearest_planar_L1(mix)
    # coarse lattice oracle: the search must do at least as well
    X, Y = grid.meshgrid()
    best = np.inf
    for s in np.geomspace(0.5, 3.0, 24):
        for cx in np.linspace(-1.0, 5.0, 25):
            g = (1.0 / (np.pi * s * s)) * (1.0 + (X / s - cx / s) ** 2 + (Y / s) ** 2) ** -2
            best = min(best, float(np.sum(np.abs(mix.values - g))) * grid.h**2)
    assert dist <= best + 1e-3
    # the center lands between the lobes or on one of them
    cx_phys = params.s * params.x0[0]
    assert -0.5 <= cx_phys <= 4.5
    assert abs(params.s * params.x0[1]) <= 0.5


def test_sphere_optimizer_basics(sphere_grid):
    u0 = sphere_optimizer(SphereOptimizerParams(0.0), sphere_grid)
    assert np.max(np.abs(u0.values)) == 0.0
    u1 = sphere_optimizer(SphereOptimizerParams(1.0), sphere_grid)
    assert abs(u1.exp_integral() - 1.0) <= 1e-8
    assert u1.mean() == pytest.approx(2.0 - 2.0 / np.tanh(1.0), abs=1e-10)
    # u_{t,n} = u_{-t,-n}: the defining formula is even under (t, n) -> (-t, -n)
    pts = sphere_grid.points()
    n = np.array([0.0, 0.6, 0.8])
    direct = sphere_optimizer_values(0.7, n, pts)
    flipped = -2.0 * np.log(np.cosh(-0.7) + np.sinh(-0.7) * (pts @ -n))
    assert np.max(np.abs(direct - flipped)) <= 1e-14
    with pytest.raises(DomainError):
        SphereOptimizerParams(21.0)


def test_nearest_sphere_entropy_recovers_member(sphere_grid):
    n = np.array([0.0, 0.6, 0.8])
    u = sphere_optimizer(SphereOptimizerParams(0.8, tuple(n)), sphere_grid)
    params, H, cap = nearest_sphere_entropy(u)
    assert H <= 1e-8
    assert params.t == pytest.approx(0.8, abs=1e-3)
    assert np.dot(params.axis, n) == pytest.approx(1.0, abs=1e-4)
    assert not cap


def test_nearest_sphere_entropy_constant_field(sphere_grid):
    zero = SphereField(sphere_grid, np.zeros(sphere_grid.shape),
                       fn=lambda p: np.zeros(p.shape[:-1]), axisymmetric=True)
    params, H, _ = nearest_sphere_entropy(zero)
    assert abs(H) <= 1e-12
    assert params.t <= 1e-4


def test_nearest_sphere_entropy_vs_grid_oracle(sphere_grid):
    # normalized small zonal perturbation: minimizer is axisymmetric
    base = SphereField.from_zonal(sphere_grid, lambda z: 0.3 * z)
    u = base.shifted(-float(np.log(base.exp_integral())))
    params, H, _ = nearest_sphere_entropy(u)
    w = sphere_grid.weights * np.exp(u.values)
    pts = sphere_grid.points()
    base_term = float(np.sum(w * u.values))
    best = np.inf
    for t in np.linspace(0.0, 0.5, 501):
        for n in (np.array([0, 0, 1.0]), np.array([0, 0, -1.0])):
            val = base_term - float(np.sum(w * sphere_optimizer_values(t, n, pts)))
            best = min(best, val)
    assert H <= best + 1e-10
    assert abs(H - best) <= 1e-3


def test_nearest_sphere_requires_normalization(sphere_grid):
    u = SphereField.from_zonal(sphere_grid, lambda z: 0.5 * z)   # int e^u != 1
    with pytest.raises(NormalizationError):
        nearest_sphere_entropy(u)


def test_recenter_fixed_point(sphere_grid):
    zero = SphereField(sphere_grid, np.zeros(sphere_grid.shape),
                       fn=lambda p: np.zeros(p.shape[:-1]), axisymmetric=True)
    res = recenter(zero)
    assert res.iterations == 0
    assert res.field is zero


def test_recenter_pulls_optimizer_back(sphere_grid):
    u = sphere_optimizer(SphereOptimizerParams(1.0, (0.0, 0.6, 0.8)), sphere_grid)
    res = recenter(u)
    assert res.barycenter_norm <= 1e-10
    assert np.max(np.abs(res.field.values)) <= 1e-8


def test_recenter_band_limited_and_idempotence(sphere_grid):
    cfg = RunConfig()
    u = realize_sphere(parse_input_spec("band-limited-random:seed=3,L=5,amplitude=0.3"), cfg)
    res = recenter(u)
    assert res.barycenter_norm <= 1e-10
    assert res.iterations <= 50
    again = recenter(res.field)
    assert np.max(np.abs(again.field.values - res.field.values)) <= 1e-8


def test_recenter_stationarity_condition(sphere_grid):
    """At the recentered field, d/dt H(e^U | e^{u_{t,n}}) at t = 0 vanishes
    for every axis (finite differences at 1e-4)."""
    cfg = RunConfig()
    u = realize_sphere(parse_input_spec("band-limited-random:seed=5,L=4,amplitude=0.3"), cfg)
    res = recenter(u)
    U = res.field
    w = U.grid.weights * np.exp(U.values)
    pts = U.grid.points()
    base = float(np.sum(w * U.values))
    h = 1e-4
    for n in (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0])):
        Hp = base - float(np.sum(w * sphere_optimizer_values(h, n, pts)))
        Hm = base - float(np.sum(w * sphere_optimizer_values(h, -n, pts)))
        assert abs(Hp - Hm) / (2 * h) <= 1e-6


def test_nearest_circle_recovers_poisson():
    u = circle_optimizer(CircleOptimizerParams(0.4, 1.3))
    params, dist, cap = nearest_circle_L1(u)
    assert dist <= 1e-8
    assert params.r == pytest.approx(0.4, abs=1e-5)
    assert params.alpha == pytest.approx(1.3, abs=1e-4)
    assert not cap
    with pytest.raises(DomainError):
        CircleOptimizerParams(1.0)


def test_nearest_planar_rotation_symmetry():
    """L1 distance to the manifold is invariant under a quarter rotation
    of the density about the origin (a grid-symmetric rotation)."""
    grid = make_cartesian_grid(12.0, 96)
    prof = (lambda x, y: 0.5 * (1 / np.pi) * (1 + x**2 + y**2) ** -2
            + 0.5 * (1 / np.pi) * (1 + (x - 3.0) ** 2 + y**2) ** -2)
    rot = lambda x, y: prof(y, -x)
    a = planar_from_profile(grid, prof).normalized()
    b = planar_from_profile(grid, rot).normalized()
    _, da, _ = nearest_planar_L1(a)
    _, db, _ = nearest_planar_L1(b)
    assert da == pytest.approx(db, abs=1e-6)


def test_nearest_planar_boundary_warning(radial_small):
    """A density far narrower than the search box pins the minimizer to
    the boundary of [e^-6, e^6] and sets the warning flag."""
    rho = gaussian_radial(radial_small, 5e-4)
    params, dist, diag = nearest_planar_L1(rho)
    assert diag.boundary_hit
    assert params.s == pytest.approx(np.exp(-6.0), rel=1e-4)

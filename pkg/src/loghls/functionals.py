"""The functionals of the laboratory.

Planar side: the free energy

    H(rho) = int rho log rho dx
             + 2 * int int rho(x) log|x-x'| rho(x') dx dx'
             + 1 + log(pi),

nonnegative on unit-mass densities and zero exactly on the optimizer
family.  Spherical side: the free energy H_S, the Onofri functional and
the Green operator of -Laplacian.  Circle side: the half-Laplacian
energy and the Lebedev-Milin functional.

Interaction kernels
-------------------
* Radial densities use the angular mean identity
  (1/2pi) int log|x - x'| dtheta = log max(|x|, |x'|), which collapses
  the double integral to J = 2 int f(r) M(r) log r dr with f the radial
  mass density and M its cumulative integral; M is obtained from a
  spline antiderivative in the quadrature variable, so the evaluation
  never sees the diagonal kink.
* Cartesian densities use a truncated-kernel Fourier method: the
  Fourier transform of log|x| restricted to |x| <= D has a closed form
  in Bessel functions, and sampling it on a 4x padded grid yields the
  free-space convolution with spectral accuracy.
* Sphere fields use harmonic coefficients: log|w - w'| acts on mean-zero
  fields as -(1/2) / (l(l+1)) per degree; the azimuthal mean identity
  (1/2pi) int log|w-w'| dphi' = (1/2) log[(1+max z)(1-min z)] gives an
  independent axisymmetric route used for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import j0, j1

from .entropy import xlogx
from .errors import (DomainError, NormalizationError, PositivityError,
                     PreconditionError)
from .fields import CircleField, PlanarDensity, RadialDensity, SphereField, get_transform
from .grids import CircleGrid, integrate, make_circle_grid, pairwise_sum
from .sht import legendre_analyze

__all__ = [
    "FreeEnergyReport",
    "log_interaction",
    "entropy_term",
    "planar_free_energy",
    "planar_free_energy_report",
    "sphere_log_interaction",
    "sphere_log_interaction_zkernel",
    "spherical_free_energy",
    "sphere_green_apply",
    "dirichlet_energy",
    "onofri_functional",
    "onofri_entropy_form_gap",
    "half_laplacian_energy",
    "lebedev_milin_functional",
    "LOG_PI",
]

LOG_PI = float(np.log(np.pi))
MASS_TOL = 1e-6


@dataclass(frozen=True)
class FreeEnergyReport:
    """Free energy split into its entropy and interaction parts."""

    entropy: float
    interaction: float
    total: float
    domain: str


# ----------------------------------------------------------------------
# planar interaction
# ----------------------------------------------------------------------

def _radial_interaction(rho: RadialDensity) -> float:
    g = rho.grid
    masses = g.weights * rho.values
    # Guard against tails the grid cannot represent (divergent log moment).
    # Only meaningful on the log-uniform scheme, whose top of span stands in
    # for the large-r tail; compact densities on uniform grids are exempt.
    if g.scheme == "log-uniform":
        outer = g.nodes > g.r_max * np.exp(-0.1 * g.span)
        tail = float(np.sum(masses[outer]))
        total = float(np.sum(masses))
        if total > 0 and tail > 1e-2 * total:
            raise DomainError(
                "log_interaction: density carries significant mass in the top "
                "decade of the grid; log moment not converged on this grid")
    dm_dxi = masses / g.ref_weights
    M = CubicSpline(g.ref_nodes, dm_dxi).antiderivative()(g.ref_nodes)
    return 2.0 * pairwise_sum(masses * M * np.log(g.nodes))


_KHAT_CACHE: dict[tuple, np.ndarray] = {}


def _cartesian_log_kernel_hat(n: int, h: float, pad: int = 4) -> np.ndarray:
    key = (n, float(h), pad)
    if key in _KHAT_CACHE:
        return _KHAT_CACHE[key]
    P = pad * n
    D = 1.5 * np.sqrt(2.0) * n * h          # > max pair distance sqrt(2)*n*h
    k1 = 2.0 * np.pi * np.fft.fftfreq(P, d=h)
    KX, KY = np.meshgrid(k1, k1, indexing="ij")
    k = np.sqrt(KX**2 + KY**2)
    nz = k > 0
    Khat = np.empty_like(k)
    Khat[nz] = 2.0 * np.pi * (np.log(D) * D * j1(k[nz] * D) / k[nz]
                              - (1.0 - j0(k[nz] * D)) / k[nz]**2)
    Khat[~nz] = np.pi * D**2 * np.log(D) - np.pi * D**2 / 2.0
    if len(_KHAT_CACHE) > 3:
        _KHAT_CACHE.clear()
    _KHAT_CACHE[key] = Khat
    return Khat


def _cartesian_interaction(rho: PlanarDensity) -> float:
    g = rho.grid
    Khat = _cartesian_log_kernel_hat(g.n, g.h)
    P = Khat.shape[0]
    m = np.zeros((P, P))
    m[: g.n, : g.n] = rho.values * g.h**2
    conv = np.fft.ifft2(np.fft.fft2(m) * Khat).real / (g.h**2)
    return pairwise_sum(m[: g.n, : g.n] * conv[: g.n, : g.n])


def log_interaction(rho: RadialDensity | PlanarDensity) -> float:
    """The logarithmic interaction  int int rho(x) log|x-x'| rho(x') dx dx'."""
    if isinstance(rho, RadialDensity):
        return _radial_interaction(rho)
    if isinstance(rho, PlanarDensity):
        return _cartesian_interaction(rho)
    raise DomainError(f"log_interaction: unsupported density type {type(rho).__name__}")


def entropy_term(rho: RadialDensity | PlanarDensity) -> float:
    """int rho log rho dx with 0 log 0 = 0."""
    if isinstance(rho, RadialDensity):
        return pairwise_sum(rho.grid.weights * xlogx(rho.values))
    if isinstance(rho, PlanarDensity):
        return pairwise_sum(xlogx(rho.values)) * rho.grid.h**2
    raise DomainError(f"entropy_term: unsupported density type {type(rho).__name__}")


def planar_free_energy_report(rho: RadialDensity | PlanarDensity) -> FreeEnergyReport:
    mass = rho.mass
    if abs(mass - 1.0) > MASS_TOL:
        raise NormalizationError(
            f"planar_free_energy: density mass {mass!r} violates the unit-mass "
            f"precondition (tolerance {MASS_TOL}); normalize the input")
    work = rho if mass == 1.0 else type(rho)(rho.grid, rho.values / mass)
    ent = entropy_term(work)
    inter = log_interaction(work)
    return FreeEnergyReport(entropy=ent, interaction=inter,
                            total=ent + 2.0 * inter + 1.0 + LOG_PI,
                            domain="plane")


def planar_free_energy(rho: RadialDensity | PlanarDensity) -> float:
    """H(rho) for a unit-mass density; >= 0 up to quadrature error."""
    return planar_free_energy_report(rho).total


# ----------------------------------------------------------------------
# sphere
# ----------------------------------------------------------------------

def _axi_values(f: SphereField) -> np.ndarray:
    return f.values[:, 0]


def sphere_log_interaction(f: SphereField, mean_tol: float = 1e-8) -> float:
    """int int f log|w-w'| f dsigma dsigma' for a mean-zero field."""
    mean = f.mean()
    if abs(mean) > mean_tol:
        raise PreconditionError(
            f"sphere_log_interaction: field mean {mean!r} violates the "
            f"mean-zero precondition (tolerance {mean_tol})")
    if f.axisymmetric:
        lmax = min(256, f.grid.n_z - 1)
        a = (f.leg_coeffs if f.leg_coeffs is not None
             else legendre_analyze(_axi_values(f), f.grid, lmax))
        ell = np.arange(a.size, dtype=float)
        coef2 = a[1:] ** 2 / (2.0 * ell[1:] + 1.0)      # orthonormal-basis squares
        return float(-0.5 * np.sum(coef2 / (ell[1:] * (ell[1:] + 1.0))))
    tr = get_transform(f.grid)
    c, s = f.coeffs()
    return tr.log_kernel_quadratic(c, s)


def sphere_log_interaction_zkernel(f: SphereField, mean_tol: float = 1e-8) -> float:
    """Axisymmetric interaction through the azimuthal mean identity.

    Independent of the harmonic-coefficient route; used as a cross-check.
    """
    if not f.axisymmetric:
        raise DomainError("sphere_log_interaction_zkernel: field must be axisymmetric")
    if abs(f.mean()) > mean_tol:
        raise PreconditionError("sphere_log_interaction_zkernel: field mean is not zero")
    g = f.grid
    vals = _axi_values(f)
    half_w = g.w_z / 2.0
    F = CubicSpline(g.z, vals / 2.0).antiderivative()(g.z)
    G = CubicSpline(g.z, vals * np.log1p(-g.z) / 2.0).antiderivative()(g.z)
    return pairwise_sum(half_w * vals * (np.log1p(g.z) * F + G))


def spherical_free_energy(f: SphereField, mean_tol: float = 1e-8):
    """H_S(f) = int (f+1) log(f+1) dsigma + 2 * int int f log|.| f."""
    mean = f.mean()
    if abs(mean) > mean_tol:
        raise PreconditionError(
            f"spherical_free_energy: int f dsigma = {mean!r}, not 0 within {mean_tol}")
    dens = f.values + 1.0
    if np.min(dens) < -1e-9:
        raise PositivityError(
            f"spherical_free_energy: f + 1 has min {np.min(dens)!r} < 0")
    ent = integrate(xlogx(np.clip(dens, 0.0, None)), f.grid)
    inter = sphere_log_interaction(f, mean_tol)
    return FreeEnergyReport(entropy=ent, interaction=inter,
                            total=ent + 2.0 * inter, domain="sphere")


def sphere_green_apply(f: SphereField, mean_tol: float = 1e-8) -> SphereField:
    """G f with G the Green function of -Laplacian on S^2 (kernel -2 log|w-w'|).

    Acts on degree-l harmonics as multiplication by 1/(l(l+1)).
    """
    if abs(f.mean()) > mean_tol:
        raise PreconditionError("sphere_green_apply: field must have zero mean")
    if f.axisymmetric:
        lmax = min(256, f.grid.n_z - 1)
        a = (f.leg_coeffs if f.leg_coeffs is not None
             else legendre_analyze(_axi_values(f), f.grid, lmax)).copy()
        ell = np.arange(a.size, dtype=float)
        a[0] = 0.0
        a[1:] = a[1:] / (ell[1:] * (ell[1:] + 1.0))
        return SphereField.from_legendre(f.grid, a)
    tr = get_transform(f.grid)
    c, s = tr.green_coeffs(*f.coeffs())
    return SphereField(f.grid, tr.synthesize(c, s))


def dirichlet_energy(u: SphereField) -> float:
    """int |grad u|^2 dsigma (not quartered).

    Axisymmetric fields use their Legendre coefficients, general fields
    the full spherical-harmonic expansion; both are sum l(l+1)|coef|^2.
    """
    if u.axisymmetric:
        lmax = min(256, u.grid.n_z - 1)
        a = (u.leg_coeffs if u.leg_coeffs is not None
             else legendre_analyze(_axi_values(u), u.grid, lmax))
        ell = np.arange(a.size, dtype=float)
        return float(np.sum(ell * (ell + 1.0) * a**2 / (2.0 * ell + 1.0)))
    tr = get_transform(u.grid)
    return tr.dirichlet_energy(*u.coeffs())


def onofri_functional(u: SphereField) -> float:
    """J(u) = (1/4) int |grad u|^2 - log int e^u + int u, all against sigma.

    The normalization step subtracts the quadrature mean before
    exponentiating, which makes the value invariant under u -> u + c up
    to roundoff and immune to overflow for large constants.
    """
    ubar = u.mean()
    shifted = u.values - ubar
    log_int = float(np.log(integrate(np.exp(shifted), u.grid)))
    return 0.25 * dirichlet_energy(u) - log_int


def onofri_entropy_form_gap(rho: SphereField, mass_tol: float = 1e-6) -> float:
    """int |grad log rho|^2 dsigma - 4 H(1 || rho) >= 0 (entropy form of Onofri)."""
    if np.min(rho.values) <= 0:
        raise PositivityError("onofri_entropy_form_gap: density must be strictly positive")
    mass = rho.mean()
    if abs(mass - 1.0) > mass_tol:
        raise NormalizationError(
            f"onofri_entropy_form_gap: density mass {mass!r} is not 1 within {mass_tol}")
    if rho.axisymmetric:
        logrho = SphereField(rho.grid, np.log(rho.values), axisymmetric=True)
    else:
        logrho = SphereField(rho.grid, np.log(rho.values))
    energy = dirichlet_energy(logrho)
    H_rev = -logrho.mean()          # H(1||rho) = - int log rho dsigma
    return energy - 4.0 * H_rev


# ----------------------------------------------------------------------
# circle
# ----------------------------------------------------------------------

def half_laplacian_energy(u: CircleField) -> float:
    """||(-Delta)^{1/4} u||_2^2 = sum_k |k| |u_hat(k)|^2."""
    k = np.arange(1, u.coeffs.size, dtype=float)
    return float(2.0 * np.sum(k * np.abs(u.coeffs[1:]) ** 2))


def _circle_grid_for(u: CircleField, grid: CircleGrid | None) -> CircleGrid:
    if grid is not None:
        return grid
    n = max(512, 4 * max(u.kmax, 1))
    return make_circle_grid(n)


def lebedev_milin_functional(u: CircleField, grid: CircleGrid | None = None) -> float:
    """LM(u) = (1/2) sum |k||u_hat|^2 - log int e^u dsigma + int u dsigma."""
    grid = _circle_grid_for(u, grid)
    vals = u.values(grid) - u.mean()       # exact mean via the Fourier coefficient
    log_int = float(np.log(integrate(np.exp(vals), grid)))
    return 0.5 * half_laplacian_energy(u) - log_int

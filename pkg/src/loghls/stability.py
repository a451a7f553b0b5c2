"""Stability certificates for every inequality in the laboratory, plus a
finite-dimensional demonstrator of the convex duality transfer.

A certificate records the functional value, the distance to the
optimizer manifold, the explicit constant, and the gap

    gap = value - constant * distance^2,

which the corresponding stability inequality asserts is nonnegative.  Pass tolerance
defaults to 1e-6 absolute plus 1e-4 relative to the value (quadrature
error dominates at the grids used here).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import DomainError, PreconditionError
from .fields import CircleField, PlanarDensity, RadialDensity, SphereField
from .functionals import (dirichlet_energy, lebedev_milin_functional,
                          onofri_functional, planar_free_energy_report,
                          spherical_free_energy)
from .grids import integrate, make_circle_grid
from .optimizers import (nearest_circle_L1, nearest_planar_L1, nearest_sphere_L1,
                         nearest_sphere_gradient, nearest_sphere_reverse_entropy)

__all__ = [
    "StabilityCertificate",
    "pass_tolerance",
    "planar_stability_certificate",
    "spherical_stability_certificate",
    "onofri_stability_certificates",
    "constrained_onofri_gap",
    "circle_stability_certificate",
    "ConvexPairSpec",
    "DualityReport",
    "toy_duality_demo",
]


def pass_tolerance(value: float, abs_tol: float = 1e-6, rel_tol: float = 1e-4) -> float:
    return abs_tol + rel_tol * abs(value)


@dataclass(frozen=True)
class StabilityCertificate:
    inequality: str
    value: float
    constant: float
    distance: float
    gap: float
    passed: bool
    tol: float
    grid: str = ""
    search: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "inequality": self.inequality,
            "value": self.value,
            "constant": self.constant,
            "distance": self.distance,
            "gap": self.gap,
            "pass": self.passed,
            "tol": self.tol,
            "grid": self.grid,
            "search": self.search,
        }


def _certificate(name: str, value: float, constant: float, distance: float,
                 grid: str, search: dict, abs_tol: float = 1e-6) -> StabilityCertificate:
    gap = value - constant * distance**2
    tol = pass_tolerance(value, abs_tol)
    return StabilityCertificate(inequality=name, value=value, constant=constant,
                                distance=distance, gap=gap, passed=gap >= -tol,
                                tol=tol, grid=grid, search=search)


# ----------------------------------------------------------------------
# log HLS certificates
# ----------------------------------------------------------------------

def planar_stability_certificate(rho: RadialDensity | PlanarDensity,
                                 oracle: bool = False) -> StabilityCertificate:
    """H(rho) >= (1/8) inf_g ||rho - g||_1^2 over the planar manifold."""
    report = planar_free_energy_report(rho)
    params, dist, diag = nearest_planar_L1(rho)
    search = {"s": params.s, "x0": list(params.x0),
              "evaluations": diag.evaluations, "boundary_hit": diag.boundary_hit}
    if oracle and isinstance(rho, RadialDensity):
        search["oracle_distance"] = _radial_oracle_distance(rho)
    grid = (f"radial n={rho.grid.n}" if isinstance(rho, RadialDensity)
            else f"cartesian {rho.grid.n}^2 L={rho.grid.L}")
    return _certificate("log-HLS (plane)", report.total, 0.125, dist, grid, search)


def _radial_oracle_distance(rho: RadialDensity, n_sweep: int = 10_000) -> float:
    from .optimizers import PlanarOptimizerParams, planar_optimizer_profile
    w, r = rho.grid.weights, rho.grid.nodes
    best = np.inf
    for ls in np.linspace(-6.0, 6.0, n_sweep):
        prof = planar_optimizer_profile(PlanarOptimizerParams(float(np.exp(ls))))
        d = float(np.sum(w * np.abs(rho.values - prof(r))))
        if d < best:
            best = d
    return best


def spherical_stability_certificate(f: SphereField) -> StabilityCertificate:
    """H_S(f) >= (1/8) inf ||(f+1) - e^{u_{t,n}}||_1^2."""
    report = spherical_free_energy(f)
    params, dist, cap = nearest_sphere_L1(f.values + 1.0, f.grid)
    search = {"t": params.t, "n": list(params.n), "cap_warning": cap}
    return _certificate("log-HLS (sphere)", report.total, 0.125, dist,
                        f"sphere {f.grid.n_z}x{f.grid.n_phi}", search)


# ----------------------------------------------------------------------
# Onofri certificates
# ----------------------------------------------------------------------

def onofri_stability_certificates(u: SphereField) -> tuple[StabilityCertificate, ...]:
    """The three stability certificates for the Onofri functional J(u):

    (a) J >= (1/8) inf int |grad u - grad u_{t,n}|^2,
    (b) J >= (1/2) inf H(e^{u_{t,n}} | e^u),
    (c) J >= (1/4) inf ||e^u - e^{u_{t,n}}||_1^2  (Pinsker applied to (b)).
    """
    m = u.exp_integral()
    if abs(m - 1.0) > 1e-6:
        raise PreconditionError(
            f"onofri_stability_certificates: int e^u = {m!r}, expected 1 within 1e-06")
    J = onofri_functional(u)
    gridname = f"sphere {u.grid.n_z}x{u.grid.n_phi}"

    pg, Einf, cap_g = nearest_sphere_gradient(u)
    cert_a = _certificate("Onofri gradient form", J, 0.125, float(np.sqrt(max(Einf, 0.0))),
                          gridname, {"t": pg.t, "n": list(pg.n), "cap_warning": cap_g})

    pe, Hinf, cap_e = nearest_sphere_reverse_entropy(u)
    cert_b = _certificate("Onofri entropy form", J, 0.5, float(np.sqrt(max(Hinf, 0.0))),
                          gridname, {"t": pe.t, "n": list(pe.n), "cap_warning": cap_e})

    pl, dist, cap_l = nearest_sphere_L1(np.exp(u.values), u.grid)
    cert_c = _certificate("Onofri L1 form", J, 0.25, dist,
                          gridname, {"t": pl.t, "n": list(pl.n), "cap_warning": cap_l})
    return cert_a, cert_b, cert_c


def constrained_onofri_gap(u: SphereField, bary_tol: float = 1e-8) -> float:
    """(1/8) int |grad u|^2 - log int e^u + int u for barycenter-free u.

    Precondition: the sphere barycenter of e^u vanishes within bary_tol
    (recenter first); the improved constant 1/8 is valid only there.
    """
    b = float(np.linalg.norm(u.barycenter()))
    if b > bary_tol:
        raise PreconditionError(
            f"constrained_onofri_gap: |barycenter| = {b:.3e} exceeds {bary_tol}; "
            "recenter the field first")
    return onofri_functional(u) - 0.125 * dirichlet_energy(u)


# ----------------------------------------------------------------------
# circle certificate
# ----------------------------------------------------------------------

def circle_stability_certificate(u: CircleField) -> StabilityCertificate:
    """LM(u) >= (1/4) inf ||e^u - e^v||_1^2 over normalized Poisson kernels."""
    grid = make_circle_grid(max(512, 4 * max(u.kmax, 1)))
    m = integrate(np.exp(u.values(grid)), grid)
    if abs(m - 1.0) > 1e-6:
        raise PreconditionError(
            f"circle_stability_certificate: int e^u = {m!r}, expected 1 within 1e-06")
    value = lebedev_milin_functional(u, grid)
    params, dist, cap = nearest_circle_L1(u, grid)
    search = {"r": params.r, "alpha": params.alpha, "cap_warning": cap}
    return _certificate("Lebedev-Milin (circle)", value, 0.25, dist,
                        f"circle n={grid.n}", search)


# ----------------------------------------------------------------------
# finite-dimensional duality demonstrator
# ----------------------------------------------------------------------

@dataclass
class ConvexPairSpec:
    """A pair of convex functions E <= F on a box, with the constants of
    the quadratic stability bound (C) and the lambda-convexity of E* (lam)."""

    dim: int
    E: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    C: float
    lam: float
    box: float = 3.0
    n_axis: int | None = None
    name: str = "pair"

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"ConvexPairSpec: dim must be 1..3, got {self.dim}")
        if self.n_axis is None:
            self.n_axis = {1: 401, 2: 101, 3: 41}[self.dim]
        if self.C <= 0 or self.lam <= 0:
            raise DomainError("ConvexPairSpec: C and lam must be positive")


@dataclass
class DualityReport:
    name: str
    mu: float
    premise_max_violation: float
    dual_order_max_violation: float
    young_min_slack: float
    young_equality_consistent: bool
    eq_set_forward_max_dist: float
    eq_set_backward_max_dist: float
    transfer_min_slack: float
    lipschitz_max_excess: float
    slack: float
    passed: bool
    details: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d.pop("details")
        return d


def _grid_points(box: float, n_axis: int, dim: int) -> np.ndarray:
    axis = np.linspace(-box, box, n_axis)
    if dim == 1:
        return axis[:, None]
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _brute_conjugate(points_primal, values_primal, points_dual, chunk=1024):
    """E*(y) = max_x <x,y> - E(x) over the primal grid, and the argmax."""
    n_dual = points_dual.shape[0]
    conj = np.empty(n_dual)
    arg = np.empty((n_dual, points_primal.shape[1]))
    for start in range(0, n_dual, chunk):
        sl = slice(start, min(start + chunk, n_dual))
        inner = points_dual[sl] @ points_primal.T - values_primal[None, :]
        idx = np.argmax(inner, axis=1)
        conj[sl] = inner[np.arange(idx.size), idx]
        arg[sl] = points_primal[idx]
    return conj, arg


def toy_duality_demo(spec: ConvexPairSpec, slack: float = 2e-2,
                     eq_tol: float = 1e-9) -> DualityReport:
    """Verify the duality-transfer machinery on a low-dimensional pair.

    Checks, all on brute-force grid Legendre transforms:
      (i)   E <= F on the primal box and F* <= E* on the dual box,
      (ii)  Young's inequality with equality exactly on subgradient pairs,
      (iii) the equality sets map onto each other under the subgradients,
      (iv)  the transferred bound E* - F* >= (lam mu / 2) dist(., E0*)^2
            with mu = min(4 C lam, 1),
      (v)   the gradient of E* is Lipschitz with constant 1/(2 lam).
    """
    X = _grid_points(spec.box, spec.n_axis, spec.dim)
    Y = _grid_points(spec.box, spec.n_axis, spec.dim)
    Ev = np.asarray(spec.E(X), dtype=float).ravel()
    Fv = np.asarray(spec.F(X), dtype=float).ravel()

    premise = float(np.max(Ev - Fv))
    if premise > 1e-12:
        raise DomainError(
            f"toy_duality_demo: E <= F violated by {premise:.3e} on the sweep")

    Estar, gradEstar = _brute_conjugate(X, Ev, Y)
    Fstar, _ = _brute_conjugate(X, Fv, Y)
    dual_order = float(np.max(Fstar - Estar))

    # equality sets
    E0_mask = (Fv - Ev) <= eq_tol
    E0 = X[E0_mask]
    E0star_mask = (Estar - Fstar) <= slack * 1e-2
    E0star = Y[E0star_mask]
    if E0.size == 0 or E0star.size == 0:
        raise DomainError("toy_duality_demo: empty equality set on the grid")

    # forward map: grad E (finite differences) of E0 should land in E0*
    hfd = 1e-6 * spec.box

    def gradE(x):
        g = np.empty(spec.dim)
        for i in range(spec.dim):
            e = np.zeros(spec.dim)
            e[i] = hfd
            hi = np.asarray(spec.E((x + e)[None, :])).ravel()[0]
            lo = np.asarray(spec.E((x - e)[None, :])).ravel()[0]
            g[i] = (hi - lo) / (2 * hfd)
        return g

    fwd = 0.0
    for x in E0:
        gx = gradE(x)
        if np.max(np.abs(gx)) > spec.box:
            continue            # subgradient leaves the dual box; untestable here
        fwd = max(fwd, float(np.min(np.linalg.norm(E0star - gx[None, :], axis=1))))
    # backward map: grad E*(y) (brute argmax) of E0* should land in E0
    back = 0.0
    ge_at_E0star = gradEstar[E0star_mask]
    for gx in ge_at_E0star:
        back = max(back, float(np.min(np.linalg.norm(E0 - gx[None, :], axis=1))))

    # transferred stability bound
    mu = min(4.0 * spec.C * spec.lam, 1.0)
    d2 = np.empty(Y.shape[0])
    for start in range(0, Y.shape[0], 4096):
        sl = slice(start, min(start + 4096, Y.shape[0]))
        diff = Y[sl, None, :] - E0star[None, :, :]
        d2[sl] = np.min(np.sum(diff**2, axis=2), axis=1)
    transfer_slack = float(np.min((Estar - Fstar) - 0.5 * spec.lam * mu * d2))

    # Young's inequality on grid pairs; equality only at subgradients
    h_axis = 2.0 * spec.box / (spec.n_axis - 1)
    young_min = np.inf
    young_eq_ok = True
    for start in range(0, Y.shape[0], 1024):
        sl = slice(start, min(start + 1024, Y.shape[0]))
        gap = Ev[None, :] + Estar[sl, None] - Y[sl] @ X.T
        young_min = min(young_min, float(np.min(gap)))
        eq_pairs = np.argwhere(gap <= eq_tol)
        for iy, ix in eq_pairs:
            if np.linalg.norm(X[ix] - gradEstar[sl][iy]) > 2.0 * h_axis:
                young_eq_ok = False

    # Lipschitz bound for grad E*
    if spec.dim == 1:
        yy = Y[:, 0]
        gg = gradEstar[:, 0]
        dy = np.abs(yy[None, :] - yy[:, None])
        dg = np.abs(gg[None, :] - gg[:, None])
        excess = dg - dy / (2.0 * spec.lam)
    else:
        idx = np.linspace(0, Y.shape[0] - 1, 400).astype(int)
        Ys, Gs = Y[idx], gradEstar[idx]
        dy = np.linalg.norm(Ys[None, :, :] - Ys[:, None, :], axis=2)
        dg = np.linalg.norm(Gs[None, :, :] - Gs[:, None, :], axis=2)
        excess = dg - dy / (2.0 * spec.lam)
    lip_excess = float(np.max(excess))

    passed = (dual_order <= slack
              and young_min >= -1e-12
              and young_eq_ok
              and fwd <= 2.0 * h_axis + slack
              and back <= 2.0 * h_axis + slack
              and transfer_slack >= -slack
              and lip_excess <= 2.0 * h_axis + slack)
    return DualityReport(
        name=spec.name, mu=mu,
        premise_max_violation=premise,
        dual_order_max_violation=dual_order,
        young_min_slack=float(young_min),
        young_equality_consistent=young_eq_ok,
        eq_set_forward_max_dist=fwd,
        eq_set_backward_max_dist=back,
        transfer_min_slack=transfer_slack,
        lipschitz_max_excess=lip_excess,
        slack=slack, passed=passed,
        details={"Estar": Estar, "Fstar": Fstar, "Y": Y, "E0": E0, "E0star": E0star})

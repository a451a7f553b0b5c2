"""Optimizer manifolds and nearest-point searches.

The planar manifold is { s^-2 h(x/s - x0) } with h the squared Cauchy
profile, the sphere manifold is { u_{t,n} = -2 log(cosh t + sinh t n.w) },
and the circle family consists of logs of normalized Poisson kernels.
Searches are deterministic: golden section over log s with a fixed
multistart pattern, a compass pattern search for Cartesian centers, and
coarse-scan + Nelder-Mead refinement on (t, n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, DomainError, NormalizationError
from .fields import (CircleField, PlanarDensity, RadialDensity, SphereField,
                     planar_from_profile, radial_from_profile)
from .functionals import dirichlet_energy
from .geometry import ConformalParams, T_CAP, conformal_push, sphere_optimizer_values
from .grids import CartesianGrid, CircleGrid, RadialGrid, SphereGrid, make_circle_grid

__all__ = [
    "PlanarOptimizerParams",
    "SphereOptimizerParams",
    "CircleOptimizerParams",
    "planar_optimizer_profile",
    "planar_optimizer",
    "sphere_optimizer",
    "circle_optimizer",
    "golden_section",
    "nearest_planar_L1",
    "nearest_sphere_entropy",
    "nearest_sphere_gradient",
    "nearest_sphere_L1",
    "nearest_circle_L1",
    "RecenterResult",
    "recenter",
    "LOG_S_BOX",
]

LOG_S_BOX = 6.0          # searches cover s in [e^-6, e^6]
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class PlanarOptimizerParams:
    s: float
    x0: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.s <= 0:
            raise DomainError(f"PlanarOptimizerParams: s must be positive, got {self.s}")


@dataclass(frozen=True)
class SphereOptimizerParams:
    t: float
    n: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.t < 0 or self.t > T_CAP:
            raise DomainError(f"SphereOptimizerParams: t must lie in [0, {T_CAP}], got {self.t}")
        nn = np.linalg.norm(self.n)
        if abs(nn - 1.0) > 1e-12:
            raise DomainError(f"SphereOptimizerParams: |n| = {nn!r} is not 1")

    @property
    def axis(self) -> np.ndarray:
        return np.asarray(self.n, dtype=float)


@dataclass(frozen=True)
class CircleOptimizerParams:
    r: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.r < 1.0):
            raise DomainError(f"CircleOptimizerParams: r must lie in [0, 1), got {self.r}")


# ----------------------------------------------------------------------
# manifold members
# ----------------------------------------------------------------------

def planar_optimizer_profile(p: PlanarOptimizerParams):
    """Radial profile r -> s^-2 h(r/s) (centered members only)."""
    s = p.s

    def prof(r):
        rr = np.asarray(r, dtype=float) / s
        return (1.0 / (np.pi * s * s)) * (1.0 + rr * rr) ** -2

    return prof


def planar_optimizer(p: PlanarOptimizerParams, grid: RadialGrid | CartesianGrid):
    """The optimizer density s^-2 h(x/s - x0) realized on a grid.

    On radial grids the center must be the origin.  On Cartesian grids
    the truncated sample is renormalized to unit mass so the stated
    unit-mass contract holds on the grid.
    """
    if isinstance(grid, RadialGrid):
        if p.x0 != (0.0, 0.0):
            raise DomainError("planar_optimizer: radial grids require x0 = 0")
        return radial_from_profile(grid, planar_optimizer_profile(p))
    if isinstance(grid, CartesianGrid):
        s, (a, b) = p.s, p.x0

        def prof(x, y):
            q = (np.asarray(x) / s - a) ** 2 + (np.asarray(y) / s - b) ** 2
            return (1.0 / (np.pi * s * s)) * (1.0 + q) ** -2

        return planar_from_profile(grid, prof).normalized()
    raise DomainError(f"planar_optimizer: unsupported grid type {type(grid).__name__}")


def sphere_optimizer(p: SphereOptimizerParams, grid: SphereGrid) -> SphereField:
    """u_{t,n} as a SphereField with exact callable; int e^u dsigma = 1."""
    n = p.axis
    t = p.t
    axi = abs(n[0]) < 1e-15 and abs(n[1]) < 1e-15
    if axi and n[2] < 0:
        n, t = -n, t  # u_{t,-e3}(z) = u_{t,e3}(-z); keep the axis as given
    fn = lambda pts, _t=p.t, _n=p.axis: sphere_optimizer_values(_t, _n, pts)
    return SphereField.from_fn(grid, fn, axisymmetric=axi)


def circle_optimizer(p: CircleOptimizerParams, kmax: int | None = None) -> CircleField:
    """log of the normalized Poisson kernel: e^u = (1-r^2)/(1-2r cos(th-a)+r^2)."""
    r, alpha = p.r, p.alpha
    if kmax is None:
        kmax = 64 if r == 0 else max(64, min(4096, int(np.ceil(-40.0 / np.log(max(r, 1e-12))))))
    coeffs = np.zeros(kmax + 1, dtype=complex)
    coeffs[0] = np.log1p(-r * r)
    k = np.arange(1, kmax + 1)
    coeffs[1:] = (r ** k / k) * np.exp(-1j * k * alpha)
    return CircleField(coeffs)


# ----------------------------------------------------------------------
# searches
# ----------------------------------------------------------------------

def golden_section(f, a: float, b: float, tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section minimization of a unimodal f on [a, b]."""
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
    return (c, yc) if yc < yd else (d, yd)


@dataclass
class SearchDiagnostics:
    evaluations: int = 0
    boundary_hit: bool = False
    starts: int = 0


def _l1_radial(rho: RadialDensity, prof) -> float:
    return float(np.sum(rho.grid.weights * np.abs(rho.values - prof(rho.grid.nodes))))


def nearest_planar_L1(rho: RadialDensity | PlanarDensity,
                      log_s_box: float = LOG_S_BOX,
                      n_starts: int = 5,
                      tol: float = 1e-10):
    """Minimize ||rho - h_{s,x0}||_1 over the optimizer manifold.

    Radial densities pin x0 = 0 and use multistart golden section over
    log s; Cartesian densities add a compass pattern search over the
    center.  Ties within 1e-12 resolve to the smallest s, then the
    lexicographically smallest center.

    Returns (params, distance, diagnostics).
    """
    diag = SearchDiagnostics(starts=n_starts)
    if isinstance(rho, RadialDensity):
        def obj(ls: float) -> float:
            diag.evaluations += 1
            return _l1_radial(rho, planar_optimizer_profile(
                PlanarOptimizerParams(float(np.exp(ls)))))

        edges = np.linspace(-log_s_box, log_s_box, n_starts + 1)
        candidates = [golden_section(obj, edges[i], edges[i + 1], tol)
                      for i in range(n_starts)]
        best = min(c[1] for c in candidates)
        ls, val = min((c for c in candidates if c[1] <= best + 1e-12),
                      key=lambda c: c[0])
        if abs(abs(ls) - log_s_box) < 1e-6:
            diag.boundary_hit = True
        return PlanarOptimizerParams(float(np.exp(ls))), float(val), diag

    if isinstance(rho, PlanarDensity):
        grid = rho.grid
        X, Y = grid.meshgrid()
        w2 = grid.h ** 2

        def dist_at(ls: float, x0: np.ndarray) -> float:
            diag.evaluations += 1
            s = float(np.exp(ls))
            q = (X / s - x0[0]) ** 2 + (Y / s - x0[1]) ** 2
            g = (1.0 / (np.pi * s * s)) * (1.0 + q) ** -2
            return float(np.sum(np.abs(rho.values - g))) * w2

        def s_opt(x0: np.ndarray) -> tuple[float, float]:
            edges = np.linspace(-log_s_box, log_s_box, n_starts + 1)
            cands = [golden_section(lambda ls: dist_at(ls, x0),
                                    edges[i], edges[i + 1], 1e-8)
                     for i in range(n_starts)]
            return min(cands, key=lambda c: (c[1], c[0]))

        # start the compass search at the center of mass
        m = rho.mass
        cx = float(np.sum(X * rho.values)) * w2 / m
        cy = float(np.sum(Y * rho.values)) * w2 / m
        x0 = np.array([cx, cy])
        ls, val = s_opt(x0)
        step = max(grid.L / 8.0, grid.h)
        while step > 1e-6:
            moved = False
            for d in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
                cand = x0 + d
                ls_c, val_c = s_opt(cand)
                if val_c < val - 1e-14:
                    x0, ls, val, moved = cand, ls_c, val_c, True
                    break
            if not moved:
                step /= 2.0
        if abs(abs(ls) - log_s_box) < 1e-6:
            diag.boundary_hit = True
        # s^-2 h(x/s - x0): the parameter center satisfies x_phys = s * x0
        s = float(np.exp(ls))
        return (PlanarOptimizerParams(s, (float(x0[0] / s), float(x0[1] / s))),
                float(val), diag)
    raise DomainError(f"nearest_planar_L1: unsupported density {type(rho).__name__}")


def _fibonacci_directions(k: int) -> np.ndarray:
    """Deterministic quasi-uniform unit vectors (Fibonacci sphere)."""
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    phi = np.pi * (1.0 + math.sqrt(5.0)) * i
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def _manifold_minimize(fun, t_max: float, coarse_t, n_dirs: int = 32,
                       xatol: float = 1e-9):
    """Minimize fun(t, n) over [0, t_max] x S^2: coarse scan + Nelder-Mead."""
    dirs = np.vstack([_fibonacci_directions(n_dirs),
                      np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])])
    best = (float("inf"), 0.0, dirs[0])
    for t in coarse_t:
        for n in dirs:
            v = fun(t, n)
            if v < best[0]:
                best = (v, t, n)
    _, t0, n0 = best

    def packed(q):
        t = abs(q[0])
        if t > t_max:
            t = t_max
        th, ph = q[1], q[2]
        n = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph),
                      math.cos(th)])
        return fun(t, n)

    th0 = math.acos(min(1.0, max(-1.0, n0[2])))
    ph0 = math.atan2(n0[1], n0[0])
    res = minimize(packed, np.array([t0, th0, ph0]), method="Nelder-Mead",
                   options={"xatol": xatol, "fatol": 1e-14, "maxiter": 2000})
    t = min(abs(float(res.x[0])), t_max)
    th, ph = float(res.x[1]), float(res.x[2])
    n = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph),
                  math.cos(th)])
    n /= np.linalg.norm(n)
    if res.fun <= best[0]:
        return float(res.fun), t, n
    return best


_COARSE_T = (0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0)


def _check_normalized_exp(u: SphereField, tol: float = 1e-6, who: str = "search"):
    m = u.exp_integral()
    if abs(m - 1.0) > tol:
        raise NormalizationError(
            f"{who}: int e^u dsigma = {m!r}, expected 1 within {tol}")


def nearest_sphere_entropy(u: SphereField, t_max: float = T_CAP):
    """Minimize H(e^u | e^{u_{t,n}}) = int e^u (u - u_{t,n}) dsigma.

    Returns (params, H_min, cap_warning).
    """
    _check_normalized_exp(u, who="nearest_sphere_entropy")
    g = u.grid
    w = g.weights * np.exp(u.values)
    pts = g.points()
    base = float(np.sum(w * u.values))

    def fun(t, n):
        return base - float(np.sum(w * sphere_optimizer_values(t, n, pts)))

    val, t, n = _manifold_minimize(fun, t_max, _COARSE_T)
    cap = t >= t_max - 1e-6
    return SphereOptimizerParams(float(t), tuple(n)), float(val), cap


def nearest_sphere_gradient(u: SphereField, t_max: float = T_CAP):
    """Minimize int |grad u - grad u_{t,n}|^2 dsigma over the manifold.

    Uses -Delta u_{t,n} = 2 (e^{u_{t,n}} - 1) to evaluate the cross term
    by plain quadrature:
        E(u - v) = E(u) + E(v) - 4 int u e^v dsigma + 4 int u dsigma.
    """
    g = u.grid
    Eu = dirichlet_energy(u)
    w = g.weights
    pts = g.points()
    ubar = u.mean()
    uvals = u.values

    def fun(t, n):
        if t < 1e-14:
            return Eu
        Ev = 8.0 * t / math.tanh(t) - 8.0
        ev = np.exp(sphere_optimizer_values(t, n, pts))
        cross = float(np.sum(w * uvals * ev))
        return Eu + Ev - 4.0 * cross + 4.0 * ubar

    val, t, n = _manifold_minimize(fun, t_max, _COARSE_T)
    return SphereOptimizerParams(float(t), tuple(n)), float(max(val, 0.0)), t >= t_max - 1e-6


def nearest_sphere_reverse_entropy(u: SphereField, t_max: float = T_CAP):
    """Minimize H(e^{u_{t,n}} | e^u) = int e^{u_{t,n}} (u_{t,n} - u) dsigma.

    This is the direction appearing in the entropy-form stability bound;
    note it differs from :func:`nearest_sphere_entropy`.
    """
    _check_normalized_exp(u, who="nearest_sphere_reverse_entropy")
    g = u.grid
    w = g.weights
    pts = g.points()
    uvals = u.values

    def fun(t, n):
        v = sphere_optimizer_values(t, n, pts)
        return float(np.sum(w * np.exp(v) * (v - uvals)))

    val, t, n = _manifold_minimize(fun, t_max, _COARSE_T)
    return SphereOptimizerParams(float(t), tuple(n)), float(val), t >= t_max - 1e-6


def nearest_sphere_L1(f_plus_1: np.ndarray, grid: SphereGrid, t_max: float = T_CAP):
    """Minimize ||(f+1) - e^{u_{t,n}}||_1 over the manifold."""
    w = grid.weights
    pts = grid.points()

    def fun(t, n):
        ev = np.exp(sphere_optimizer_values(t, n, pts))
        return float(np.sum(w * np.abs(f_plus_1 - ev)))

    val, t, n = _manifold_minimize(fun, t_max, _COARSE_T)
    return SphereOptimizerParams(float(t), tuple(n)), float(val), t >= t_max - 1e-6


def nearest_circle_L1(u: CircleField, grid: CircleGrid | None = None,
                      r_cap: float = 1.0 - 1e-6):
    """Minimize ||e^u - e^{v_{r,alpha}}||_1 over normalized Poisson kernels."""
    if grid is None:
        grid = make_circle_grid(max(512, 4 * max(u.kmax, 1)))
    eu = np.exp(u.values(grid))
    th = grid.theta

    def fun(r, alpha):
        if r < 0 or r >= 1.0:
            return float("inf")
        pk = (1.0 - r * r) / (1.0 - 2.0 * r * np.cos(th - alpha) + r * r)
        return float(np.mean(np.abs(eu - pk)))

    best = (float("inf"), 0.0, 0.0)
    for r in np.linspace(0.0, 0.95, 20):
        for alpha in np.linspace(0.0, 2.0 * np.pi, 17)[:-1]:
            v = fun(r, alpha)
            if v < best[0]:
                best = (v, r, alpha)
    res = minimize(lambda q: fun(min(abs(q[0]), r_cap), q[1]),
                   np.array([best[1], best[2]]), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    r = min(abs(float(res.x[0])), r_cap)
    alpha = float(res.x[1]) % (2.0 * np.pi)
    val = min(float(res.fun), best[0])
    return CircleOptimizerParams(r, alpha), val, r >= r_cap - 1e-9


# ----------------------------------------------------------------------
# conformal recentering
# ----------------------------------------------------------------------

@dataclass
class RecenterResult:
    field: SphereField
    steps: list[ConformalParams] = field(default_factory=list)
    barycenter_norm: float = 0.0
    iterations: int = 0


def recenter(u: SphereField, tol: float = 1e-10, max_iter: int = 50,
             step_scale: float = 1.5) -> RecenterResult:
    """Apply conformal pushes until the sphere barycenter of e^u vanishes.

    Pushing along axis n moves mass toward -n and changes a small
    barycenter b by about -(2/3) t n, so the damped Newton step
    t = 1.5 |b| along n = b/|b| contracts quadratically near the fixed
    point; steps are halved whenever |b| fails to decrease.
    """
    _check_normalized_exp(u, who="recenter")
    steps: list[ConformalParams] = []
    cur = u
    b = cur.barycenter()
    bn = float(np.linalg.norm(b))
    for it in range(max_iter):
        if bn <= tol:
            return RecenterResult(cur, steps, bn, it)
        t_step = min(step_scale * bn, 2.0)
        axis = tuple(b / bn)
        for _ in range(10):
            params = ConformalParams(t_step, axis)
            cand = conformal_push(cur, params)
            b_new = cand.barycenter()
            bn_new = float(np.linalg.norm(b_new))
            if bn_new < bn or bn_new <= tol:
                break
            t_step /= 2.0
        else:
            raise ConvergenceError(
                f"recenter: barycenter stalled at |b| = {bn:.3e} after {it} iterations")
        steps.append(params)
        cur, b, bn = cand, b_new, bn_new
    if bn <= tol:
        return RecenterResult(cur, steps, bn, max_iter)
    raise ConvergenceError(
        f"recenter: |b| = {bn:.3e} > {tol} after {max_iter} iterations")

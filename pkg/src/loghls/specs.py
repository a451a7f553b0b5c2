"""Input mini-language and run configuration.

Specs are flat ``kind:key=value,key=value`` strings; values are numbers,
number tuples ``(a,b)``, or for mixtures a ``|``-separated list of
sub-specs inside parentheses.  Formatting is canonical, so
format(parse(s)) is idempotent and diffable in test fixtures.

Examples::

    gaussian:sigma=1
    optimizer:s=2,x0=(1,-1)
    mixture:weights=(0.5,0.5),components=(optimizer:s=1|optimizer:s=3)
    perturbed-optimizer:eps=0.3,mode=1
    sphere-optimizer:t=1,n=(0,0,1)
    band-limited-random:seed=7,L=6,amplitude=0.25
    circle-poisson:r=0.5,alpha=0
    legendre:c0=1,c1=0.5        (heat initial data; "1+0.5*P1" also parses)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from .errors import DomainError, ParseError
from .fields import (CircleField, SphereField, get_transform,
                     planar_from_profile, radial_from_profile)
from .grids import (make_cartesian_grid, make_circle_grid, make_radial_grid,
                    make_sphere_grid)
from .optimizers import (CircleOptimizerParams, PlanarOptimizerParams,
                         SphereOptimizerParams, circle_optimizer,
                         planar_optimizer_profile, sphere_optimizer)

__all__ = ["InputSpec", "parse_input_spec", "format_input_spec", "RunConfig",
           "realize_planar", "realize_sphere", "realize_circle", "realize_heat_coeffs",
           "spec_domain"]

_CANONICAL_KEYS = {
    "gaussian": ("sigma",),
    "optimizer": ("s", "x0"),
    "mixture": ("weights", "components"),
    "perturbed-optimizer": ("eps", "mode", "s"),
    "sphere-optimizer": ("t", "n"),
    "band-limited-random": ("seed", "L", "amplitude"),
    "circle-poisson": ("r", "alpha"),
    "circle-cos": ("eps",),
    "legendre": None,          # c0, c1, ... in index order
}

_DOMAIN = {
    "gaussian": "plane",
    "optimizer": "plane",
    "mixture": "plane",
    "perturbed-optimizer": "plane",
    "sphere-optimizer": "sphere",
    "band-limited-random": "sphere",
    "circle-poisson": "circle",
    "circle-cos": "circle",
    "legendre": "heat",
}

_DEFAULTS = {
    "gaussian": {"sigma": 1.0},
    "optimizer": {"s": 1.0, "x0": (0.0, 0.0)},
    "mixture": {},
    "perturbed-optimizer": {"eps": 0.1, "mode": 1, "s": 1.0},
    "sphere-optimizer": {"t": 1.0, "n": (0.0, 0.0, 1.0)},
    "band-limited-random": {"seed": 0, "L": 6, "amplitude": 0.3},
    "circle-poisson": {"r": 0.5, "alpha": 0.0},
    "circle-cos": {"eps": 0.3},
    "legendre": {},
}


@dataclass(frozen=True)
class InputSpec:
    kind: str
    params: tuple          # tuple of (key, value) pairs, canonical order

    def get(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced ')' in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ParseError(f"unbalanced '(' in {text!r}")
    parts.append("".join(cur))
    return parts


def _parse_value(text: str):
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        inner = text[1:-1]
        if ":" in inner:
            return tuple(parse_input_spec(p) for p in _split_top(inner, "|"))
        return tuple(float(p) for p in _split_top(inner, ","))
    try:
        f = float(text)
    except ValueError as exc:
        raise ParseError(f"cannot parse value {text!r}") from exc
    return f


_LEGENDRE_SHORTHAND = re.compile(
    r"^\s*([+-]?\s*\d*\.?\d*(?:[eE][+-]?\d+)?)\s*(?:\*\s*P(\d+))?\s*$")


def _parse_legendre_shorthand(text: str) -> "InputSpec | None":
    """Accept forms like "1+0.5*P1" or "1 + 0.3*P2" for heat initial data."""
    terms = re.split(r"(?=[+-])", text.replace(" ", ""))
    coeffs: dict[int, float] = {}
    for term in terms:
        if not term:
            continue
        m = _LEGENDRE_SHORTHAND.match(term)
        if not m:
            return None
        num = m.group(1).replace(" ", "")
        if num in ("", "+"):
            num = "1"
        elif num == "-":
            num = "-1"
        try:
            val = float(num)
        except ValueError:
            return None
        k = int(m.group(2)) if m.group(2) is not None else 0
        coeffs[k] = coeffs.get(k, 0.0) + val
    if not coeffs:
        return None
    params = tuple((f"c{k}", coeffs[k]) for k in sorted(coeffs))
    return InputSpec("legendre", params)


def parse_input_spec(text: str) -> InputSpec:
    """Parse a spec string; raises ParseError with the offending fragment."""
    text = text.strip()
    if ":" not in text:
        short = _parse_legendre_shorthand(text)
        if short is not None:
            return short
        raise ParseError(f"spec {text!r} has no kind tag (expected 'kind:key=value,...')")
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind not in _CANONICAL_KEYS:
        raise ParseError(f"unknown spec kind {kind!r} in {text!r}")
    raw: dict[str, object] = {}
    if rest.strip():
        for item in _split_top(rest, ","):
            if "=" not in item:
                raise ParseError(f"expected key=value, got {item!r} in {text!r}")
            k, _, v = item.partition("=")
            k = k.strip()
            if k in raw:
                raise ParseError(f"duplicate key {k!r} in {text!r}")
            raw[k] = _parse_value(v)
    params = dict(_DEFAULTS[kind])
    canonical = _CANONICAL_KEYS[kind]
    if canonical is None:        # legendre: c0, c1, ...
        for k, v in raw.items():
            if not re.fullmatch(r"c\d+", k):
                raise ParseError(f"legendre spec keys must be c0, c1, ...; got {k!r}")
            params[k] = v
        if not params:
            raise ParseError("legendre spec needs at least one coefficient")
        order = sorted(params, key=lambda k: int(k[1:]))
    else:
        for k in raw:
            if k not in canonical:
                raise ParseError(f"unknown key {k!r} for kind {kind!r}")
        params.update(raw)
        order = [k for k in canonical if k in params]
    _validate_spec(kind, params)
    return InputSpec(kind, tuple((k, params[k]) for k in order))


def _validate_spec(kind: str, p: dict) -> None:
    def need_pos(key):
        if not (isinstance(p[key], (int, float)) and p[key] > 0):
            raise ParseError(f"{kind}: {key} must be a positive number, got {p[key]!r}")

    if kind == "gaussian":
        need_pos("sigma")
    elif kind == "optimizer":
        need_pos("s")
        if not (isinstance(p["x0"], tuple) and len(p["x0"]) == 2):
            raise ParseError(f"optimizer: x0 must be a pair, got {p['x0']!r}")
    elif kind == "mixture":
        w = p.get("weights")
        comps = p.get("components")
        if not (isinstance(w, tuple) and isinstance(comps, tuple)
                and len(w) == len(comps) and len(w) >= 1):
            raise ParseError("mixture: weights and components must be lists of equal length")
        if not all(isinstance(c, InputSpec) for c in comps):
            raise ParseError("mixture: components must be sub-specs")
        if any(float(x) < 0 for x in w) or abs(sum(float(x) for x in w) - 1.0) > 1e-9:
            raise ParseError("mixture: weights must be nonnegative and sum to 1")
    elif kind == "perturbed-optimizer":
        need_pos("s")
        if not (0 <= float(p["eps"]) <= 0.5):
            raise ParseError(f"perturbed-optimizer: eps must lie in [0, 0.5], got {p['eps']!r}")
        if int(p["mode"]) not in (1, 2):
            raise ParseError(f"perturbed-optimizer: mode must be 1 or 2, got {p['mode']!r}")
    elif kind == "sphere-optimizer":
        if not (0 <= float(p["t"]) <= 20.0):
            raise ParseError(f"sphere-optimizer: t must lie in [0, 20], got {p['t']!r}")
        n = np.asarray(p["n"], dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ParseError(f"sphere-optimizer: n must be a unit 3-vector, got {p['n']!r}")
    elif kind == "band-limited-random":
        if int(p["L"]) < 1 or int(p["L"]) > 32:
            raise ParseError(f"band-limited-random: L must lie in [1, 32], got {p['L']!r}")
        if not (0 < float(p["amplitude"]) <= 1.0):
            raise ParseError("band-limited-random: amplitude must lie in (0, 1]")
    elif kind == "circle-poisson":
        if not (0 <= float(p["r"]) < 1.0):
            raise ParseError(f"circle-poisson: r must lie in [0, 1), got {p['r']!r}")
    elif kind == "circle-cos":
        if not (0 <= float(p["eps"]) <= 2.0):
            raise ParseError(f"circle-cos: eps must lie in [0, 2], got {p['eps']!r}")


def _fmt_value(v) -> str:
    if isinstance(v, tuple):
        if v and isinstance(v[0], InputSpec):
            return "(" + "|".join(format_input_spec(c) for c in v) + ")"
        return "(" + ",".join(_fmt_number(x) for x in v) + ")"
    return _fmt_number(v)


def _fmt_number(x) -> str:
    f = float(x)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def format_input_spec(spec: InputSpec) -> str:
    return spec.kind + ":" + ",".join(f"{k}={_fmt_value(v)}" for k, v in spec.params)


def spec_domain(spec: InputSpec) -> str:
    return _DOMAIN[spec.kind]


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------

@dataclass
class RunConfig:
    """Grid sizes, tolerances, search boxes and output settings."""

    radial_n: int = 4096
    radial_rmax: float = 1e4
    radial_span: float = 25.0
    cart_n: int = 512
    cart_L: float = 40.0
    sphere_nz: int = 128
    sphere_nphi: int = 256
    circle_n: int = 512
    ks_n: int = 1024
    ks_rmin: float = 1e-2
    ks_rmax: float = 1e3
    ks_T: float = 50.0
    ks_dt: float | None = None
    tol: float = 1e-6
    oracle: bool = False
    seed: int = 0
    out: str | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.radial_n < 16 or self.radial_rmax <= 0 or self.radial_span <= 0:
            raise DomainError("RunConfig: invalid radial grid settings")
        if self.cart_n < 8 or self.cart_L <= 0:
            raise DomainError("RunConfig: invalid Cartesian grid settings")
        if self.sphere_nz < 4 or self.sphere_nphi < 4 or self.circle_n < 8:
            raise DomainError("RunConfig: invalid sphere/circle grid settings")
        if self.ks_n < 64 or not (0 < self.ks_rmin < self.ks_rmax):
            raise DomainError("RunConfig: invalid Keller-Segel grid settings")
        if self.tol <= 0:
            raise DomainError("RunConfig: tol must be positive")

    # lazily built, shared grids
    def radial_grid(self, scheme: str = "log-uniform"):
        key = ("radial", scheme)
        if key not in self._cache:
            self._cache[key] = make_radial_grid(self.radial_rmax, self.radial_n,
                                                scheme, self.radial_span)
        return self._cache[key]

    def cartesian_grid(self):
        if "cart" not in self._cache:
            self._cache["cart"] = make_cartesian_grid(self.cart_L, self.cart_n)
        return self._cache["cart"]

    def sphere_grid(self):
        if "sphere" not in self._cache:
            self._cache["sphere"] = make_sphere_grid(self.sphere_nz, self.sphere_nphi)
        return self._cache["sphere"]

    def circle_grid(self):
        if "circle" not in self._cache:
            self._cache["circle"] = make_circle_grid(self.circle_n)
        return self._cache["circle"]

    def metadata(self) -> dict:
        out = {}
        for f in dc_fields(self):
            if f.name.startswith("_"):
                continue
            out[f.name] = getattr(self, f.name)
        return out

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        kwargs = {}
        with open(path) as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ParseError(f"{path}:{line_no}: expected key=value, got {line!r}")
                k, _, v = line.partition("=")
                kwargs[k.strip()] = v.strip()
        return cls.from_strings(kwargs)

    @classmethod
    def from_strings(cls, kwargs: dict) -> "RunConfig":
        typed = {}
        valid = {f.name: f.type for f in dc_fields(cls) if not f.name.startswith("_")}
        for k, v in kwargs.items():
            if k not in valid:
                raise ParseError(f"unknown config key {k!r}")
            if v in ("none", "None", ""):
                typed[k] = None
            elif k in ("radial_n", "cart_n", "sphere_nz", "sphere_nphi",
                       "circle_n", "ks_n", "seed"):
                typed[k] = int(float(v))
            elif k == "oracle":
                typed[k] = str(v).lower() in ("1", "true", "yes")
            elif k == "out":
                typed[k] = str(v)
            else:
                typed[k] = float(v)
        return cls(**typed)


# ----------------------------------------------------------------------
# realization of specs on grids
# ----------------------------------------------------------------------

def _planar_profile_radial(spec: InputSpec):
    """Radial profile for centered planar specs, or None if off-center."""
    kind = spec.kind
    if kind == "gaussian":
        sig = float(spec.get("sigma"))

        def prof(r, _s=sig):
            return np.exp(-np.asarray(r) ** 2 / (2 * _s * _s)) / (2 * np.pi * _s * _s)

        return prof
    if kind == "optimizer":
        if tuple(spec.get("x0")) != (0.0, 0.0):
            return None
        return planar_optimizer_profile(PlanarOptimizerParams(float(spec.get("s"))))
    if kind == "perturbed-optimizer":
        eps = float(spec.get("eps"))
        s = float(spec.get("s"))
        mode = int(spec.get("mode"))
        base = planar_optimizer_profile(PlanarOptimizerParams(s))
        if mode == 1:
            def raw(r, _b=base, _e=eps, _s=s):
                q = (np.asarray(r) / _s) ** 2
                return _b(r) * (1.0 + _e * (1.0 - q) / (1.0 + q))
        else:
            alt = planar_optimizer_profile(PlanarOptimizerParams(2.0 * s))

            def raw(r, _b=base, _a=alt, _e=eps):
                return (1.0 - _e) * _b(r) + _e * _a(r)
        return raw
    if kind == "mixture":
        comps = spec.get("components")
        profs = [_planar_profile_radial(c) for c in comps]
        if any(p is None for p in profs):
            return None
        w = [float(x) for x in spec.get("weights")]

        def prof(r, _w=w, _p=profs):
            return sum(wi * pi(r) for wi, pi in zip(_w, _p))

        return prof
    raise DomainError(f"spec kind {kind!r} is not a planar density")


def _planar_profile_cartesian(spec: InputSpec):
    kind = spec.kind
    if kind == "optimizer":
        s = float(spec.get("s"))
        a, b = (float(v) for v in spec.get("x0"))

        def prof(x, y, _s=s, _a=a, _b=b):
            q = (np.asarray(x) / _s - _a) ** 2 + (np.asarray(y) / _s - _b) ** 2
            return (1.0 / (np.pi * _s * _s)) * (1.0 + q) ** -2

        return prof
    if kind == "mixture":
        comps = spec.get("components")
        w = [float(x) for x in spec.get("weights")]
        profs = []
        for c in comps:
            rad = _planar_profile_radial(c)
            if rad is not None:
                profs.append(lambda x, y, _p=rad: _p(np.sqrt(np.asarray(x)**2 + np.asarray(y)**2)))
            else:
                profs.append(_planar_profile_cartesian(c))

        def prof(x, y, _w=w, _p=profs):
            return sum(wi * pi(x, y) for wi, pi in zip(_w, _p))

        return prof
    rad = _planar_profile_radial(spec)
    if rad is None:
        raise DomainError(f"spec {spec.kind!r} has no Cartesian realization")
    return lambda x, y, _p=rad: _p(np.sqrt(np.asarray(x)**2 + np.asarray(y)**2))


def realize_planar(spec: InputSpec, config: RunConfig):
    """Build the planar density; radial when centered, Cartesian otherwise.

    The result is normalized to unit mass on its grid.
    """
    if spec_domain(spec) != "plane":
        raise DomainError(f"spec {spec.kind!r} is not a planar density")
    prof = _planar_profile_radial(spec)
    if prof is not None:
        rho = radial_from_profile(config.radial_grid(), prof)
        return rho if abs(rho.mass - 1.0) <= 1e-9 else rho.normalized()
    return planar_from_profile(config.cartesian_grid(),
                               _planar_profile_cartesian(spec)).normalized()


def realize_sphere(spec: InputSpec, config: RunConfig) -> SphereField:
    """Build a sphere field with int e^u dsigma = 1."""
    grid = config.sphere_grid()
    if spec.kind == "sphere-optimizer":
        return sphere_optimizer(
            SphereOptimizerParams(float(spec.get("t")),
                                  tuple(float(v) for v in spec.get("n"))), grid)
    if spec.kind == "band-limited-random":
        seed = int(spec.get("seed"))
        L = int(spec.get("L"))
        amp = float(spec.get("amplitude"))
        rng = np.random.default_rng(seed)
        tr = get_transform(grid, lmax=L)     # band-limited: small tables suffice
        c = np.zeros((tr.lmax + 1, tr.lmax + 1))
        s = np.zeros_like(c)
        for ell in range(1, L + 1):
            scale = amp / (1.0 + ell) ** 2
            c[ell, 0] = scale * rng.standard_normal()
            for m in range(1, ell + 1):
                c[ell, m] = scale * rng.standard_normal()
                s[ell, m] = scale * rng.standard_normal()
        raw = tr.synthesize(c, s)
        u0 = SphereField(grid, raw,
                         fn=lambda p, _c=c, _s=s, _tr=tr: _tr.evaluate(
                             _c, _s, np.clip(p[..., 2], -1, 1),
                             np.arctan2(p[..., 1], p[..., 0])))
        shift = float(np.log(u0.exp_integral()))
        return u0.shifted(-shift)
    raise DomainError(f"spec {spec.kind!r} is not a sphere field")


def realize_circle(spec: InputSpec, config: RunConfig | None = None) -> CircleField:
    """Build a circle field with int e^u dsigma = 1."""
    if spec.kind == "circle-poisson":
        return circle_optimizer(
            CircleOptimizerParams(float(spec.get("r")), float(spec.get("alpha"))))
    if spec.kind == "circle-cos":
        eps = float(spec.get("eps"))
        kmax = 64
        coeffs = np.zeros(kmax + 1, dtype=complex)
        coeffs[1] = eps / 2.0
        u = CircleField(coeffs)
        grid = make_circle_grid(512 if config is None else config.circle_n)
        from .grids import integrate as _integrate
        shift = float(np.log(_integrate(np.exp(u.values(grid)), grid)))
        coeffs[0] = -shift
        return CircleField(coeffs)
    raise DomainError(f"spec {spec.kind!r} is not a circle field")


def realize_heat_coeffs(spec: InputSpec) -> np.ndarray:
    if spec.kind != "legendre":
        raise DomainError(f"spec {spec.kind!r} is not heat initial data")
    idx = [int(k[1:]) for k, _ in spec.params]
    coeffs = np.zeros(max(idx) + 1)
    for k, v in spec.params:
        coeffs[int(k[1:])] = float(v)
    return coeffs

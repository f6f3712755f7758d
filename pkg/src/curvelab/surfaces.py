"""Parametric surface patches and the built-in catalog.

A :class:`SurfacePatch` wraps an immersion ``(u, v) -> (x1, x2, x3)`` written
with ordinary arithmetic and the elementary functions of :mod:`curvelab.jet`,
so it can be evaluated on floats or on jets alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from . import jet as J
from .errors import ConfigurationError, ConstructionError, NumericError

DEFAULT_K_MIN = 1e-8
QUADRIC_OMEGA_EPS = 1e-6
CURVE_TOL = 1e-10

Immersion = Callable[[object, object], tuple]
Curve = Callable[[object], tuple]


@dataclass(frozen=True)
class CurvePair:
    """Directrix ``sigma`` and unit ruling direction ``tau`` of a ruled surface.

    ``s`` is the arc length of the spherical curve ``tau``; construction checks
    <tau, tau> = 1, <tau', tau'> = 1 and <sigma', tau> = 0 on a probe grid.
    """

    sigma: Curve
    tau: Curve
    s_domain: tuple[float, float]
    name: str = "ruled"
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        lo, hi = self.s_domain
        if not lo < hi:
            raise ConstructionError(f"empty s-domain {self.s_domain}")
        if self.check:
            worst = max(curve_pair_defects(self, s) for s in np.linspace(lo, hi, 16))
            if worst > CURVE_TOL:
                raise ConstructionError(
                    f"curve pair {self.name!r} violates the arc-length normalization (defect {worst:.3e})"
                )

    def derivatives(self, s: float, order: int = 4) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Derivatives [f, f', ..., f^(order)] of sigma and tau at ``s``."""
        sj = J.jet_seed("u", s, order)
        sig = [J.as_jet(c, order) for c in self.sigma(sj)]
        tau = [J.as_jet(c, order) for c in self.tau(sj)]
        ds = [np.array([c.partial(k, 0) for c in sig]) for k in range(order + 1)]
        dt = [np.array([c.partial(k, 0) for c in tau]) for k in range(order + 1)]
        return ds, dt


def curve_pair_defects(pair: CurvePair, s: float) -> float:
    sig, tau = pair.derivatives(s, order=2)
    return max(
        abs(tau[0] @ tau[0] - 1.0),
        abs(tau[1] @ tau[1] - 1.0),
        abs(sig[1] @ tau[0]),
    )


@dataclass(frozen=True)
class SurfacePatch:
    """An immersion over a rectangular parameter domain.

    ``excluded_zones`` are predicates ``(u, v) -> bool`` that return True where
    the chart is singular or otherwise unusable.  ``developable`` marks surfaces
    with K = 0 everywhere (cylinder, plane); for those only the first form is
    available and the K-nonvanishing probe is skipped.
    """

    name: str
    immersion: Immersion
    domain: tuple[tuple[float, float], tuple[float, float]]
    params: Mapping[str, float] = field(default_factory=dict)
    excluded_zones: tuple[Callable[[float, float], bool], ...] = ()
    developable: bool = False
    k_min: float = DEFAULT_K_MIN
    curves: CurvePair | None = None

    def __call__(self, u, v) -> tuple:
        return tuple(self.immersion(u, v))

    def position(self, u: float, v: float) -> np.ndarray:
        return np.array([float(c) for c in self.immersion(float(u), float(v))])

    def contains(self, u: float, v: float) -> bool:
        (u0, u1), (v0, v1) = self.domain
        return u0 <= u <= u1 and v0 <= v <= v1

    def is_excluded(self, u: float, v: float) -> bool:
        return any(zone(u, v) for zone in self.excluded_zones)

    def admissible(self, u: float, v: float) -> bool:
        return self.contains(u, v) and not self.is_excluded(u, v)

    def describe(self) -> dict:
        return {"surface": self.name, "params": dict(self.params), "domain": [list(d) for d in self.domain]}


# -- light-weight pointwise checks used by construction probes -----------------


def regularity_and_curvature(patch: SurfacePatch, u: float, v: float) -> tuple[float, float]:
    """Return (|x_u x x_v|, K) from order-2 jets, without building a full frame."""
    uj, vj = J.seed_pair(u, v, 2)
    xs = [J.as_jet(c, 2) for c in patch.immersion(uj, vj)]
    xu = np.array([c.partial(1, 0) for c in xs])
    xv = np.array([c.partial(0, 1) for c in xs])
    xuu = np.array([c.partial(2, 0) for c in xs])
    xuv = np.array([c.partial(1, 1) for c in xs])
    xvv = np.array([c.partial(0, 2) for c in xs])
    nrm = np.cross(xu, xv)
    area = float(np.linalg.norm(nrm))
    if area == 0.0:
        return 0.0, 0.0
    n = nrm / area
    det_b = (xuu @ n) * (xvv @ n) - (xuv @ n) ** 2
    return area, det_b / area**2


def probe(patch: SurfacePatch, n: int = 20, k_min: float | None = None) -> None:
    """Check regularity (and K != 0 unless developable) on an ``n`` x ``n`` admissible grid."""
    k_min = patch.k_min if k_min is None else k_min
    (u0, u1), (v0, v1) = patch.domain
    du, dv = (u1 - u0) / n, (v1 - v0) / n
    for i in range(n):
        for j in range(n):
            u, v = u0 + (i + 0.5) * du, v0 + (j + 0.5) * dv
            if patch.is_excluded(u, v):
                continue
            try:
                area, K = regularity_and_curvature(patch, u, v)
            except NumericError as exc:
                raise ConstructionError(f"{patch.name}: evaluation failed at ({u:.4g}, {v:.4g}): {exc}") from exc
            if area < 1e-12:
                raise ConstructionError(f"{patch.name}: singular immersion at ({u:.4g}, {v:.4g})")
            if not patch.developable and abs(K) < k_min:
                raise ConstructionError(f"{patch.name}: |K| = {abs(K):.3e} < k_min at ({u:.4g}, {v:.4g})")


# -- catalog --------------------------------------------------------------------


def sphere(r: float = 1.0, margin: float = 0.1) -> SurfacePatch:
    """Geographic chart r(cos u cos v, sin u cos v, sin v); the poles are excluded."""
    if r <= 0:
        raise ConstructionError("sphere radius must be positive")

    def x(u, v):
        cv = J.cos(v)
        return (r * J.cos(u) * cv, r * J.sin(u) * cv, r * J.sin(v))

    half = math.pi / 2 - margin
    return SurfacePatch(
        "sphere",
        x,
        ((-math.pi + margin, math.pi - margin), (-half, half)),
        {"r": r},
        excluded_zones=(lambda u, v: abs(math.cos(v)) < margin,),
    )


def helicoid_pair(c: float = 1.0, l: float = 0.0, s_domain=(-math.pi, math.pi)) -> CurvePair:
    """sigma(s) = (l cos s, l sin s, c s), tau(s) = (cos s, sin s, 0)."""
    return CurvePair(
        sigma=lambda s: (l * J.cos(s), l * J.sin(s), c * s),
        tau=lambda s: (J.cos(s), J.sin(s), 0.0 * s),
        s_domain=tuple(s_domain),
        name=f"helicoid(c={c}, l={l})",
    )


def ruled(curves: CurvePair, t_range: tuple[float, float] = (-2.0, 2.0), name: str = "ruled", params=None) -> SurfacePatch:
    """x(s, t) = sigma(s) + t tau(s)."""

    def x(s, t):
        sig = curves.sigma(s)
        tau = curves.tau(s)
        return tuple(sig[k] + t * tau[k] for k in range(3))

    return SurfacePatch(name, x, (tuple(curves.s_domain), tuple(t_range)), dict(params or {}), curves=curves)


def helicoid(c: float = 1.0, l: float = 0.0, t_range=(-2.0, 2.0)) -> SurfacePatch:
    """((l + t) cos s, (l + t) sin s, c s); a ruled surface over :func:`helicoid_pair`."""
    if c == 0:
        raise ConstructionError("helicoid pitch c must be nonzero")
    return ruled(helicoid_pair(c, l), t_range, name="helicoid", params={"c": c, "l": l})


def _quadric1_omega_min(a: float, b: float, c: float, domain) -> float:
    # omega is affine in u^2 and v^2, so its minimum sits at an extreme of each square
    (u0, u1), (v0, v1) = domain

    def sq_range(lo, hi):
        vals = [lo * lo, hi * hi]
        if lo <= 0 <= hi:
            vals.append(0.0)
        return min(vals), max(vals)

    us, vs = sq_range(u0, u1), sq_range(v0, v1)
    return c + min(a * us[0], a * us[1]) + min(b * vs[0], b * vs[1])


def _quadric1_default_domain(a: float, b: float, c: float):
    if c > 0:
        neg = max(-a, 0.0) + max(-b, 0.0)
        half = 1.0 if neg == 0 else min(1.0, math.sqrt(0.75 * c / neg))
        return ((-half, half), (-half, half))
    # c < 0: stay away from the hole on the side of a positive coefficient
    if a > 0:
        u_lo = math.sqrt((abs(c) + 0.25 * abs(min(b, 0.0)) + 0.5) / a)
        return ((u_lo, u_lo + 1.0), (-0.5, 0.5))
    if b > 0:
        v_lo = math.sqrt((abs(c) + 0.25 * abs(min(a, 0.0)) + 0.5) / b)
        return ((-0.5, 0.5), (v_lo, v_lo + 1.0))
    raise ConstructionError(f"quadric1(a={a}, b={b}, c={c}) has no real points")


def quadric1(a: float, b: float, c: float, domain=None) -> SurfacePatch:
    """Central quadric z^2 - a x^2 - b y^2 = c as the graph (u, v, sqrt(omega))."""
    if a * b * c == 0:
        raise ConstructionError("quadric1 requires abc != 0")
    domain = _quadric1_default_domain(a, b, c) if domain is None else tuple(map(tuple, domain))
    if _quadric1_omega_min(a, b, c, domain) <= QUADRIC_OMEGA_EPS:
        raise ConstructionError(f"quadric1: omega = c + a u^2 + b v^2 <= {QUADRIC_OMEGA_EPS} inside {domain}")

    def x(u, v):
        return (u, v, J.sqrt(c + a * u * u + b * v * v))

    return SurfacePatch(
        "quadric1",
        x,
        domain,
        {"a": a, "b": b, "c": c},
        excluded_zones=(lambda u, v: c + a * u * u + b * v * v <= QUADRIC_OMEGA_EPS,),
    )


def quadric2(a: float, b: float, domain=((-1.0, 1.0), (-1.0, 1.0))) -> SurfacePatch:
    """Elliptic paraboloid (u, v, a u^2 / 2 + b v^2 / 2), a, b > 0."""
    if a <= 0 or b <= 0:
        raise ConstructionError("quadric2 requires a > 0 and b > 0")
    return SurfacePatch(
        "quadric2",
        lambda u, v: (u, v, 0.5 * a * u * u + 0.5 * b * v * v),
        tuple(map(tuple, domain)),
        {"a": a, "b": b},
    )


def cylinder(r: float = 1.0) -> SurfacePatch:
    if r <= 0:
        raise ConstructionError("cylinder radius must be positive")
    return SurfacePatch(
        "cylinder",
        lambda u, v: (r * J.cos(u), r * J.sin(u), v),
        ((-math.pi, math.pi), (-1.0, 1.0)),
        {"r": r},
        developable=True,
    )


def catenoid(c: float = 1.0) -> SurfacePatch:
    if c <= 0:
        raise ConstructionError("catenoid parameter must be positive")

    def x(u, v):
        rho = c * J.cosh(v / c)
        return (rho * J.cos(u), rho * J.sin(u), v)

    return SurfacePatch("catenoid", x, ((-math.pi, math.pi), (-c, c)), {"c": c})


def torus(R: float = 2.0, r: float = 0.5, margin: float = 0.1) -> SurfacePatch:
    """Torus of revolution; the two circles where K = 0 (cos v = 0) are excluded."""
    if not 0 < r < R:
        raise ConstructionError("torus requires 0 < r < R")

    def x(u, w):
        rho = R + r * J.cos(w)
        return (rho * J.cos(u), rho * J.sin(u), r * J.sin(w))

    return SurfacePatch(
        "torus",
        x,
        ((-math.pi, math.pi), (-math.pi, math.pi)),
        {"R": R, "r": r},
        excluded_zones=(lambda u, v: abs(math.cos(v)) < margin,),
    )


def monge(f: Callable, domain=((-1.0, 1.0), (-1.0, 1.0)), name: str = "monge", developable: bool = False) -> SurfacePatch:
    """Graph (u, v, f(u, v)); ``f`` must use jet-aware arithmetic."""
    return SurfacePatch(name, lambda u, v: (u, v, f(u, v)), tuple(map(tuple, domain)), developable=developable)


def plane() -> SurfacePatch:
    return monge(lambda u, v: 0.0 * u, name="plane", developable=True)


def random_curve_pair(seed: int, s_domain=(-1.0, 1.0)) -> CurvePair:
    """A random admissible pair: tau on a small circle, sigma' = alpha tau' + beta (tau x tau').

    With alpha, beta affine in s the directrix integrates in closed form, and a
    random rotation (QR of a Gaussian matrix) moves the pair off the axes.
    A = (sigma', tau, tau') = beta(s) stays positive on ``s_domain``.
    """
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.6, math.pi / 2 - 0.2)
    st, ct = math.sin(theta), math.cos(theta)
    w = 1.0 / st
    a0, a1 = rng.uniform(-1.0, 1.0), rng.uniform(-0.5, 0.5)
    b0, b1 = rng.uniform(0.5, 1.5), rng.uniform(-0.25, 0.25)
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    rot = q * np.sign(np.diag(r))
    if np.linalg.det(rot) < 0:
        rot[:, 0] = -rot[:, 0]
    offset = rng.normal(size=3)

    def rotate(vec):
        return tuple(sum(rot[i, k] * vec[k] for k in range(3)) for i in range(3))

    def tau(s):
        ws = w * s
        return rotate((st * J.cos(ws), st * J.sin(ws), ct + 0.0 * s))

    def sigma(s):
        ws = w * s
        cw, sw = J.cos(ws), J.sin(ws)
        # antiderivatives of tau', s tau', N, s N with N = tau x tau'
        i_tp = (cw / w, sw / w, 0.0 * s)
        i_stp = (s * cw / w - sw / w**2, s * sw / w + cw / w**2, 0.0 * s)
        i_n = (-ct * sw / w, ct * cw / w, st * s)
        i_sn = (
            -ct * (s * sw / w + cw / w**2),
            -ct * (-s * cw / w + sw / w**2),
            st * s * s / 2.0,
        )
        raw = tuple(a0 * i_tp[k] + a1 * i_stp[k] + b0 * i_n[k] + b1 * i_sn[k] for k in range(3))
        rotated = rotate(raw)
        return tuple(rotated[k] + offset[k] for k in range(3))

    return CurvePair(sigma, tau, tuple(s_domain), name=f"random(seed={seed})")


def transformed(patch: SurfacePatch, rotation=None, scale: float = 1.0, translation=None) -> SurfacePatch:
    """Rigid motion and/or homothety x -> scale * R x + t of a patch."""
    rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    shift = np.zeros(3) if translation is None else np.asarray(translation, dtype=float)
    if scale <= 0:
        raise ConstructionError("scale must be positive")
    base = patch.immersion

    def x(u, v):
        p = base(u, v)
        return tuple(scale * (rot[i, 0] * p[0] + rot[i, 1] * p[1] + rot[i, 2] * p[2]) + shift[i] for i in range(3))

    params = dict(patch.params, scale=scale)
    return SurfacePatch(
        patch.name,
        x,
        patch.domain,
        params,
        patch.excluded_zones,
        patch.developable,
        patch.k_min,
        None,
    )


def _ruled_from_seed(seed: float = 0) -> SurfacePatch:
    return ruled(random_curve_pair(int(seed)), name="ruled", params={"seed": int(seed)})


# name -> (factory, ordered parameter defaults); None marks a required parameter
CATALOG: dict[str, tuple[Callable[..., SurfacePatch], dict[str, float | None]]] = {
    "sphere": (sphere, {"r": 1.0}),
    "helicoid": (helicoid, {"c": 1.0, "l": 0.0}),
    "quadric1": (quadric1, {"a": None, "b": None, "c": None}),
    "quadric2": (quadric2, {"a": None, "b": None}),
    "cylinder": (cylinder, {"r": 1.0}),
    "catenoid": (catenoid, {"c": 1.0}),
    "torus": (torus, {"R": 2.0, "r": 0.5}),
    "plane": (plane, {}),
    "ruled": (_ruled_from_seed, {"seed": 0}),
}


def make_surface(spec, params: Mapping[str, float] | None = None, *, check: bool = True, k_min: float | None = None) -> SurfacePatch:
    """Build a catalog surface.

    ``spec`` is a catalog name (with ``params``), a mapping
    ``{"surface": name, "params": {...}}``, or an existing :class:`CurvePair`
    (which yields the ruled surface over it).  With ``check`` the construction
    probe runs on a 20 x 20 grid.
    """
    if isinstance(spec, CurvePair):
        patch = ruled(spec)
    else:
        if isinstance(spec, Mapping):
            name = spec.get("surface")
            params = dict(spec.get("params") or {}, **(params or {}))
        else:
            name = spec
            params = dict(params or {})
        if name not in CATALOG:
            raise ConfigurationError(f"unknown surface {name!r}; known: {sorted(CATALOG)}")
        factory, defaults = CATALOG[name]
        unknown = set(params) - set(defaults)
        if unknown:
            raise ConfigurationError(f"{name}: unknown parameter(s) {sorted(unknown)}")
        kwargs = {}
        for key, default in defaults.items():
            if key in params:
                kwargs[key] = float(params[key])
            elif default is None:
                raise ConfigurationError(f"{name}: missing required parameter {key!r}")
            else:
                kwargs[key] = default
        patch = factory(**kwargs)
    if k_min is not None:
        patch = _with_k_min(patch, k_min)
    if check:
        probe(patch)
    return patch


def _with_k_min(patch: SurfacePatch, k_min: float) -> SurfacePatch:
    return replace(patch, k_min=float(k_min))


def catalog_listing() -> list[dict]:
    return [{"surface": name, "params": dict(defaults)} for name, (_, defaults) in CATALOG.items()]


def parse_point(text: str | Sequence[float]) -> tuple[float, float]:
    if isinstance(text, str):
        parts = text.split(",")
        if len(parts) != 2:
            raise ConfigurationError(f"expected 'u,v', got {text!r}")
        return float(parts[0]), float(parts[1])
    u, v = text
    return float(u), float(v)

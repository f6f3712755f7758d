"""Pointwise surface geometry: fundamental forms, Gauss map, curvatures,
Christoffel symbols of I, II, III and the difference tensors T, T~.

Index conventions for the arrays in :class:`FrameData`:

* ``dg[k, i, j]`` is the partial of ``g_ij`` along ``u^k`` (same for ``db``, ``de``);
* ``Gamma[k, i, j]`` is the symbol Gamma^k_ij (likewise ``Pi``, ``LambdaSym``, ``T``);
* ``dn[i]`` is n_{/i} and ``ddn[i, j]`` is n_{/ij}.

The Gauss map is always n = (x_u x x_v) / |x_u x x_v|.  Reversing the
orientation flips b, H and Delta^II, but leaves Delta^II n and K unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import jet as J
from .errors import ConfigurationError, FlatPointError, OutOfOrderError, RegularityError, SingularFormError
from .surfaces import SurfacePatch

REGULARITY_EPS = 1e-12
FORMS = ("I", "II", "III")


def normalize_form(form) -> str:
    key = {1: "I", 2: "II", 3: "III"}.get(form, form)
    if isinstance(key, str):
        key = key.upper()
    if key not in FORMS:
        raise ConfigurationError(f"form must be one of I, II, III; got {form!r}")
    return key


class PointJets:
    """Jet-level geometry at one parameter point.

    Scalar fields are evaluated against this object, so their derivatives come
    out of the same jets as the frame.  Orders: x carries ``order``, the first
    partials, n and g carry ``order - 1``, b and e carry ``order - 2``.
    """

    def __init__(self, patch: SurfacePatch, u: float, v: float, order: int = J.DEFAULT_ORDER):
        order = J.check_order(order)
        self.patch = patch
        self.u, self.v, self.order = float(u), float(v), order
        self.uj, self.vj = J.seed_pair(self.u, self.v, order)
        self.x = tuple(J.as_jet(c, order) for c in patch.immersion(self.uj, self.vj))
        self.xu = tuple(c.diff(0) for c in self.x)
        self.xv = tuple(c.diff(1) for c in self.x)
        normal = J.cross(self.xu, self.xv)
        area2 = J.dot(normal, normal)
        if area2.value < REGULARITY_EPS**2:
            raise RegularityError(f"{patch.name}: |x_u x x_v| < {REGULARITY_EPS} at ({u:.6g}, {v:.6g})")
        inv_area = J.recip(J.sqrt(area2))
        self.n = tuple(c * inv_area for c in normal)

    @cached_property
    def g(self):
        g11, g12, g22 = J.dot(self.xu, self.xu), J.dot(self.xu, self.xv), J.dot(self.xv, self.xv)
        return ((g11, g12), (g12, g22))

    @cached_property
    def b(self):
        xuu = tuple(c.diff(0) for c in self.xu)
        xuv = tuple(c.diff(1) for c in self.xu)
        xvv = tuple(c.diff(1) for c in self.xv)
        b11, b12, b22 = J.dot(xuu, self.n), J.dot(xuv, self.n), J.dot(xvv, self.n)
        return ((b11, b12), (b12, b22))

    @cached_property
    def dn(self):
        return (tuple(c.diff(0) for c in self.n), tuple(c.diff(1) for c in self.n))

    @cached_property
    def e(self):
        nu, nv = self.dn
        e11, e12, e22 = J.dot(nu, nu), J.dot(nu, nv), J.dot(nv, nv)
        return ((e11, e12), (e12, e22))

    @cached_property
    def det_g(self):
        g = self.g
        return g[0][0] * g[1][1] - g[0][1] * g[0][1]

    @cached_property
    def K(self) -> J.Jet2:
        b = self.b
        return (b[0][0] * b[1][1] - b[0][1] * b[0][1]) / self.det_g

    @cached_property
    def H(self) -> J.Jet2:
        g, b = self.g, self.b
        return (b[0][0] * g[1][1] - 2.0 * b[0][1] * g[0][1] + b[1][1] * g[0][0]) / (2.0 * self.det_g)


def _values(m) -> np.ndarray:
    return np.array([[m[0][0].value, m[0][1].value], [m[1][0].value, m[1][1].value]])


def _first_partials(m) -> np.ndarray:
    out = np.empty((2, 2, 2))
    for i in range(2):
        for j in range(2):
            out[0, i, j] = m[i][j].partial(1, 0)
            out[1, i, j] = m[i][j].partial(0, 1)
    return out


def inverse2(a: np.ndarray) -> np.ndarray:
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det


def christoffel_from(a_inv: np.ndarray, da: np.ndarray) -> np.ndarray:
    """C^k_ij = 1/2 a^{kr} (-a_{ij/r} + a_{ir/j} + a_{jr/i})."""
    term = -da + np.transpose(da, (2, 1, 0)) + np.transpose(da, (2, 0, 1))
    return 0.5 * np.einsum("kr,rij->kij", a_inv, term)


def covariant_derivative(tensor: np.ndarray, dtensor: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    """nabla_r t_ij = t_{ij/r} - C^k_ri t_kj - C^k_rj t_ik, returned as [r, i, j]."""
    return (
        dtensor
        - np.einsum("kri,kj->rij", symbols, tensor)
        - np.einsum("krj,ik->rij", symbols, tensor)
    )


@dataclass
class FrameData:
    """All pointwise geometry at (u, v).

    On a flat point of a developable surface (K = 0) the fields that need an
    invertible second form (``binv``, ``einv``, ``Pi``, ``LambdaSym``, ``T``,
    ``Ttilde``) are None and ``curved`` is False.
    """

    u: float
    v: float
    order: int
    x_partials: np.ndarray
    n: np.ndarray
    dn: np.ndarray
    ddn: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    b: np.ndarray
    db: np.ndarray
    e: np.ndarray
    de: np.ndarray
    K: float
    H: float
    H_alt: float | None
    dK: np.ndarray
    Gamma: np.ndarray
    curved: bool
    binv: np.ndarray | None = None
    einv: np.ndarray | None = None
    Pi: np.ndarray | None = None
    LambdaSym: np.ndarray | None = None
    T: np.ndarray | None = None
    Ttilde: np.ndarray | None = None
    jets: PointJets | None = field(default=None, repr=False, compare=False)

    def dx(self, i: int, j: int) -> np.ndarray:
        if i + j > self.order:
            raise OutOfOrderError(f"x partial ({i}, {j}) beyond order {self.order}")
        return self.x_partials[i, j]

    @property
    def x(self) -> np.ndarray:
        return self.x_partials[0, 0]

    @property
    def x_u(self) -> np.ndarray:
        return self.x_partials[1, 0]

    @property
    def x_v(self) -> np.ndarray:
        return self.x_partials[0, 1]

    @property
    def tangents(self) -> np.ndarray:
        return np.stack([self.x_u, self.x_v])

    @property
    def det_g(self) -> float:
        return float(np.linalg.det(self.g))

    @property
    def det_b(self) -> float:
        return float(np.linalg.det(self.b))

    @property
    def b_sign(self) -> int:
        return int(np.sign(self.det_b))

    def form(self, form) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(tensor, inverse, Christoffel symbols) of form I, II or III."""
        key = normalize_form(form)
        if key == "I":
            return self.g, self.ginv, self.Gamma
        if not self.curved:
            raise SingularFormError(f"form {key} is singular at a flat point ({self.u:.6g}, {self.v:.6g})")
        if key == "II":
            return self.b, self.binv, self.Pi
        return self.e, self.einv, self.LambdaSym

    def dform(self, form) -> np.ndarray:
        return {"I": self.dg, "II": self.db, "III": self.de}[normalize_form(form)]


def gauss_map(jets: PointJets) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """n, n_{/i} and n_{/ij} at the jet point (orientation x_u x x_v)."""
    n = np.array([c.value for c in jets.n])
    dn = np.array([[c.partial(1, 0) for c in jets.n], [c.partial(0, 1) for c in jets.n]])
    ddn = np.empty((2, 2, 3))
    ddn[0, 0] = [c.partial(2, 0) for c in jets.n]
    ddn[0, 1] = ddn[1, 0] = [c.partial(1, 1) for c in jets.n]
    ddn[1, 1] = [c.partial(0, 2) for c in jets.n]
    return n, dn, ddn


def evaluate_frame(
    patch: SurfacePatch,
    u: float,
    v: float,
    order: int = J.DEFAULT_ORDER,
    *,
    require_curved: bool | None = None,
    k_min: float | None = None,
) -> FrameData:
    """Full pointwise geometry of ``patch`` at (u, v).

    ``require_curved`` defaults to True except on developable surfaces; when it
    holds, |K| < ``k_min`` raises :class:`FlatPointError`.
    """
    order = J.check_order(order)
    if order < 3:
        raise ConfigurationError("frames need third partials of x; use jet order >= 3")
    if require_curved is None:
        require_curved = not patch.developable
    k_min = patch.k_min if k_min is None else k_min

    jets = PointJets(patch, u, v, order)
    p = order
    xp = np.zeros((p + 1, p + 1, 3))
    for k, c in enumerate(jets.x):
        for i in range(p + 1):
            for j in range(p + 1 - i):
                xp[i, j, k] = c.partial(i, j)

    n, dn, ddn = gauss_map(jets)
    g, dg = _values(jets.g), _first_partials(jets.g)
    b, db = _values(jets.b), _first_partials(jets.b)
    e, de = _values(jets.e), _first_partials(jets.e)
    ginv = inverse2(g)
    det_g = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    det_b = b[0, 0] * b[1, 1] - b[0, 1] ** 2
    K = det_b / det_g
    H = 0.5 * float(np.sum(b * ginv))
    Kj = jets.K
    dK = np.array([Kj.partial(1, 0), Kj.partial(0, 1)])
    Gamma = christoffel_from(ginv, dg)

    curved = abs(K) >= k_min
    if not curved and require_curved:
        raise FlatPointError(f"{patch.name}: |K| = {abs(K):.3e} < k_min = {k_min:g} at ({u:.6g}, {v:.6g})")

    frame = FrameData(
        u=float(u), v=float(v), order=order, x_partials=xp, n=n, dn=dn, ddn=ddn,
        g=g, ginv=ginv, dg=dg, b=b, db=db, e=e, de=de,
        K=float(K), H=H, H_alt=None, dK=dK, Gamma=Gamma, curved=curved, jets=jets,
    )
    if curved:
        binv, einv = inverse2(b), inverse2(e)
        frame.binv, frame.einv = binv, einv
        frame.H_alt = 0.5 * float(np.sum(e * binv))
        frame.Pi = christoffel_from(binv, db)
        frame.LambdaSym = christoffel_from(einv, de)
        frame.T = Gamma - frame.Pi
        frame.Ttilde = frame.LambdaSym - frame.Pi
    return frame


def curvatures(frame: FrameData, k_min: float | None = None) -> tuple[float, float]:
    """(K, H) with K = det b / det g and H = b_ij g^ij / 2."""
    if k_min is not None and abs(frame.K) < k_min:
        raise FlatPointError(f"|K| = {abs(frame.K):.3e} < k_min = {k_min:g}")
    return frame.K, frame.H


def christoffel(form, frame: FrameData) -> np.ndarray:
    return frame.form(form)[2]


def difference_tensors(frame: FrameData) -> tuple[np.ndarray, np.ndarray]:
    """T = Gamma - Pi and T~ = LambdaSym - Pi."""
    if not frame.curved:
        raise SingularFormError("difference tensors need an invertible second form")
    return frame.T, frame.Ttilde


def covariant_b(frame: FrameData, form) -> np.ndarray:
    """nabla^J_r b_ij with the Levi-Civita connection of form J, indexed [r, i, j]."""
    return covariant_derivative(frame.b, frame.db, christoffel(form, frame))


def frame_to_dict(frame: FrameData) -> dict:
    """JSON-ready view with fixed field names."""

    def arr(a):
        return None if a is None else np.asarray(a).tolist()

    return {
        "u": frame.u,
        "v": frame.v,
        "x": arr(frame.x),
        "x_u": arr(frame.x_u),
        "x_v": arr(frame.x_v),
        "g": arr(frame.g),
        "b": arr(frame.b),
        "e": arr(frame.e),
        "ginv": arr(frame.ginv),
        "binv": arr(frame.binv),
        "einv": arr(frame.einv),
        "K": frame.K,
        "H": frame.H,
        "n": arr(frame.n),
        "Gamma": arr(frame.Gamma),
        "Pi": arr(frame.Pi),
        "LambdaSym": arr(frame.LambdaSym),
        "T": arr(frame.T),
        "Ttilde": arr(frame.Ttilde),
    }

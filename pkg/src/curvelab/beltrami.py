"""First and second Beltrami differential parameters of the forms I, II, III.

Sign convention (used everywhere in the engine)::

    Delta^J f = -a^{ij} (f_{/ij} - C^k_ij f_{/k})

with ``a`` the tensor of form J and ``C`` its Christoffel symbols.  With this
sign Delta^I x = -2 H n, and on the unit sphere Delta^II n = -2 n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import jet as J
from .errors import ConfigurationError, OutOfOrderError
from .forms import FrameData, PointJets, evaluate_frame
from .surfaces import SurfacePatch


@dataclass(frozen=True)
class ScalarField:
    """A scalar function on the surface, evaluated on the jets of a point."""

    label: str
    evaluator: Callable[[PointJets], "J.Jet2 | float"]

    def jet(self, jets: PointJets) -> J.Jet2:
        return J.as_jet(self.evaluator(jets), jets.order)

    @classmethod
    def from_uv(cls, fn: Callable, label: str = "f") -> "ScalarField":
        """Field given directly as a function of the parameters (u, v)."""
        return cls(label, lambda jets: fn(jets.uj, jets.vj))


def _component(attr: str, k: int, label: str) -> ScalarField:
    return ScalarField(label, lambda jets: getattr(jets, attr)[k])


BUILTIN_FIELDS: dict[str, ScalarField] = {
    "u": ScalarField("u", lambda jets: jets.uj),
    "v": ScalarField("v", lambda jets: jets.vj),
    "K": ScalarField("K", lambda jets: jets.K),
    "H": ScalarField("H", lambda jets: jets.H),
    **{f"x{k + 1}": _component("x", k, f"x{k + 1}") for k in range(3)},
    **{f"n{k + 1}": _component("n", k, f"n{k + 1}") for k in range(3)},
}

VECTOR_FIELDS = {"x": ("x1", "x2", "x3"), "n": ("n1", "n2", "n3")}


def scalar_field(name: str | ScalarField) -> ScalarField:
    if isinstance(name, ScalarField):
        return name
    try:
        return BUILTIN_FIELDS[name]
    except KeyError:
        raise ConfigurationError(f"unknown scalar field {name!r}; known: {sorted(BUILTIN_FIELDS)}") from None


def field_derivatives(f: ScalarField | str, frame: FrameData, second: bool = True):
    """(value, gradient, Hessian) of ``f`` at the frame point; Hessian None if not requested."""
    jet = scalar_field(f).jet(frame.jets)
    if jet.order < (2 if second else 1):
        raise OutOfOrderError(
            f"field {scalar_field(f).label!r} carries order {jet.order}; raise the frame's jet order"
        )
    grad = jet.gradient()
    return jet.value, grad, (jet.hessian() if second else None)


def beltrami_first(form, f, h, frame: FrameData) -> float:
    """nabla^J(f, h) = a^{ij} f_{/i} h_{/j}."""
    _, ainv, _ = frame.form(form)
    _, fi, _ = field_derivatives(f, frame, second=False)
    _, hi, _ = field_derivatives(h, frame, second=False)
    return float(fi @ ainv @ hi)


def grad_from_partials(form, df: np.ndarray, frame: FrameData) -> np.ndarray:
    _, ainv, _ = frame.form(form)
    return (ainv @ df) @ frame.tangents


def grad(form, f, frame: FrameData) -> np.ndarray:
    """grad^J f = a^{ij} f_{/i} x_{/j}, a tangent vector in ambient coordinates."""
    _, fi, _ = field_derivatives(f, frame, second=False)
    return grad_from_partials(form, fi, frame)


def operator_coefficients(form, frame: FrameData) -> tuple[np.ndarray, np.ndarray]:
    """(c, d) with Delta^J f = c_ij f_{/ij} + d_k f_{/k}, i.e. c = -a^{ij}, d_k = a^{ij} C^k_ij."""
    _, ainv, C = frame.form(form)
    return -ainv, np.einsum("ij,kij->k", ainv, C)


def laplacian_from_partials(form, df: np.ndarray, ddf: np.ndarray, frame: FrameData) -> np.ndarray:
    """Apply Delta^J given first partials ``df[i, ...]`` and second partials ``ddf[i, j, ...]``.

    Trailing axes are treated componentwise, so vector fields work unchanged.
    """
    c, d = operator_coefficients(form, frame)
    return np.einsum("ij,ij...->...", c, ddf) + np.einsum("k,k...->...", d, df)


def laplacian_scalar(form, f, frame: FrameData) -> float:
    _, fi, fij = field_derivatives(f, frame)
    return float(laplacian_from_partials(form, fi, fij, frame))


def laplacian_vector(form, components: Sequence | str, frame: FrameData) -> np.ndarray:
    """Componentwise Delta^J of a vector field given as three scalar fields (or "x" / "n")."""
    if isinstance(components, str):
        if components == "x":
            return laplacian_position(form, frame)
        if components == "n":
            return laplacian_gauss_map_at(form, frame)
        raise ConfigurationError(f"unknown vector field {components!r}")
    return np.array([laplacian_scalar(form, f, frame) for f in components])


def laplacian_position(form, frame: FrameData) -> np.ndarray:
    xp = frame.x_partials
    dx = np.stack([xp[1, 0], xp[0, 1]])
    ddx = np.array([[xp[2, 0], xp[1, 1]], [xp[1, 1], xp[0, 2]]])
    return laplacian_from_partials(form, dx, ddx, frame)


def laplacian_gauss_map_at(form, frame: FrameData) -> np.ndarray:
    return laplacian_from_partials(form, frame.dn, frame.ddn, frame)


def gauss_map_identity_rhs(frame: FrameData) -> np.ndarray:
    """(1 / 2K) grad^I K + 2 H n, the closed form of Delta^II n."""
    return grad_from_partials("I", frame.dK, frame) / (2.0 * frame.K) + 2.0 * frame.H * frame.n


def laplacian_gauss_map(form, patch: SurfacePatch, u: float, v: float, *, order: int = J.DEFAULT_ORDER, verify: bool = False):
    """Delta^J n at (u, v).

    With ``verify`` (form II only) also returns the residual of
    Delta^II n - (1/2K) grad^I K - 2 H n as a second value.
    """
    frame = evaluate_frame(patch, u, v, order)
    value = laplacian_gauss_map_at(form, frame)
    if not verify:
        return value
    return value, value - gauss_map_identity_rhs(frame)


def nabla_II_with_gauss_map(h, frame: FrameData) -> np.ndarray:
    """nabla^II(h, n) = b^{ij} h_{/i} n_{/j}, as a vector in R^3."""
    _, hi, _ = field_derivatives(h, frame, second=False)
    _, binv, _ = frame.form("II")
    return (hi @ binv) @ frame.dn

"""Pointwise identity checks between the forms, their connections and the
Beltrami operators, aggregated over sample sets into :class:`IdentityReport`.

Each check returns ``(residual, scale)`` at a frame; a sample passes when
``residual <= tol * (1 + scale)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import numpy as np

from . import beltrami as B
from .forms import FrameData, covariant_b, evaluate_frame
from .surfaces import SurfacePatch

Check = Callable[[FrameData], tuple[float, float]]


@dataclass
class IdentityReport:
    name: str
    count: int
    max_residual: float
    mean_residual: float
    max_relative: float
    tolerance: float
    passed: bool
    skipped: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _norm(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def gauss_map_laplacian(frame):
    lhs = B.laplacian_gauss_map_at("II", frame)
    return float(np.linalg.norm(lhs - B.gauss_map_identity_rhs(frame))), float(np.linalg.norm(lhs))


def gauss_map_laplacian_T_form(frame):
    # Delta^II n = b^{kr} T^j_rj n_{/k} + 2 H n
    lhs = B.laplacian_gauss_map_at("II", frame)
    trace = np.einsum("jrj->r", frame.T)
    rhs = (frame.binv @ trace) @ frame.dn + 2.0 * frame.H * frame.n
    return float(np.linalg.norm(lhs - rhs)), float(np.linalg.norm(lhs))


def gauss_map_laplacian_covariant_form(frame):
    # Delta^II n = 1/2 b^{kr} b^{ij} (nabla^III_r b_ij) n_{/k} + b^{ij} e_ij n
    lhs = B.laplacian_gauss_map_at("II", frame)
    cov = covariant_b(frame, "III")
    coef = 0.5 * np.einsum("kr,ij,rij->k", frame.binv, frame.binv, cov)
    rhs = coef @ frame.dn + float(np.sum(frame.binv * frame.e)) * frame.n
    return float(np.linalg.norm(lhs - rhs)), float(np.linalg.norm(lhs))


def nabla_II_grad_I(h: str) -> Check:
    def check(frame):
        g = B.grad("I", h, frame)
        res = B.nabla_II_with_gauss_map(h, frame) + g
        return float(np.linalg.norm(res)), float(np.linalg.norm(g))

    check.__name__ = f"nabla_II_grad_I[{h}]"
    return check


def difference_tensor_sum(frame):
    return _norm(frame.T + frame.Ttilde), max(_norm(frame.T), _norm(frame.Ttilde))


def difference_tensor_first_form(frame):
    # T^k_ij = -1/2 b^{kr} nabla^I_r b_ij
    expected = -0.5 * np.einsum("kr,rij->kij", frame.binv, covariant_b(frame, "I"))
    return _norm(frame.T - expected), _norm(frame.T)


def difference_tensor_third_form(frame):
    expected = -0.5 * np.einsum("kr,rij->kij", frame.binv, covariant_b(frame, "III"))
    return _norm(frame.Ttilde - expected), _norm(frame.Ttilde)


def mainardi_codazzi(frame):
    cov = covariant_b(frame, "I")  # cov[k, i, j] = nabla_k b_ij
    res = cov - np.transpose(cov, (1, 2, 0))  # nabla_k b_ij - nabla_i b_jk
    return _norm(res), _norm(cov)


def mean_curvature_traces(frame):
    t1 = float(np.sum(frame.b * frame.ginv))
    t2 = float(np.sum(frame.e * frame.binv))
    return abs(t1 - t2), abs(t1)


def third_form_relation(frame):
    res = frame.e - 2.0 * frame.H * frame.b + frame.K * frame.g
    return _norm(res), max(_norm(frame.e), _norm(frame.g))


def contracted_christoffel(frame):
    dlog_g = np.array([np.trace(frame.ginv @ frame.dg[i]) for i in range(2)])
    dlog_b = np.array([np.trace(frame.binv @ frame.db[i]) for i in range(2)])
    # Gamma^j_ij = g_{/i} / 2g, Pi^j_ij = b_{/i} / 2b, with g_{/i} / g = tr(g^{-1} g_{/i})
    res_g = np.einsum("jij->i", frame.Gamma) - 0.5 * dlog_g
    res_b = np.einsum("jij->i", frame.Pi) - 0.5 * dlog_b
    return max(_norm(res_g), _norm(res_b)), max(_norm(dlog_g), _norm(dlog_b))


def curvature_log_derivative(frame):
    dlog_g = np.array([np.trace(frame.ginv @ frame.dg[i]) for i in range(2)])
    dlog_b = np.array([np.trace(frame.binv @ frame.db[i]) for i in range(2)])
    lhs = frame.dK / frame.K
    return _norm(lhs - (dlog_b - dlog_g)), _norm(lhs)


def position_laplacian(frame):
    lhs = B.laplacian_position("I", frame)
    return float(np.linalg.norm(lhs + 2.0 * frame.H * frame.n)), float(np.linalg.norm(lhs))


def normal_frame(frame):
    res = max(abs(frame.n @ frame.n - 1.0), abs(frame.n @ frame.x_u), abs(frame.n @ frame.x_v))
    return res, 1.0


# name -> (check, tolerance, needs an invertible second form)
IDENTITIES: dict[str, tuple[Check, float, bool]] = {
    "gauss_map_laplacian": (gauss_map_laplacian, 1e-8, True),
    "gauss_map_laplacian_T_form": (gauss_map_laplacian_T_form, 1e-8, True),
    "gauss_map_laplacian_covariant_form": (gauss_map_laplacian_covariant_form, 1e-8, True),
    **{f"nabla_II_grad_I[{h}]": (nabla_II_grad_I(h), 1e-8, True) for h in ("K", "H", "x1", "x2", "x3")},
    "difference_tensor_sum": (difference_tensor_sum, 1e-9, True),
    "difference_tensor_first_form": (difference_tensor_first_form, 1e-9, True),
    "difference_tensor_third_form": (difference_tensor_third_form, 1e-9, True),
    "mainardi_codazzi": (mainardi_codazzi, 1e-9, True),
    "mean_curvature_traces": (mean_curvature_traces, 1e-9, True),
    "third_form_relation": (third_form_relation, 1e-9, False),
    "contracted_christoffel": (contracted_christoffel, 1e-9, True),
    "curvature_log_derivative": (curvature_log_derivative, 1e-9, True),
    "position_laplacian": (position_laplacian, 1e-9, False),
    "normal_frame": (normal_frame, 1e-10, False),
}


def check_identities(
    patch: SurfacePatch,
    points: Iterable,
    names: Iterable[str] | None = None,
    order: int = 3,
    tolerances: dict[str, float] | None = None,
) -> tuple[list[IdentityReport], list[dict]]:
    """Run identity checks over ``points``.

    Returns one report per identity plus a per-sample table of residuals.
    Identities that need the second form are skipped at flat points.
    """
    names = list(IDENTITIES) if names is None else list(names)
    tolerances = tolerances or {}
    residuals: dict[str, list[tuple[float, float]]] = {name: [] for name in names}
    skipped = {name: 0 for name in names}
    rows = []
    for u, v in points:
        frame = evaluate_frame(patch, u, v, order, require_curved=False)
        row = {"u": float(u), "v": float(v)}
        for name in names:
            check, _, needs_curved = IDENTITIES[name]
            if needs_curved and not frame.curved:
                skipped[name] += 1
                continue
            res, scale = check(frame)
            residuals[name].append((res, scale))
            row[name] = res
        rows.append(row)

    reports = []
    for name in names:
        tol = tolerances.get(name, IDENTITIES[name][1])
        data = np.array(residuals[name]).reshape(-1, 2)
        if len(data):
            res, scale = data[:, 0], data[:, 1]
            rel = res / (1.0 + scale)
            reports.append(
                IdentityReport(name, len(data), float(res.max()), float(res.mean()), float(rel.max()), tol,
                               bool(rel.max() <= tol), skipped[name])
            )
        else:
            reports.append(IdentityReport(name, 0, 0.0, 0.0, 0.0, tol, True, skipped[name]))
    return reports, rows

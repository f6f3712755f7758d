import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvelab import forms as F
from curvelab import surfaces as S
from curvelab.errors import ConfigurationError, FlatPointError, SingularFormError
from oracles import fd_christoffel_first, fd_metric


def test_unit_sphere_at_origin():
    fr = F.evaluate_frame(S.sphere(1.0), 0.0, 0.0)
    assert np.allclose(fr.g, np.eye(2), atol=1e-14)
    assert np.allclose(fr.b, -np.eye(2), atol=1e-14)
    assert np.allclose(fr.n, [1, 0, 0], atol=1e-14)
    assert fr.K == pytest.approx(1.0, abs=1e-14)
    assert fr.H == pytest.approx(-1.0, abs=1e-14)


@pytest.mark.parametrize("c,s,t", [(1.0, 0.3, 1.0), (2.0, -1.1, 0.4), (0.5, 2.0, -0.7)])
def test_helicoid_forms(c, s, t):
    fr = F.evaluate_frame(S.helicoid(c), s, t)
    assert np.allclose(fr.g, np.diag([t * t + c * c, 1.0]), atol=1e-13)
    assert fr.K == pytest.approx(-c * c / (c * c + t * t) ** 2, rel=1e-12)
    assert abs(fr.H) < 1e-13
    expected_n = np.array([-c * math.sin(s), c * math.cos(s), -t]) / math.hypot(c, t)
    assert np.allclose(fr.n, expected_n, atol=1e-13) or np.allclose(fr.n, -expected_n, atol=1e-13)


def test_helicoid_curvature_at_unit_distance():
    fr = F.evaluate_frame(S.helicoid(1.0), 0.7, 1.0)
    assert fr.K == pytest.approx(-0.25, abs=1e-14)


@pytest.mark.parametrize("a,b,u,v", [(1, 1, 0.3, -0.2), (2, 3, 0.1, 0.2), (0.5, 2.5, -0.6, 0.4)])
def test_paraboloid_curvatures(a, b, u, v):
    fr = F.evaluate_frame(S.quadric2(a, b), u, v)
    g = 1 + a * a * u * u + b * b * v * v
    assert fr.K == pytest.approx(a * b / g ** 2, rel=1e-12)
    H = (a * (1 + b * b * v * v) + b * (1 + a * a * u * u)) / (2 * g ** 1.5)
    assert abs(fr.H) == pytest.approx(abs(H), rel=1e-12)


def test_plane_christoffel_vanishes():
    fr = F.evaluate_frame(S.plane(), 0.2, -0.3, require_curved=False)
    assert np.allclose(fr.Gamma, 0, atol=1e-15)
    assert not fr.curved


def test_sphere_second_form_symbols_equal_first():
    fr = F.evaluate_frame(S.sphere(2.0), 0.4, 0.3)
    assert np.allclose(fr.Pi, fr.Gamma, atol=1e-13)
    assert np.allclose(fr.T, 0, atol=1e-13)
    assert np.allclose(fr.Ttilde, 0, atol=1e-13)


@pytest.mark.parametrize("scale", [0.5, 3.0])
def test_scaling_laws(scale):
    base = S.quadric2(1, 2)
    big = S.transformed(base, scale=scale)
    f0 = F.evaluate_frame(base, 0.3, 0.2)
    f1 = F.evaluate_frame(big, 0.3, 0.2)
    assert np.allclose(f1.g, scale ** 2 * f0.g, rtol=1e-12)
    assert np.allclose(f1.b, scale * f0.b, rtol=1e-12)
    assert np.allclose(f1.e, f0.e, rtol=1e-12)
    assert f1.K == pytest.approx(f0.K / scale ** 2, rel=1e-12)
    assert np.allclose(f1.Gamma, f0.Gamma, atol=1e-12)


def test_rotation_invariance():
    c, s = math.cos(0.7), math.sin(0.7)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]]) @ np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    base = S.torus(2.0, 0.5)
    moved = S.transformed(base, rot, 1.0, [1.0, -2.0, 0.5])
    f0 = F.evaluate_frame(base, 0.3, 0.2)
    f1 = F.evaluate_frame(moved, 0.3, 0.2)
    assert np.allclose(f1.g, f0.g, atol=1e-12)
    assert np.allclose(f1.b, f0.b, atol=1e-12)
    assert np.allclose(f1.n, rot @ f0.n, atol=1e-12)


@pytest.mark.parametrize("name", ["torus", "catenoid", "sphere"])
def test_metric_and_christoffel_against_finite_differences(name):
    patch = S.make_surface(name)
    u, v = 0.3, 0.2
    fr = F.evaluate_frame(patch, u, v)
    assert np.allclose(fr.g, fd_metric(patch, u, v), atol=1e-8)
    assert np.allclose(fr.Gamma, fd_christoffel_first(patch, u, v), atol=1e-5)


@settings(max_examples=40, deadline=None)
@given(u=st.floats(-1.0, 1.0), v=st.floats(-1.0, 1.0))
def test_frame_invariants(u, v):
    fr = F.evaluate_frame(S.quadric1(2, 3, 1), u, v)
    assert abs(np.linalg.norm(fr.n) - 1) < 1e-13
    assert np.allclose(fr.tangents @ fr.n, 0, atol=1e-12)
    assert np.allclose(fr.g, fr.g.T) and np.allclose(fr.b, fr.b.T) and np.allclose(fr.e, fr.e.T)
    assert fr.det_g > 0
    # III - 2H II + K I = 0
    assert np.allclose(fr.e - 2 * fr.H * fr.b + fr.K * fr.g, 0, atol=1e-10 * (1 + np.abs(fr.e).max()))


def test_flat_point_errors():
    with pytest.raises(FlatPointError):
        F.evaluate_frame(S.plane(), 0.0, 0.0, require_curved=True)
    fr = F.evaluate_frame(S.cylinder(1.0), 0.0, 0.0)
    assert not fr.curved
    with pytest.raises(SingularFormError):
        fr.form("II")
    with pytest.raises(SingularFormError):
        F.difference_tensors(fr)
    with pytest.raises(FlatPointError):
        F.curvatures(fr, k_min=1e-8)


def test_low_order_rejected():
    with pytest.raises(ConfigurationError):
        F.evaluate_frame(S.sphere(), 0.0, 0.0, order=2)
    with pytest.raises(ConfigurationError):
        F.normalize_form("IV")


def test_frame_to_dict_fields():
    d = F.frame_to_dict(F.evaluate_frame(S.helicoid(1.0), 0.1, 0.5))
    for key in ("u", "v", "x", "x_u", "x_v", "g", "b", "e", "ginv", "K", "H"):
        assert key in d
    assert np.asarray(d["g"]).shape == (2, 2)

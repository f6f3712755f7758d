import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvelab import beltrami as B
from curvelab import surfaces as S
from curvelab.errors import ConfigurationError, OutOfOrderError
from curvelab.forms import evaluate_frame

st_t = B.ScalarField.from_uv(lambda u, v: u * v, "uv")


def test_plane_coordinate_is_harmonic():
    fr = evaluate_frame(S.plane(), 0.3, 0.4, require_curved=False)
    assert B.laplacian_scalar("I", "u", fr) == pytest.approx(0.0, abs=1e-15)


def test_sphere_first_parameter_of_latitude():
    fr = evaluate_frame(S.sphere(1.0), 0.2, 0.5)
    assert B.beltrami_first("I", "v", "v", fr) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("s", [0.0, 0.7, -2.1])
def test_helicoid_gradient_of_curvature(s):
    fr = evaluate_frame(S.helicoid(1.0), s, 1.0)
    assert np.allclose(B.grad("I", "K", fr), 0.5 * np.array([math.cos(s), math.sin(s), 0.0]), atol=1e-13)


@pytest.mark.parametrize("c,s,t", [(1.0, 0.3, 0.5), (2.0, -0.4, 1.2)])
def test_helicoid_second_form_laplacian_of_product(c, s, t):
    fr = evaluate_frame(S.helicoid(c), s, t)
    q = c * c + t * t
    assert B.laplacian_scalar("II", st_t, fr) == pytest.approx(-2 * math.sqrt(q) / c, rel=1e-12)


@pytest.mark.parametrize("a,b,u,v", [(1, 1, 0.5, 0.2), (2, 3, 0.1, -0.3)])
def test_paraboloid_third_form_laplacian(a, b, u, v):
    fr = evaluate_frame(S.quadric2(a, b), u, v)
    g = 1 + a * a * u * u + b * b * v * v
    assert B.laplacian_scalar("III", "u", fr) == pytest.approx(-2 * u * g, rel=1e-12)
    assert B.laplacian_scalar("III", "v", fr) == pytest.approx(-2 * v * g, rel=1e-12)


@pytest.mark.parametrize("r", [1.0, 2.5])
def test_sphere_vector_laplacians(r):
    fr = evaluate_frame(S.sphere(r), 0.4, -0.3)
    x = fr.x
    assert np.allclose(B.laplacian_position("I", fr), 2 * x / r ** 2, atol=1e-12)
    assert np.allclose(B.laplacian_gauss_map_at("II", fr), -2 * fr.n / r, atol=1e-12)


def test_catenoid_is_minimal():
    fr = evaluate_frame(S.catenoid(), 0.3, 0.4)
    assert np.allclose(B.laplacian_position("I", fr), 0.0, atol=1e-13)


def test_position_laplacian_is_mean_curvature_normal():
    fr = evaluate_frame(S.torus(2.0, 0.5), 0.3, 1.1)
    assert np.allclose(B.laplacian_position("I", fr), -2 * fr.H * fr.n, atol=1e-12)


def test_vector_named_fields_match_components():
    fr = evaluate_frame(S.quadric1(2, 3, 1), 0.2, 0.1)
    assert np.allclose(B.laplacian_vector("II", "n", fr), B.laplacian_vector("II", ["n1", "n2", "n3"], fr))
    assert np.allclose(B.laplacian_vector("I", "x", fr), B.laplacian_vector("I", ["x1", "x2", "x3"], fr))


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(-3, 3), beta=st.floats(-3, 3), u=st.floats(-0.8, 0.8), v=st.floats(-0.8, 0.8))
def test_linearity(alpha, beta, u, v):
    fr = evaluate_frame(S.quadric2(1, 2), u, v)
    combo = B.ScalarField("combo", lambda j: alpha * j.x[2] + beta * j.uj * j.vj)
    for form in ("I", "II", "III"):
        lhs = B.laplacian_scalar(form, combo, fr)
        rhs = alpha * B.laplacian_scalar(form, "x3", fr) + beta * B.laplacian_scalar(form, st_t, fr)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_constant_has_zero_laplacian_and_gradient():
    fr = evaluate_frame(S.torus(), 0.1, 0.2)
    one = B.ScalarField("one", lambda j: 1.0)
    for form in ("I", "II", "III"):
        assert B.laplacian_scalar(form, one, fr) == pytest.approx(0.0, abs=1e-15)


def test_gradient_is_tangent():
    fr = evaluate_frame(S.quadric1(2, 3, 1), 0.3, 0.2)
    for form in ("I", "II", "III"):
        assert abs(B.grad(form, "K", fr) @ fr.n) < 1e-12


def test_curvature_laplacian_needs_order_four():
    fr = evaluate_frame(S.sphere(), 0.1, 0.1, order=3)
    with pytest.raises(OutOfOrderError):
        B.laplacian_scalar("I", "K", fr)
    fr4 = evaluate_frame(S.sphere(), 0.1, 0.1, order=4)
    assert B.laplacian_scalar("I", "K", fr4) == pytest.approx(0.0, abs=1e-12)


def test_unknown_field():
    fr = evaluate_frame(S.sphere(), 0.1, 0.1)
    with pytest.raises(ConfigurationError):
        B.laplacian_scalar("I", "w", fr)
    with pytest.raises(ConfigurationError):
        B.laplacian_vector("I", "y", fr)


def test_verify_returns_identity_residual():
    value, residual = B.laplacian_gauss_map("II", S.helicoid(1.0), 0.0, 1.0, verify=True)
    assert np.allclose(value, [-1.0, 0.0, 0.0], atol=1e-12)
    assert np.linalg.norm(residual) < 1e-12

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvelab import identities as I
from curvelab import surfaces as S
from curvelab.finitetype import sample
from curvelab.forms import evaluate_frame


def test_all_pass_on_torus():
    patch = S.torus(2.0, 0.5)
    reports, rows = I.check_identities(patch, sample(patch, count=20, seed=3), order=4)
    assert len(rows) == 20
    assert {r.name for r in reports} == set(I.IDENTITIES)
    bad = [r.name for r in reports if not r.passed]
    assert not bad, bad


def test_curved_only_identities_skip_flat_points():
    patch = S.cylinder(1.0)
    reports, rows = I.check_identities(patch, [(0.1, 0.2), (0.5, -0.3)], order=4)
    by_name = {r.name: r for r in reports}
    assert by_name["mainardi_codazzi"].count == 0
    assert by_name["mainardi_codazzi"].skipped == 2
    assert by_name["position_laplacian"].count == 2
    assert by_name["position_laplacian"].passed
    assert by_name["third_form_relation"].passed


def test_report_serializes():
    patch = S.sphere(1.0)
    reports, _ = I.check_identities(patch, [(0.1, 0.2)], names=["normal_frame"])
    d = reports[0].to_dict()
    assert d["name"] == "normal_frame" and d["count"] == 1 and d["passed"]


def test_tolerance_override_can_fail():
    patch = S.helicoid(1.0)
    reports, _ = I.check_identities(patch, [(0.1, 0.2), (0.3, 0.9)], names=["gauss_map_laplacian"],
                                    order=4, tolerances={"gauss_map_laplacian": -1.0})
    assert not reports[0].passed


def test_check_detects_a_corrupted_frame():
    frame = evaluate_frame(S.quadric1(2, 3, 1), 0.2, 0.1, 4)
    res, _ = I.gauss_map_laplacian(frame)
    assert res < 1e-12
    frame.H += 0.1
    res, _ = I.gauss_map_laplacian(frame)
    assert res > 1e-3


@settings(max_examples=25, deadline=None)
@given(u=st.floats(-0.9, 0.9), v=st.floats(-0.9, 0.9), a=st.floats(0.3, 3.0), b=st.floats(0.3, 3.0))
def test_paraboloid_identities_property(u, v, a, b):
    frame = evaluate_frame(S.quadric2(a, b), u, v, 4)
    for name, (check, tol, _) in I.IDENTITIES.items():
        res, scale = check(frame)
        assert res <= tol * (1 + scale), name


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 50), s=st.floats(-0.9, 0.9), t=st.floats(0.2, 1.5))
def test_random_ruled_identities_property(seed, s, t):
    patch = S.make_surface(S.random_curve_pair(seed))
    frame = evaluate_frame(patch, s, t, 4, require_curved=False)
    if not frame.curved:
        return
    for name, (check, tol, _) in I.IDENTITIES.items():
        res, scale = check(frame)
        assert res <= tol * (1 + scale), name

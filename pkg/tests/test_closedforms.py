import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvelab import closedforms as C
from curvelab import surfaces as S
from curvelab.errors import DegenerateRulingError
from curvelab.forms import evaluate_frame

HELI = S.helicoid_pair(1.0)


def test_reconcile_sign():
    assert C.reconcile_sign([1, -2], [-1, 2]) == (-1, 0.0)
    sign, err = C.reconcile_sign([1.0, 2.0], [1.0, 2.1])
    assert sign == 1 and err == pytest.approx(0.1 / 3.1)


@pytest.mark.parametrize("c,l", [(1.0, 0.0), (2.0, 1.0), (0.7, -0.4)])
def test_helicoid_scalars(c, l):
    pair = S.helicoid_pair(c, l)
    sc = C.ruled_scalars(pair, 0.4, 0.9)
    assert sc.k == pytest.approx(c * c + l * l)
    assert sc.l == pytest.approx(l, abs=1e-15)
    assert abs(sc.A) == pytest.approx(c)
    assert sc.m == pytest.approx(0.0, abs=1e-15) and sc.r == pytest.approx(0.0, abs=1e-15)
    assert sc.k == pytest.approx(sc.l ** 2 + sc.A ** 2)


def test_helicoid_curvature_from_curves():
    sc = C.ruled_scalars(HELI, 0.3, 1.0)
    assert sc.K == pytest.approx(-0.25)


@pytest.mark.parametrize("seed", range(5))
def test_curvature_matches_engine_on_curve_pairs(seed):
    pair = S.random_curve_pair(seed)
    patch = S.ruled(pair)
    for s, t in [(0.1, 0.3), (-0.4, 1.1), (0.6, -0.8)]:
        frame = evaluate_frame(patch, s, t, 3, require_curved=False)
        assert C.ruled_scalars(pair, s, t).K == pytest.approx(frame.K, rel=1e-10, abs=1e-10)
        assert np.allclose(C.ruled_gauss_map(pair, s, t), frame.n, atol=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_admissible_pair_relations(seed):
    pair = S.random_curve_pair(seed)
    sc = C.ruled_scalars(pair, 0.2, 0.0)
    assert sc.k == pytest.approx(sc.l ** 2 + sc.A ** 2, rel=1e-12)
    assert sc.k_prime == pytest.approx(2 * sc.l * sc.l_prime + 2 * sc.A * sc.A_prime, abs=1e-12)
    assert sc.n_coef == pytest.approx(2 * sc.m * sc.l - sc.A_prime, abs=1e-12)
    assert sc.r == pytest.approx(sc.m * sc.k - sc.l * sc.A_prime + sc.A * sc.l_prime, abs=1e-12)


def test_degenerate_ruling():
    from curvelab import jet as J

    # a flat cone: the directrix is a single point
    cone = S.CurvePair(lambda s: (0.0 * s, 0.0 * s, 0.0 * s), lambda s: (J.cos(s), J.sin(s), 0.0 * s), (-1, 1))
    with pytest.raises(DegenerateRulingError):
        C.ruled_scalars(cone, 0.0, 0.5)


def test_helicoid_f_polynomials():
    tab = C.ruled_f_polynomials(HELI, 0.3, "tabulated")
    assert np.allclose(tab.f4, [0, 2, 0, 2])
    assert np.allclose(tab.f2, [2, 0, 2, 0])
    assert np.allclose(tab.f1, 0) and np.allclose(tab.f3, 0)
    matched = C.ruled_f_polynomials(HELI, 0.3, "matched")
    assert np.allclose(matched.f4, -tab.f4)
    with pytest.raises(ValueError):
        C.ruled_f_polynomials(HELI, 0.3, "other")


def test_helicoid_gauss_map_laplacian_routes():
    res = C.ruled_laplacian_gauss_map(HELI, 0.0, 1.0)
    assert np.allclose(res.generic, [-1, 0, 0], atol=1e-12)
    assert np.allclose(res.closed_op, [1, 0, 0], atol=1e-12)
    assert res.closed_op_sign == -1 and res.flag == "sign-flipped"
    assert np.allclose(res.expansion_matched, res.closed_op, atol=1e-12)
    assert set(res.to_dict()) >= {"generic", "closed_op", "flag", "terms"}


@pytest.mark.parametrize("seed", [20, 21])
def test_matched_tables_on_held_out_pairs(seed):
    pair = S.random_curve_pair(seed)
    for s, t in [(0.1, 0.5), (-0.3, -1.2), (0.45, 0.05)]:
        res = C.ruled_laplacian_gauss_map(pair, s, t)
        assert res.closed_op_sign == -1 and res.closed_op_error < 1e-9
        assert np.abs(res.expansion_matched - res.closed_op).max() <= 1e-9 * (1 + np.abs(res.generic).max())


def test_tabulated_tables_disagree_on_generic_pairs():
    check = C.expansion_term_check(S.random_curve_pair(3), [(0.1, 0.5), (0.2, -0.7), (-0.3, 1.0)], variant="tabulated")
    assert not check["passed"]
    matched = C.expansion_term_check(S.random_curve_pair(3), [(0.1, 0.5), (0.2, -0.7), (-0.3, 1.0)], variant="matched")
    assert matched["passed"] and matched["sign"] == -1


def test_regenerating_matched_tables():
    pairs = [S.random_curve_pair(i) for i in range(10)] + [S.helicoid_pair(1.3, 0.4)]
    res = C.match_ruled_polynomials(pairs)
    for name in C.F_NAMES:
        assert res[name]["table"] == C.MATCHED_F[name], name


def test_weight_defects():
    assert C.weight_defects(C.TABULATED_F["f2"], "f2") == [(2, "l*l*n")]
    assert C.weight_defects(C.TABULATED_F["f4"], "f4") == []
    for name in C.F_NAMES:
        assert C.weight_defects(C.MATCHED_F[name], name) == []


def test_monomial_helpers():
    assert C.monomial("l", "k", "A") == C.monomial("A", "k", "l")
    assert C.monomial_weight(C.monomial("k", "l")) == 3
    assert all(C.monomial_weight(m) == 3 for m in C.monomial_basis(3))
    assert "t^3" in C.format_poly(C.MATCHED_F["f4"])


def test_quadric1_closed_values():
    cf = C.quadric1_closed(-1, -1, 1, 0.3, 0.2)
    assert cf["lap_n1"] == pytest.approx(-2 * 0.3)
    assert cf["lap_n2"] == pytest.approx(-2 * 0.2)
    cf = C.quadric1_closed(1, 1, 1, 0.5, 0.0)
    assert cf["lap_n2"] == pytest.approx(0.0, abs=1e-15)


def test_quadric1_closed_against_engine():
    u, v = 0.3, -0.2
    frame = evaluate_frame(S.quadric1(2, 3, 1), u, v, 4)
    cf = C.quadric1_closed(2, 3, 1, u, v)
    assert np.allclose(cf["g"], frame.g) and np.allclose(cf["b"], frame.b) and np.allclose(cf["n"], frame.n)


def test_quadric1_pipeline_flags_tabulated_operator():
    pts = [(u, v) for u in np.linspace(-0.8, 0.8, 4) for v in np.linspace(-0.8, 0.8, 4)]
    rep = C.quadric1_pipeline(2, 3, 1, pts)
    q = rep.quantities
    assert rep.sign == 1
    for key in ("g", "b", "n", "lap_n1", "lap_n2", "op_corrected", "op_lap_n1", "op_lap_n2"):
        assert q[key]["passed"], key
    assert not q["op_tabulated"]["passed"]
    assert not rep.passed


def test_quadric2_values():
    assert C.quadric2_closed(1, 1, 1.0, 0.0)["lap3_u"] == pytest.approx(-4.0)
    frame = evaluate_frame(S.quadric2(2, 3), 0.1, 0.2, 4)
    assert np.allclose(C.quadric2_closed(2, 3, 0.1, 0.2)["e"], frame.e, atol=1e-14)


def test_quadric2_pipeline_passes():
    pts = [(u, v) for u in np.linspace(-1, 1, 5) for v in np.linspace(-1, 1, 5)]
    rep = C.quadric2_pipeline(2, 3, pts)
    assert rep.passed and rep.sign == 1
    assert rep.to_dict()["quantities"]["operator"]["max_rel"] <= 1e-8


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 40), s=st.floats(-0.8, 0.8), t=st.floats(-1.5, 1.5))
def test_closed_operator_reproduces_engine_up_to_sign(seed, s, t):
    res = C.ruled_laplacian_gauss_map(S.random_curve_pair(seed), s, t)
    assert res.closed_op_sign == -1
    assert res.closed_op_error < 1e-8

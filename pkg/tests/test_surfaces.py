import math

import numpy as np
import pytest

from curvelab import surfaces as S
from curvelab.errors import ConfigurationError, ConstructionError


def test_substitution_examples():
    assert np.allclose(S.quadric1(-1, -1, 1).position(0, 0), [0, 0, 1])
    assert np.allclose(S.quadric2(1, 1).position(1, 0), [1, 0, 0.5])
    assert np.allclose(S.helicoid(2.0, 1.0).position(math.pi / 2, 1.0), [0, 2, math.pi])
    assert np.allclose(S.sphere(2.0).position(0, 0), [2, 0, 0])


@pytest.mark.parametrize("build", [
    lambda: S.quadric1(1, 1, 0),
    lambda: S.quadric1(0, 1, 1),
    lambda: S.quadric2(0, 1),
    lambda: S.quadric2(1, -1),
    lambda: S.sphere(-1),
    lambda: S.torus(1, 2),
    lambda: S.helicoid(0.0),
    lambda: S.quadric1(1, 1, -1, domain=((-0.5, 0.5), (-0.5, 0.5))),
])
def test_construction_errors(build):
    with pytest.raises(ConstructionError):
        build()


def test_make_surface_spec_forms():
    a = S.make_surface("quadric1", {"a": -1, "b": -1, "c": 1})
    b = S.make_surface({"surface": "quadric1", "params": {"a": -1, "b": -1, "c": 1}})
    assert a.params == b.params
    assert S.make_surface(S.helicoid_pair()).curves is not None
    with pytest.raises(ConfigurationError):
        S.make_surface("klein-bottle")
    with pytest.raises(ConfigurationError):
        S.make_surface("quadric2", {"a": 1})
    with pytest.raises(ConfigurationError):
        S.make_surface("sphere", {"radius": 2})


@pytest.mark.parametrize("name", [n for n in S.CATALOG if n not in ("quadric1", "quadric2")])
def test_catalog_probe(name):
    patch = S.make_surface(name)
    assert patch.name == name


def test_sphere_exclusion():
    patch = S.sphere()
    assert patch.is_excluded(0.0, math.pi / 2 - 0.05)
    assert not patch.admissible(0.0, math.pi / 2 - 0.05)
    assert patch.admissible(0.0, 0.0)


def test_curve_pair_normalization():
    for pair in [S.helicoid_pair(1.0), S.helicoid_pair(2.0, 1.0)] + [S.random_curve_pair(i) for i in range(5)]:
        for s in np.linspace(*pair.s_domain, 7):
            assert S.curve_pair_defects(pair, s) <= 1e-10


def test_curve_pair_rejects_bad_normalization():
    from curvelab import jet as J

    with pytest.raises(ConstructionError):
        S.CurvePair(lambda s: (s, 0.0 * s, 0.0 * s), lambda s: (J.cos(2 * s), J.sin(2 * s), 0.0 * s), (-1, 1))


def test_curve_derivatives_helicoid():
    ds, dt = S.helicoid_pair(1.5).derivatives(0.0, 3)
    assert np.allclose(ds[1], [0, 0, 1.5])
    assert np.allclose(dt[1], [0, 1, 0])
    assert np.allclose(dt[2], [-1, 0, 0])


def test_transformed_rigid_motion():
    rot = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1.0]])
    base = S.quadric2(1, 2)
    moved = S.transformed(base, rot, 2.0, [1, 2, 3])
    assert np.allclose(moved.position(0.3, 0.4), 2.0 * rot @ base.position(0.3, 0.4) + [1, 2, 3])
    with pytest.raises(ConstructionError):
        S.transformed(base, scale=0.0)


def test_parse_point():
    assert S.parse_point("0.5,-1") == (0.5, -1.0)
    assert S.parse_point((1, 2)) == (1.0, 2.0)
    with pytest.raises(ConfigurationError):
        S.parse_point("1;2")


def test_catalog_listing():
    names = [row["surface"] for row in S.catalog_listing()]
    assert "helicoid" in names and "quadric2" in names

from fractions import Fraction as F

import numpy as np
import pytest

from offsetshape.places import PointNotOnCurve, places_at, substitution_residual
from offsetshape.poly import parse_poly
from offsetshape.shape import signature


def only(bs):
    assert len(bs) == 1
    return bs.places[0]


def terms(s):
    return dict(s.nonzero_terms())


def test_cusp_x3_y2():
    pl = only(places_at(parse_poly("x^3 - y^2")))
    assert terms(pl.x) == {2: 1} and terms(pl.y) == {3: 1}
    assert pl.exact and pl.frame == (1, 0)


def test_ramphoid_example():
    pl = only(places_at(parse_poly("x^9-y^2+2*y*x^2-x^4")))
    assert terms(pl.x) == {2: 1}
    assert terms(pl.y) == {4: 1, 9: 1}


def test_parabola_graph():
    pl = only(places_at(parse_poly("y - x^2")))
    assert terms(pl.x) == {1: 1} and terms(pl.y) == {2: 1}


def test_graph_with_horizontal_tangent_is_its_taylor_series():
    pl = only(places_at(parse_poly("y - x^2 + x^3/3 - 2*x^5"), trunc=12))
    assert terms(pl.x) == {1: 1}
    assert terms(pl.y) == {2: 1, 3: F(-1, 3), 5: 2}


def test_graph_with_slanted_tangent_lies_on_graph():
    f = parse_poly("y + 2*x - x^3")
    pl = only(places_at(f, trunc=16))
    for h in np.linspace(-0.05, 0.05, 11):
        X, Y = pl.evaluate(h)
        assert abs(Y - (-2 * X + X**3)) < 1e-12


def test_non_origin_center():
    pl = only(places_at(parse_poly("x^2 + y^2 - 25"), (3, 4)))
    assert pl.center == (3, 4)
    assert pl.frame == (F(4, 5), F(-3, 5))
    assert substitution_residual(parse_poly("x^2 + y^2 - 25"), pl).is_zero()


def test_point_not_on_curve():
    with pytest.raises(PointNotOnCurve):
        places_at(parse_poly("x^3 - y^2"), (1, 2))


def test_isolated_point():
    bs = places_at(parse_poly("x^2 + y^2 - x^3"))
    assert len(bs) == 0
    assert any("isolated" in d for d in bs.diagnostics)


def test_non_squarefree_is_reduced():
    with pytest.warns(UserWarning):
        bs2 = places_at(parse_poly("(y^2 - x^3)^2"))
    assert bs2.squarefree_reduced
    assert terms(only(bs2).y) == {3: 1}


# (curve, point, multiplicity); every branch through the point is real
CURVES = [
    ("x^3 - y^2", (0, 0), 2),
    ("y - x^2", (0, 0), 1),
    ("x^9-y^2+2*y*x^2-x^4", (0, 0), 2),
    ("y^2 - x^2 - x^3", (0, 0), 2),
    ("y^2 - x^5", (0, 0), 2),
    ("y^3 - x^4", (0, 0), 3),
    ("y^2 - x^4 - x^5", (0, 0), 2),
    ("(y - x - x^2)*(y + x - x^2)*(y - 2*x - x^3)", (0, 0), 3),
    ("x^2 + y^2 - 25", (3, 4), 1),
    ("(y^2 - x^3)*(y - x^2)", (0, 0), 3),
]


@pytest.mark.parametrize("text,point,mult", CURVES)
def test_branch_orders_sum_to_multiplicity(text, point, mult):
    f = parse_poly(text)
    bs = places_at(f, point)
    assert sum(signature(pl).p for pl in bs) == mult
    for pl in bs:
        res = substitution_residual(f, pl)
        assert res.is_zero(), (text, res)


@pytest.mark.parametrize("text,point,mult", CURVES[:6])
def test_place_count_stable_under_deeper_truncation(text, point, mult):
    f = parse_poly(text)
    assert len(places_at(f, point, trunc=12)) == len(places_at(f, point, trunc=30))


def test_float_fallback_for_irrational_tangents():
    bs = places_at(parse_poly("y^2 - 2*x^2 - x^3"))
    assert len(bs) == 2
    assert all(not pl.exact for pl in bs)
    assert any("float" in d or "irrational" in d for d in bs.diagnostics)

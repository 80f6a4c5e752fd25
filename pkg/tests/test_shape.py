import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from offsetshape.series import TruncSeries
from offsetshape.shape import (
    LocalShape, NotApplicable, Place, Signature, SignatureUndetermined, is_cuspidal,
    local_shape, place_from_terms, signature, signature_pq, standardize,
)


def test_signature_examples():
    s = signature(place_from_terms({2: 1}, {3: 1}))
    assert (s.p, s.q, s.r) == (2, 3, None) and s.r_final
    s = signature(place_from_terms({2: 1}, {4: 1, 9: 1}))
    assert (s.p, s.q, s.r, s.xi) == (2, 4, 9, 1)
    assert signature(place_from_terms({1: 1}, {2: 1})).pq == (1, 2)


@pytest.mark.parametrize("pq,shape", [
    ((2, 3), LocalShape.BEAK), ((1, 2), LocalShape.ELBOW), ((3, 5), LocalShape.FLEX),
    ((2, 4), LocalShape.THORN),
])
def test_local_shape_table(pq, shape):
    assert local_shape(pq) is shape
    assert local_shape(Signature(*pq)) is shape


def test_cuspidal():
    assert is_cuspidal((2, 3)) and not is_cuspidal((1, 3)) and is_cuspidal((4, 6))


def test_json_form():
    assert Signature(2, 3).to_json() == {"p": 2, "q": 3, "r": None, "shape": "beak", "cuspidal": True}


def test_line_and_undetermined():
    with pytest.raises(NotApplicable):
        signature_pq(*_xy({1: 1}, {1: 2}, 8), complete=True)
    with pytest.raises(SignatureUndetermined):
        signature_pq(*_xy({1: 1}, {1: 2}, 8), complete=False)


def _xy(xt, yt, T):
    return TruncSeries.from_terms(xt, T), TruncSeries.from_terms(yt, T)


def test_general_test_on_non_standard_place():
    # (h^2 + h^3, h^2 + 2 h^5): p = 2; h^3 term is independent of (1, 1)
    x, y = _xy({2: 1, 3: 1}, {2: 1, 5: 2}, 10)
    assert signature_pq(x, y) == (2, 3)


def test_standardize_rotated_place():
    # (h, h + h^2) has slanted tangent; standard form must describe the same curve
    pl = place_from_terms({1: 1}, {1: 1, 2: 1}, trunc=16)
    st_ = standardize(pl)
    assert st_.standard and not st_.exact
    assert signature(st_).pq == (1, 2)
    c, s = st_.frame
    assert math.isclose(c, math.sqrt(0.5)) and math.isclose(s, math.sqrt(0.5))
    for h in np.linspace(-0.05, 0.05, 9):
        X, Y = st_.evaluate(h)
        assert abs(Y - (X + X * X)) < 1e-10


def test_standardize_exact_when_rational():
    pl = place_from_terms({1: 3}, {1: 4, 2: 5}, trunc=12)
    st_ = standardize(pl)
    assert st_.exact and st_.frame == (F(3, 5), F(4, 5))


@settings(max_examples=100, deadline=None)
@given(
    st.integers(1, 4), st.integers(1, 5),
    st.fractions(min_value=-3, max_value=3, max_denominator=4).filter(lambda v: v != 0),
    st.dictionaries(st.integers(1, 8), st.fractions(min_value=-3, max_value=3, max_denominator=4), max_size=3),
)
def test_standard_shortcut_matches_general_test(p, dq, beta, tail):
    q = p + dq
    yterms = {q: beta}
    for k, v in tail.items():
        yterms[q + k] = v
    pl = place_from_terms({p: 1}, yterms)
    sig = signature(pl)
    assert (sig.p, sig.q) == (pl.x.order(), pl.y.order())
    assert signature_pq(pl.x, pl.y, True) == (sig.p, sig.q)
    if p == 1:
        assert sig.shape in (LocalShape.ELBOW, LocalShape.FLEX)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.fractions(min_value=F(1, 5), max_value=5, max_denominator=5))
def test_shape_invariant_under_parameter_scaling(p, dq, lam):
    q = p + dq
    a = place_from_terms({p: 1}, {q: 1, q + 1: 2})
    b = place_from_terms({p: lam**p}, {q: lam**q, q + 1: 2 * lam ** (q + 1)})
    assert signature_pq(a.x, a.y, True) == signature_pq(b.x, b.y, True)


def test_place_requires_vanishing_series():
    with pytest.raises(ValueError):
        Place(TruncSeries.from_terms({0: 1, 1: 1}, 4), TruncSeries.from_terms({2: 1}, 4))
    pl = place_from_terms({0: 2, 1: 1}, {2: 1})
    assert pl.center == (2, 0)

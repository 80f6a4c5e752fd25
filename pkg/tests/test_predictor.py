import math
from dataclasses import replace
from fractions import Fraction as F

import pytest

from offsetshape.offset import OffsetParams, curvature_data
from offsetshape.predictor import (
    BORDERLINE, NO, UNDETERMINED, YES, NeedsDeeperTruncation, classical_reference,
    comparison_table, predict,
)
from offsetshape.shape import LocalShape, place_from_terms, signature


def run(xt, yt, op, branch=None):
    pl = place_from_terms(xt, yt)
    sig = signature(pl)
    return predict(sig, curvature_data(pl, sig), op, branch)


COSAB = OffsetParams(1, F(3, 5), F(4, 5))


@pytest.mark.parametrize("branch", [1, -1])
def test_cusp_is_smoothed(branch):
    pr = run({2: 1}, {3: 1}, OffsetParams.from_theta(1, math.pi / 4), branch)
    assert (pr.case_id, pr.preserved, pr.predicted_p0) == ("SMOOTHED_QP1", NO, 1)


def test_odd_order_smoothing_is_not_stated():
    pr = run({3: 1}, {4: 1}, COSAB)
    assert pr.case_id == "SMOOTHED_QP1" and pr.preserved == UNDETERMINED


@pytest.mark.parametrize("op", [COSAB, OffsetParams.from_theta(1, math.pi / 4)])
def test_ramphoid_keeps_signature(op):
    for branch in (1, -1):
        pr = run({2: 1}, {4: 1, 9: 1}, op, branch)
        assert pr.case_id == "Q2P_ZERO_T12_1" and pr.preserved == YES
        assert pr.predicted_sig == (2, 4) and pr.predicted_shape is LocalShape.THORN


def test_regular_flex_is_lost():
    pr = run({1: 1}, {3: 1}, COSAB)
    assert (pr.case_id, pr.preserved, pr.predicted_sig) == ("Q2P_POS_TABLE", NO, (1, 2))
    assert pr.predicted_shape is LocalShape.ELBOW


def test_high_contact_beak_is_kept():
    pr = run({2: 1}, {5: 1}, COSAB)
    assert (pr.preserved, pr.predicted_sig) == (YES, (2, 3))


def test_negative_odd_branch():
    pr = run({4: 1}, {7: 1}, COSAB)
    assert (pr.case_id, pr.preserved, pr.predicted_p0) == ("Q2P_NEG_P8", NO, 3)


def test_missing_second_term_asks_for_more_terms():
    pl = replace(place_from_terms({2: 1}, {4: 1}), complete=False)
    sig = signature(pl)
    with pytest.raises(NeedsDeeperTruncation):
        predict(sig, curvature_data(pl, sig), COSAB)


def test_parabola_like_place():
    pr = run({2: 1}, {4: 1}, COSAB)
    assert (pr.case_id, pr.preserved, pr.predicted_p0) == ("Q2P_ZERO_XI0", YES, 2)
    assert pr.conditions[0].value == 1 - 4 * F(3, 5) + 4


# d*a*ktilde = 1 on the upper sheet: d = 5/6, a = 3/5, ktilde = 2
T11 = OffsetParams(F(5, 6), F(3, 5), F(4, 5))


def test_vanishing_leading_term_cases():
    pr = run({2: 1}, {4: 1, 9: 1}, T11, 1)
    assert (pr.case_id, pr.preserved, pr.predicted_sig) == ("Q2P_ZERO_T11_1", YES, (2, 4))
    assert run({2: 1}, {4: 1, 9: 1}, T11, -1).case_id == "Q2P_ZERO_T12_1"
    pr = run({2: 1}, {4: 1, 5: 1}, T11, 1)
    assert (pr.case_id, pr.preserved, pr.predicted_sig) == ("Q2P_ZERO_T11_2", NO, (2, 3))
    pr = run({2: 1}, {4: 1, 6: 1}, T11, 1)
    assert (pr.case_id, pr.preserved) == ("Q2P_ZERO_T11_3", YES)
    # b/2*ktilde^2 - a*r*xi/p = 8/5 - 9 xi/5 vanishes at xi = 8/9
    pr = run({2: 1}, {4: 1, 6: F(8, 9)}, T11, 1)
    assert (pr.case_id, pr.preserved) == ("Q2P_ZERO_T11_3", UNDETERMINED)


def test_parity_clause_for_low_second_term():
    pr = run({2: 1}, {4: 1, 5: 1}, COSAB)
    assert (pr.case_id, pr.preserved) == ("Q2P_ZERO_T12_3", NO)
    pr = run({4: 1}, {8: 1, 10: 1}, COSAB)
    assert (pr.case_id, pr.preserved) == ("Q2P_ZERO_T12_3", YES)


def test_determinant_counterexample_is_flagged():
    # literal condition is non-zero, yet the direct determinant vanishes
    op = OffsetParams(1, F(-12, 13), F(-5, 13))
    pr = run({3: 1}, {6: F(-1, 2), 9: F(-5, 3), 13: 3}, op, -1)
    assert pr.case_id == "Q2P_ZERO_T12_2" and pr.preserved == YES
    assert pr.conditions[-1].value != 0
    assert any("determinant vanishes" in f for f in pr.flags)


def test_p_above_r_minus_p_routing():
    op = OffsetParams(F(3, 2), F(-7, 25), F(-24, 25))
    for branch in (1, -1):
        pr = run({4: 1}, {6: -3, 7: 5}, op, branch)
        assert pr.case_id == "Q2P_NEG_T14_3b" and pr.preserved == NO
        assert pr.flags


def test_no_h2p_term_branches():
    pr = run({3: 1}, {4: 1}, COSAB)
    assert pr.case_id == "SMOOTHED_QP1"
    pr = run({4: 1}, {6: 1, 11: 1}, COSAB)
    assert (pr.case_id, pr.preserved) == ("Q2P_NEG_T14_1b", YES)
    pr = run({4: 1}, {6: 1}, COSAB)
    assert pr.case_id == "Q2P_NEG_T13_2"


def test_borderline_returns_both_readings():
    # float parameters with d*a*ktilde within 1e-12 of 1
    op = OffsetParams(5 / 6, 0.6, 0.8)
    pr = run({2: 1}, {4: 1, 9: 1}, op, 1)
    assert pr.preserved == BORDERLINE
    assert {a.case_id for a in pr.alternatives} == {"Q2P_ZERO_T11_1", "Q2P_ZERO_T12_1"}
    assert "alternatives" in pr.to_json()


def test_flex_never_reported_preserved():
    for yt in ({3: 1}, {5: 2}, {3: 1, 4: 1}):
        for op in (COSAB, T11, OffsetParams.from_theta(2.0, 1.0)):
            assert run({1: 1}, yt, op).preserved != YES


def test_classical_reference():
    pl = place_from_terms({1: 1}, {2: 1})
    sig = signature(pl)
    cd = curvature_data(pl, sig)
    assert classical_reference(sig, cd, F(1, 2), 1).case_id == "CLASSICAL_REG_SINGULAR"
    assert classical_reference(sig, cd, F(1, 2), -1).case_id == "CLASSICAL_REG"
    assert predict(sig, cd, OffsetParams(F(1, 2), 1, 0)).case_id.startswith("CLASSICAL")
    pl = place_from_terms({2: 1}, {4: 1, 9: 1})
    sig = signature(pl)
    cd = curvature_data(pl, sig)
    assert classical_reference(sig, cd, F(1, 2)).preserved == UNDETERMINED
    assert classical_reference(sig, cd, 1).preserved == YES


def test_comparison_table_rows():
    pl = place_from_terms({2: 1}, {4: 1, 9: 1})
    sig = signature(pl)
    tab = comparison_table(sig, curvature_data(pl, sig), 1, [(F(3, 5), F(4, 5)), math.pi / 4])
    assert tab["kind"] == "singular" and len(tab["rows"]) == 4
    assert {r["branch"] for r in tab["rows"]} == {"+", "-"}
    assert all(r["generalized"]["case"] == "Q2P_ZERO_T12_1" for r in tab["rows"])
    assert tab["summary"]

"""Acceptance criteria 1-10, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line; the lines are
repeated in the terminal summary so they survive output capture.
"""

import io
import json
import math
import random
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction as F

import numpy as np

from conftest import ACCEPTANCE
from offsetshape import cli
from offsetshape.offset import (
    OffsetParams, curvature_data, curvature_series, flex_condition, frenet_distance, offset_points,
    offset_series,
)
from offsetshape.places import places_at
from offsetshape.poly import parse_poly
from offsetshape.predictor import YES, predict
from offsetshape.shape import LocalShape, local_shape, place_from_terms, signature
from offsetshape.verifier import (
    PYTHAGOREAN, DISTANCES, PointCloud, SuiteBounds, count_cusps, cusp_locations,
    generate_suite, random_suite, series_signature,
)


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE.append(line)
    assert ok, line


def only_place(text):
    bs = places_at(parse_poly(text))
    assert len(bs) == 1
    return bs.places[0]


def sampled(pl, op, h_max, n=401):
    pts, _ = offset_points(pl, op, np.linspace(-h_max, h_max, n), h_max=h_max)

    def sampler(v):
        return offset_points(pl, op, v, h_max=2 * h_max)[0][:, 1:]

    return PointCloud(f"gen{op.sign_label}", pts, sampler=sampler)


def cli_run(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


def test_criterion_01_cusp_smoothing():
    pl = only_place("x^3 - y^2")
    xs, ys = dict(pl.x.nonzero_terms()), dict(pl.y.nonzero_terms())
    op = OffsetParams.from_theta(1, math.pi / 4)
    sig = signature(pl)
    cd = curvature_data(pl, sig)
    rows = []
    for sheet in op.sheets():
        p0 = series_signature(pl, sheet)[0][0]
        case = predict(sig, cd, sheet).case_id
        cusps = count_cusps(sampled(pl, sheet, 0.5))
        rows.append((sheet.sign_label, p0, case, cusps))
    ok = (xs, ys) == ({2: 1}, {3: 1}) and all(
        p0 == 1 and case == "SMOOTHED_QP1" and c == 0 for _, p0, case, c in rows)
    record(1, ok, f"place ({xs}, {ys}); per sheet (branch, p0, case, cusps) = {rows}")


def test_criterion_02_ramphoid_cusp():
    pl = only_place("x^9-y^2+2*y*x^2-x^4")
    sig = signature(pl)
    cd = curvature_data(pl, sig)
    k0 = curvature_series(pl, 1)[0]
    float_rows = []
    for sheet in OffsetParams.from_theta(1, math.pi / 4).sheets():
        pr = predict(sig, cd, sheet)
        float_rows.append((pr.case_id, pr.predicted_sig, series_signature(pl, sheet)[0]))
    exact_rows = []
    for sheet in OffsetParams(F(5, 6), F(3, 5), F(4, 5)).sheets():
        pr = predict(sig, cd, sheet)
        exact_rows.append((pr.case_id, pr.predicted_sig, series_signature(pl, sheet)[0]))
    ok = (sig.p, sig.q, sig.r) == (2, 4, 9) and k0 == 2
    ok &= all(c == "Q2P_ZERO_T12_1" and ps == (2, 4) and s0 == (2, 4) for c, ps, s0 in float_rows)
    t11 = [r for r in exact_rows if r[0].startswith("Q2P_ZERO_T11")]
    ok &= bool(t11) and all(ps == s0 for _, ps, s0 in t11)
    record(2, ok, f"k(0)={k0}; theta=pi/4 {float_rows}; d*a=1/2 {exact_rows}")


def test_criterion_03_parabola_cusps():
    pl = place_from_terms({1: 1}, {2: 1})
    inner = OffsetParams(1, 1, 0, 1)  # sheet on the concave side, center (0, 1)
    assert offset_series(pl, inner).local_center() == (0, 1)
    locs = sorted(cusp_locations(sampled(pl, inner, 1.2)))
    root = math.sqrt((2 ** (2 / 3) - 1) / 4)  # k(h) = 2/(1+4h^2)^(3/2) = 1
    tilted = [count_cusps(sampled(pl, s, 1.2)) for s in OffsetParams.from_theta(1, math.pi / 50).sheets()]
    ok = len(locs) == 2 and all(abs(abs(v) - 0.3832) <= 0.005 for v in locs) and locs[0] < 0 < locs[1]
    ok &= tilted == [0, 0]
    record(3, ok, f"theta=0 inner cusps at {[round(v, 6) for v in locs]} (root {root:.6f}); "
                  f"theta=pi/50 cusps {tilted}")


def test_criterion_04_regular_places_stay_regular():
    rng = random.Random(4)
    items = generate_suite(4, 100, SuiteBounds(force_regular=True))
    bad, singular = 0, 0
    for item in items:
        pl = item.place
        for _ in range(5):
            a, b = rng.choice(PYTHAGOREAN)
            op = OffsetParams(rng.choice(DISTANCES), a * rng.choice((1, -1)), b * rng.choice((1, -1)))
            for sheet in op.sheets():
                bad += series_signature(pl, sheet)[0][0] != 1
        k0 = curvature_series(pl)[0]
        if k0 != 0:
            # classical offset at distance 1/|k| on the concave sheet
            op = OffsetParams(1 / abs(k0), 1, 0, 1 if k0 > 0 else -1)
            singular += series_signature(pl, op)[0][0] > 1
    ok = bad == 0 and singular >= 1
    record(4, ok, f"non-classical singular offset places {bad}/1000; "
                  f"classical d=1/|k| singular offset places {singular}")


def test_criterion_05_flex_never_preserved():
    rng = random.Random(5)
    preserved, flex = 0, 0
    for item in generate_suite(5, 100, SuiteBounds(force_flex=True)):
        pl = item.place
        sig = signature(pl)
        assert sig.shape is LocalShape.FLEX
        cd = curvature_data(pl, sig)
        a, b = rng.choice(PYTHAGOREAN)
        op = OffsetParams(rng.choice(DISTANCES), a * rng.choice((1, -1)), b * rng.choice((1, -1)))
        for sheet in op.sheets():
            preserved += predict(sig, cd, sheet).preserved == YES
            flex += local_shape(series_signature(pl, sheet)[0]) is LocalShape.FLEX
    ok = preserved == 0 and flex == 0
    record(5, ok, f"decisive preserved verdicts {preserved}; flex offset shapes by series {flex}")


def test_criterion_06_smoothing_iff_q_minus_p_is_one():
    rep = random_suite(1, 200)
    forced = random_suite(6, 50, SuiteBounds(force_smoothing=True))
    exc = len(rep["smoothing_exceptions"]) + len(forced["smoothing_exceptions"])
    record(6, exc == 0, f"exceptions {exc} over the seed-1 suite and 50 forced q-p=1 places")


def test_criterion_07_positive_table():
    table = {LocalShape.THORN: LocalShape.THORN, LocalShape.BEAK: LocalShape.BEAK,
             LocalShape.ELBOW: LocalShape.FLEX, LocalShape.FLEX: LocalShape.ELBOW}
    wrong = 0
    for item in generate_suite(7, 50, SuiteBounds(force_q2p_pos=True)):
        pl = item.place
        sig = signature(pl)
        assert sig.q > 2 * sig.p
        for sheet in item.params.sheets():
            sig0 = series_signature(pl, sheet)[0]
            wrong += sig0 != (sig.p, sig.q - sig.p) or local_shape(sig0) is not table[sig.shape]
    record(7, wrong == 0, f"mismatches {wrong}/100 offset sheets")


def _numerator(pl, op):
    off = offset_series(pl, op)
    X, Y = off.X, off.Y
    return X[1] * 2 * Y[2] - 2 * X[2] * Y[1]


def test_criterion_08_curvature_numerator_identity():
    rng = random.Random(8)
    exact_bad, worst = 0, 0.0
    for item in generate_suite(8, 50, SuiteBounds(force_regular=True)):
        pl = item.place
        k = curvature_series(pl)
        for sheet in item.params.sheets():
            lhs = _numerator(pl, sheet)
            exact_bad += lhs != flex_condition(k[0], k[1], sheet, frenet_distance(sheet))
        fpl = pl.to_float()
        kf = curvature_series(fpl)
        op = OffsetParams.from_theta(float(item.params.d), rng.uniform(0.05, 2 * math.pi - 0.05))
        for sheet in op.sheets():
            lhs = _numerator(fpl, sheet)
            rhs = flex_condition(kf[0], kf[1], sheet, frenet_distance(sheet))
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    ok = exact_bad == 0 and worst <= 1e-9
    record(8, ok, f"exact mismatches {exact_bad}/100; worst float relative error {worst:.2e}")


def test_criterion_09_oracle_agreement():
    code, out, _ = cli_run(["verify", "--seed", "1", "--n", "200"])
    rep = json.loads(out)
    hit = {c for c, row in rep["cases"].items() if row["hits"]}
    need = {f"Q2P_ZERO_T1{t}_{i}" for t in (1, 2) for i in (1, 2, 3)}
    missing = sorted(need - hit)
    fails = sorted({f["case"] for f in rep["failures"]})
    ok = code == 0 and not missing
    record(9, ok, f"exit {code}; decisive disagreements {rep['decisive_disagreements']} "
                  f"in {fails}; uncovered clauses {missing}")


def test_criterion_10_determinism(tmp_path):
    runs = [
        ["analyze", "--curve", "x^3 - y^2", "--theta", repr(math.pi / 4)],
        ["analyze", "--curve", "x^9-y^2+2*y*x^2-x^4", "--theta", repr(math.pi / 4)],
        ["analyze", "--curve", "x^9-y^2+2*y*x^2-x^4", "--d", "5/6", "--cosab", "3/5,4/5"],
    ]
    differ = []
    for i, argv in enumerate(runs):
        outs = [cli_run(argv)[1] for _ in range(2)]
        if outs[0] != outs[1]:
            differ.append(f"json{i}")
    for theta in ("0", repr(math.pi / 50)):
        blobs = []
        for j in range(2):
            csv, svg = tmp_path / f"{theta}.csv", tmp_path / f"{theta}.svg"
            out = cli_run(["plot", "--place", "h, h^2", "--theta", theta, "--h-max", "1.2",
                           "--csv", str(csv), "--svg", str(svg)])[1]
            blobs.append((out, csv.read_bytes(), svg.read_bytes()))
        if blobs[0] != blobs[1]:
            differ.append(f"plot theta={theta}")
    record(10, not differ, f"{len(runs)} JSON reports and 2 plots repeated; differing {differ}")

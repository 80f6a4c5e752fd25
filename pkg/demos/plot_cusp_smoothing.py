"""
Offsets smooth an ordinary cusp
===============================

The semicubical cusp ``x^3 = y^2`` has one place ``(h^2, h^3)``.  Any offset
with a tilted normal turns it into regular places, and the sampled offset
curve shows no cusp at all.
"""

import math

import numpy as np

from offsetshape import OffsetParams, curvature_data, offset_points, parse_poly, places_at, predict, signature
from offsetshape.cli import svg_document
from offsetshape.verifier import PointCloud, count_cusps, series_signature

pl = places_at(parse_poly("x^3 - y^2")).places[0]
print("place:", pl.x, "|", pl.y)

sig = signature(pl)
op = OffsetParams.from_theta(1, math.pi / 4)

hs = np.linspace(-0.5, 0.5, 401)
series = {"src": np.column_stack([hs, *np.array([pl.evaluate(h) for h in hs]).T])}
for sheet in op.sheets():
    sig0, _ = series_signature(pl, sheet)
    verdict = predict(sig, curvature_data(pl, sig), sheet)
    pts, _ = offset_points(pl, sheet, hs)
    series["gen" + sheet.sign_label] = pts
    print(f"sheet {sheet.sign_label}: offset signature {sig0}, "
          f"predictor {verdict.case_id} ({verdict.preserved}), "
          f"cusps on the sampled curve {count_cusps(PointCloud('g', pts))}")

with open("cusp_smoothing.svg", "w") as fh:
    fh.write(svg_document(series))

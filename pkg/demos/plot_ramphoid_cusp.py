"""
A ramphoid cusp keeps its shape
===============================

The curve ``x^9 - y^2 + 2 y x^2 - x^4`` has the place ``(h^2, h^4 + h^9)``
at the origin, a thorn with curvature limit 2.  Its tilted offsets keep the
signature ``(2, 4)``.  When ``d cos(theta) ktilde = 1`` the leading ``h^p``
term of the offset vanishes and a different clause decides; the series
expansion confirms the verdict either way.
"""

from fractions import Fraction
import math

from offsetshape import OffsetParams, curvature_data, parse_poly, places_at, predict, signature
from offsetshape.offset import curvature_series
from offsetshape.verifier import series_signature

pl = places_at(parse_poly("x^9-y^2+2*y*x^2-x^4")).places[0]
sig = signature(pl)
cd = curvature_data(pl, sig)
print("signature", (sig.p, sig.q, sig.r), "shape", sig.shape.value)
print("curvature series, h > 0:", curvature_series(pl, 1))

for label, op in [("theta = pi/4", OffsetParams.from_theta(1, math.pi / 4)),
                  ("d = 5/6, (a, b) = (3/5, 4/5)", OffsetParams(Fraction(5, 6), Fraction(3, 5), Fraction(4, 5)))]:
    print(label)
    for sheet in op.sheets():
        pr = predict(sig, cd, sheet)
        sig0, off = series_signature(pl, sheet)
        print(f"  sheet {sheet.sign_label}: {pr.case_id} -> {pr.predicted_sig}; series {sig0}")
        print(f"    X = {off.X.truncate(6)}")

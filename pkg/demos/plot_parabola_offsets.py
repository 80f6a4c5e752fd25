"""
Classical and tilted offsets of a parabola
==========================================

At distance ``d = 1`` the classical inner offset of ``y = x^2`` has two cusps,
exactly where the curvature equals ``1/d``.  Tilting the normal by a small
angle removes both of them: tilted offsets of regular places stay regular.
"""

import math

import numpy as np
from scipy.optimize import brentq

from offsetshape import OffsetParams, offset_points, place_from_terms
from offsetshape.verifier import PointCloud, cusp_locations

pl = place_from_terms({1: 1}, {2: 1})
hs = np.linspace(-1.2, 1.2, 401)


def cloud(op):
    pts, _ = offset_points(pl, op, hs, h_max=1.2)
    return PointCloud("g", pts, sampler=lambda v: offset_points(pl, op, v, h_max=3)[0][:, 1:])


# curvature of (h, h^2) and the parameter where it reaches 1/d
k = lambda h: 2 / (1 + 4 * h * h) ** 1.5
root = brentq(lambda h: k(h) - 1, 0, 1)
print(f"k(h) = 1 at h = +-{root:.6f}")

for theta in (0.0, math.pi / 50):
    for sheet in OffsetParams.from_theta(1, theta).sheets():
        locs = cusp_locations(cloud(sheet))
        print(f"theta={theta:.4f} sheet {sheet.sign_label}: cusps at {np.round(locs, 6).tolist()}")

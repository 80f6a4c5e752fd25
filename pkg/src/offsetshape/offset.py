"""Generalized offsets of places: series construction, sampling, curvature.

Sign conventions
----------------
The offset sheet ``branch = s`` (``+1`` or ``-1``) of a place ``(x, y)`` is

    (X, Y) = (x, y) + s * d * A * (-y', x') / |(x', y')|,   A = [[a, -b], [b, a]]

with ``(a, b) = (cos theta, sin theta)``.  ``(-y', x')`` is the left normal.
For a singular place the factor ``1/|h|^(p-1)`` is replaced by the formal
``1/h^(p-1)`` so that ``(X, Y)`` is again a power series; for ``h < 0`` and
even ``p`` this series follows the opposite pointwise sheet, which is the
analytic continuation of the same offset place.

The regular-point formulas (cusp test, flex condition, tangent map) are the
Frenet-frame ones, ``r0' = (I + d k A) r'``, in which the offset is measured
along the *right* normal.  For sheet ``s`` they therefore take the signed
distance ``-s * d``; see :func:`frenet_distance`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .series import DEFAULT_TOL, TruncSeries, is_exact_value
from .shape import Place, Signature, signature, signature_pq


class CurvatureUnbounded(ValueError):
    """The curvature tends to infinity at the center (q < 2p)."""


@dataclass(frozen=True)
class OffsetParams:
    """Distance ``d``, angle via ``(a, b) = (cos, sin)``, and offset sheet."""

    d: object
    a: object
    b: object
    branch: int = 1
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        if self.d == 0:
            raise ValueError("the offset distance must be nonzero")
        if self.exact:
            object.__setattr__(self, "d", Fraction(self.d))
            object.__setattr__(self, "a", Fraction(self.a))
            object.__setattr__(self, "b", Fraction(self.b))
            if self.a**2 + self.b**2 != 1:
                raise ValueError(f"(a, b) = ({self.a}, {self.b}) is not on the unit circle")
        else:
            object.__setattr__(self, "d", float(self.d))
            object.__setattr__(self, "a", float(self.a))
            object.__setattr__(self, "b", float(self.b))
            if abs(self.a**2 + self.b**2 - 1) > 1e-9:
                raise ValueError(f"(a, b) = ({self.a}, {self.b}) is not on the unit circle")

    @property
    def exact(self) -> bool:
        return all(is_exact_value(v) for v in (self.d, self.a, self.b))

    @classmethod
    def from_theta(cls, d, theta: float, branch: int = 1, tol: float = DEFAULT_TOL):
        return cls(float(d), math.cos(theta), math.sin(theta), branch, tol)

    @classmethod
    def from_cosab(cls, d, a, b, branch: int = 1):
        return cls(Fraction(d), Fraction(a), Fraction(b), branch)

    @property
    def classical(self) -> bool:
        if self.exact:
            return self.b == 0
        return abs(self.b) <= self.tol

    @property
    def theta(self) -> float:
        return math.atan2(float(self.b), float(self.a))

    def with_branch(self, branch: int) -> "OffsetParams":
        return replace(self, branch=branch)

    def sheets(self):
        return (self.with_branch(1), self.with_branch(-1))

    @property
    def sign_label(self) -> str:
        return "+" if self.branch == 1 else "-"

    def to_json(self) -> dict:
        return {
            "d": str(self.d),
            "a": str(self.a),
            "b": str(self.b),
            "branch": self.sign_label,
            "exact": self.exact,
        }


def frenet_distance(op: OffsetParams):
    """Signed distance entering ``r0' = (I + d k A) r'`` for sheet ``op.branch``."""
    return -op.branch * op.d


@dataclass(frozen=True)
class OffsetPlace:
    X: TruncSeries
    Y: TruncSeries
    source: Place
    params: OffsetParams
    sig0: Optional[tuple] = None

    @property
    def trunc(self) -> int:
        return self.X.trunc

    def local_center(self):
        return self.X.coeffs[0], self.Y.coeffs[0]

    def global_center(self):
        c, s = self.source.frame
        cx, cy = self.source.center
        u, v = self.local_center()
        return cx + c * u - s * v, cy + s * u + c * v

    def signature_pq(self) -> tuple[int, int]:
        return signature_pq(self.X, self.Y)

    def classify(self) -> "OffsetPlace":
        return replace(self, sig0=self.signature_pq())

    def evaluate(self, h):
        return self.source.to_global(self.X.evaluate(h), self.Y.evaluate(h))


def _align(pl: Place, op: OffsetParams):
    if pl.exact and not op.exact:
        pl = pl.to_float(op.tol)
    if op.exact and not pl.exact:
        op = OffsetParams(float(op.d), float(op.a), float(op.b), op.branch, pl.x.tol)
    return pl, op


def _formal_normal(pl: Place):
    """``(-y', x') / h^(p-1)`` and ``1/sqrt(...)`` of its squared norm."""
    xd, yd = pl.x.differentiate(), pl.y.differentiate()
    norm2 = xd * xd + yd * yd
    m2, unit = norm2.extract_monomial_factor()
    if m2 % 2:
        raise ValueError("odd order of |P'|^2; not a real place")
    k = m2 // 2
    return (-yd).lower(k), xd.lower(k), unit.inv_sqrt(), k


def offset_series(pl: Place, op: OffsetParams) -> OffsetPlace:
    """Offset place ``(X(h), Y(h))`` in the local frame of ``pl``."""
    pl, op = _align(pl, op)
    nx, ny, g, _ = _formal_normal(pl)
    s, d, a, b = op.branch, op.d, op.a, op.b
    rx = (nx.scale(a) - ny.scale(b)) * g
    ry = (nx.scale(b) + ny.scale(a)) * g
    X = pl.x + rx.scale(s * d)
    Y = pl.y + ry.scale(s * d)
    return OffsetPlace(X, Y, pl, op)


def offset_points(
    pl: Place,
    op: OffsetParams,
    hs: Sequence[float],
    h_max: float = 0.5,
    follow_place: bool = True,
):
    """Pointwise offset construction at parameters ``hs``.

    Returns ``(points, skipped)``: an ``(n, 3)`` array of ``(h, X, Y)`` in
    global coordinates and the list of parameters where the derivative
    vanishes.  With ``follow_place`` the normal is multiplied by
    ``sign(h)^(p-1)`` so that the samples trace the analytic offset place.
    """
    hs = np.asarray(hs, dtype=float)
    if not pl.complete and np.any(np.abs(hs) > h_max):
        raise ValueError(f"|h| exceeds the sampling window h_max={h_max}")
    xs = [float(c) for c in pl.x.coeffs]
    ys = [float(c) for c in pl.y.coeffs]
    x = np.polyval(xs[::-1], hs)
    y = np.polyval(ys[::-1], hs)
    xd = np.polyval([k * c for k, c in enumerate(xs)][1:][::-1], hs)
    yd = np.polyval([k * c for k, c in enumerate(ys)][1:][::-1], hs)
    norm = np.hypot(xd, yd)
    ok = norm > 0.0
    skipped = [float(h) for h in hs[~ok]]
    hs, x, y, xd, yd, norm = hs[ok], x[ok], y[ok], xd[ok], yd[ok], norm[ok]
    nx, ny = -yd / norm, xd / norm
    if follow_place:
        p = signature_pq(pl.x, pl.y, pl.complete)[0]
        flip = np.where(hs < 0, (-1.0) ** (p - 1), 1.0)
        nx, ny = nx * flip, ny * flip
    s, d, a, b = op.branch, float(op.d), float(op.a), float(op.b)
    X = x + s * d * (a * nx - b * ny)
    Y = y + s * d * (b * nx + a * ny)
    gx, gy = pl.to_global(X, Y)
    return np.column_stack([hs, gx, gy]), skipped


def curvature_series(pl: Place, side: int = 1) -> TruncSeries:
    """Curvature ``k(h)`` on the half-line ``side * h > 0`` as a power series.

    Uses ``(x'y'' - x''y') / |P'|^3`` with ``|P'|^3 = |h|^(3(p-1)) * M^(3/2)``.
    """
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    xd, yd = pl.x.differentiate(), pl.y.differentiate()
    xdd, ydd = xd.differentiate(), yd.differentiate()
    num = xd.truncate(xdd.trunc) * ydd - xdd * yd.truncate(ydd.trunc)
    norm2 = xd * xd + yd * yd
    m2, unit = norm2.extract_monomial_factor()
    k = m2 // 2
    on = num.order()
    if on is not None and on < 3 * k:
        raise CurvatureUnbounded("curvature is unbounded at the center (q < 2p)")
    head = None
    if pl.exact:
        from .series import sqrt_value

        head = 1 / sqrt_value(unit.coeffs[0], True) ** 3
    den = unit.power(Fraction(-3, 2) if pl.exact else -1.5, head=head)
    out = num.lower(3 * k) * den
    return out.scale(side ** k)


@dataclass(frozen=True)
class CurvatureData:
    """Curvature quantities at the center of a standard place.

    ``k``/``kprime`` are the right limits of curvature and of its arc-length
    derivative (``None`` when unbounded).  ``ktilde``, ``mtilde``, ``utilde``
    and ``vtilde`` are the coefficient combinations used by the theorem
    engine; ``mtilde``/``vtilde`` are ``None`` when ``r`` is absent or
    ``r < 2p``.  ``rxi_over_p = r * xi / p`` is the combination
    ``p/(r-p) * mtilde/(r-2p)!`` in a form defined for every ``r``.
    """

    k: object = None
    kprime: object = None
    ktilde: object = None
    mtilde: object = None
    utilde: object = None
    rxi_over_p: object = None
    beta: object = None

    @property
    def vtilde(self):
        return self.mtilde

    def to_json(self) -> dict:
        out = {}
        for name in ("k", "kprime", "ktilde", "mtilde", "utilde", "vtilde"):
            v = getattr(self, name)
            out[name] = None if v is None else str(v)
        return out


def curvature_data(pl: Place, sig: Optional[Signature] = None) -> CurvatureData:
    sig = sig or signature(pl)
    p, q, r = sig.p, sig.q, sig.r
    beta, xi = sig.beta, sig.xi
    k = kprime = None
    if q >= 2 * p:
        ks = curvature_series(pl, 1)
        k = ks.coeffs[0]
        if p == 1 and ks.trunc > 1:
            speed = math.sqrt(float(pl.x.coeffs[1] ** 2 + pl.y.coeffs[1] ** 2))
            kprime = ks.coeffs[1] if pl.exact and speed == 1 else ks.coeffs[1] / speed
    mtilde = rxi = None
    if r is not None and xi is not None:
        rxi = r * xi / p
        if r >= 2 * p:
            mtilde = r * (r - p) * math.factorial(r - 2 * p) * xi / (p * p)
    ktilde = 2 * beta if beta is not None else None
    utilde = q * beta / p if beta is not None else None
    return CurvatureData(k, kprime, ktilde, mtilde, utilde, rxi, beta)


def rotation_matrix(op: OffsetParams):
    a, b = op.a, op.b
    return ((a, -b), (b, a))


def flex_condition(k, kprime, op: OffsetParams, d=None):
    """``d k' sin(theta) + k (k^2 d^2 + 2 d k cos(theta) + 1)``."""
    d = op.d if d is None else d
    return d * kprime * op.b + k * (k * k * d * d + 2 * d * k * op.a + 1)


def cusp_possible(k, op: OffsetParams, d=None) -> bool:
    """Whether ``det(I + d k A) = (1 + d k a)^2 + (d k b)^2`` vanishes."""
    d = op.d if d is None else d
    det = (1 + d * k * op.a) ** 2 + (d * k * op.b) ** 2
    if op.exact and is_exact_value(k):
        return det == 0
    return abs(det) <= op.tol


def tangent_map(rprime, k, op: OffsetParams, d=None):
    """Offset tangent ``(I + d k A) r'``."""
    d = op.d if d is None else d
    x, y = rprime
    a, b = op.a, op.b
    return (x + d * k * (a * x - b * y), y + d * k * (b * x + a * y))


@dataclass(frozen=True)
class TurningCases:
    """Source tangent slopes ``y'/x'`` that give offset turning points.

    ``None`` stands for an infinite slope (vertical source tangent).
    """

    vertical: object
    horizontal: object


def turning_slopes(k, op: OffsetParams, d=None) -> TurningCases:
    """Slopes of the source tangent whose offset tangent is vertical/horizontal.

    Derived from the same ``A`` as :func:`tangent_map`: with ``r' = (1, m)``
    the offset tangent is ``(1 + dk(a - bm), m + dk(b + am))``.
    """
    if op.classical:
        raise ValueError("classical offsets keep tangents parallel; no slope map")
    d = op.d if d is None else d
    a, b = op.a, op.b
    if k == 0:
        return TurningCases(None, 0)
    one = 1 + d * k * a
    vertical = one / (d * k * b)
    zero = one == 0 if op.exact and is_exact_value(k) else abs(one) <= op.tol
    if zero:
        return TurningCases(0 * vertical, None)
    return TurningCases(vertical, -d * k * b / one)

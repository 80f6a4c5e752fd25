"""Places, signatures and the four local shapes of a real branch."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .series import DEFAULT_TOL, TruncSeries, common_mode


class SignatureUndetermined(ValueError):
    """The truncation ran out before the signature could be read off."""


class NotApplicable(ValueError):
    """The place parametrizes a straight line (or is constant)."""


class LocalShape(enum.Enum):
    THORN = "thorn"
    ELBOW = "elbow"
    BEAK = "beak"
    FLEX = "flex"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Signature:
    """The pair ``(p, q)`` plus, for standard places, the data of ``y(h)``.

    ``beta`` is the coefficient of ``h^q`` in ``y``; ``r``/``xi`` locate the
    next nonzero coefficient.  ``r is None`` means no such term was seen; it is
    a proven absence only when ``r_final`` is true.
    """

    p: int
    q: int
    r: Optional[int] = None
    beta: object = None
    xi: object = None
    r_final: bool = False
    exact: bool = True

    def __post_init__(self):
        if self.p < 1 or self.q <= self.p:
            raise ValueError(f"invalid signature ({self.p}, {self.q})")
        if self.r is not None and self.r <= self.q:
            raise ValueError("r must exceed q")

    @property
    def shape(self) -> LocalShape:
        return local_shape(self)

    @property
    def cuspidal(self) -> bool:
        return is_cuspidal(self)

    @property
    def regular(self) -> bool:
        return self.p == 1

    @property
    def pq(self) -> tuple[int, int]:
        return (self.p, self.q)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "r": self.r,
            "shape": self.shape.value,
            "cuspidal": self.cuspidal,
        }


def local_shape(sig) -> LocalShape:
    """Thorn / elbow / beak / flex from the parities of ``(p, q)``."""
    p, q = (sig.p, sig.q) if isinstance(sig, Signature) else sig
    if p % 2 == 0:
        return LocalShape.THORN if q % 2 == 0 else LocalShape.BEAK
    return LocalShape.ELBOW if q % 2 == 0 else LocalShape.FLEX


def is_cuspidal(sig) -> bool:
    p = sig.p if isinstance(sig, Signature) else sig[0]
    return p % 2 == 0


@dataclass(frozen=True)
class Place:
    """A local parametrization ``center + R (x(h), y(h))`` of a real branch.

    ``x`` and ``y`` vanish at ``h = 0``; ``frame = (c, s)`` is the rotation
    ``R = [[c, -s], [s, c]]`` from local to global coordinates.  ``complete``
    marks series that are exact polynomials (no unknown tail).
    """

    x: TruncSeries
    y: TruncSeries
    center: tuple = (Fraction(0), Fraction(0))
    frame: tuple = (Fraction(1), Fraction(0))
    complete: bool = False
    label: str = ""

    def __post_init__(self):
        common_mode([self.x, self.y])
        if self.x.trunc != self.y.trunc:
            n = min(self.x.trunc, self.y.trunc)
            object.__setattr__(self, "x", self.x.truncate(n))
            object.__setattr__(self, "y", self.y.truncate(n))
        if self.x.trunc and not (self.x.is_zero_coeff(0) and self.y.is_zero_coeff(0)):
            raise ValueError("place series must vanish at h = 0; use `center`")

    @property
    def exact(self) -> bool:
        return self.x.exact

    @property
    def trunc(self) -> int:
        return self.x.trunc

    @property
    def standard(self) -> bool:
        """``x = h^p`` exactly and ``ord y > p``."""
        terms = list(self.x.nonzero_terms())
        if len(terms) != 1:
            return False
        p, c = terms[0]
        if not (c == 1 if self.exact else abs(c - 1) <= self.x.tol * 2):
            return False
        oy = self.y.order()
        return oy is None or oy > p

    @property
    def p(self) -> int:
        return signature(self).p

    def to_float(self, tol: float = DEFAULT_TOL) -> "Place":
        return replace(
            self,
            x=self.x.to_float(tol),
            y=self.y.to_float(tol),
            center=tuple(float(c) for c in self.center),
            frame=tuple(float(c) for c in self.frame),
        )

    def with_trunc(self, trunc: int) -> "Place":
        return replace(self, x=self.x.truncate(trunc), y=self.y.truncate(trunc))

    def to_global(self, u, v):
        """Map local coordinates to the global frame (floats or arrays)."""
        c, s = (float(t) for t in self.frame)
        cx, cy = (float(t) for t in self.center)
        return cx + c * u - s * v, cy + s * u + c * v

    def evaluate(self, h):
        return self.to_global(self.x.evaluate(h), self.y.evaluate(h))

    def describe(self) -> str:
        def fmt(s):
            terms = [f"{c}*h^{k}" for k, c in s.nonzero_terms()]
            return " + ".join(terms) or "0"

        return f"({fmt(self.x)}, {fmt(self.y)})"

    def to_json(self) -> dict:
        return {
            "x": {str(k): str(c) for k, c in self.x.nonzero_terms()},
            "y": {str(k): str(c) for k, c in self.y.nonzero_terms()},
            "trunc": self.trunc,
            "center": [str(c) for c in self.center],
            "frame": [str(c) for c in self.frame],
            "exact": self.exact,
        }


def place_from_terms(xterms, yterms, trunc=None, exact=None, center=(0, 0), label=""):
    """Place with polynomial coordinates (``complete=True``)."""
    degs = list(xterms) + list(yterms)
    if trunc is None:
        trunc = max(24, 3 * max(degs, default=1) + 8)
    if exact is None:
        exact = all(not isinstance(c, float) for c in list(xterms.values()) + list(yterms.values()))
    xs = TruncSeries.from_terms(xterms, trunc, exact)
    ys = TruncSeries.from_terms(yterms, trunc, exact)
    xc, yc = (xs.coeffs[0] if trunc else 0), (ys.coeffs[0] if trunc else 0)
    if xc or yc:
        center = (center[0] + xc, center[1] + yc)
        xs, ys = xs - xc, ys - yc
    cast = Fraction if exact else float
    return Place(xs, ys, center=tuple(cast(c) for c in center),
                 frame=(cast(1), cast(0)), complete=max(degs, default=0) < trunc,
                 label=label)


def _det_zero(xs: TruncSeries, ys: TruncSeries, p: int, k: int, scale: float) -> bool:
    det = xs.coeffs[p] * ys.coeffs[k] - ys.coeffs[p] * xs.coeffs[k]
    if xs.exact:
        return det == 0
    return abs(det) <= xs.tol * (1.0 + scale * scale)


def signature_pq(xs: TruncSeries, ys: TruncSeries, complete: bool = False) -> tuple[int, int]:
    """``(p, q)`` of the place ``(x(h), y(h))`` read from its Taylor coefficients.

    Constant terms are ignored (they only fix the center).  ``p`` is the first
    order with a nonzero derivative vector; ``q`` the first order whose
    derivative vector is independent from it.
    """
    n = min(xs.trunc, ys.trunc)
    scale = max(xs._scale_ref(), ys._scale_ref())
    p = None
    for k in range(1, n):
        if not (xs.is_zero_value(xs.coeffs[k], scale) and ys.is_zero_value(ys.coeffs[k], scale)):
            p = k
            break
    if p is None:
        if complete:
            raise NotApplicable("the place is constant")
        raise SignatureUndetermined(f"no nonzero derivative below order {n}")
    for k in range(p + 1, n):
        if not _det_zero(xs, ys, p, k, scale):
            return p, k
    if complete:
        raise NotApplicable("the place parametrizes a straight line")
    raise SignatureUndetermined(
        f"derivatives of order {p + 1}..{n - 1} are all parallel to order {p}; raise trunc"
    )


def signature(pl: Place) -> Signature:
    """Signature of a place; for standard places also ``beta``, ``r`` and ``xi``."""
    p, q = signature_pq(pl.x, pl.y, pl.complete)
    if not pl.standard:
        return Signature(p, q, exact=pl.exact)
    y = pl.y
    beta = y.coeffs[q]
    r = xi = None
    scale = y._scale_ref()
    for k in range(q + 1, y.trunc):
        if not y.is_zero_value(y.coeffs[k], scale):
            r, xi = k, y.coeffs[k]
            break
    return Signature(p, q, r, beta, xi, r_final=(r is not None or pl.complete), exact=pl.exact)


def standardize(pl: Place) -> Place:
    """Rotate and reparametrize a place into ``(h^p, beta h^q + ...)``.

    The rotation sends the tangent direction ``P^(p)(0)`` to the positive
    x-axis.  In exact mode this needs a rational ``|P^(p)(0)|`` and a rational
    ``p``-th root of it; otherwise the place is converted to float mode.
    """
    from .series import NotAUnit, sqrt_value

    if pl.standard:
        return pl
    p, _ = signature_pq(pl.x, pl.y, pl.complete)
    vx, vy = pl.x.coeffs[p], pl.y.coeffs[p]
    if pl.exact:
        try:
            norm = sqrt_value(vx * vx + vy * vy, True)
            root = _rational_root(norm, p)
        except NotAUnit:
            return standardize(pl.to_float())
    else:
        norm = sqrt_value(vx * vx + vy * vy, False)
        root = norm ** (1.0 / p)
    c, s = vx / norm, vy / norm
    u = pl.x.scale(c) + pl.y.scale(s)
    w = pl.x.scale(-s) + pl.y.scale(c)
    # u = h^p * norm * (1 + eps); new parameter t = h * phi(h) with phi^p = u / h^p
    _, unit = u.extract_monomial_factor()
    phi = unit.power(Fraction(1, p) if pl.exact else 1.0 / p, head=root)
    h_of_t = _revert(phi)
    new_w = _compose(w, h_of_t)
    new_u = TruncSeries.monomial(1, p, new_w.trunc, pl.exact, pl.x.tol)
    fc, fs = pl.frame
    frame = (fc * c - fs * s, fs * c + fc * s)
    # the reparametrized series are no longer polynomials in general
    return replace(pl, x=new_u, y=new_w, frame=frame, complete=False)


def _rational_root(c, p):
    from .series import _rational_power

    return _rational_power(c, Fraction(1, p))


def _revert(phi: TruncSeries) -> TruncSeries:
    """Solve ``t = h * phi(h)`` for ``h = t * psi(t)``; returns ``h(t)``."""
    n = phi.trunc
    one = TruncSeries.constant(1, n, phi.exact, phi.tol)
    inv0 = one.scale(1 / phi.coeffs[0])
    psi = inv0
    for _ in range(n):
        h = psi.shift(1).truncate(n)
        psi = _compose(phi, h).reciprocal()
    return psi.shift(1).truncate(n + 1)


def _compose(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    """``f(g(t))`` for ``g(0) = 0``."""
    if not g.is_zero_value(g.coeffs[0]):
        raise ValueError("inner series must vanish at 0")
    n = min(f.trunc, g.trunc)
    g = g.truncate(n)
    acc = TruncSeries.constant(f.coeffs[n - 1] if n else 0, n, f.exact, f.tol)
    for c in reversed(f.coeffs[: n - 1]):
        acc = acc * g + c
    return acc

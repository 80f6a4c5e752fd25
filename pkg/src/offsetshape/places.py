"""Real places of an algebraic plane curve at a given point.

The branches through the point are found by a Newton-Puiseux expansion run
once per real tangent line.  Coordinates are first rotated so that the
tangent becomes the ``u``-axis; then ``v`` is expanded in fractional powers
of ``u``.  Because only real branches are wanted, every ramification
``t = sigma * tau^n`` with ``n`` even is tried for both signs ``sigma``
(the two half-lines ``t > 0`` and ``t < 0``), and only real roots of the
edge polynomials are followed.  Branches that differ by ``tau -> -tau`` are
merged at the end.

Exact arithmetic is used throughout when every coefficient met is rational.
An irrational tangent slope or an irrational edge root switches that branch
to float mode; this is recorded in the diagnostics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
import sympy

from .poly import Poly2
from .series import DEFAULT_TOL, TruncSeries, sqrt_value, NotAUnit
from .shape import Place, standardize


class PointNotOnCurve(ValueError):
    pass


class TruncationTooSmall(ValueError):
    pass


@dataclass
class BranchSet:
    center: tuple
    places: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    trunc: int = 0
    squarefree_reduced: bool = False

    def __len__(self):
        return len(self.places)

    def __iter__(self):
        return iter(self.places)


def default_trunc(multiplicity: int) -> int:
    return max(16, 3 * multiplicity + 4)


# -- sparse bivariate polynomials with generic coefficients --------------------


def _is_zero(c, scale, tol):
    if isinstance(c, Fraction):
        return c == 0
    return abs(c) <= tol * (1.0 + scale)


def _scale(F):
    return max((abs(float(c)) for c in F.values()), default=0.0)


def _prune(F, tol):
    s = _scale(F)
    return {k: c for k, c in F.items() if not _is_zero(c, s, tol)}


def _to_float(F):
    return {k: float(c) for k, c in F.items()}


def _rotate(F, c, s):
    """``F(c*u - s*v, s*u + c*v)`` as a polynomial in ``(u, v)``."""
    X = {(1, 0): c, (0, 1): -s}
    Y = {(1, 0): s, (0, 1): c}
    out = {}
    cache_x = [{(0, 0): type(c)(1)}]
    cache_y = [{(0, 0): type(c)(1)}]
    deg_x = max((i for i, _ in F), default=0)
    deg_y = max((j for _, j in F), default=0)
    for _ in range(deg_x):
        cache_x.append(_mul(cache_x[-1], X))
    for _ in range(deg_y):
        cache_y.append(_mul(cache_y[-1], Y))
    for (i, j), a in F.items():
        for k, v in _mul(cache_x[i], cache_y[j]).items():
            out[k] = out.get(k, 0) + a * v
    return out


def _mul(P, Q):
    out = {}
    for (i1, j1), a in P.items():
        for (i2, j2), b in Q.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, 0) + a * b
    return out


def _lower_hull(points):
    pts = sorted(set(points))
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _edges(F):
    """Edges of the Newton polygon giving roots ``w ~ c t^mu`` with mu > 0.

    Points are ``(i, j)`` = (t-exponent, w-exponent).  Returns a list of
    ``(m, n, edge_points)`` with ``mu = m/n`` in lowest terms.
    """
    pts = list(F)
    jmin_by_i = {}
    for i, j in pts:
        jmin_by_i[i] = min(j, jmin_by_i.get(i, j))
    # hull in (j, i) coordinates: j on the horizontal axis
    hull = _lower_hull([(j, i) for i, j in pts])
    out = []
    for (j1, i1), (j2, i2) in zip(hull, hull[1:]):
        # w decreasing from j2 to j1 while i increases: slope mu = (i1 - i2)/(j2 - j1)
        if i1 <= i2:
            continue
        num, den = i1 - i2, j2 - j1
        g = math.gcd(num, den)
        m, n = num // g, den // g
        on_edge = [(i, j) for i, j in pts if n * i + m * j == n * i1 + m * j1]
        out.append((m, n, on_edge))
    return out


def _substitute(F, sigma, n, m, c):
    """``F(sigma tau^n, tau^m (c + w)) / tau^L``."""
    out = {}
    binoms = {}
    for (i, j), a in F.items():
        coef = a * (sigma**i)
        e = n * i + m * j
        if j not in binoms:
            binoms[j] = [math.comb(j, k) * c ** (j - k) for k in range(j + 1)]
        for k, b in enumerate(binoms[j]):
            if b:
                key = (e, k)
                out[key] = out.get(key, 0) + coef * b
    out = _prune(out, DEFAULT_TOL)
    L = min((e for e, _ in out), default=0)
    return {(e - L, k): v for (e, k), v in out.items()}


def _real_roots(coeffs, exact, tol):
    """Real nonzero roots of ``sum coeffs[k] c^k`` with multiplicities.

    Returns ``[(root, multiplicity, exact_flag)]``.
    """
    while coeffs and _is_zero(coeffs[-1], _scale(dict(enumerate(coeffs))), tol):
        coeffs = coeffs[:-1]
    if exact:
        c = sympy.Symbol("c")
        poly = sympy.Poly(
            sum(sympy.Rational(a.numerator, a.denominator) * c**k for k, a in enumerate(coeffs)),
            c,
        )
        roots = {}
        for rt in poly.real_roots():
            if rt == 0:
                continue
            roots[rt] = roots.get(rt, 0) + 1
        out = []
        for rt, mult in roots.items():
            if rt.is_Rational:
                out.append((Fraction(int(rt.p), int(rt.q)), mult, True))
            else:
                out.append((float(sympy.N(rt, 30)), mult, False))
        out.sort(key=lambda t: float(t[0]))
        return out
    arr = np.array([float(a) for a in reversed(coeffs)])
    if len(arr) < 2:
        return []
    rts = np.roots(arr)
    real = sorted(
        float(r.real) for r in rts
        if abs(r.imag) <= 1e-7 * (1 + abs(r)) and abs(r) > 1e-12
    )
    out = []
    for r in real:
        if out and abs(r - out[-1][0]) <= 1e-6 * (1 + abs(r)):
            prev, mult, _ = out[-1]
            out[-1] = ((prev * mult + r) / (mult + 1), mult + 1, False)
        else:
            out.append((r, 1, False))
    return out


@dataclass
class _State:
    F: dict
    N: int
    sigma_u: int
    known: dict
    E: int
    sw: int
    exact: bool


def _eval_F(F, w: TruncSeries) -> TruncSeries:
    P = w.trunc
    powers = [TruncSeries.constant(1, P, w.exact, w.tol)]
    jmax = max((j for _, j in F), default=0)
    for _ in range(jmax):
        powers.append(powers[-1] * w)
    acc = TruncSeries.zero(P, w.exact, w.tol)
    for (i, j), a in F.items():
        if i < P:
            acc = acc + powers[j].shift(i).truncate(P).scale(a)
    return acc


def _dF(F):
    return {(i, j - 1): j * a for (i, j), a in F.items() if j}


def _solve_simple(F, precision: int, exact: bool) -> TruncSeries:
    """Power series root ``w(tau)``, ``w(0) = 0``, of ``F`` with ``F_w(0,0) != 0``."""
    P = max(precision, 1)
    w = TruncSeries.zero(P, exact)
    Fw = _dF(F)
    steps = 0
    while True:
        val = _eval_F(F, w)
        der = _eval_F(Fw, w)
        new = w - val * der.reciprocal()
        steps += 1
        if new.equals(w) or steps > 2 * P + 4:
            return new
        w = new


def _branches(F, state: _State, trunc: int, first: bool, diag: list, tol: float):
    """Recursive Newton-Puiseux step; yields finished ``(N, sigma_u, v_series)``."""
    F = _prune(F, tol)
    if not F:
        return
    if all(j > 0 for _, j in F):
        # w divides F: the exact root w = 0
        v = _finish(state, None, trunc)
        yield state.N, state.sigma_u, v, first
        F = {(i, j - 1): a for (i, j), a in F.items()}
        yield from _branches(F, state, trunc, first, diag, tol)
        return
    for m, n, edge in _edges(F):
        if first and m <= n:
            continue  # not tangent to the u-axis
        jlo = min(j for _, j in edge)
        sides = (1, -1) if n % 2 == 0 else (1,)
        for sigma in sides:
            coeffs = [0] * (max(j for _, j in edge) - jlo + 1)
            for i, j in edge:
                coeffs[j - jlo] += F[(i, j)] * sigma**i
            if state.exact:
                coeffs = [Fraction(c) for c in coeffs]
            for root, mult, root_exact in _real_roots(coeffs, state.exact, tol):
                Fs = F
                exact = state.exact
                if exact and not root_exact:
                    diag.append(
                        f"irrational branch coefficient {root:.12g}; continuing in float mode"
                    )
                    Fs = _to_float(F)
                    exact = False
                new = _advance(state, Fs, sigma, n, m, root, exact)
                if mult == 1:
                    prec = trunc - new.E
                    if prec > 0:
                        w = _solve_simple(new.F, prec, exact)
                    else:
                        w = None
                    yield new.N, new.sigma_u, _finish(new, w, trunc), False
                else:
                    yield from _branches(new.F, new, trunc, False, diag, tol)


def _advance(state: _State, F, sigma, n, m, c, exact):
    known = {n * e: a * sigma**e for e, a in state.known.items()}
    sE = sigma**state.E
    key = n * state.E + m
    known[key] = known.get(key, 0) + state.sw * sE * c
    Fn = _substitute(F, sigma, n, m, c)
    # w_old = tau^m (c + w1); v = known + sw * t^E * w_old, t^E = sigma^E tau^(nE)
    sw = state.sw * sE
    if not exact:
        known = {k: float(v) for k, v in known.items()}
    return _State(Fn, state.N * n, state.sigma_u * sigma**state.N, known, key, sw, exact)


def _finish(state: _State, w: Optional[TruncSeries], trunc: int) -> TruncSeries:
    terms = dict(state.known)
    if w is not None:
        for k, a in enumerate(w.coeffs):
            e = state.E + k
            if e < trunc:
                terms[e] = terms.get(e, 0) + state.sw * a
    return TruncSeries.from_terms(terms, trunc, exact=state.exact)


def _tangent_directions(G, exact_ok=True):
    """Real tangent lines at the origin as ``(dx, dy)`` (dx >= 0 representative)."""
    low = {k: v for k, v in G.items() if sum(k) == min(sum(k2) for k2 in G)}
    m = sum(next(iter(low)))
    t = sympy.Symbol("t")
    # L(1, t) = sum c_i t^(m-i) with terms x^i y^(m-i)
    poly = sympy.Poly(
        sum(sympy.Rational(c.numerator, c.denominator) * t**j for (i, j), c in low.items()),
        t,
    )
    dirs = []
    if poly.degree() < m:
        dirs.append((Fraction(0), Fraction(1), True))
    seen = set()
    for rt in poly.real_roots():
        if rt in seen:
            continue
        seen.add(rt)
        if rt.is_Rational:
            dirs.append((Fraction(1), Fraction(int(rt.p), int(rt.q)), True))
        else:
            dirs.append((1.0, float(sympy.N(rt, 30)), False))
    return dirs


def places_at(
    f: Poly2,
    point=(0, 0),
    trunc: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    force_float: bool = False,
) -> BranchSet:
    """All real places of ``f = 0`` centered at ``point``, in standard form.

    Each returned place is expressed in a local frame: ``center`` is the
    point, ``frame`` the rotation taking local to global coordinates, and
    ``x = h^p`` exactly.
    """
    cx, cy = Fraction(point[0]), Fraction(point[1])
    if f(cx, cy) != 0:
        raise PointNotOnCurve(f"f{(str(cx), str(cy))} = {f(cx, cy)} != 0")
    diag = []
    g, reduced = f.squarefree()
    if reduced:
        msg = f"input is not square-free; continuing with its square-free part {g}"
        warnings.warn(msg)
        diag.append(msg)
    G = g.translate(cx, cy)
    mult = G.low_order()
    if trunc is None:
        trunc = default_trunc(mult)
    if trunc < 4:
        raise TruncationTooSmall("trunc must be at least 4")
    found = []
    for dx, dy, exact in _tangent_directions(G.terms):
        if not exact:
            diag.append(f"tangent slope {dy} is irrational; float mode")
        if exact and not force_float:
            try:
                norm = sqrt_value(dx * dx + dy * dy, True)
            except NotAUnit:
                exact = False
                diag.append(
                    f"tangent direction ({dx}, {dy}) has irrational length; float mode"
                )
        if not exact or force_float:
            exact = False
            dx, dy = float(dx), float(dy)
            norm = math.hypot(dx, dy)
        c, s = dx / norm, dy / norm
        terms = dict(G.terms) if exact else _to_float(G.terms)
        R = _rotate(terms, c, s)
        one = Fraction(1) if exact else 1.0
        state = _State(R, 1, 1, {}, 0, 1, exact)
        for N, sigma_u, v, is_line in _branches(R, state, trunc, True, diag, tol):
            if is_line:
                diag.append(f"the curve contains the line through the point with direction ({c}, {s})")
                continue
            found.append(_to_place(N, sigma_u, v, (cx, cy), (c, s), trunc, tol))
    places = _dedupe(found)
    places = [p if p.exact else _as_float_center(p) for p in places]
    if not places:
        diag.append("no real branch through the point (isolated point)")
    return BranchSet((cx, cy), places, diag, trunc, reduced)


def _as_float_center(pl: Place) -> Place:
    from dataclasses import replace

    return replace(pl, center=tuple(float(c) for c in pl.center),
                   frame=tuple(float(c) for c in pl.frame))


def _to_place(N, sigma_u, v: TruncSeries, center, frame, trunc, tol):
    c, s = frame
    if sigma_u == -1:
        if N % 2:
            v = v.ramify(1, -1)  # tau -> -tau makes u = tau^N
        else:
            c, s = -c, -s
            v = -v
    if not v.exact:
        c, s = float(c), float(s)
    x = TruncSeries.monomial(1, N, trunc, v.exact, tol)
    pl = Place(x, v, center=center, frame=(c, s), complete=False)
    return standardize(pl)


def _canonical_y(pl: Place) -> TruncSeries:
    p = next(pl.x.nonzero_terms())[0]
    y = pl.y
    if p % 2 == 0:
        for k, a in y.nonzero_terms():
            if k % 2:
                if a < 0:
                    return y.ramify(1, -1)
                break
    return y


def _dedupe(places):
    from dataclasses import replace

    keyed = {}
    for pl in places:
        pl = replace(pl, y=_canonical_y(pl))
        key = (
            tuple(round(float(t), 9) for t in pl.frame),
            next(pl.x.nonzero_terms())[0],
            tuple(round(float(a), 9) for a in pl.y.coeffs),
        )
        keyed.setdefault(key, pl)
    return [keyed[k] for k in sorted(keyed)]


def substitution_residual(f: Poly2, pl: Place) -> TruncSeries:
    """``f`` composed with the place (in global coordinates)."""
    c, s = pl.frame
    cx, cy = pl.center
    X = pl.x.scale(c) - pl.y.scale(s) + cx
    Y = pl.x.scale(s) + pl.y.scale(c) + cy
    return f.substitute(X, Y)

"""Truncated univariate power series over exact rationals or floats.

A :class:`TruncSeries` stores the coefficients of ``h**0 .. h**(T-1)`` where
``T`` is the *truncation*: the first exponent whose coefficient is not known.
Every operation propagates ``T`` pessimistically, so a coefficient is only
ever reported when the inputs determine it.

Two coefficient modes exist and are never mixed inside one computation:

* exact mode, coefficients are :class:`fractions.Fraction`;
* float mode, coefficients are Python floats and zero tests are scale aware,
  ``|c| <= tol * (1 + max|c_i|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Sequence

DEFAULT_TOL = 1e-12


class SeriesError(ValueError):
    """Base class for series arithmetic failures."""


class ModeMismatch(SeriesError, TypeError):
    pass


class EmptySeries(SeriesError):
    pass


class NotAUnit(SeriesError):
    pass


class OrderUndetermined(SeriesError):
    pass


def _coerce(c, exact: bool):
    if exact:
        if isinstance(c, float):
            raise ModeMismatch(f"float coefficient {c!r} in an exact series")
        return Fraction(c)
    if isinstance(c, complex):
        raise TypeError("complex coefficients are not supported")
    return float(c)


def is_exact_value(c) -> bool:
    return isinstance(c, (int, Rational)) and not isinstance(c, bool)


@dataclass(frozen=True)
class TruncSeries:
    coeffs: tuple
    exact: bool = True
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", tuple(_coerce(c, self.exact) for c in self.coeffs)
        )

    # -- construction -----------------------------------------------------

    @classmethod
    def from_terms(
        cls,
        terms: Mapping[int, object],
        trunc: int,
        exact: bool | None = None,
        tol: float = DEFAULT_TOL,
    ) -> "TruncSeries":
        """Build a series from ``{exponent: coefficient}``; exponents >= trunc are dropped."""
        if exact is None:
            exact = all(is_exact_value(c) for c in terms.values())
        zero = Fraction(0) if exact else 0.0
        coeffs = [zero] * trunc
        for k, c in terms.items():
            if k < 0:
                raise ValueError("negative exponent")
            if k < trunc:
                coeffs[k] += _coerce(c, exact)
        return cls(tuple(coeffs), exact, tol)

    @classmethod
    def zero(cls, trunc: int, exact: bool = True, tol: float = DEFAULT_TOL):
        return cls.from_terms({}, trunc, exact, tol)

    @classmethod
    def constant(cls, c, trunc: int, exact: bool | None = None, tol: float = DEFAULT_TOL):
        return cls.from_terms({0: c}, trunc, exact, tol)

    @classmethod
    def monomial(cls, c, k: int, trunc: int, exact: bool | None = None, tol: float = DEFAULT_TOL):
        return cls.from_terms({k: c}, trunc, exact, tol)

    # -- basic accessors --------------------------------------------------

    @property
    def trunc(self) -> int:
        return len(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k: int):
        if k < 0:
            raise IndexError(k)
        if k >= self.trunc:
            raise IndexError(f"coefficient of h^{k} is beyond truncation {self.trunc}")
        return self.coeffs[k]

    def _zero(self):
        return Fraction(0) if self.exact else 0.0

    def _scale_ref(self) -> float:
        if not self.coeffs:
            return 0.0
        return max(abs(float(c)) for c in self.coeffs)

    def is_zero_value(self, c, scale: float | None = None) -> bool:
        """Zero test in the mode of this series."""
        if self.exact:
            return c == 0
        if scale is None:
            scale = self._scale_ref()
        return abs(c) <= self.tol * (1.0 + scale)

    def is_zero_coeff(self, k: int) -> bool:
        return self.is_zero_value(self[k])

    def order(self) -> int | None:
        """Least exponent with a nonzero coefficient, ``None`` if none is visible."""
        scale = self._scale_ref()
        for k, c in enumerate(self.coeffs):
            if not self.is_zero_value(c, scale):
                return k
        return None

    def nonzero_terms(self) -> Iterator[tuple[int, object]]:
        scale = self._scale_ref()
        for k, c in enumerate(self.coeffs):
            if not self.is_zero_value(c, scale):
                yield k, c

    def is_zero(self) -> bool:
        return self.order() is None

    # -- mode handling ----------------------------------------------------

    def _check(self, other: "TruncSeries"):
        if not isinstance(other, TruncSeries):
            raise TypeError(f"expected TruncSeries, got {type(other).__name__}")
        if other.exact != self.exact:
            raise ModeMismatch("cannot combine exact and float series")

    def _like(self, coeffs: Iterable) -> "TruncSeries":
        return TruncSeries(tuple(coeffs), self.exact, self.tol)

    def to_float(self, tol: float | None = None) -> "TruncSeries":
        return TruncSeries(
            tuple(float(c) for c in self.coeffs), False, self.tol if tol is None else tol
        )

    def scalar(self, c):
        return _coerce(c, self.exact)

    # -- arithmetic -------------------------------------------------------

    def truncate(self, trunc: int) -> "TruncSeries":
        if trunc > self.trunc:
            raise ValueError("cannot raise the truncation of a series")
        return self._like(self.coeffs[:trunc])

    def __add__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(self.scalar(other), self.trunc, self.exact, self.tol)
        self._check(other)
        n = min(self.trunc, other.trunc)
        return self._like(self.coeffs[k] + other.coeffs[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return self._like(-c for c in self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, TruncSeries):
            return self + (-self.scalar(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TruncSeries":
        c = self.scalar(c)
        return self._like(c * x for x in self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return self.scale(other)
        self._check(other)
        n = min(self.trunc, other.trunc)
        a, b = self.coeffs, other.coeffs
        zero = self._zero()
        out = []
        for k in range(n):
            acc = zero
            for i in range(k + 1):
                ai = a[i]
                if ai:
                    acc += ai * b[k - i]
            out.append(acc)
        return self._like(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "TruncSeries":
        if not isinstance(n, int) or n < 0:
            return self.power(n)
        out = TruncSeries.constant(1, self.trunc, self.exact, self.tol)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def differentiate(self) -> "TruncSeries":
        if self.trunc < 1:
            raise EmptySeries("cannot differentiate a series with truncation 0")
        return self._like(k * self.coeffs[k] for k in range(1, self.trunc))

    def shift(self, k: int) -> "TruncSeries":
        """Multiply by ``h**k`` (k >= 0)."""
        if k < 0:
            return self.lower(-k)
        return self._like((self._zero(),) * k + self.coeffs)

    def lower(self, k: int) -> "TruncSeries":
        """Divide by ``h**k``; the first ``k`` coefficients must vanish."""
        if k > self.trunc:
            raise OrderUndetermined(f"cannot divide by h^{k} with truncation {self.trunc}")
        scale = self._scale_ref()
        for i in range(k):
            if not self.is_zero_value(self.coeffs[i], scale):
                raise ValueError(f"series is not divisible by h^{k}")
        return self._like(self.coeffs[k:])

    def extract_monomial_factor(self) -> tuple[int, "TruncSeries"]:
        """Return ``(m, t)`` with ``self = h**m * t`` and ``t[0] != 0``."""
        m = self.order()
        if m is None:
            raise OrderUndetermined(
                f"series vanishes up to truncation {self.trunc}; order unknown"
            )
        return m, self._like(self.coeffs[m:])

    def _unit_head(self):
        if self.trunc == 0:
            raise EmptySeries("empty series")
        c0 = self.coeffs[0]
        if self.is_zero_value(c0):
            raise NotAUnit("constant term vanishes")
        return c0

    def reciprocal(self) -> "TruncSeries":
        c0 = self._unit_head()
        a = self.coeffs
        r = [1 / c0]
        for n in range(1, self.trunc):
            acc = self._zero()
            for k in range(1, n + 1):
                acc += a[k] * r[n - k]
            r.append(-acc / c0)
        return self._like(r)

    def __truediv__(self, other):
        if isinstance(other, TruncSeries):
            self._check(other)
            return self * other.reciprocal()
        return self.scale(1 / self.scalar(other))

    def power(self, alpha, head=None) -> "TruncSeries":
        """``self**alpha`` for a unit series, by the J.C.P. Miller recurrence.

        ``head`` overrides the leading coefficient ``c0**alpha`` (needed in
        exact mode, where only rational roots are representable).
        """
        c0 = self._unit_head()
        if head is None:
            head = _rational_power(c0, alpha) if self.exact else float(c0) ** float(alpha)
        alpha = Fraction(alpha) if self.exact else float(alpha)
        a = self.coeffs
        r = [self.scalar(head)]
        for n in range(1, self.trunc):
            acc = self._zero()
            for k in range(1, n + 1):
                acc += (alpha * k - n + k) * a[k] * r[n - k]
            r.append(acc / (n * c0))
        return self._like(r)

    def inv_sqrt(self) -> "TruncSeries":
        """``1/sqrt(self)`` for a series with positive constant term."""
        c0 = self._unit_head()
        if c0 < 0:
            raise NotAUnit("constant term is negative; no real square root")
        return self.power(Fraction(-1, 2) if self.exact else -0.5)

    # -- substitution & evaluation ---------------------------------------

    def ramify(self, n: int, sign: int = 1) -> "TruncSeries":
        """Substitute ``h -> sign * h**n``."""
        if n < 1 or sign not in (1, -1):
            raise ValueError("ramify needs n >= 1 and sign = +-1")
        zero = self._zero()
        out = [zero] * (n * self.trunc)
        for k, c in enumerate(self.coeffs):
            out[n * k] = c * (sign**k)
        return self._like(out)

    def evaluate(self, h):
        """Evaluate the known part at ``h`` (float or numpy array)."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * h + float(c)
        return acc

    def __call__(self, h):
        return self.evaluate(h)

    def __repr__(self):
        terms = [f"{c}*h^{k}" for k, c in self.nonzero_terms()]
        body = " + ".join(terms) if terms else "0"
        return f"TruncSeries({body} + O(h^{self.trunc}), {'exact' if self.exact else 'float'})"

    def equals(self, other: "TruncSeries") -> bool:
        """Equality of the commonly trusted prefix, using the mode's zero test."""
        diff = self - other
        return diff.is_zero()


def _rational_power(c: Fraction, alpha) -> Fraction:
    alpha = Fraction(alpha)
    if c <= 0 and alpha.denominator % 2 == 0:
        raise NotAUnit(f"{c} has no real root of order {alpha.denominator}")
    num = _exact_root(abs(c.numerator), alpha.denominator)
    den = _exact_root(c.denominator, alpha.denominator)
    if num is None or den is None:
        raise NotAUnit(
            f"{c}**{alpha} is irrational; use float mode for this computation"
        )
    base = Fraction(num, den)
    if c < 0:
        base = -base
    return base**alpha.numerator


def _exact_root(n: int, k: int) -> int | None:
    if k == 1:
        return n
    r = round(n ** (1.0 / k)) if n < 2**1000 else _iroot(n, k)
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def _iroot(n: int, k: int) -> int:
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


def common_mode(series: Sequence[TruncSeries]) -> bool:
    modes = {s.exact for s in series}
    if len(modes) > 1:
        raise ModeMismatch("mixed exact and float series")
    return modes.pop() if modes else True


def sqrt_value(c, exact: bool):
    """Square root in the given mode (exact only for rational squares)."""
    if exact:
        return _rational_power(Fraction(c), Fraction(1, 2))
    return math.sqrt(float(c))

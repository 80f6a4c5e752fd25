"""Exact bivariate polynomials and a small expression parser.

The grammar accepted by :func:`parse_poly` is the usual infix one::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor | factor)*      # juxtaposition = product
    factor := ('+' | '-') factor | atom ('^' integer)?
    atom   := number | variable | '(' expr ')'

Numbers may be integers, decimals or ``a/b`` through division.  Division is
allowed only by nonzero constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .series import TruncSeries


class PolySyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        pointer = f"\n  {text}\n  {' ' * position}^" if text else ""
        super().__init__(f"{message} at position {position}{pointer}")


class InvalidCurve(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            # skip leading blanks so the reported position points at the culprit
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise PolySyntaxError(f"unexpected character {text[bad]!r}", bad, text)
        start = m.start(m.lastindex)
        kind = ("num", "var", "op")[m.lastindex - 1]
        val = m.group(m.lastindex)
        if val == "**":
            val = "^"
        tokens.append((kind, val, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser producing ``{exponent tuple: Fraction}``."""

    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.vars = tuple(variables)
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise PolySyntaxError(msg, tok[2], self.text)

    def eat(self, val=None):
        tok = self.tok
        if val is not None and tok[1] != val:
            self.fail(f"expected {val!r}")
        self.i += 1
        return tok

    def parse(self):
        if self.tok[0] == "end":
            self.fail("empty expression")
        out = self.expr()
        if self.tok[0] != "end":
            self.fail(f"unexpected token {self.tok[1]!r}")
        return out

    def expr(self):
        acc = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.eat()[1]
            rhs = self.term()
            acc = _padd(acc, rhs if op == "+" else _pscale(rhs, -1))
        return acc

    def _starts_atom(self):
        kind, val, _ = self.tok
        return kind in ("num", "var") or val == "("

    def term(self):
        acc = self.factor()
        while True:
            if self.tok[1] == "*":
                self.eat()
                acc = _pmul(acc, self.factor())
            elif self.tok[1] == "/":
                tok = self.eat()
                rhs = self.factor()
                c = _as_constant(rhs)
                if c is None:
                    self.fail("division by a non-constant", tok)
                if c == 0:
                    self.fail("division by zero", tok)
                acc = _pscale(acc, 1 / c)
            elif self._starts_atom():
                acc = _pmul(acc, self.factor())
            else:
                return acc

    def factor(self):
        if self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.eat()[1]
            inner = self.factor()
            return inner if op == "+" else _pscale(inner, -1)
        base = self.atom()
        if self.tok[1] == "^":
            self.eat()
            tok = self.tok
            if tok[0] != "num" or not tok[1].isdigit():
                self.fail("exponent must be a nonnegative integer")
            self.eat()
            return _ppow(base, int(tok[1]))
        return base

    def atom(self):
        kind, val, pos = self.tok
        if kind == "num":
            self.eat()
            return {(0,) * len(self.vars): Fraction(val)}
        if kind == "var":
            if val not in self.vars:
                self.fail(f"unknown variable {val!r}")
            self.eat()
            exps = [0] * len(self.vars)
            exps[self.vars.index(val)] = 1
            return {tuple(exps): Fraction(1)}
        if val == "(":
            self.eat()
            inner = self.expr()
            self.eat(")")
            return inner
        if kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {val!r}")


def _clean(p):
    return {k: v for k, v in p.items() if v != 0}


def _padd(p, q):
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + v
    return _clean(out)


def _pscale(p, c):
    return _clean({k: v * c for k, v in p.items()})


def _pmul(p, q):
    out = {}
    for k1, v1 in p.items():
        for k2, v2 in q.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            out[k] = out.get(k, 0) + v1 * v2
    return _clean(out)


def _ppow(p, n):
    nvars = len(next(iter(p))) if p else 1
    out = {(0,) * nvars: Fraction(1)}
    for _ in range(n):
        out = _pmul(out, p)
    return out


def _as_constant(p):
    if not p:
        return Fraction(0)
    if len(p) == 1:
        (k, v), = p.items()
        if not any(k):
            return v
    return None


def parse_expression(text: str, variables: Sequence[str]) -> dict:
    """Parse ``text`` into ``{exponent tuple: Fraction}`` over ``variables``."""
    return _Parser(text, variables).parse()


@dataclass(frozen=True)
class Poly2:
    """Bivariate polynomial ``sum c_ij x^i y^j`` with exact coefficients."""

    terms: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {
            (int(i), int(j)): Fraction(c) for (i, j), c in self.terms.items() if c != 0
        }
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    @property
    def degree_x(self) -> int:
        return max((i for i, _ in self.terms), default=-1)

    @property
    def degree_y(self) -> int:
        return max((j for _, j in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, x, y):
        return sum(c * x**i * y**j for (i, j), c in self.terms.items())

    def __add__(self, other: "Poly2") -> "Poly2":
        return Poly2(_padd(self.terms, other.terms))

    def __mul__(self, other: "Poly2") -> "Poly2":
        return Poly2(_pmul(self.terms, other.terms))

    def diff_x(self) -> "Poly2":
        return Poly2({(i - 1, j): i * c for (i, j), c in self.terms.items() if i})

    def diff_y(self) -> "Poly2":
        return Poly2({(i, j - 1): j * c for (i, j), c in self.terms.items() if j})

    def translate(self, cx, cy) -> "Poly2":
        """The polynomial ``g(x, y) = f(x + cx, y + cy)``."""
        X = {(1, 0): Fraction(1), (0, 0): Fraction(cx)}
        Y = {(0, 1): Fraction(1), (0, 0): Fraction(cy)}
        out: dict = {}
        for (i, j), c in self.terms.items():
            out = _padd(out, _pscale(_pmul(_ppow(X, i), _ppow(Y, j)), c))
        return Poly2(out)

    def low_order(self) -> int:
        """Multiplicity of the origin as a point of the curve (0 if not on it)."""
        return min((i + j for i, j in self.terms), default=0)

    def low_form(self) -> dict:
        m = self.low_order()
        return {k: c for k, c in self.terms.items() if sum(k) == m}

    def substitute(self, xs: TruncSeries, ys: TruncSeries) -> TruncSeries:
        """Compose with a pair of series ``(x(h), y(h))``."""
        exact = xs.exact and ys.exact
        trunc = min(xs.trunc, ys.trunc)
        xp = [TruncSeries.constant(1, trunc, xs.exact, xs.tol)]
        yp = [TruncSeries.constant(1, trunc, ys.exact, ys.tol)]
        for _ in range(self.degree_x):
            xp.append(xp[-1] * xs)
        for _ in range(self.degree_y):
            yp.append(yp[-1] * ys)
        acc = TruncSeries.zero(trunc, exact, xs.tol)
        for (i, j), c in self.terms.items():
            acc = acc + (xp[i] * yp[j]).scale(c if exact else float(c))
        return acc

    def to_sympy(self):
        import sympy

        x, y = sympy.symbols("x y")
        return sympy.Poly(
            sum(sympy.Rational(c.numerator, c.denominator) * x**i * y**j
                for (i, j), c in self.terms.items()),
            x, y,
        )

    @classmethod
    def from_sympy(cls, poly) -> "Poly2":
        return cls({
            (int(m[0]), int(m[1])): Fraction(int(c.p), int(c.q))
            for m, c in poly.terms()
        })

    def squarefree(self) -> tuple["Poly2", bool]:
        """Square-free part and whether a repeated factor was removed."""
        sp = self.to_sympy()
        part = sp.sqf_part()
        reduced = Poly2.from_sympy(part)
        if reduced.degree == self.degree:
            return self, False
        return reduced, True

    def __str__(self):
        parts = []
        for (i, j), c in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), kv[0])):
            mon = "*".join(
                s for s in (
                    f"x^{i}" if i > 1 else ("x" if i == 1 else ""),
                    f"y^{j}" if j > 1 else ("y" if j == 1 else ""),
                ) if s
            )
            coef = str(c)
            if mon:
                coef = "" if c == 1 else "-" if c == -1 else coef + "*"
            parts.append(coef + mon)
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def parse_poly(text: str) -> Poly2:
    """Parse an implicit curve equation in ``x`` and ``y``.

    Raises :class:`PolySyntaxError` for malformed input and
    :class:`InvalidCurve` for the zero polynomial, constants and lines.
    """
    terms = parse_expression(text, ("x", "y"))
    poly = Poly2(terms)
    if poly.is_zero():
        raise InvalidCurve("the zero polynomial does not define a curve")
    if poly.degree < 1:
        raise InvalidCurve("a nonzero constant does not define a curve")
    if poly.degree == 1:
        raise InvalidCurve("lines are not supported: their offsets are lines")
    return poly


def parse_univariate(text: str, var: str = "h") -> dict[int, Fraction]:
    """Parse a polynomial in one variable into ``{exponent: coefficient}``."""
    return {k[0]: c for k, c in parse_expression(text, (var,)).items()}

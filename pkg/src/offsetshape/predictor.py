"""Case analysis predicting whether an offset preserves the local shape.

Each verdict carries a stable clause tag:

==========================  ===================================================
tag                         clause
==========================  ===================================================
SMOOTHED_QP1                singular place with q - p = 1
Q2P_POS_TABLE               q - 2p > 0, offset signature (p, q - p)
Q2P_NEG_P8                  q - 2p < 0 and q odd
Q2P_ZERO_T11_{1,2,3}        q = 2p, xi != 0, X has no h^p term
Q2P_ZERO_T12_{1,2,3}        q = 2p, xi != 0, X has an h^p term
Q2P_ZERO_XI0                q = 2p, xi = 0 (parabola-like place)
Q2P_NEG_T13_{1,2}           q - 2p < 0, q even, xi = 0
Q2P_NEG_T14_{1a,...,3c}     q - 2p < 0, q even, xi != 0
CLASSICAL_*                 classical offsets, for comparison only
==========================  ===================================================

Sign choices are resolved per offset sheet: the upper sign belongs to
``branch = +1``.  Clauses that only say "if <condition> != 0,
preserved" return ``preserved="undetermined"`` when the condition vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .offset import CurvatureData, OffsetParams
from .shape import LocalShape, Signature, local_shape

YES, NO, UNDETERMINED, BORDERLINE = "yes", "no", "undetermined", "borderline"


class NeedsDeeperTruncation(ValueError):
    """The clause needs ``r`` but the place shows no term beyond ``q``."""


class CaseRoutingError(AssertionError):
    pass


@dataclass(frozen=True)
class Condition:
    expr: str
    value: object
    zero: bool

    def to_json(self) -> dict:
        return {"expr": self.expr, "value": str(self.value), "zero": self.zero}


@dataclass(frozen=True)
class Prediction:
    case_id: str
    preserved: str
    predicted_sig: Optional[tuple] = None
    predicted_shape: Optional[LocalShape] = None
    predicted_p0: Optional[int] = None
    conditions: tuple = ()
    branch: int = 1
    flags: tuple = ()
    alternatives: tuple = ()

    @property
    def decisive(self) -> bool:
        return self.preserved in (YES, NO)

    def to_json(self) -> dict:
        out = {
            "case": self.case_id,
            "preserved": self.preserved,
            "branch": "+" if self.branch == 1 else "-",
            "predicted_signature": list(self.predicted_sig) if self.predicted_sig else None,
            "predicted_shape": self.predicted_shape.value if self.predicted_shape else None,
            "predicted_p0": self.predicted_p0,
            "conditions": [c.to_json() for c in self.conditions],
        }
        if self.flags:
            out["flags"] = list(self.flags)
        if self.alternatives:
            out["alternatives"] = [a.to_json() for a in self.alternatives]
        return out


class _Borderline(Exception):
    def __init__(self, expr):
        self.expr = expr


class _Eval:
    """Records condition evaluations and decides zero tests."""

    def __init__(self, exact: bool, tol: float, overrides: dict):
        self.exact = exact
        self.tol = tol
        self.overrides = overrides
        self.log: list[Condition] = []

    def is_zero(self, expr: str, value) -> bool:
        if expr in self.overrides:
            zero = self.overrides[expr]
        elif self.exact:
            zero = value == 0
        else:
            if abs(value) <= self.tol:
                raise _Borderline(expr)
            zero = False
        self.log.append(Condition(expr, value, zero))
        return zero


def _same_parity(m, n) -> bool:
    return (m - n) % 2 == 0


def _verdict(flag: bool) -> str:
    return YES if flag else NO


def predict(sig: Signature, coeffs: CurvatureData, op: OffsetParams,
            branch: Optional[int] = None) -> Prediction:
    """Verdict on shape preservation for the offset sheet ``branch``."""
    branch = op.branch if branch is None else branch
    op = op.with_branch(branch)
    if op.classical:
        return classical_reference(sig, coeffs, op.d, branch)
    exact = op.exact and sig.exact
    try:
        return _dispatch(sig, coeffs, op, _Eval(exact, op.tol, {}))
    except _Borderline as bl:
        alts = tuple(
            _dispatch(sig, coeffs, op, _Eval(exact, op.tol, {bl.expr: z}))
            for z in (True, False)
        )
        return Prediction(
            alts[0].case_id.split("_")[0] + "_BORDERLINE",
            BORDERLINE,
            branch=branch,
            flags=(f"condition {bl.expr!r} lies within tolerance of zero",),
            alternatives=alts,
        )


def _dispatch(sig: Signature, cd: CurvatureData, op: OffsetParams, ev: _Eval) -> Prediction:
    p, q, r = sig.p, sig.q, sig.r
    s = op.branch
    d, a, b = op.d, op.a, op.b
    src = local_shape(sig)

    def out(case, preserved, sig0=None, p0=None, flags=()):
        shape0 = local_shape(sig0) if sig0 else (src if preserved == YES else None)
        if src is LocalShape.FLEX and preserved == YES:
            raise CaseRoutingError(f"{case}: flex reported as preserved")
        return Prediction(case, preserved, sig0, shape0,
                          p0 if p0 is not None else (sig0[0] if sig0 else None),
                          tuple(ev.log), s, tuple(flags))

    if p > 1 and q - p == 1:
        if p % 2 == 0:
            return out("SMOOTHED_QP1", NO, p0=1)
        return out("SMOOTHED_QP1", UNDETERMINED, p0=1,
                   flags=("smoothing of a non-cuspidal place: shape not stated",))
    if q - 2 * p > 0:
        return out("Q2P_POS_TABLE", _verdict(p % 2 == 0), sig0=(p, q - p))
    if q - 2 * p < 0 and q % 2 == 1:
        return out("Q2P_NEG_P8", NO, p0=q - p)

    if r is None and not sig.r_final:
        raise NeedsDeeperTruncation(
            f"signature ({p}, {q}) needs the next coefficient of y; raise trunc"
        )
    xi_zero = r is None
    beta = sig.beta
    ut = q * beta / p  # equals ktilde when q = 2p
    if not xi_zero:
        V = r * sig.xi / p  # p/(r-p) * vtilde/(r-2p)!, defined for every r

    if q == 2 * p:
        kt = 2 * beta
        if xi_zero:
            val = 1 - 4 * s * d * a * beta + 4 * d * d * beta * beta
            if ev.is_zero("1 -+ 4*d*a*beta + 4*d^2*beta^2", val):
                return out("Q2P_ZERO_XI0", UNDETERMINED, p0=p,
                           flags=("flex may arise on the offset",))
            return out("Q2P_ZERO_XI0", YES, p0=p)
        u1 = 1 - s * d * a * kt
        if ev.is_zero("1 -+ d*a*ktilde", u1):
            if r > 3 * p:
                return out("Q2P_ZERO_T11_1", YES, sig0=(p, q))
            if r < 3 * p:
                return out("Q2P_ZERO_T11_2", _verdict(_same_parity(r, p)), sig0=(p, r - p))
            cond = b / 2 * kt * kt - a * V
            if ev.is_zero("b/2*ktilde^2 - a*p/(r-p)*mtilde/(r-2p)!", cond):
                return out("Q2P_ZERO_T11_3", UNDETERMINED, p0=p)
            return out("Q2P_ZERO_T11_3", YES, sig0=(p, q))
        par = a - s * d * kt * (a * a - b * b)
        if r > 3 * p:
            if ev.is_zero("a -+ d*ktilde*(a^2-b^2)", par):
                return out("Q2P_ZERO_T12_1", UNDETERMINED, p0=p)
            return out("Q2P_ZERO_T12_1", YES, sig0=(p, q))
        if r == 3 * p:
            cond = kt * kt / 2 * par - b * V
            if ev.is_zero("ktilde^2/2*(a -+ d*ktilde*(a^2-b^2)) - p*b/(r-p)*mtilde/(r-2p)!", cond):
                return out("Q2P_ZERO_T12_2", UNDETERMINED, p0=p)
            # coefficient of h^(2p) in the offset's signature determinant, derived
            # directly from the expansion; reported, not used for the verdict
            e = s * d
            det = kt / 2 * (1 - 2 * e * a * kt + e * e * kt * kt) - e * b * V
            flags = ()
            if (det == 0) if ev.exact else abs(det) <= ev.tol:
                flags = (f"direct h^(2p) determinant vanishes ({det}); q0 > 2p is possible",)
            return out("Q2P_ZERO_T12_2", YES, p0=p, flags=flags)
        return out("Q2P_ZERO_T12_3", _verdict(_same_parity(r, p)), p0=p)

    # q - 2p < 0 and q even from here on
    qp = q - p
    A2 = 2 * qp
    if xi_zero:
        if p != A2:
            flags = ()
            if p < A2:
                flags = ("literal reading: preservation stated although q0 = p would change parity",)
            return out("Q2P_NEG_T13_1", YES, p0=qp, flags=flags)
        c1 = 1 + s * d * b * ut * ut / 2
        c2 = s * b + ut * ut * d / 2
        z1 = ev.is_zero("1 +- d*b*utilde^2/2", c1)
        z2 = ev.is_zero("+-b + utilde^2*d/2", c2)
        if not z1 and z2:
            return out("Q2P_NEG_T13_2", YES, p0=qp)
        return out("Q2P_NEG_T13_2", UNDETERMINED, p0=qp)

    B = r - p
    even_q = q % 2 == 0
    if A2 < B:
        if p < A2:
            return out("Q2P_NEG_T14_1a", _verdict(p % 2 == 0 and even_q), p0=qp)
        return out("Q2P_NEG_T14_1b", _verdict(even_q), p0=qp)
    if A2 == B:
        if p < A2:
            return out("Q2P_NEG_T14_2a", _verdict(p % 2 == 0 and even_q), p0=qp)
        if p > A2:
            c1 = b * V - a / 2 * ut * ut
            c2 = (b * b - a * a) / 2 * ut * ut - a * b * V
            z1 = ev.is_zero("b*p/(r-p)*vtilde/(r-2p)! - a/2*utilde^2", c1)
            if z1:
                return out("Q2P_NEG_T14_2b2", _verdict(even_q), p0=qp)
            z2 = ev.is_zero("(b^2-a^2)/2*utilde^2 - a*b*p/(r-p)*vtilde/(r-2p)!", c2)
            if not z2:
                return out("Q2P_NEG_T14_2b1", _verdict(even_q), p0=qp)
            return out("Q2P_NEG_T14_2b", UNDETERMINED, p0=qp)
        c1 = 1 + s * d * b * ut * ut / 2 - s * d * a * V
        z1 = ev.is_zero("1 +- d*b*utilde^2/2 -+ d*a*p/(r-p)*vtilde/(r-2p)!", c1)
        if z1:
            return out("Q2P_NEG_T14_2c2", _verdict(even_q), p0=qp)
        c2 = s * b * ut + d / 2 * (a * a - b * b) * ut * ut - 2 * d * a * b * V
        z2 = ev.is_zero("+-b*utilde + d/2*(a^2-b^2)*utilde^2 - 2*d*a*b*p/(r-p)*vtilde/(r-2p)!", c2)
        if not z2:
            return out("Q2P_NEG_T14_2c1", _verdict(even_q), p0=qp)
        return out("Q2P_NEG_T14_2c", UNDETERMINED, p0=qp)
    # A2 > B
    if p < B:
        return out("Q2P_NEG_T14_3a", _verdict(p % 2 == 0 and even_q), p0=qp)
    if p == B:
        c1 = 1 - s * d * a * V
        z1 = ev.is_zero("1 -+ d*a*p/(r-p)*vtilde/(r-2p)!", c1)
        if z1:
            return out("Q2P_NEG_T14_3c", _verdict(even_q and _same_parity(r, p)), p0=qp)
        c2 = (d * a * ut + s) * V
        if not ev.is_zero("(d*a*utilde +- 1)*p/(r-p)*vtilde/(r-2p)!", c2):
            return out("Q2P_NEG_T14_3c", _verdict(even_q and _same_parity(r, p)), p0=qp)
        return out("Q2P_NEG_T14_3c", UNDETERMINED, p0=qp)
    if ev.is_zero("cos(theta)", a):
        return out("Q2P_NEG_T14_3b", UNDETERMINED, p0=qp)
    return out("Q2P_NEG_T14_3b", _verdict(even_q and _same_parity(r, p)), p0=qp,
               flags=("routed to 3b because p > r - p",))


def classical_reference(sig: Signature, coeffs: CurvatureData, d, branch: int = 1) -> Prediction:
    """Verdict of the classical-offset summary, for side-by-side reports."""
    p, q = sig.p, sig.q
    conds = []
    if p == 1:
        k = coeffs.k if coeffs.k is not None else 0
        dk = -branch * d * k
        val = 1 + dk
        zero = val == 0 if isinstance(val, (int, Fraction)) else abs(val) <= 1e-12
        conds.append(Condition("1 + d*k (Frenet-signed d)", val, zero))
        if zero:
            return Prediction("CLASSICAL_REG_SINGULAR", UNDETERMINED,
                              conditions=tuple(conds), branch=branch,
                              flags=("k = -1/d: the offset place is singular; cusps may arise",))
        return Prediction("CLASSICAL_REG", YES, predicted_shape=local_shape(sig),
                          predicted_p0=1, conditions=tuple(conds), branch=branch)
    if q - p == 1:
        return Prediction("CLASSICAL_SMOOTHED", NO, predicted_p0=1, branch=branch)
    if q - 2 * p > 0:
        return Prediction("CLASSICAL_Q2P_POS", YES, predicted_shape=local_shape(sig), branch=branch)
    if q == 2 * p:
        kt = abs(coeffs.ktilde)
        val = kt * abs(d) - 1
        zero = val == 0 if isinstance(val, (int, Fraction)) else abs(val) <= 1e-12
        conds.append(Condition("|ktilde|*|d| - 1", val, zero))
        if zero:
            return Prediction("CLASSICAL_Q2P_ZERO", UNDETERMINED, conditions=tuple(conds), branch=branch)
        return Prediction("CLASSICAL_Q2P_ZERO", YES, predicted_shape=local_shape(sig),
                          conditions=tuple(conds), branch=branch)
    return Prediction("CLASSICAL_Q2P_NEG", _verdict(q % 2 == 0), branch=branch)


_SUMMARY_ROWS = {
    "regular": [
        ("singular offset places", "generated when k = -1/d; cusps may arise",
         "never generated; cusps do not arise"),
        ("flex points", "preserved", "never preserved"),
        ("turning points", "preserved", "not preserved in general"),
        ("tangents", "preserved (parallel)", "not preserved"),
    ],
    "singular": [
        ("smoothing", "iff q-p=1", "iff q-p=1"),
        ("singular flex points", "preserved when q-2p>0", "never preserved"),
        ("q-2p>0", "preserved", "preserved iff p even"),
        ("q-2p=0", "if |k| != 1/d, preserved", "depends on d*a*ktilde and higher terms"),
        ("q-2p<0", "preserved iff q is even", "many subcases"),
    ],
}


def comparison_table(sig: Signature, coeffs: CurvatureData, d, thetas) -> dict:
    """Per-angle predictions (both sheets) next to the classical reference.

    ``thetas`` holds floats (radians) or exact ``(a, b)`` pairs.
    """
    rows = []
    for th in thetas:
        if isinstance(th, tuple):
            op = OffsetParams(d, th[0], th[1])
            label = f"({th[0]},{th[1]})"
        else:
            op = OffsetParams.from_theta(d, th)
            label = repr(float(th))
        for sheet in op.sheets():
            pred = predict(sig, coeffs, sheet)
            classical = classical_reference(sig, coeffs, d, sheet.branch)
            rows.append({
                "theta": label,
                "branch": sheet.sign_label,
                "generalized": pred.to_json(),
                "classical": classical.to_json(),
            })
    kind = "regular" if sig.p == 1 else "singular"
    summary = [
        {"property": name, "classical": cl, "non_classical": nc}
        for name, cl, nc in _SUMMARY_ROWS[kind]
    ]
    return {"signature": sig.to_json(), "kind": kind, "rows": rows, "summary": summary}

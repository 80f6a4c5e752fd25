"""Independent checks of the predictor: series classification and sampling.

Three sources are reconciled for every offset sheet:

* ``predictor``: the case analysis in :mod:`offsetshape.predictor`;
* ``series``: signature of the offset place computed by :func:`offset_series`;
* ``numeric``: log-log slopes of a sampled point cloud (:func:`numeric_shape`).

Only the first two must agree whenever the predictor is decisive; the numeric
route may abstain and only raises warnings.
"""

from __future__ import annotations

import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

import mpmath
import numpy as np

from .offset import OffsetParams, curvature_data, offset_points, offset_series
from .predictor import (
    BORDERLINE, NO, UNDETERMINED, YES, NeedsDeeperTruncation, Prediction, predict,
)
from .series import TruncSeries
from .shape import (
    LocalShape, Place, Signature, SignatureUndetermined, local_shape, place_from_terms,
    signature, signature_pq,
)

REGULAR = "regular"
UNDECIDED = "undetermined"


class TooFewSamples(ValueError):
    pass


@dataclass(frozen=True)
class PointCloud:
    """Ordered samples ``(h, x, y)`` of one branch.

    ``center`` is the point at ``h = 0`` when it is known (the sampler cannot
    evaluate a singular offset center directly).  ``sampler`` optionally maps
    an array of parameters to an ``(n, 2)`` array and enables refinement.
    """

    branch_id: str
    samples: np.ndarray
    center: Optional[tuple] = None
    params: Optional[dict] = None
    sampler: Optional[Callable] = None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError("samples must be an (n, 3) array of (h, x, y)")
        if np.any(np.diff(arr[:, 0]) <= 0):
            raise ValueError("h must be strictly increasing")
        object.__setattr__(self, "samples", arr)

    @property
    def h(self):
        return self.samples[:, 0]

    @property
    def xy(self):
        return self.samples[:, 1:]


@dataclass(frozen=True)
class Verdict:
    source: str
    shape: object  # LocalShape, "regular" or "undetermined"
    signature: Optional[tuple] = None
    preserved: Optional[str] = None
    notes: tuple = ()

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "shape": str(self.shape),
            "signature": list(self.signature) if self.signature else None,
            "preserved": self.preserved,
            "notes": list(self.notes),
        }


# -- numeric shape ---------------------------------------------------------------


def geometric_grid(h_max: float = 0.5, levels: int = 56, ratio: float = 2 ** -0.25) -> np.ndarray:
    """Symmetric parameters ``±h_max * ratio^j`` (no ``h = 0``), increasing."""
    pos = h_max * ratio ** np.arange(levels)
    return np.concatenate([-pos, pos[::-1]])


def _fit(lx, ly):
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), r2


def _side_orders(h, D, noise, window, r2_min, min_points=6, keep=12):
    """Estimated ``(p, q)`` on one half-line, or ``None``.

    ``p`` is the slope of ``log|D(h)|``; ``p + q`` the slope of
    ``log|D(h) x D(h/2)|``, which is insensitive to the unknown tangent.
    ``noise[i]`` bounds the rounding error of ``D[i]``; values within a safety
    factor of it are dropped.  Fits whose successive local slopes wander
    from the rounded integer are rejected as contaminated by higher orders.
    """
    idx = {round(math.log2(abs(v)), 9): i for i, v in enumerate(h)}
    pts, crs = [], []
    for i, v in enumerate(h):
        if not window[0] <= abs(v) <= window[1]:
            continue
        n1 = float(np.hypot(*D[i]))
        if n1 <= 1e4 * noise[i]:
            continue
        pts.append((math.log(abs(v)), math.log(n1)))
        j = idx.get(round(math.log2(abs(v)) - 1, 9))
        if j is None:
            continue
        n2 = float(np.hypot(*D[j]))
        cr = abs(D[i][0] * D[j][1] - D[i][1] * D[j][0])
        if n2 > 1e4 * noise[j] and cr > 1e4 * (noise[i] * n2 + noise[j] * n1):
            crs.append((math.log(abs(v)), math.log(cr)))
    # the smallest usable parameters carry the cleanest leading behaviour
    p = _slope(sorted(pts)[:keep], r2_min, min_points)
    if p is None or p < 1:
        return None
    pq = _slope(sorted(crs)[:keep], r2_min, min_points)
    if pq is None or pq - p <= p:
        return p, None
    return p, pq - p


def _slope(data, r2_min, min_points):
    if len(data) < min_points:
        return None
    lx = np.array([a for a, _ in data])
    ly = np.array([b for _, b in data])
    slope, r2 = _fit(lx, ly)
    k = round(slope)
    local = np.diff(ly) / np.diff(lx)
    if r2 < r2_min or np.max(np.abs(local - k)) > 0.25:
        return None
    return k


def _noise(cloud: "PointCloud"):
    """Per-sample rounding bound of ``sample - center``."""
    eps = float(np.finfo(float).eps)
    c = np.hypot(*np.asarray(cloud.center, dtype=float))
    return eps * (c + np.hypot(cloud.xy[:, 0], cloud.xy[:, 1]))


def _estimates(cloud, window, r2_min):
    h = cloud.h
    D = cloud.xy - np.asarray(cloud.center, dtype=float)
    nz = _noise(cloud)
    return {
        side: _side_orders(h[(h * side) > 0], D[(h * side) > 0], nz[(h * side) > 0],
                           window, r2_min)
        for side in (1, -1)
    }


def numeric_shape(cloud: PointCloud, window=(1e-4, 0.6), r2_min: float = 0.999):
    """Local shape of a sampled branch at ``h = 0``.

    Returns a :class:`LocalShape`, ``"regular"`` (first order is 1 on both
    sides but the second order could not be fitted) or ``"undetermined"``.
    The cloud should be sampled on a geometric grid (see
    :func:`geometric_grid`) so that each ``h`` has a partner ``h/2``.
    """
    h = cloud.h
    if len(h) < 64 or not (np.any(h < 0) and np.any(h > 0)):
        raise TooFewSamples("need at least 64 samples on both sides of h = 0")
    if cloud.center is None:
        zero = np.nonzero(h == 0.0)[0]
        if not len(zero):
            return UNDECIDED
        cloud = replace(cloud, center=tuple(cloud.xy[zero[0]]))
    est = _estimates(cloud, window, r2_min)
    if est[1] is None or est[-1] is None or est[1][0] != est[-1][0]:
        return UNDECIDED
    if est[1][1] is None or est[-1][1] is None or est[1] != est[-1]:
        return REGULAR if est[1][0] == 1 else UNDECIDED
    return local_shape(est[1])


def numeric_signature(cloud: PointCloud, window=(1e-4, 0.6), r2_min: float = 0.999):
    """The side-consistent ``(p, q)`` estimate, or ``None``."""
    est = _estimates(cloud, window, r2_min)
    if est[1] is None or est[1] != est[-1] or est[1][1] is None:
        return None
    return est[1]


def offset_displacements(pl: Place, op: OffsetParams, hs, dps: int = 60) -> np.ndarray:
    """Pointwise offset minus its center, evaluated with ``dps`` digits.

    Same construction as :func:`offset_points` (normal rotated by ``A``,
    sheet-following sign for ``h < 0``), but the difference to the center is
    formed before rounding to floats, so tiny displacements keep their
    leading digits.  Returns an ``(n, 3)`` array of ``(h, dx, dy)`` in the
    global orientation.
    """
    p, _ = signature_pq(pl.x, pl.y, pl.complete)
    with mpmath.workdps(dps):
        def mpf(c):
            c = Fraction(c) if not isinstance(c, float) else c
            if isinstance(c, Fraction):
                return mpmath.mpf(c.numerator) / c.denominator
            return mpmath.mpf(c)

        xs = [mpf(c) for c in pl.x.coeffs]
        ys = [mpf(c) for c in pl.y.coeffs]
        s, d, a, b = op.branch, mpf(op.d), mpf(op.a), mpf(op.b)
        fc, fs = mpf(pl.frame[0]), mpf(pl.frame[1])
        tn = mpmath.sqrt(xs[p] ** 2 + ys[p] ** 2)
        n0 = (-ys[p] / tn, xs[p] / tn)
        rows = []
        for hv in hs:
            t = mpf(float(hv))
            x = mpmath.polyval(xs[::-1], t) - xs[0]
            y = mpmath.polyval(ys[::-1], t) - ys[0]
            xd = mpmath.polyval([k * c for k, c in enumerate(xs)][1:][::-1], t)
            yd = mpmath.polyval([k * c for k, c in enumerate(ys)][1:][::-1], t)
            nrm = mpmath.sqrt(xd * xd + yd * yd)
            flip = (-1) ** (p - 1) if t < 0 else 1
            mx, my = -yd / nrm * flip - n0[0], xd / nrm * flip - n0[1]
            u = x + s * d * (a * mx - b * my)
            v = y + s * d * (b * mx + a * my)
            rows.append((float(hv), float(fc * u - fs * v), float(fs * u + fc * v)))
    return np.array(rows)


# -- cusps -------------------------------------------------------------------------


def _chords(xy, shrink: float = 0.1):
    """Unit chord directions, dropping chords much shorter than both neighbours.

    Such chords straddle a skipped or degenerate sample (for instance the
    center of a thorn, where the two halves nearly overlap) and carry no
    direction information.  Returns ``(index, direction)`` pairs.
    """
    t = np.diff(xy, axis=0)
    n = np.hypot(t[:, 0], t[:, 1])
    keep = []
    for i in range(len(n)):
        left = n[i - 1] if i > 0 else np.inf
        right = n[i + 1] if i + 1 < len(n) else np.inf
        if n[i] == 0.0 or n[i] < shrink * min(left, right):
            continue
        keep.append(i)
    return [(i, t[i] / n[i]) for i in keep]


def cusp_locations(cloud: PointCloud, refine: int = 40) -> list[float]:
    """Parameters where the discrete tangent direction reverses.

    A reversal is a negative dot product between consecutive chord
    directions.  With a ``sampler`` the bracketing interval is bisected on
    the sign of the velocity projected on the incoming direction.
    """
    h = cloud.h
    if len(h) < 3:
        raise TooFewSamples("need at least 3 samples")
    chords = _chords(cloud.xy)
    out = []
    for (i, ti), (j, tj) in zip(chords, chords[1:]):
        if float(np.dot(ti, tj)) >= 0.0:
            continue
        lo, hi = float(h[i]), float(h[j + 1])
        if cloud.sampler is not None:
            eps = 1e-7 * max(1.0, hi - lo)

            def along(v, ref=ti):
                pts = cloud.sampler(np.array([v - eps, v + eps]))
                if len(pts) < 2:
                    return 0.0
                return float(np.dot(pts[1] - pts[0], ref))

            for _ in range(refine):
                mid = 0.5 * (lo + hi)
                if along(mid) > 0:
                    lo = mid
                else:
                    hi = mid
        out.append(0.5 * (lo + hi))
    return out


def count_cusps(cloud: PointCloud) -> int:
    return len(cusp_locations(cloud))


# -- cross check -------------------------------------------------------------------


@dataclass(frozen=True)
class CheckConfig:
    h_max: float = 0.5
    levels: int = 56
    numeric: bool = True
    trunc_cap: int = 64


@dataclass
class BranchReport:
    branch: int
    prediction: Prediction
    series: Verdict
    numeric: Optional[Verdict]
    agreement: dict

    def to_json(self) -> dict:
        return {
            "branch": "+" if self.branch == 1 else "-",
            "prediction": self.prediction.to_json(),
            "series": self.series.to_json(),
            "numeric": self.numeric.to_json() if self.numeric else None,
            "agreement": self.agreement,
        }


def extend_trunc(pl: Place, trunc: int) -> Place:
    """Pad a polynomial (complete) place to a larger truncation order."""
    if not pl.complete:
        raise ValueError("only complete places can be extended")

    def pad(s: TruncSeries):
        zero = 0 if not s.exact else Fraction(0)
        return TruncSeries(s.coeffs + (zero,) * (trunc - s.trunc), s.exact, s.tol)

    return replace(pl, x=pad(pl.x), y=pad(pl.y))


def series_signature(pl: Place, op: OffsetParams, cap: int = 64) -> tuple[tuple, object]:
    """Offset signature from the series, deepening complete places on demand."""
    while True:
        off = offset_series(pl, op)
        try:
            return signature_pq(off.X, off.Y), off
        except SignatureUndetermined:
            if not pl.complete or pl.trunc >= cap:
                raise
            pl = extend_trunc(pl, min(cap, 2 * pl.trunc))


def sample_offset(pl: Place, op: OffsetParams, cfg: CheckConfig = CheckConfig()) -> PointCloud:
    """Displacement cloud of one offset sheet around its center."""
    hs = geometric_grid(cfg.h_max, cfg.levels)
    pts = offset_displacements(pl, op, hs)

    def sampler(v):
        return offset_points(pl, op, v, h_max=max(cfg.h_max, float(np.max(np.abs(v)))))[0][:, 1:]

    return PointCloud(f"gen{op.sign_label}", pts, center=(0.0, 0.0), params=op.to_json(),
                      sampler=sampler)


def _shape_of(sig):
    return local_shape(sig)


def cross_check(pl: Place, op: OffsetParams, cfg: CheckConfig = CheckConfig()) -> list[BranchReport]:
    """Predictor, series and numeric verdicts for both offset sheets."""
    sig = signature(pl)
    src_shape = local_shape(sig)
    cd = curvature_data(pl, sig)
    reports = []
    for sheet in op.sheets():
        pred = predict(sig, cd, sheet)
        sig0, _ = series_signature(pl, sheet, cfg.trunc_cap)
        shape0 = _shape_of(sig0)
        series = Verdict("series", shape0, sig0, YES if shape0 == src_shape else NO)
        numeric = None
        if cfg.numeric:
            cloud = sample_offset(pl, sheet, cfg)
            nshape = numeric_shape(cloud)
            numeric = Verdict("numeric", nshape, numeric_signature(cloud))
        reports.append(BranchReport(sheet.branch, pred, series, numeric,
                                    _agreement(pred, series, numeric)))
    return reports


def _agreement(pred: Prediction, series: Verdict, numeric: Optional[Verdict]) -> dict:
    out = {}
    if pred.decisive:
        ok = pred.preserved == series.preserved
        if pred.predicted_sig is not None:
            ok = ok and tuple(pred.predicted_sig) == tuple(series.signature)
        if pred.predicted_p0 is not None:
            ok = ok and pred.predicted_p0 == series.signature[0]
        out["predictor_series"] = "agree" if ok else "disagree"
    else:
        out["predictor_series"] = "abstain"
    if numeric is None or numeric.shape == UNDECIDED:
        out["numeric_series"] = "abstain"
    elif numeric.shape == REGULAR:
        out["numeric_series"] = "agree" if series.signature[0] == 1 else "disagree"
    else:
        out["numeric_series"] = "agree" if numeric.shape == series.shape else "disagree"
    return out


# -- random suite ------------------------------------------------------------------

PYTHAGOREAN = [
    (Fraction(3, 5), Fraction(4, 5)),
    (Fraction(4, 5), Fraction(3, 5)),
    (Fraction(5, 13), Fraction(12, 13)),
    (Fraction(12, 13), Fraction(5, 13)),
    (Fraction(8, 17), Fraction(15, 17)),
    (Fraction(15, 17), Fraction(8, 17)),
    (Fraction(7, 25), Fraction(24, 25)),
]
DISTANCES = [Fraction(1), Fraction(1, 2), Fraction(2), Fraction(5, 6), Fraction(3, 2),
             Fraction(1, 3), Fraction(5, 4)]
COEFFS = [Fraction(n, m) for n in (1, 2, 3, 5) for m in (1, 2, 3)]


@dataclass(frozen=True)
class SuiteBounds:
    p_max: int = 4
    q_max: int = 9
    r_max: int = 12
    force_flex: bool = False
    force_smoothing: bool = False
    force_regular: bool = False
    force_q2p_pos: bool = False
    tail_prob: float = 0.4
    xi_zero_prob: float = 0.2

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class SuiteItem:
    index: int
    xterms: dict
    yterms: dict
    params: OffsetParams

    @property
    def place(self) -> Place:
        deg = max(self.yterms)
        return place_from_terms(self.xterms, self.yterms, trunc=3 * deg + 10)

    def describe(self) -> str:
        def fmt(t):
            return " + ".join(f"({c})*h^{k}" for k, c in sorted(t.items()))

        return f"{fmt(self.xterms)}, {fmt(self.yterms)}"

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "place": self.describe(),
            "d": str(self.params.d),
            "cosab": [str(self.params.a), str(self.params.b)],
        }


def _rand_coeff(rng: random.Random) -> Fraction:
    return rng.choice(COEFFS) * rng.choice((1, -1))


def _pick_pq(rng: random.Random, bd: SuiteBounds):
    while True:
        if bd.force_regular:
            p = 1
        elif bd.force_smoothing:
            p = rng.randint(2, bd.p_max)
        else:
            p = rng.randint(1, bd.p_max)
        if bd.force_smoothing:
            q = p + 1
        elif bd.force_q2p_pos:
            if 2 * p + 1 > bd.q_max:
                continue
            q = rng.randint(2 * p + 1, bd.q_max)
        elif 2 * p <= bd.q_max and p > 1 and rng.random() < 0.35:
            q = 2 * p
        else:
            if p + 1 > bd.q_max:
                continue
            q = rng.randint(p + 1, bd.q_max)
        if bd.force_flex and (p % 2 == 0 or q % 2 == 0):
            continue
        return p, q


def random_item(rng: random.Random, index: int, bd: SuiteBounds) -> SuiteItem:
    """A random primitive standard place with rational offset parameters."""
    while True:
        p, q = _pick_pq(rng, bd)
        a, b = rng.choice(PYTHAGOREAN)
        a, b = a * rng.choice((1, -1)), b * rng.choice((1, -1))
        d = rng.choice(DISTANCES)
        op = OffsetParams(d, a, b)
        beta = _rand_coeff(rng)
        if q == 2 * p and rng.random() < 0.35:
            beta = rng.choice((1, -1)) / (2 * d * a)  # tangent case 1 -+ d*a*ktilde = 0
        yterms = {q: beta}
        exps = [p, q]
        if rng.random() >= bd.xi_zero_prob and q + 1 <= bd.r_max:
            if q == 2 * p and 3 * p <= bd.r_max and rng.random() < 0.4:
                r = 3 * p
            else:
                r = rng.randint(q + 1, bd.r_max)
            yterms[r] = _rand_coeff(rng)
            exps.append(r)
            if rng.random() < bd.tail_prob and r + 1 <= bd.r_max + 2:
                t = rng.randint(r + 1, bd.r_max + 2)
                yterms[t] = _rand_coeff(rng)
                exps.append(t)
        if math.gcd(*exps) != 1:
            continue
        return SuiteItem(index, {p: Fraction(1)}, yterms, op)


def generate_suite(seed: int, n: int, bounds: SuiteBounds = SuiteBounds()) -> list[SuiteItem]:
    rng = random.Random(seed)
    return [random_item(rng, i, bounds) for i in range(n)]


def _blank():
    return {"hits": 0, "pass": 0, "fail": 0, "undetermined": 0, "borderline": 0}


def random_suite(seed: int, n: int, bounds: SuiteBounds = SuiteBounds(),
                 numeric: bool = False) -> dict:
    """Run :func:`cross_check` on ``n`` random exact-mode places.

    The report aggregates, per predictor clause, how often the clause fired
    and how its decisive verdicts compared with the series oracle.
    """
    cfg = CheckConfig(numeric=numeric)
    per_case: dict = defaultdict(_blank)
    failures = []
    numeric_counts: Counter = Counter()
    smoothing_exceptions = []
    flex_preserved = 0
    deeper = 0
    offsets_regular = 0
    for item in generate_suite(seed, n, bounds):
        pl = item.place
        sig = signature(pl)
        try:
            reports = cross_check(pl, item.params, cfg)
        except NeedsDeeperTruncation:
            deeper += 1
            continue
        for rep in reports:
            pred = rep.prediction
            row = per_case[pred.case_id]
            row["hits"] += 1
            if pred.preserved == BORDERLINE:
                row["borderline"] += 1
            elif pred.preserved == UNDETERMINED:
                row["undetermined"] += 1
            elif rep.agreement["predictor_series"] == "agree":
                row["pass"] += 1
            else:
                row["fail"] += 1
                failures.append({
                    "case": pred.case_id,
                    "branch": "+" if rep.branch == 1 else "-",
                    "predicted": pred.to_json(),
                    "series_signature": list(rep.series.signature),
                    "item": item.to_json(),
                    "reproduce": _repro(item, rep.branch),
                })
            regular0 = rep.series.signature[0] == 1
            offsets_regular += regular0
            if sig.p > 1 and regular0 != (sig.q - sig.p == 1):
                smoothing_exceptions.append(item.to_json())
            if sig.shape is LocalShape.FLEX and pred.preserved == YES:
                flex_preserved += 1
            numeric_counts[rep.agreement["numeric_series"]] += 1
    return {
        "seed": seed,
        "n": n,
        "bounds": bounds.to_json(),
        "cases": {k: per_case[k] for k in sorted(per_case)},
        "decisive_disagreements": len(failures),
        "failures": failures,
        "needs_deeper_truncation": deeper,
        "smoothing_exceptions": smoothing_exceptions,
        "flex_preserved": flex_preserved,
        "offset_sheets_regular": offsets_regular,
        "numeric": dict(sorted(numeric_counts.items())) if numeric else None,
    }


def _repro(item: SuiteItem, branch: int) -> str:
    sheet = "+" if branch == 1 else "-"
    return (
        f'offsetshape analyze --place "{item.describe()}" --d={item.params.d} '
        f"--cosab={item.params.a},{item.params.b} --branches {sheet}"
    )

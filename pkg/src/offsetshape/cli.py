"""Command-line front end: ``analyze``, ``plot`` and ``verify``.

Exit codes: 0 success, 1 input/parse error, 2 geometric error (point not on
the curve, no usable place), 3 truncation cap reached, 4 disagreement
between the predictor and the series oracle.

Settings come from flags, then the ``OFFSETSHAPE_TOL`` environment variable
(tolerance only), then a ``--config`` JSON file, then defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .offset import (
    CurvatureUnbounded, OffsetParams, curvature_data, frenet_distance, offset_points,
)
from .places import PointNotOnCurve, TruncationTooSmall, places_at
from .poly import InvalidCurve, PolySyntaxError, parse_poly, parse_univariate
from .predictor import NeedsDeeperTruncation, predict
from .series import DEFAULT_TOL
from .shape import (
    NotApplicable, SignatureUndetermined, local_shape, place_from_terms, signature,
    standardize,
)
from .verifier import (
    PointCloud, SuiteBounds, count_cusps, random_suite, series_signature,
)

EXIT_PARSE, EXIT_GEOMETRY, EXIT_TRUNC, EXIT_DISAGREE = 1, 2, 3, 4
CONVENTION = ("offset sheet s: (X, Y) = (x, y) + s*d*A*(-y', x')/|P'| with "
              "A = [[a, -b], [b, a]]; the upper sign of +-/-+ is s = +1")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class SessionConfig:
    """Everything a run depends on; serializable to and from JSON."""

    curve: Optional[str] = None
    place: Optional[str] = None
    point: str = "0,0"
    d: str = "1"
    theta: Optional[float] = None
    cosab: Optional[str] = None
    branches: str = "both"
    trunc: Optional[int] = None
    trunc_cap: int = 64
    tol: float = DEFAULT_TOL
    h_max: float = 0.5
    samples: int = 401
    csv: Optional[str] = None
    svg: Optional[str] = None
    output: Optional[str] = None
    seed: int = 1
    n: int = 200
    force_flex: bool = False
    force_smoothing: bool = False
    numeric: bool = False

    def validate(self, need_curve: bool = True) -> "SessionConfig":
        if need_curve and (self.curve is None) == (self.place is None):
            raise CliError(EXIT_PARSE, "give exactly one of --curve and --place")
        if need_curve and (self.theta is None) == (self.cosab is None):
            raise CliError(EXIT_PARSE, "give exactly one of --theta and --cosab")
        if self.branches not in ("both", "+", "-"):
            raise CliError(EXIT_PARSE, "--branches must be one of both, +, -")
        if self.samples < 3:
            raise CliError(EXIT_PARSE, "--samples must be at least 3")
        return self

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "SessionConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise CliError(EXIT_PARSE, f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


# -- input handling ----------------------------------------------------------------


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(EXIT_PARSE, f"not a rational number: {text!r}") from exc


def _pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise CliError(EXIT_PARSE, f"expected a pair 'u,v', got {text!r}")
    return tuple(_rational(t) for t in parts)


def params_from(cfg: SessionConfig) -> OffsetParams:
    try:
        if cfg.cosab is not None:
            a, b = _pair(cfg.cosab)
            return OffsetParams(_rational(cfg.d), a, b, tol=cfg.tol)
        return OffsetParams(float(_rational(cfg.d)), math.cos(cfg.theta),
                            math.sin(cfg.theta), tol=cfg.tol)
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc


def parse_place(text: str):
    """``"h^2, h^4+h^9"`` into a polynomial place (standardized if needed)."""
    parts = text.split(",")
    if len(parts) != 2:
        raise CliError(EXIT_PARSE, "a place is two polynomials in h separated by a comma")
    xt, yt = (parse_univariate(t) for t in parts)
    pl = place_from_terms(xt, yt, exact=True)
    return pl if pl.standard else standardize(pl)


def _places(cfg: SessionConfig, trunc: Optional[int]):
    if cfg.place is not None:
        return [parse_place(cfg.place)], []
    f = parse_poly(cfg.curve)
    bs = places_at(f, _pair(cfg.point), trunc=trunc, tol=cfg.tol)
    return bs.places, bs.diagnostics


def _analyze_place(pl, op: OffsetParams, cfg: SessionConfig, at_cap: bool):
    sig = signature(pl)
    if at_cap and sig.r is None:
        sig = replace(sig, r_final=True)
    cd = curvature_data(pl, sig)
    sheets = [s for s in op.sheets() if cfg.branches in ("both", s.sign_label)]
    rows = []
    disagree = False
    for sheet in sheets:
        pred = predict(sig, cd, sheet)
        row = {"branch": sheet.sign_label, "prediction": pred.to_json()}
        if not op.classical:
            sig0, off = series_signature(pl, sheet, cfg.trunc_cap)
            shape0 = local_shape(sig0)
            row["series"] = {
                "signature": list(sig0),
                "shape": shape0.value,
                "preserved": "yes" if shape0 == sig.shape else "no",
                "center": [str(c) for c in off.global_center()],
            }
            if pred.decisive:
                ok = pred.preserved == row["series"]["preserved"]
                if pred.predicted_sig is not None:
                    ok = ok and list(pred.predicted_sig) == list(sig0)
                if pred.predicted_p0 is not None:
                    ok = ok and pred.predicted_p0 == sig0[0]
                row["agreement"] = "agree" if ok else "disagree"
                disagree = disagree or not ok
            else:
                row["agreement"] = "abstain"
        rows.append(row)
    report = {
        "place": pl.to_json(),
        "signature": sig.to_json(),
        "curvature": cd.to_json(),
        "sheets": rows,
    }
    if at_cap and sig.r is None and not pl.complete:
        report["note"] = f"no term beyond h^{sig.q} up to the truncation cap; treated as absent"
    if op.classical and sig.p == 1:
        report["classical_cusp_points"] = classical_cusp_points(pl, op, cfg)
    return report, disagree


def _curvature(pl, h):
    """Signed curvature of a sampled place at the float parameter ``h``."""
    xs = np.array([float(c) for c in pl.x.coeffs])
    ys = np.array([float(c) for c in pl.y.coeffs])
    d1x, d1y = np.polynomial.polynomial.polyder(xs), np.polynomial.polynomial.polyder(ys)
    d2x, d2y = np.polynomial.polynomial.polyder(d1x), np.polynomial.polynomial.polyder(d1y)
    ev = np.polynomial.polynomial.polyval
    xd, yd, xdd, ydd = ev(h, d1x), ev(h, d1y), ev(h, d2x), ev(h, d2y)
    return (xd * ydd - xdd * yd) / (xd * xd + yd * yd) ** 1.5


def classical_cusp_points(pl, op: OffsetParams, cfg: SessionConfig) -> list:
    """Parameters with ``1 + d_s k(h) = 0``: candidate cusps of classical offsets."""
    grid = np.linspace(-cfg.h_max, cfg.h_max, 4 * cfg.samples + 1)
    out = []
    for sheet in op.sheets():
        if cfg.branches not in ("both", sheet.sign_label):
            continue
        de = float(frenet_distance(sheet))
        g = 1.0 + de * _curvature(pl, grid)
        for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
            h = brentq(lambda t: 1.0 + de * _curvature(pl, t), grid[i], grid[i + 1], xtol=1e-14)
            x, y = pl.evaluate(h)
            out.append({"branch": sheet.sign_label, "h": _fmt(h), "point": [_fmt(x), _fmt(y)]})
    return out


def _fmt(v: float) -> str:
    return format(float(v), ".10g")


def cmd_analyze(cfg: SessionConfig) -> tuple[dict, int]:
    op = params_from(cfg)
    trunc = cfg.trunc
    while True:
        places, diag = _places(cfg, trunc)
        if not places:
            raise CliError(EXIT_GEOMETRY, "; ".join(diag) or "no real place at the point")
        cur = places[0].trunc
        at_cap = cfg.place is not None or cur >= cfg.trunc_cap
        try:
            results = [_analyze_place(pl, op, cfg, at_cap) for pl in places]
            break
        except (NeedsDeeperTruncation, SignatureUndetermined) as exc:
            if at_cap:
                raise CliError(EXIT_TRUNC, f"truncation cap {cfg.trunc_cap} reached: {exc}")
            trunc = min(cfg.trunc_cap, 2 * cur)
    report = {
        "input": {
            "curve": cfg.curve,
            "place": cfg.place,
            "point": cfg.point if cfg.curve is not None else None,
            "params": op.to_json(),
        },
        "convention": CONVENTION,
        "diagnostics": diag,
        "places": [r for r, _ in results],
    }
    code = EXIT_DISAGREE if any(bad for _, bad in results) else 0
    return report, code


# -- plotting ----------------------------------------------------------------------


def _branch_ids(count: int, i: int):
    suffix = "" if count == 1 else f".{i}"
    return f"src{suffix}", f"gen+{suffix}", f"gen-{suffix}"


def plot_rows(cfg: SessionConfig):
    op = params_from(cfg)
    places, _ = _places(cfg, cfg.trunc)
    if not places:
        raise CliError(EXIT_GEOMETRY, "no real place at the point")
    hs = np.linspace(-cfg.h_max, cfg.h_max, cfg.samples)
    series = {}
    for i, pl in enumerate(places):
        src, gp, gm = _branch_ids(len(places), i)
        x, y = pl.evaluate(hs)
        series[src] = np.column_stack([hs, x, y])
        for sheet, bid in zip(op.sheets(), (gp, gm)):
            if cfg.branches in ("both", sheet.sign_label):
                pts, _ = offset_points(pl, sheet, hs, h_max=cfg.h_max)
                series[bid] = pts
    return series


def write_csv(series: dict, path: str):
    with open(path, "w", newline="\n") as fh:
        fh.write("branch_id,h,x,y\n")
        for bid, pts in series.items():
            for h, x, y in pts:
                fh.write(f"{bid},{_fmt(h)},{_fmt(x)},{_fmt(y)}\n")


def svg_document(series: dict, size: int = 800, margin: int = 20) -> str:
    """Polylines: the source thin, the offsets thick; y axis pointing up."""
    allpts = np.vstack([p[:, 1:] for p in series.values()])
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    scale = (size - 2 * margin) / span
    colors = {"src": "#000000", "gen+": "#c0392b", "gen-": "#2471a3"}
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" '
        f'width="{size}" height="{size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    for bid, pts in series.items():
        kind = bid.split(".")[0]
        width = "1" if kind == "src" else "3"
        u = margin + (pts[:, 1] - lo[0]) * scale
        v = size - margin - (pts[:, 2] - lo[1]) * scale
        coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(u, v))
        lines.append(
            f'<polyline id="{bid}" fill="none" stroke="{colors.get(kind, "#555555")}" '
            f'stroke-width="{width}" points="{coords}"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_plot(cfg: SessionConfig) -> tuple[dict, int]:
    series = plot_rows(cfg)
    summary = {"branches": {}, "csv": cfg.csv, "svg": cfg.svg}
    for bid, pts in series.items():
        entry = {"samples": int(len(pts))}
        if not bid.startswith("src"):
            entry["cusps"] = count_cusps(PointCloud(bid, pts))
        summary["branches"][bid] = entry
    try:
        if cfg.csv:
            write_csv(series, cfg.csv)
        if cfg.svg:
            with open(cfg.svg, "w", newline="\n") as fh:
                fh.write(svg_document(series))
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot write output: {exc}") from exc
    return summary, 0


# -- verify ------------------------------------------------------------------------


def cmd_verify(cfg: SessionConfig) -> tuple[dict, int]:
    bounds = SuiteBounds(force_flex=cfg.force_flex, force_smoothing=cfg.force_smoothing)
    report = random_suite(cfg.seed, cfg.n, bounds, numeric=cfg.numeric)
    code = 0
    if report["decisive_disagreements"]:
        code = EXIT_DISAGREE
        print("disagreement; reproduce with:\n  " + report["failures"][0]["reproduce"],
              file=sys.stderr)
    return report, code


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="offsetshape", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with SessionConfig fields")
        p.add_argument("--save-config", help="write the effective configuration here")
        p.add_argument("--output", "-o", help="write the JSON report to this file")
        p.add_argument("--tol", type=float)

    for name in ("analyze", "plot"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--curve", help="implicit equation in x, y")
        p.add_argument("--place", help='explicit place, e.g. "h^2, h^4+h^9"')
        p.add_argument("--point", help="center point 'x,y' (rationals)")
        p.add_argument("--d", help="offset distance (rational)")
        p.add_argument("--theta", type=float, help="angle in radians (float mode)")
        p.add_argument("--cosab", help="exact 'a,b' with a^2+b^2=1 (exact mode)")
        p.add_argument("--branches", choices=("both", "+", "-"))
        p.add_argument("--trunc", type=int)
        p.add_argument("--trunc-cap", dest="trunc_cap", type=int)
        p.add_argument("--h-max", dest="h_max", type=float)
        p.add_argument("--samples", type=int)
        if name == "plot":
            p.add_argument("--csv")
            p.add_argument("--svg")
    p = sub.add_parser("verify")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--force-flex", dest="force_flex", action="store_true", default=None)
    p.add_argument("--force-smoothing", dest="force_smoothing", action="store_true", default=None)
    p.add_argument("--numeric", action="store_true", default=None,
                   help="also run the sampled-cloud oracle")
    return ap


def resolve_config(args: argparse.Namespace, environ=os.environ) -> SessionConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_PARSE, f"cannot read config: {exc}") from exc
    cfg = SessionConfig.from_json(data)
    if "OFFSETSHAPE_TOL" in environ:
        try:
            cfg = replace(cfg, tol=float(environ["OFFSETSHAPE_TOL"]))
        except ValueError as exc:
            raise CliError(EXIT_PARSE, "OFFSETSHAPE_TOL is not a number") from exc
    flags = {f.name: getattr(args, f.name) for f in fields(SessionConfig)
             if getattr(args, f.name, None) is not None}
    given = set(flags)
    # a flag for one member of an exclusive pair overrides the other from the file
    for one, other in (("theta", "cosab"), ("cosab", "theta"), ("curve", "place"), ("place", "curve")):
        if one in given and other not in given:
            flags[other] = None
    return replace(cfg, **flags).validate(need_curve=args.command != "verify")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which would read as a geometry error
        return EXIT_PARSE if exc.code else 0
    try:
        cfg = resolve_config(args)
        if args.save_config:
            with open(args.save_config, "w") as fh:
                fh.write(dumps(cfg.to_json()))
        handler = {"analyze": cmd_analyze, "plot": cmd_plot, "verify": cmd_verify}[args.command]
        report, code = handler(cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (PolySyntaxError, InvalidCurve) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PointNotOnCurve, NotApplicable, CurvatureUnbounded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (SignatureUndetermined, TruncationTooSmall) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRUNC
    text = dumps(report)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

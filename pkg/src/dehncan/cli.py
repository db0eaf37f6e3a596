"""
Command-line front end.

Subcommands
-----------
torus      solve and certify one layered solid torus
whitehead  solve and certify one Whitehead filling
batch      Whitehead fillings over a range of slopes, as CSV
verify     re-check a certificate file from its own data
cuspview   SVG of the developed cusp triangulation

Exit codes: 0 canonical (or verified), 1 certificate not canonical (or
verification failed), 2 usage or parse error, 3 infeasible input or
non-hyperbolic slope, 4 optimizer did not converge.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import gcd, pi

import mpmath as mp

from . import __version__
from .angles import BoundaryAngles, InfeasibleError, feasible
from .canonical import HOLONOMY_TOL, certify
from .farey import FareyError, farey_path, parse_slope, wedge
from .volume import (GRAD_TOL, MAX_ITER, ConvergenceError, _requested_precision,
                     maximize, resolve_precision)
from . import whitehead as wh

__all__ = [
    "SCHEMA_VERSION",
    "CSV_HEADER",
    "Config",
    "dumps",
    "loads",
    "cmd_torus",
    "cmd_whitehead",
    "cmd_batch",
    "cmd_verify",
    "cmd_cuspview",
    "main",
]

SCHEMA_VERSION = 1
CSV_HEADER = ("k", "l", "parity", "N", "volume", "min_margin", "verdict")

EXIT_OK, EXIT_NONCANONICAL, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NOCONV = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Config:
    """Solver settings; None for margin_floor and precision means the defaults."""

    grad_tol: float = GRAD_TOL
    max_iter: int = MAX_ITER
    margin_floor: float = None
    precision: str = None
    holonomy_tol: float = HOLONOMY_TOL

    def __post_init__(self):
        if not self.grad_tol > 0 or not self.holonomy_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.margin_floor is not None and not self.margin_floor > 0:
            raise ValueError("margin floor must be positive")
        if self.max_iter < 1:
            raise ValueError("iteration cap must be positive")
        if self.precision not in (None, "double", "extended", "auto"):
            raise ValueError(f"unknown precision {self.precision!r}")


# -- serialization ---------------------------------------------------------

def _fmt_float(x):
    if not math.isfinite(x):
        return "null"
    return format(x, ".16e")


def dumps(obj, indent=1):
    """
    JSON text with every float written to 17 significant digits.

    Non-finite floats become null. ``dumps(loads(s)) == s`` for any
    output of this function.
    """
    out = io.StringIO()

    def emit(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, bool) or o is None:
            out.write(json.dumps(o))
        elif isinstance(o, int):
            out.write(str(o))
        elif isinstance(o, float):
            out.write(_fmt_float(o))
        elif isinstance(o, str):
            out.write(json.dumps(o))
        elif isinstance(o, dict):
            if not o:
                out.write("{}")
                return
            out.write("{\n")
            for i, (k, v) in enumerate(o.items()):
                out.write(pad + json.dumps(str(k)) + ": ")
                emit(v, level + 1)
                out.write(",\n" if i < len(o) - 1 else "\n")
            out.write(end + "}")
        elif isinstance(o, (list, tuple)):
            if not o:
                out.write("[]")
                return
            if all(isinstance(v, (int, float, str)) or v is None for v in o):
                out.write("[")
                for i, v in enumerate(o):
                    if i:
                        out.write(", ")
                    emit(v, level + 1)
                out.write("]")
                return
            out.write("[\n")
            for i, v in enumerate(o):
                out.write(pad)
                emit(v, level + 1)
                out.write(",\n" if i < len(o) - 1 else "\n")
            out.write(end + "]")
        elif hasattr(o, "item"):
            emit(o.item(), level)
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    emit(obj, 0)
    out.write("\n")
    return out.getvalue()


def loads(text):
    """Parse a certificate; raises ValueError on malformed input."""
    obj = json.loads(text)
    if not isinstance(obj, dict) or obj.get("schema_version") != SCHEMA_VERSION:
        raise ValueError("not a certificate of schema version "
                         f"{SCHEMA_VERSION}")
    return obj


def _face_dict(f):
    return {"face_id": f.face_id, "method": f.method, "alpha": float(f.alpha),
            "beta": float(f.beta), "gamma": float(f.gamma), "lam": float(f.lam),
            "margin": float(f.margin), "margin_z": float(f.margin_z),
            "margin_dense": float(f.margin_dense), "z_value": float(f.z_value)}


def _hand_list(report):
    return [{"index": e.index, "letter": e.letter,
             "hand": [float(e.hand.real), float(e.hand.imag)],
             "classification": e.classification} for e in report.entries]


def _development_dict(dev):
    """Layers with their points in the frame of the outermost hexagon."""
    layers = []
    for L in dev.layers:
        c = dev.frame_factor(L.index, 0)
        pts = [complex(c * p) for p in L.points]
        layers.append({"index": L.index, "kind": L.kind, "letter": L.letter,
                       "labels": [str(s) for s in L.labels],
                       "points": [[p.real, p.imag] for p in pts]})
    return {"core": dev.core, "layers": layers}


def _exact(values, dps):
    if values is None:
        return None
    with mp.workdps(dps):
        return [mp.nstr(v, dps, strip_zeros=False) for v in values]


def _precision_block(cfg, dps, mode):
    return {"precision": mode, "dps": dps, "grad_tol": float(cfg.grad_tol),
            "max_iter": int(cfg.max_iter), "holonomy_tol": float(cfg.holonomy_tol)}


# -- torus -----------------------------------------------------------------

def _parse_slopes(text, count):
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != count:
        raise CliError(EXIT_USAGE, f"expected {count} comma-separated slopes, got {text!r}")
    try:
        return [parse_slope(t) for t in parts]
    except FareyError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None


def resolve_thetas(text, p, q, r, m):
    """
    Boundary angles from ``"tp,tq,tr"`` where entries may be 'auto'.

    One 'auto' is fixed by the sum pi. With two, the free one-parameter
    family is linear in the feasibility margin and the midpoint of its
    feasible interval is taken. Three are rejected.
    """
    parts = [t.strip().lower() for t in text.split(",")]
    if len(parts) != 3:
        raise CliError(EXIT_USAGE, f"expected three angles, got {text!r}")
    auto = [i for i, t in enumerate(parts) if t == "auto"]
    try:
        vals = [None if t == "auto" else float(t) for t in parts]
    except ValueError:
        raise CliError(EXIT_USAGE, f"malformed angle list {text!r}") from None
    if len(auto) == 3:
        raise CliError(EXIT_USAGE, "at most two angles may be 'auto'")
    if len(auto) == 1:
        vals[auto[0]] = pi - sum(v for v in vals if v is not None)
    elif len(auto) == 2:
        i, j = auto
        rest = pi - sum(v for v in vals if v is not None)
        w = [wedge(m, s) for s in (p, q, r)]
        # vals[i] = t, vals[j] = rest - t; margin = A + B t
        fixed = sum(w[k] * vals[k] for k in range(3) if vals[k] is not None)
        A = fixed + w[j] * rest - 2 * pi
        B = w[i] - w[j]
        # open interval, so theta_r stays strictly positive
        lo, hi = 0.0, rest
        if B > 0:
            lo = max(lo, -A / B)
        elif B < 0:
            hi = min(hi, -A / B)
        elif A <= 0:
            lo, hi = 1.0, 0.0
        if not lo < hi:
            raise CliError(EXIT_INFEASIBLE, "no feasible value for the 'auto' angles")
        vals[i] = 0.5 * (lo + hi)
        vals[j] = rest - vals[i]
    try:
        return BoundaryAngles(*vals)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None


def cmd_torus(pqr, m, theta, cfg=Config()):
    """Solve and certify one layered solid torus; returns the certificate dict."""
    p, q, r = _parse_slopes(pqr, 3)
    (mm,) = _parse_slopes(m, 1)
    b = resolve_thetas(theta, p, q, r, mm)
    raw = sum(wedge(mm, s) * t for s, t in zip((p, q, r), b.as_tuple())) - 2 * pi
    try:
        path = farey_path(p, q, r, mm)
    except FareyError as exc:
        raise CliError(EXIT_INFEASIBLE,
                       f"{exc} (feasibility margin {raw:.6g})") from None
    ok, margin = feasible(b, p, q, r, mm)
    if not ok:
        raise CliError(EXIT_INFEASIBLE,
                       f"no strict angle structure: feasibility margin {margin:.6g} <= 0")
    mode = resolve_precision(cfg.precision, path.N)
    try:
        res = maximize(path, b, tol=cfg.grad_tol, max_iter=cfg.max_iter, precision=mode)
    except ConvergenceError as exc:
        raise CliError(EXIT_NOCONV, str(exc)) from None
    except InfeasibleError as exc:
        raise CliError(EXIT_INFEASIBLE, str(exc)) from None
    cert = certify(path, res, b=b, margin_floor=cfg.margin_floor,
                   holonomy_tol=cfg.holonomy_tol)
    h = cert.holonomy
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "torus",
        "generator": f"dehncan {__version__}",
        "input": {"p": str(p), "q": str(q), "r": str(r), "m": str(mm),
                  "theta": [float(v) for v in b.as_tuple()],
                  "feasibility_margin": float(margin)},
        "config": _precision_block(cfg, res.dps, mode),
        "word": path.word,
        "N": path.N,
        "z_star": [float(v) for v in res.z_star],
        "z_exact": _exact(res.z_exact, res.dps),
        "angles": [[float(v) for v in row] for row in res.angles],
        "volume": float(res.value),
        "grad_norm": float(res.grad_norm),
        "iterations": int(res.iterations),
        "margin_floor": float(cert.margin_floor),
        "faces": [_face_dict(f) for f in cert.all_faces],
        "min_margin": float(cert.min_margin),
        "holonomy": {"shape_product": float(h.shape_product),
                     "angle_sum": float(h.angle_sum), "meridian": float(h.meridian),
                     "deck": float(h.deck), "notch": float(h.notch)},
        "handedness": _hand_list(cert.handedness),
        "verdict": cert.verdict,
        "offending": list(cert.offending),
        "development": _development_dict(cert.development),
    }


# -- whitehead -------------------------------------------------------------

def _slope(k, l):  # noqa: E741
    try:
        return wh.FillingSlope(k, l)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None


def _whitehead_dict(res, cfg, mode):
    S = res.setup
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "whitehead",
        "generator": f"dehncan {__version__}",
        "input": {"k": S.slope.k, "l": S.slope.l, "parity": S.parity,
                  "m": str(S.m), "pqr": [str(s) for s in S.pqr],
                  "theta_range": [float(v) for v in S.theta_range]},
        "config": _precision_block(cfg, res.dps, mode),
        "word": S.path.word,
        "N": S.path.N,
        "theta_star": float(res.theta),
        "z_star": [float(v) for v in res.z],
        "z_exact": _exact(res.z_exact, res.dps),
        "angles": [[float(v) for v in row] for row in res.angles],
        "volume": float(res.volume),
        "unfilled_volume": wh.unfilled_volume(),
        "grad_norm": float(res.grad_norm),
        "iterations": int(res.iterations),
        "margin_floor": float(res.margin_floor),
        "faces": [_face_dict(f) for f in res.all_faces],
        "min_margin": float(res.min_margin),
        "holonomy": {k: float(v) for k, v in res.holonomy.items()},
        "handedness": _hand_list(res.handedness),
        "verdict": res.verdict,
        "offending": list(res.offending),
        "development": _development_dict(res.development),
    }


def cmd_whitehead(k, l, cfg=Config()):  # noqa: E741
    """Solve and certify the filling (k, l); returns the certificate dict."""
    s = _slope(k, l)
    if not wh.gate(s):
        raise CliError(EXIT_INFEASIBLE,
                       f"filling {s} is not hyperbolic; the exceptional slopes are "
                       "+-(0,1), +-(1,0), +-(1,1), +-(1,-1), +-(1,2), +-(1,-2)")
    S = wh.setup(s)
    mode = resolve_precision(cfg.precision, S.path.N)
    try:
        res = wh.solve(s, precision=mode, tol=cfg.grad_tol, max_iter=cfg.max_iter,
                       margin_floor=cfg.margin_floor, holonomy_tol=cfg.holonomy_tol)
    except ConvergenceError as exc:
        raise CliError(EXIT_NOCONV, str(exc)) from None
    except InfeasibleError as exc:
        raise CliError(EXIT_INFEASIBLE, str(exc)) from None
    return _whitehead_dict(res, cfg, mode)


# -- batch -----------------------------------------------------------------

def parse_range(text):
    """Inclusive integer range ``"a:b"`` or a single integer ``"a"``."""
    try:
        if ":" in text:
            a, b = (int(t) for t in text.split(":"))
        else:
            a = b = int(text)
    except ValueError:
        raise CliError(EXIT_USAGE, f"malformed range {text!r}") from None
    if b < a:
        raise CliError(EXIT_USAGE, f"empty range {text!r}")
    return range(a, b + 1)


def _fmt(x):
    return format(float(x), ".16e")


def _batch_row(job):
    k, l, cfg = job  # noqa: E741
    s = wh.FillingSlope(k, l)
    if not wh.gate(s):
        return (k, l, s.parity, "", "", "", "non-hyperbolic"), True
    try:
        S = wh.setup(s)
        res = wh.solve(s, precision=resolve_precision(cfg.precision, S.path.N),
                       tol=cfg.grad_tol, max_iter=cfg.max_iter,
                       margin_floor=cfg.margin_floor, holonomy_tol=cfg.holonomy_tol)
    except (ConvergenceError, InfeasibleError):
        return (k, l, s.parity, S.path.N, "", "", "no-convergence"), False
    return (k, l, s.parity, S.path.N, _fmt(res.volume), _fmt(res.min_margin),
            res.verdict), True


def cmd_batch(k_range, l_range, cfg=Config(), jobs=1):
    """
    CSV text for all primitive (k, l) in the ranges, in row-major order.

    Returns
    -------
    text : str
    converged : bool
        True when every attempted solve converged.
    """
    work = [(k, l, cfg) for k in k_range for l in l_range  # noqa: E741
            if (k, l) != (0, 0) and gcd(abs(k), abs(l)) == 1]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_batch_row, work, chunksize=4))
    else:
        rows = [_batch_row(w) for w in work]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for row, _ in rows:
        wr.writerow(row)
    return buf.getvalue(), all(ok for _, ok in rows)


# -- verify ----------------------------------------------------------------

TWO_ROUTE_TOL = 1e-9


def _recompute(cert):
    """Faces, holonomy and volume recomputed from the stored point."""
    cfg = cert["config"]
    dps = cfg.get("dps")
    zx = cert.get("z_exact")
    floor = cert["margin_floor"]
    tol = cfg["holonomy_tol"]
    if cert["kind"] == "torus":
        inp = cert["input"]
        p, q, r, m = (parse_slope(inp[k]) for k in ("p", "q", "r", "m"))
        path = farey_path(p, q, r, m)
        b = BoundaryAngles(*inp["theta"])
        if zx is not None:
            with mp.workdps(dps):
                z = [mp.mpf(v) for v in zx]
                c = certify(path, z, b=b, margin_floor=floor, holonomy_tol=tol, dps=dps)
        else:
            c = certify(path, cert["z_star"], b=b, margin_floor=floor, holonomy_tol=tol)
        h = c.holonomy
        hol = {"shape_product": h.shape_product, "angle_sum": h.angle_sum,
               "meridian": h.meridian, "deck": h.deck, "notch": h.notch}
        return c.all_faces, hol, c.volume, c.verdict
    inp = cert["input"]
    res = wh.evaluate((inp["k"], inp["l"]), cert["z_star"], zx, dps,
                      margin_floor=floor, holonomy_tol=tol)
    return res.all_faces, res.holonomy, res.volume, res.verdict


def cmd_verify(cert):
    """
    Re-check a certificate dict.

    Returns
    -------
    ok : bool
        The file is internally consistent, agrees with a recomputation from
        its stored point and certifies canonicity.
    report : list of str
    """
    lines = []
    ok = True

    def check(name, cond, detail=""):
        nonlocal ok
        ok &= bool(cond)
        lines.append(f"{'PASS' if cond else 'FAIL'} {name}{': ' + detail if detail else ''}")

    floor = cert["margin_floor"]
    faces = cert["faces"]
    bad = [f["face_id"] for f in faces
           if not (f["margin"] is not None and f["margin"] > floor and 0 < f["lam"] < 1)]
    check("margins", not bad, f"{len(faces)} faces, floor {floor:.1e}"
          + (f", failing {bad}" if bad else ""))
    gap = 0.0
    for f in faces:
        for key in ("margin_z", "margin_dense"):
            if f[key] is not None:
                gap = max(gap, abs(f[key] - f["margin"]))
    check("two-route", gap <= TWO_ROUTE_TOL, f"max difference {gap:.2e}")
    tol = cert["config"]["holonomy_tol"]
    worst = max((v for v in cert["holonomy"].values() if v is not None), default=0.0)
    check("holonomy", worst < tol, f"max residual {worst:.2e}")
    hand_bad = []
    for e in cert["handedness"]:
        im = e["hand"][1]
        if not ((e["letter"] == "L" and im > 0) or (e["letter"] == "R" and im < 0)):
            hand_bad.append(e["index"])
    check("handedness", not hand_bad, f"{len(cert['handedness'])} entries"
          + (f", mismatched {hand_bad}" if hand_bad else ""))
    try:
        rfaces, rhol, rvol, rverdict = _recompute(cert)
    except (ValueError, KeyError, FareyError) as exc:
        check("recompute", False, str(exc))
        return ok, lines
    stored = {f["face_id"]: f["margin"] for f in faces}
    diff = max((abs(stored.get(f.face_id, math.inf) - f.margin) for f in rfaces),
               default=0.0)
    check("recomputed margins", diff <= TWO_ROUTE_TOL and len(rfaces) == len(faces),
          f"max difference {diff:.2e}")
    check("recomputed volume", abs(rvol - cert["volume"]) <= 1e-12,
          f"{rvol:.15f}")
    check("verdict", rverdict == cert["verdict"] == "canonical",
          f"stored {cert['verdict']}, recomputed {rverdict}")
    return ok, lines


# -- cuspview --------------------------------------------------------------

def cmd_cuspview(cert, size=640):
    """SVG of the nested hexagons stored in a certificate."""
    dev = cert.get("development")
    if not dev or not dev.get("layers"):
        raise CliError(EXIT_USAGE, "certificate has no development data")
    layers = dev["layers"]
    pts = [p for L in layers for p in L["points"]]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    pad = 0.06 * span
    x0, y1 = min(xs) - pad, max(ys) + pad
    scale = size / (span + 2 * pad)

    def xy(p):
        return f"{(p[0] - x0) * scale:.3f},{(y1 - p[1]) * scale:.3f}"

    n = len(layers)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    title = cert.get("word", "")
    out.append(f'<title>cusp triangulation, word {title}</title>')
    for L in layers:
        depth = L["index"] / max(1, n - 1)
        grey = int(40 + 150 * depth)
        width = 2.0 - 1.4 * depth
        poly = " ".join(xy(p) for p in L["points"])
        kind = L["kind"]
        out.append(f'<polygon class="{kind}" data-layer="{L["index"]}" points="{poly}" '
                   f'fill="none" stroke="rgb({grey},{grey},{grey})" '
                   f'stroke-width="{width:.2f}" stroke-linejoin="round"/>')
    for p, lab in zip(layers[0]["points"], layers[0]["labels"]):
        x, y = xy(p).split(",")
        out.append(f'<circle cx="{x}" cy="{y}" r="2.5" fill="black"/>')
        out.append(f'<text x="{x}" y="{y}" dx="4" dy="-4" font-size="11" '
                   f'font-family="sans-serif">{lab}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- entry point -----------------------------------------------------------

def _common(p):
    p.add_argument("--grad-tol", type=float, default=GRAD_TOL)
    p.add_argument("--max-iter", type=int, default=MAX_ITER)
    p.add_argument("--margin-floor", type=float, default=None)
    p.add_argument("--precision", choices=("double", "extended", "auto"), default=None,
                   help="overrides DEHNCAN_PRECISION (default auto)")


def _config(args):
    try:
        # also rejects a bad DEHNCAN_PRECISION before any work starts
        _requested_precision(args.precision)
        return Config(args.grad_tol, args.max_iter, args.margin_floor, args.precision)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None


def _read_cert(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except (OSError, ValueError) as exc:
        raise CliError(EXIT_USAGE, f"cannot read certificate {path}: {exc}") from None


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _emit_certificate(cert, path):
    _write(dumps(cert), path)
    if path not in (None, "-"):
        print(f"{cert['verdict']} volume={cert['volume']:.12f} "
              f"min_margin={cert['min_margin']:.3e} -> {path}")
    return EXIT_OK if cert["verdict"] == "canonical" else EXIT_NONCANONICAL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dehncan", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("torus", help="layered solid torus certificate")
    p.add_argument("--pqr", required=True, help="Farey triangle, e.g. inf,0,-1")
    p.add_argument("--m", required=True, help="meridian slope, e.g. 4 or 7/3")
    p.add_argument("--theta", required=True,
                   help="theta_p,theta_q,theta_r; entries may be 'auto'")
    p.add_argument("--json", "--out", dest="out", default=None)
    _common(p)

    p = sub.add_parser("whitehead", help="Whitehead filling certificate")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-l", type=int, required=True)
    p.add_argument("--json", "--out", dest="out", default=None)
    _common(p)

    p = sub.add_parser("batch", help="CSV over a range of Whitehead slopes")
    p.add_argument("-k", required=True, help="inclusive range a:b")
    p.add_argument("-l", required=True, help="inclusive range a:b (use -l=-3:5)")
    p.add_argument("--csv", default=None)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _common(p)

    p = sub.add_parser("verify", help="re-check a certificate file")
    p.add_argument("certificate")

    p = sub.add_parser("cuspview", help="SVG of the cusp triangulation")
    p.add_argument("certificate")
    p.add_argument("--svg", default=None)
    return parser


_VALUE_FLAGS = ("--pqr", "--m", "--theta", "-k", "-l")


def _join_negative(argv):
    """Attach values such as '-1/2' to their flag so argparse keeps them."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1][:2].lstrip("-")[:1] in \
                tuple("0123456789.i"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative(argv))
    try:
        if args.command == "torus":
            return _emit_certificate(cmd_torus(args.pqr, args.m, args.theta,
                                               _config(args)), args.out)
        if args.command == "whitehead":
            return _emit_certificate(cmd_whitehead(args.k, args.l, _config(args)),
                                     args.out)
        if args.command == "batch":
            text, converged = cmd_batch(parse_range(args.k), parse_range(args.l),
                                        _config(args), jobs=max(1, args.jobs))
            _write(text, args.csv)
            return EXIT_OK if converged else EXIT_NOCONV
        if args.command == "verify":
            ok, report = cmd_verify(_read_cert(args.certificate))
            print("\n".join(report))
            print("verified" if ok else "NOT verified")
            return EXIT_OK if ok else EXIT_NONCANONICAL
        if args.command == "cuspview":
            _write(cmd_cuspview(_read_cert(args.certificate)), args.svg)
            return EXIT_OK
    except CliError as exc:
        print(f"dehncan: error: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

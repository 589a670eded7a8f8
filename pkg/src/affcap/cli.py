"""Command-line interface.

Exit status: 0 when every checked invariant holds, 1 when one fails, 2 for
unreadable or malformed input, 3 when a computation diverges (the offending
object is written to stderr as JSON).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import _format
from .capacity import (LOWER_KINDS, CandidateFamily, DiscreteMeasure,
                       capacity_bracket, capacity_convex, trace_constants)
from .cheeger import (affine_cheeger, disk_mesh, minimize_rayleigh,
                      polygon_mesh)
from .errors import AffcapError, DivergenceError
from .functionals import (PerimeterReport, affine_perimeter,
                          inequality_report)
from .geometry import Polytope, ellipse
from .sphere import DEFAULT_ORDER
from .symmetrize import iterate_symmetrization, trace_csv, verify_monotonicity
from .verify import run_verify

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DIVERGENCE = 0, 1, 2, 3

FAMILY_UPPER = {
    "grid": ("hull", "grid"),
    "offset": ("hull", "offset", "components", "thin"),
    "search": ("hull", "offset", "components", "thin", "grid", "search"),
}


class InputError(Exception):
    pass


class Divergence(Exception):
    def __init__(self, message, obj):
        super().__init__(message)
        self.obj = obj


def _read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _read_polytope(path):
    data = _read_json(path)
    try:
        return Polytope.from_dict(data)
    except (AffcapError, ValueError, TypeError, KeyError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _emit(text, output):
    if output:
        Path(output).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _write_csv(path, text):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _cmd_perimeter(args):
    E = _read_polytope(args.input)
    try:
        if E.volume > 0:
            rep = inequality_report(E, order=args.order, method=args.method)
        else:
            p = affine_perimeter(E, order=args.order, method=args.method)
            raise Divergence("polar projection body has infinite volume",
                             {"P_BVd": p, "V_polar": math.inf,
                              "polytope": E.to_dict()})
    except DivergenceError as exc:
        raise Divergence(str(exc), E.to_dict()) from exc
    if not all(math.isfinite(getattr(rep, c)) for c in ("P_BVd", "V_polar")):
        raise Divergence("non-finite perimeter", rep.to_dict())
    if args.format == "csv":
        _emit(PerimeterReport.csv_header() + "\n" + rep.csv_row() + "\n",
              args.output)
    else:
        _emit(rep.to_json(), args.output)
    ok = rep.petty_ratio <= 1 + args.tol and rep.slack_e12P >= -args.tol
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_capacity(args):
    K = _read_polytope(args.input)
    if args.convex:
        c = capacity_convex(K, order=args.order)
        _emit(_format.dumps({"capacity": c, "exact": True}), args.output)
        return EXIT_OK
    upper = []
    for name in args.family or ["search"]:
        upper += [k for k in FAMILY_UPPER[name] if k not in upper]
    fam = CandidateFamily(upper=tuple(upper), lower=LOWER_KINDS,
                          seed=args.seed)
    b = capacity_bracket(K, fam)
    _emit(b.to_json(), args.output)
    ok = b.lower <= b.upper * (1 + args.tol) + args.tol
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_symmetrize(args):
    E = _read_polytope(args.input)
    dirs = [np.asarray(d, float) for d in args.direction]
    if any(len(d) != E.dimension for d in dirs):
        raise InputError(f"direction needs {E.dimension} components")
    res = verify_monotonicity(E, dirs[0], tol=args.tol)
    ok = res.passed
    if args.trace:
        tr = iterate_symmetrization(E, dirs, args.steps, tol=args.tol)
        _write_csv(args.trace, trace_csv(tr))
        ok = ok and tr.monotone
    _emit(res.to_json(), args.output)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_cheeger(args):
    if args.input:
        O = _read_polytope(args.input)
        mesh = polygon_mesh(O, args.mesh_h) if args.mode != "set" else None
    else:
        mesh = disk_mesh(args.mesh_h, args.radius)
        O = mesh.domain
    out, rows, ok = {}, [], True
    if args.mode in ("set", "both"):
        res = affine_cheeger(O, args.q, seed=args.seed)
        out["set"] = res.to_dict()
        rows += [("set", i, v) for i, v in res.trace]
        ok = ok and res.comparison_holds
    if args.mode in ("function", "both"):
        ray = minimize_rayleigh(mesh, args.p, args.q, args.iters, args.seed)
        out["function"] = {"p": args.p, "q": args.q, "value": ray.value,
                           "converged": ray.converged, "warning": ray.warning}
        rows += [("function", i, v) for i, v in ray.trace]
        if "set" in out and args.p == 1 and args.q == 1:
            ok = ok and ray.value >= out["set"]["value"] - args.tol
    if args.trace:
        lines = ["stage,iteration,value"]
        lines += [f"{s},{i},{_format.fmt(v)}" for s, i, v in rows]
        _write_csv(args.trace, "\n".join(lines) + "\n")
    _emit(_format.dumps(out), args.output)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_verify(args):
    rep = run_verify(args.count, args.seed)
    text = rep.text() if args.format != "json" else _format.dumps(rep.to_dict())
    _emit(text, args.output)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _cmd_trace(args):
    data = _read_json(args.input)
    try:
        mu = DiscreteMeasure(data["points"], data["masses"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"{args.input}: measure JSON needs 'points' and "
                         f"'masses' ({exc})") from exc
    except (AffcapError, ValueError) as exc:
        raise InputError(f"{args.input}: {exc}") from exc
    family = [_read_polytope(p) for p in args.family]
    family += [ellipse(r, r, 4096) for r in args.disks]
    tc = trace_constants(mu, args.q, family)
    _emit(tc.to_json(), args.output)
    return EXIT_OK if tc.kappa3_hat <= tc.kappa2_hat + args.tol else EXIT_FAIL


def _direction(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad direction {text!r}") from exc


def build_parser():
    ap = argparse.ArgumentParser(
        prog="affcap",
        description="Affine perimeter, capacity, symmetrization and Cheeger tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, tol=1e-9):
        p.add_argument("--output", "-o", help="write the report here")
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("perimeter", help="affine perimeter report")
    p.add_argument("input")
    p.add_argument("--order", type=int, default=DEFAULT_ORDER)
    p.add_argument("--method", choices=("auto", "exact", "quadrature"),
                   default="auto")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    common(p, 1e-6)
    p.set_defaults(func=_cmd_perimeter)

    p = sub.add_parser("capacity", help="capacity of a convex body or bracket")
    p.add_argument("input")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--convex", action="store_true")
    g.add_argument("--bracket", action="store_true")
    p.add_argument("--family", action="append", choices=tuple(FAMILY_UPPER))
    p.add_argument("--order", type=int, default=DEFAULT_ORDER)
    common(p)
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("symmetrize", help="Steiner symmetrization")
    p.add_argument("input")
    p.add_argument("--direction", "-u", type=_direction, action="append",
                   required=True, help="comma separated, repeat to cycle")
    p.add_argument("--steps", type=int)
    p.add_argument("--trace", help="CSV trace of iterated symmetrization")
    common(p)
    p.set_defaults(func=_cmd_symmetrize)

    p = sub.add_parser("cheeger", help="affine Cheeger constant of a domain")
    p.add_argument("input", nargs="?", help="planar domain (default: disk)")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--mode", choices=("set", "function", "both"), default="both")
    p.add_argument("--mesh-h", type=float, default=0.05)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--trace", help="CSV descent trace")
    common(p, 1e-6)
    p.set_defaults(func=_cmd_cheeger)

    p = sub.add_parser("verify", help="check the inequalities on a random corpus")
    p.add_argument("--corpus", choices=("random",), default="random")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--format", choices=("text", "json"), default="text")
    common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("trace", help="trace constants of a point measure")
    p.add_argument("input", help='{"points": [...], "masses": [...]}')
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--family", action="append", default=[],
                   help="convex polytope JSON, repeatable")
    p.add_argument("--disks", type=float, nargs="*", default=[],
                   help="radii of centred test disks")
    common(p)
    p.set_defaults(func=_cmd_trace)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Divergence as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        sys.stderr.write(_format.dumps(exc.obj))
        return EXIT_DIVERGENCE
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except AffcapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

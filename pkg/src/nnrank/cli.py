"""Command-line front end.

Every subcommand prints one JSON document on stdout.  Computational failures
exit with status 1 and a JSON error object on stderr; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import sympy

from . import __version__
from .errors import BadParameter, FormatError, NNRankError
from .factorize import FIT_TOL, NmfOptions, nmf
from .jacobian import ParamPoint, isorank_certificate, maximal_rank_check
from .matcore import TAU_RANK, float_rank_details, rank, to_stochastic
from .matio import json_scalar, parse_json, read_matrix, to_csv, to_json_obj, write_matrix
from .mixture import JointTable, model_membership
from .perturb import (
    barycentric,
    critical_epsilon,
    family,
    midpoint_probe,
    proportional,
    semicontinuity_probe,
)
from .render import RenderSpec, render_svg
from .simplexgeo import nested_polygon_exists, nonneg_rank, section_polygon


def parse_scalar(text: str):
    """Rational expressions stay exact (``Fraction``); anything else becomes a float.

    Accepts plain decimals as well as expressions such as ``3/4`` or ``sqrt(2)/2``.
    """
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        expr = sympy.sympify(text, rational=True)
    except (sympy.SympifyError, TypeError, SyntaxError) as exc:
        raise BadParameter(f"cannot parse scalar {text!r}") from exc
    if expr.is_Rational:
        return Fraction(int(expr.p), int(expr.q))
    if not expr.is_real or not expr.is_number:
        raise BadParameter(f"{text!r} is not a real number")
    return float(expr.evalf(20))


def default_seed() -> int:
    raw = os.environ.get("NNRANK_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise BadParameter(f"NNRANK_SEED must be an integer, got {raw!r}") from None


def _read_point(path: str) -> ParamPoint:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path}: {exc}") from exc
    return ParamPoint.from_json_obj(obj)


def _read_table(path: str, normalize: bool) -> JointTable:
    p = Path(path)
    M = read_matrix(p)
    if p.suffix.lower() == ".json" or p.read_text().lstrip().startswith("{"):
        normalize = normalize or bool(parse_json(p.read_text())[1].get("normalize", False))
    return JointTable.normalize(M) if normalize else JointTable(M)


def cmd_rank(a):
    M = read_matrix(a.file)
    out = {"rows": M.rows, "cols": M.cols, "backend": M.backend.value, "rank": rank(M, a.tau)}
    if not M.is_exact:
        out["smallest_pivot"] = float_rank_details(M.to_numpy(), a.tau)[1]
    return out


def _nmf_opts(a) -> NmfOptions:
    seed = default_seed() if a.seed is None else a.seed
    return NmfOptions(restarts=a.restarts, seed=seed)


def cmd_nnrank(a):
    return nonneg_rank(read_matrix(a.file), a.tol, _nmf_opts(a)).to_json_obj()


def cmd_factorize(a):
    F = nmf(read_matrix(a.file), a.k, _nmf_opts(a))
    return F.to_json_obj()


def cmd_jacobian(a):
    P = read_matrix(a.file_p)
    p = _read_point(a.file_point)
    rep = maximal_rank_check(p, a.tau)
    cert = isorank_certificate(P, p, tau=a.tau)
    return {
        "n": p.n,
        "m": p.m,
        "k": p.k,
        "jac_rank": rep.jac_rank,
        "target_rank": rep.target_rank,
        "maximal": rep.maximal,
        "hypotheses_hold": rep.hypotheses_hold,
        "positive_point": rep.positive_point,
        "certificate": cert.to_json_obj(),
    }


def cmd_perturb(a):
    P = read_matrix(a.file)
    if a.kind == "barycentric":
        N = barycentric(P, parse_scalar(a.delta))
        if a.output:
            write_matrix(N, a.output)
        return {
            "delta": json_scalar(parse_scalar(a.delta)),
            "rank": rank(N),
            "proportional_to_input": proportional(N, P),
            "matrix": to_json_obj(N),
        }
    seed = default_seed() if a.seed is None else a.seed
    rep = semicontinuity_probe(P, float(parse_scalar(a.radius)), a.samples, seed)
    out = rep.to_json_obj()
    if not a.details:
        out.pop("details")
    return out


def cmd_family(a):
    M = family(a.name, parse_scalar(a.eps))
    if a.output:
        write_matrix(M, a.output)
    if a.format == "csv":
        return to_csv(M)
    return to_json_obj(M)


def cmd_critical(a):
    v = critical_epsilon(a.name, parse_scalar(a.lo), parse_scalar(a.hi), parse_scalar(a.tol))
    return {"name": a.name, "lo": float(parse_scalar(a.lo)), "hi": float(parse_scalar(a.hi)), "threshold": v}


def cmd_midpoint(a):
    return midpoint_probe(read_matrix(a.file_a), read_matrix(a.file_b))


def cmd_mixture(a):
    T = _read_table(a.file, a.normalize)
    out = model_membership(T, a.k, opts=_nmf_opts(a)).to_json_obj()
    out["mass"] = json_scalar(T.mass)
    return out


def cmd_render(a):
    M = read_matrix(a.file)
    witness = None
    if a.witness:
        if a.mode != "Plane2D":
            raise BadParameter("--witness applies to Plane2D only")
        tri = nested_polygon_exists(section_polygon(to_stochastic(M)), 3)
        witness = tuple(tri) if tri is not None else None
    svg = render_svg(RenderSpec(a.mode, M, a.width, a.height, a.drop, witness))
    Path(a.output).write_text(svg)
    return {"mode": a.mode, "output": a.output, "witness": witness is not None, "bytes": len(svg.encode())}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nnrank", description="Non-negative rank of small matrices.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--pretty", action="store_true", help="indent the JSON output")
    sub = ap.add_subparsers(dest="command", required=True)

    def nmf_flags(p):
        p.add_argument("--restarts", type=int, default=NmfOptions.restarts)
        p.add_argument("--seed", type=int, default=None, help="default: $NNRANK_SEED or 0")

    p = sub.add_parser("rank", help="ordinary rank")
    p.add_argument("file")
    p.add_argument("--tau", type=float, default=TAU_RANK, help="relative pivot threshold (float backend)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("nnrank", help="non-negative rank (exact or bounds)")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=FIT_TOL, help="relative NMF fit tolerance")
    nmf_flags(p)
    p.set_defaults(func=cmd_nnrank)

    p = sub.add_parser("factorize", help="best-of-restarts NMF with K dyads")
    p.add_argument("file")
    p.add_argument("-k", type=int, required=True)
    nmf_flags(p)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("jacobian", help="Jacobian rank and isorank certificate")
    p.add_argument("file_p")
    p.add_argument("file_point", help='JSON {"x": [...], "y": [...]} or a factorize output')
    p.add_argument("--tau", type=float, default=TAU_RANK)
    p.set_defaults(func=cmd_jacobian)

    p = sub.add_parser("perturb", help="barycentric perturbation or ball probe")
    p.add_argument("kind", choices=["barycentric", "ball"])
    p.add_argument("file")
    p.add_argument("--delta", default="0")
    p.add_argument("--radius", default="1e-3")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--details", action="store_true", help="include per-sample records")
    p.add_argument("-o", "--output", help="write the perturbed matrix (barycentric)")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("family", help="example matrix families")
    p.add_argument("name", choices=["Peps", "Meps", "B1", "B2", "CohenRothblum"])
    p.add_argument("--eps", default="0", help="rational or expression, e.g. 3/4 or sqrt(2)/2")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("critical", help="bisect for the rank-3 triangle threshold")
    p.add_argument("name", choices=["Peps", "Meps"])
    p.add_argument("--lo", required=True)
    p.add_argument("--hi", required=True)
    p.add_argument("--tol", default="1e-6")
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("midpoint", help="ranks of A, B and (A + B) / 2")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(func=cmd_midpoint)

    p = sub.add_parser("mixture-check", help="membership in the k-mixture of independence models")
    p.add_argument("file")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--normalize", action="store_true", help="rescale the table to total mass 1")
    nmf_flags(p)
    p.set_defaults(func=cmd_mixture)

    p = sub.add_parser("render", help="SVG picture")
    p.add_argument("file")
    p.add_argument("--mode", choices=["Tetrahedron3D", "Plane2D"], required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--width", type=int, default=480)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--drop", type=int, default=None, help="coordinate dropped for Tetrahedron3D")
    p.add_argument("--witness", action="store_true", help="draw a nested triangle if one exists")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = args.func(args)
    except NNRankError as exc:
        print(json.dumps(exc.to_json()), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(json.dumps({"error": "bad_parameter", "message": str(exc)}), file=sys.stderr)
        return 1
    if isinstance(out, str):
        sys.stdout.write(out)
    else:
        print(json.dumps(out, indent=2 if args.pretty else None))
    return 0


if __name__ == "__main__":
    sys.exit(main())

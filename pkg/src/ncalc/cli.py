"""Command-line front end.

Subcommands: derive, eval, fd-check, group-verify, structconst, bracket,
anholonomy. Every run writes one JSON document to stdout (--format json,
the default); pretty is a human-readable rendering and latex applies to the
symbolic output of derive (elsewhere it falls back to pretty). Exit codes:
0 success, 2 parse/input errors, 3 evaluation errors, 4 violated structural
preconditions, 5 verification failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

import numpy as np

from .algebra import Algebra, TupleElement, builtin_algebra, load_algebra
from .errors import (
    AlgebraMismatch,
    EvalError,
    ExprSyntaxError,
    GroupSpecError,
    IndexOutOfRange,
    NoUnit,
    NonAssociative,
    ShapeMismatch,
    Singular,
    SingularMap,
    SingularMapMatrix,
    SpreadTooLarge,
)
from .expr import (
    PolyMap,
    diff,
    eval_derivative,
    fd_directional,
    parse_map,
)
from .geometry import Frame, anholonomy
from .liegroup import DEFAULT_SEED, LieGroup, load_group, random_tuple

PARSE_ERRORS = (ExprSyntaxError, IndexOutOfRange, json.JSONDecodeError, KeyError, ValueError)
EVAL_ERRORS = (Singular, SingularMap, SingularMapMatrix, EvalError)
SPEC_ERRORS = (GroupSpecError, NonAssociative, NoUnit, ShapeMismatch, AlgebraMismatch)


def _emit(doc: dict, fmt: str, pretty_lines) -> None:
    if fmt == "json":
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        for line in pretty_lines(doc):
            print(line)


def _resolve_algebra(text: str) -> Algebra:
    if os.path.isfile(text):
        with open(text) as fh:
            return load_algebra(json.load(fh))
    return load_algebra(text)


def _resolve_group(text: str) -> LieGroup:
    if os.path.isfile(text):
        with open(text) as fh:
            return load_group(json.load(fh))
    return load_group(text)


def _parse_point(algebra: Algebra, text: str) -> TupleElement:
    rows = json.loads(text)
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValueError("a point is a JSON list of coordinate lists")
    return TupleElement(algebra.element(r) for r in rows)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algebra", default="quaternion",
                   help="builtin name, JSON file, or inline JSON (default quaternion)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--tol-exact", type=float, default=1e-8)
    p.add_argument("--tol-fd", type=float, default=1e-5)
    p.add_argument("--tol-struct", type=float, default=1e-6)
    p.add_argument("--format", choices=("json", "pretty", "latex"), default="json")


# -- derive ------------------------------------------------------------------------


def _cmd_derive(args) -> int:
    algebra = _resolve_algebra(args.algebra)
    f = parse_map(args.source, args.n_in, algebra)
    sym = diff(f)
    doc: dict = {
        "command": "derive",
        "algebra": algebra.name,
        "n_in": f.n_in,
        "n_out": f.n_out,
        "map": f.to_source(),
        "entries": [[te.to_source() for te in row] for row in sym],
    }
    if args.at is not None:
        x = _parse_point(algebra, args.at)
        mat = eval_derivative(f, x)
        if args.dx is not None:
            dx = _parse_point(algebra, args.dx)
        else:
            rng = np.random.default_rng(args.seed)
            dx = random_tuple(algebra, f.n_in, rng)
        doc["at"] = x.to_json()
        doc["evaluated"] = mat.to_json()
        doc["dx"] = dx.to_json()
        doc["dy"] = mat.apply_col(dx).to_json()

    def pretty(d: dict):
        yield f"map: {d['map']}  (over {d['algebra']})"
        for k, row in enumerate(sym):
            for j, te in enumerate(row):
                if args.format == "latex":
                    yield (
                        f"\\frac{{\\partial y^{{{k + 1}}}}}{{\\partial x^{{{j + 1}}}}}"
                        f" = {te.latex()}"
                    )
                else:
                    yield f"d y{k + 1} / d x{j + 1} = {te.pretty()}"
        if "dy" in d:
            yield f"at = {d['at']}"
            yield f"dx = {d['dx']}"
            yield f"dy = {d['dy']}"

    _emit(doc, args.format, pretty)
    return 0


# -- eval --------------------------------------------------------------------------


def _cmd_eval(args) -> int:
    algebra = _resolve_algebra(args.algebra)
    f = parse_map(args.source, args.n_in, algebra)
    x = _parse_point(algebra, args.at)
    y = f.eval(x)
    doc = {
        "command": "eval",
        "algebra": algebra.name,
        "map": f.to_source(),
        "at": x.to_json(),
        "value": y.to_json(),
    }
    _emit(doc, args.format, lambda d: [f"value = {d['value']}"])
    return 0


# -- fd-check ----------------------------------------------------------------------


def _cmd_fd_check(args) -> int:
    algebra = _resolve_algebra(args.algebra)
    f = parse_map(args.source, args.n_in, algebra)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    done = 0
    attempts = 0
    while done < args.trials:
        attempts += 1
        if attempts > 100 * args.trials:
            raise EvalError("could not sample enough valid points")
        x = random_tuple(algebra, f.n_in, rng)
        h = random_tuple(algebra, f.n_in, rng)
        try:
            sym = eval_derivative(f, x).apply_col(h)
            fd = fd_directional(f, x, h)
        except EVAL_ERRORS:
            continue  # resampling keeps evaluation valid
        rel = (fd - sym).norm() / max(1.0, sym.norm())
        worst = max(worst, rel)
        done += 1
    ok = worst < args.tol_fd
    doc = {
        "command": "fd-check",
        "algebra": algebra.name,
        "map": f.to_source(),
        "seed": args.seed,
        "trials": args.trials,
        "max_rel_deviation": worst,
        "tol": args.tol_fd,
        "pass": bool(ok),
    }
    _emit(
        doc,
        args.format,
        lambda d: [
            f"fd-check {'PASS' if d['pass'] else 'FAIL'}: "
            f"max relative deviation {d['max_rel_deviation']:.3e} "
            f"over {d['trials']} trials (tol {d['tol']:.1e})"
        ],
    )
    return 0 if ok else 5


# -- group commands ----------------------------------------------------------------

MAURER_TOL = 1e-4


def _basis_bracket_table(group: LieGroup, side: str, constants) -> list:
    n, d = group.n, group.algebra.dim
    from .liegroup import basis_tuple

    table = []
    for q in range(n):
        for mu in range(d):
            row = []
            for t in range(n):
                for nu in range(d):
                    v = basis_tuple(group.algebra, n, q, mu)
                    w = basis_tuple(group.algebra, n, t, nu)
                    row.append(group.bracket(side, v, w, constants).to_json())
            table.append(row)
    return table


def _cmd_group_verify(args) -> int:
    group = _resolve_group(args.group)
    group.validate(seed=args.seed)
    suite = group.verify_identity_suite(
        seed=args.seed,
        n_points=args.points,
        tol_exact=args.tol_exact,
        tol_inverse=args.tol_fd,
    )
    doc = {
        "command": "group-verify",
        "group": group.name,
        "algebra": group.algebra.name,
        "n": group.n,
        "seed": args.seed,
        "points": args.points,
        "laws": "ok",
        "identities": suite["identities"],
        "structure_constants": {},
        "maurer": {},
        "brackets": {},
    }
    overall = suite["pass"]
    for side in ("left", "right"):
        consts = group.structure_constants(
            side, seed=args.seed, tol_spread=float("inf")
        )
        ok = consts.spread < args.tol_struct
        overall = overall and ok
        doc["structure_constants"][side] = {
            "spread": consts.spread,
            "tol": args.tol_struct,
            "pass": bool(ok),
        }
        residual = group.maurer_residual(side, seed=args.seed, constants=consts)
        mok = residual < MAURER_TOL
        overall = overall and mok
        doc["maurer"][side] = {
            "residual": residual,
            "tol": MAURER_TOL,
            "pass": bool(mok),
        }
        doc["brackets"][side] = _basis_bracket_table(group, side, consts)
    doc["pass"] = bool(overall)

    def pretty(d: dict):
        yield f"group {d['group']} over {d['algebra']} (n={d['n']}, seed={d['seed']})"
        yield "group laws: ok"
        for item in d["identities"]:
            flag = "PASS" if item["pass"] else "FAIL"
            yield (
                f"  {flag} {item['name']}: {item['eq']}  "
                f"residual {item['max_residual']:.3e}"
            )
        for side in ("left", "right"):
            sc = d["structure_constants"][side]
            flag = "PASS" if sc["pass"] else "FAIL"
            yield f"  {flag} structure constants ({side}): spread {sc['spread']:.3e}"
            ma = d["maurer"][side]
            flag = "PASS" if ma["pass"] else "FAIL"
            yield f"  {flag} integrability ({side}): residual {ma['residual']:.3e}"
        yield "overall: " + ("PASS" if d["pass"] else "FAIL")

    _emit(doc, args.format, pretty)
    return 0 if overall else 5


def _cmd_structconst(args) -> int:
    group = _resolve_group(args.group)
    group.validate(seed=args.seed)
    sides = ("left", "right") if args.side == "both" else (args.side,)
    doc: dict = {
        "command": "structconst",
        "group": group.name,
        "seed": args.seed,
        "sides": {},
    }
    overall = True
    for side in sides:
        consts = group.structure_constants(
            side, seed=args.seed, tol_spread=float("inf")
        )
        ok = consts.spread < args.tol_struct
        overall = overall and ok
        doc["sides"][side] = {
            "spread": consts.spread,
            "tol": args.tol_struct,
            "pass": bool(ok),
            "array": consts.array.tolist(),
        }

    def pretty(d: dict):
        yield f"group {d['group']}: structure constants"
        for side, entry in d["sides"].items():
            flag = "PASS" if entry["pass"] else "FAIL"
            yield f"  {flag} {side}: spread {entry['spread']:.3e} (tol {entry['tol']:.1e})"

    _emit(doc, args.format, pretty)
    return 0 if overall else 5


def _cmd_bracket(args) -> int:
    group = _resolve_group(args.group)
    v = _parse_point(group.algebra, args.v)
    w = _parse_point(group.algebra, args.w)
    out = group.bracket(args.side, v, w)
    doc = {
        "command": "bracket",
        "group": group.name,
        "side": args.side,
        "v": v.to_json(),
        "w": w.to_json(),
        "bracket": out.to_json(),
    }
    _emit(doc, args.format, lambda d: [f"[{d['v']}, {d['w']}] = {d['bracket']}"])
    return 0


def _cmd_anholonomy(args) -> int:
    algebra = _resolve_algebra(args.algebra)
    if os.path.isfile(args.frame):
        with open(args.frame) as fh:
            frame_doc = json.load(fh)
    else:
        frame_doc = json.loads(args.frame)
    n = int(frame_doc["n"])
    frame = Frame.from_sources(algebra, n, frame_doc["entries"])
    x = _parse_point(algebra, args.at)
    omega = anholonomy(frame, x)
    max_norm = max(
        omega[k][l][i].op_norm()
        for k in range(n)
        for l in range(n)
        for i in range(n)
    )
    doc = {
        "command": "anholonomy",
        "algebra": algebra.name,
        "n": n,
        "at": x.to_json(),
        "omega": [
            [[omega[k][l][i].to_json() for i in range(n)] for l in range(n)]
            for k in range(n)
        ],
        "max_norm": max_norm,
    }
    _emit(
        doc,
        args.format,
        lambda d: [f"anholonomy max norm {d['max_norm']:.3e} at {d['at']}"],
    )
    return 0


# -- wiring ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ncalc",
        description="calculus and group machinery over non-commutative algebras",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("derive", help="symbolic derivative of a map")
    p.add_argument("source", help="map source, e.g. 'y1 = x1*x2'")
    p.add_argument("--n-in", type=int, required=True)
    p.add_argument("--at", help="point as JSON [[coords], ...]")
    p.add_argument("--dx", help="displacement as JSON [[coords], ...]")
    _add_common(p)
    p.set_defaults(func=_cmd_derive)

    p = sub.add_parser("eval", help="evaluate a map at a point")
    p.add_argument("source")
    p.add_argument("--n-in", type=int, required=True)
    p.add_argument("--at", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("fd-check", help="compare symbolic and finite differences")
    p.add_argument("source")
    p.add_argument("--n-in", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    _add_common(p)
    p.set_defaults(func=_cmd_fd_check)

    p = sub.add_parser("group-verify", help="run the full identity suite on a group")
    p.add_argument("group", help="builtin name, JSON file, or inline JSON")
    _add_common(p)
    p.set_defaults(func=_cmd_group_verify)

    p = sub.add_parser("structconst", help="structure constants of a group")
    p.add_argument("group")
    p.add_argument("--side", choices=("left", "right", "both"), default="both")
    _add_common(p)
    p.set_defaults(func=_cmd_structconst)

    p = sub.add_parser("bracket", help="bracket of two tangent tuples")
    p.add_argument("group")
    p.add_argument("--side", choices=("left", "right"), default="left")
    p.add_argument("--v", required=True, help="tangent tuple as JSON")
    p.add_argument("--w", required=True, help="tangent tuple as JSON")
    _add_common(p)
    p.set_defaults(func=_cmd_bracket)

    p = sub.add_parser("anholonomy", help="anholonomy of a frame at a point")
    p.add_argument("frame", help="frame JSON ({n, entries}) or a file holding it")
    p.add_argument("--at", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_anholonomy)

    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EVAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SPEC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SpreadTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())

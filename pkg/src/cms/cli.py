"""Command-line frontend: batch subcommands over the library.

Exit codes: 0 success, 1 contract violation / failed check, 2 usage error.
Output is human-readable by default; ``--format json`` emits one JSON object
with exact dyadic fields plus decimal conveniences.
"""

from __future__ import annotations

import argparse
import json
import sys

from .dyadic import Dyadic, DyadicInterval, dy
from .errors import CmsError, ParseError
from .expr import parse as parse_expr
from .frechet import frechet_loops, frechet_paths, load_curve
from .convex import body_to_json, isoperimetric, load_body, surface, volume
from .functions import eval_from_graph, graph_from_function
from .names import PointName, hausdorff_between, load_fixture
from .optimize import OptProblem, feasible_region, maximize
from .spaces import covering_check, cube, parse_space_id, unit_interval
from . import selfcheck

__all__ = ["main"]


_DECIMAL_PLACES = 18


def _dec(x: Dyadic) -> str:
    return x.decimal(max_places=_DECIMAL_PLACES)


def _interval_payload(iv: DyadicInterval) -> dict:
    return {
        "lo": str(iv.lo),
        "hi": str(iv.hi),
        "lo_decimal": _dec(iv.lo),
        "hi_decimal": _dec(iv.hi),
        "width": str(iv.width()),
    }


def _emit(args, payload: dict, human_lines) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in human_lines:
            print(line)


def _read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _cmd_frechet(args) -> int:
    a = load_curve(_read_json(args.a))
    b = load_curve(_read_json(args.b))
    runner = frechet_loops if a.topology == "loop" else frechet_paths
    result = runner(a, b, args.orientation, args.precision)
    payload = {
        "command": "frechet",
        "enclosure": _interval_payload(result.enclosure),
        "resolution": result.resolution,
        "orientation": args.orientation,
    }
    lines = [
        f"frechet enclosure [{result.enclosure.lo}, {result.enclosure.hi}]"
        f" ~ [{_dec(result.enclosure.lo)}, {_dec(result.enclosure.hi)}]",
        f"resolution level {result.resolution}",
    ]
    if args.witness:
        payload["witness"] = [[i, j] for i, j in result.witness]
        payload["shift"] = result.shift
        lines.append(f"witness coupling of {len(result.witness)} pairs, shift {result.shift}")
    _emit(args, payload, lines)
    return 0


def _cmd_hausdorff(args) -> int:
    a = load_fixture(_read_json(args.a)).oracle_name()
    b = load_fixture(_read_json(args.b)).oracle_name()
    enc = hausdorff_between(a, b, args.precision)
    _emit(
        args,
        {"command": "hausdorff", "enclosure": _interval_payload(enc)},
        [f"hausdorff enclosure [{enc.lo}, {enc.hi}] ~ [{_dec(enc.lo)}, {_dec(enc.hi)}]"],
    )
    return 0


def _cmd_volume(args) -> int:
    body = load_body(_read_json(args.body))
    v = volume(body)
    _emit(
        args,
        {"command": "volume", "volume": str(v), "volume_decimal": _dec(v),
         "body": body_to_json(body)},
        [f"volume {v} ~ {_dec(v)} ({len(body.vertices)} hull vertices)"],
    )
    return 0


def _cmd_surface(args) -> int:
    body = load_body(_read_json(args.body))
    enc = surface(body, args.precision)
    _emit(
        args,
        {"command": "surface", "enclosure": _interval_payload(enc)},
        [f"surface enclosure [{enc.lo}, {enc.hi}] ~ [{_dec(enc.lo)}, {_dec(enc.hi)}]"],
    )
    return 0


def _cmd_isoperimetric(args) -> int:
    result = isoperimetric(args.precision, max_gon=args.max_gon)
    payload = {
        "command": "isoperimetric",
        "enclosure": _interval_payload(result.enclosure),
        "best_gon": result.gon,
        "best_volume": str(result.best_volume),
        "perimeter": _interval_payload(result.perimeter),
    }
    lines = [
        f"isoperimetric enclosure ~ [{_dec(result.enclosure.lo)}, {_dec(result.enclosure.hi)}]",
        f"best feasible body: {result.gon}-gon family, area ~ {_dec(result.best_volume)}",
        f"perimeter certificate ~ [{_dec(result.perimeter.lo)}, {_dec(result.perimeter.hi)}] <= 1",
    ]
    _emit(args, payload, lines)
    return 0


def _cmd_optimize(args) -> int:
    problem = OptProblem.from_text(args.dim, args.objective, args.constraint)
    result = maximize(problem, args.precision, budget=args.budget)
    payload = {
        "command": "optimize",
        "enclosure": _interval_payload(result.enclosure),
        "status": result.status,
        "cells": result.cells_processed,
    }
    lines = [
        f"optimum enclosure [{result.enclosure.lo}, {result.enclosure.hi}]"
        f" ~ [{_dec(result.enclosure.lo)}, {_dec(result.enclosure.hi)}]",
        f"status {result.status} after {result.cells_processed} cells",
    ]
    if result.witness is not None:
        box = [f"[{_dec(iv.lo)}, {_dec(iv.hi)}]" for iv in result.witness]
        payload["witness_box"] = [[str(iv.lo), str(iv.hi)] for iv in result.witness]
        lines.append("witness box " + " x ".join(box))
    _emit(args, payload, lines)
    return 0 if result.status != "infeasible-at-budget" else 1


def _cmd_eval(args) -> int:
    e = parse_expr(args.function)
    from .functions import expr_function

    f = expr_function(e, dy(args.window_lo), dy(args.window_hi), dim=args.dim)
    graph = graph_from_function(f)
    coords = tuple(dy(c.strip()) for c in args.point.split(","))
    if len(coords) != args.dim:
        raise ParseError(f"expected {args.dim} coordinates")
    space = cube(args.dim)
    point = PointName.from_value(space, coords if args.dim > 1 else coords[0])
    idx = eval_from_graph(graph, point, args.precision)
    value = unit_interval().point(idx)
    raw = dy(args.window_lo) + value * (dy(args.window_hi) - dy(args.window_lo))
    payload = {
        "command": "eval",
        "presented_value": str(value),
        "window_value": str(raw),
        "window_value_decimal": _dec(raw),
        "precision": args.precision,
    }
    _emit(
        args,
        payload,
        [f"value {raw} ~ {_dec(raw)} (presented {value}, error <= 2^-{args.precision} presented)"],
    )
    return 0


def _cmd_spaces_check(args) -> int:
    space = parse_space_id(args.space)
    failures = 0
    lines = []
    for m in range(0, args.max_level + 1):
        ok, gap = covering_check(space, m, m + 4)
        lines.append(f"covering m={m}: {'ok' if ok else 'FAIL'} (worst gap {_dec(gap)})")
        if not ok:
            failures += 1
    rounding_defects = selfcheck.rounding_defects(space, args.max_level)
    lines.append(
        f"rounding contract: {'ok' if not rounding_defects else f'{rounding_defects} FAILURES'}"
    )
    failures += rounding_defects
    payload = {
        "command": "spaces-check",
        "space": args.space,
        "failures": failures,
    }
    _emit(args, payload, lines)
    return 0 if failures == 0 else 1


def _cmd_selftest(args) -> int:
    report = selfcheck.run(seed=args.seed)
    lines = [f"{'PASS' if ok else 'FAIL'} {name}{'' if not note else ' — ' + note}"
             for name, ok, note in report]
    failures = sum(1 for _, ok, _ in report if not ok)
    payload = {
        "command": "selftest",
        "seed": args.seed,
        "results": [{"name": n, "pass": ok, "note": note} for n, ok, note in report],
        "failures": failures,
    }
    _emit(args, payload, lines + [f"{failures} failures"])
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cms",
        description="Certified computations on presented compact metric spaces.",
    )
    parser.add_argument("--format", choices=("human", "json"), default="human")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("frechet", help="certified Frechet distance between two curve files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--precision", type=int, required=True)
    p.add_argument("--orientation", choices=("oriented", "unoriented"), default="oriented")
    p.add_argument("--witness", action="store_true")
    p.set_defaults(func=_cmd_frechet)

    p = sub.add_parser("hausdorff", help="Hausdorff distance between two fixture-set files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--precision", type=int, required=True)
    p.set_defaults(func=_cmd_hausdorff)

    p = sub.add_parser("volume", help="exact volume of a convex body file")
    p.add_argument("--body", required=True)
    p.set_defaults(func=_cmd_volume)

    p = sub.add_parser("surface", help="surface enclosure of a convex body file")
    p.add_argument("--body", required=True)
    p.add_argument("--precision", type=int, required=True)
    p.set_defaults(func=_cmd_surface)

    p = sub.add_parser("isoperimetric", help="two-sided isoperimetric enclosure")
    p.add_argument("--precision", type=int, default=10)
    p.add_argument("--max-gon", type=int, default=64)
    p.set_defaults(func=_cmd_isoperimetric)

    p = sub.add_parser("optimize", help="certified constrained maximization")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--objective", required=True)
    p.add_argument("--constraint", required=True)
    p.add_argument("--precision", type=int, required=True)
    p.add_argument("--budget", type=int, default=200_000)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("eval", help="evaluate an expression through its graph name")
    p.add_argument("--function", required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--point", required=True, help="comma-separated dyadic coordinates")
    p.add_argument("--precision", type=int, default=8)
    p.add_argument("--window-lo", default="0")
    p.add_argument("--window-hi", default="1")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("spaces-check", help="covering and rounding validators")
    p.add_argument("--space", required=True)
    p.add_argument("--max-level", type=int, default=6)
    p.set_defaults(func=_cmd_spaces_check)

    p = sub.add_parser("selftest", help="run the condensed property suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except ParseError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (CmsError, OSError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

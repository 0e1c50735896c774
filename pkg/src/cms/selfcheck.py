"""Condensed property suite runnable without a test framework.

Each check returns (name, passed, note); the CLI's selftest subcommand
prints and aggregates them. The pytest suite covers the same ground (and
much more) with finer assertions.
"""

from __future__ import annotations

import random

from .dyadic import D0, D1, Dyadic, DyadicInterval, dy, pow2, round_to, sqrt_enclosure
from .expr import eval_interval, eval_point, lipschitz_bound, parse
from .names import load_fixture, select_point, standardize, union
from .spaces import cantor, circle, covering_check, cube, unit_interval

__all__ = ["run", "rounding_defects"]


def rounding_defects(space, max_level: int, extra_levels: int = 3, cap: int = 4096) -> int:
    """Count rounding-contract violations over (subsampled) finer indices."""
    bad = 0
    for m in range(0, max_level + 1):
        for j in range(1, extra_levels + 1):
            count = space.level_count(m + j)
            stride = max(1, count // cap)
            for u in range(0, count, stride):
                r = space.round_index(u, m)
                if r >= space.level_count(m):
                    bad += 1
                    continue
                if space.distance_enclosure(r, u, m + j + 2).lo > pow2(m + 1):
                    bad += 1
    return bad


def _check_dyadic(rng: random.Random):
    from fractions import Fraction

    for _ in range(500):
        a = Dyadic(rng.randrange(-1 << 20, 1 << 20), rng.randrange(0, 20))
        b = Dyadic(rng.randrange(-1 << 20, 1 << 20), rng.randrange(0, 20))
        if (a + b).as_fraction() != a.as_fraction() + b.as_fraction():
            return False, "addition mismatch"
        if (a * b).as_fraction() != a.as_fraction() * b.as_fraction():
            return False, "multiplication mismatch"
        k = rng.randrange(0, 16)
        r = round_to(a, k)
        if abs(r - a) > pow2(k + 1):
            return False, "round_to bound"
        if round_to(r, k) != r:
            return False, "round_to idempotence"
    for _ in range(200):
        lo = Dyadic(rng.randrange(0, 1 << 16), 10)
        hi = lo + Dyadic(rng.randrange(0, 1 << 8), 10)
        k = rng.randrange(2, 24)
        enc = sqrt_enclosure(DyadicInterval(lo, hi), k)
        if enc.lo * enc.lo > hi or enc.hi * enc.hi < lo:
            return False, "sqrt containment"
    return True, ""


def _check_spaces(_rng):
    for space in (unit_interval(), circle(), cantor(), cube(2)):
        for m in range(0, 5):
            ok, _gap = covering_check(space, m, m + 4)
            if not ok:
                return False, f"covering {space.space_id} m={m}"
        if rounding_defects(space, 4, cap=512):
            return False, f"rounding {space.space_id}"
    return True, ""


def _check_names(_rng):
    fx = load_fixture(
        {"space": "interval", "kind": "finite", "points": [["1/2"]]}
    )
    name = fx.oracle_name()
    for m in range(0, 8):
        if fx.hausdorff_defect(name, m).sign > 0:
            return False, f"oracle cover defect m={m}"
    sel = select_point(name)
    if sel.consistency_defect(8).sign > 0:
        return False, "selected point inconsistent"
    std = standardize(fx.oracle_name(window=lambda m: Dyadic(15, 4) * pow2(m)))
    for m in range(0, 6):
        cover = set(std.query(m))
        for u in unit_interval().enumerate_level(m):
            d = fx.distance_to(u)
            if u in cover and not d < pow2(m):
                return False, "standard window (in)"
            if u not in cover and not d > pow2(m + 1):
                return False, "standard window (out)"
    return True, ""


def _check_expr(rng: random.Random):
    exprs = [parse(t) for t in ("x0", "x0 + x1", "abs(x0 - 1/2)", "max(x0, x1) * 1/4")]
    for e in exprs:
        lip = lipschitz_bound(e, 2)
        box = (DyadicInterval(D0, D1), DyadicInterval(D0, D1))
        rng_enc = eval_interval(e, box)
        for _ in range(64):
            p = (Dyadic(rng.randrange(0, 257), 8), Dyadic(rng.randrange(0, 257), 8))
            v = eval_point(e, p)
            if not rng_enc.contains(v):
                return False, "range soundness"
        h = pow2(8)
        for _ in range(64):
            x = Dyadic(rng.randrange(0, 255), 8)
            y = Dyadic(rng.randrange(0, 257), 8)
            v1 = eval_point(e, (x, y))
            v2 = eval_point(e, (x + h, y))
            if abs(v1 - v2) > lip * h:
                return False, "lipschitz bound"
    return True, ""


def _check_frechet(rng: random.Random):
    from .frechet import discrete_frechet

    for _ in range(25):
        P = [
            (Dyadic(rng.randrange(0, 64), 6), Dyadic(rng.randrange(0, 64), 6))
            for _ in range(rng.randrange(1, 6))
        ]
        Q = [
            (Dyadic(rng.randrange(0, 64), 6), Dyadic(rng.randrange(0, 64), 6))
            for _ in range(rng.randrange(1, 6))
        ]
        value, witness = discrete_frechet(P, Q)
        best = _brute_frechet(P, Q)
        if value != best:
            return False, "discrete DP vs brute force"
    return True, ""


def _brute_frechet(P, Q):
    from .dyadic import interval_max_metric

    best = [None]

    def rec(i, j, cur):
        d = interval_max_metric(P[i], Q[j])
        if d > cur:
            cur = d
        if best[0] is not None and cur >= best[0]:
            return
        if i == len(P) - 1 and j == len(Q) - 1:
            best[0] = cur
            return
        if i < len(P) - 1:
            rec(i + 1, j, cur)
        if j < len(Q) - 1:
            rec(i, j + 1, cur)
        if i < len(P) - 1 and j < len(Q) - 1:
            rec(i + 1, j + 1, cur)

    rec(0, 0, D0)
    return best[0]


def _check_convex(rng: random.Random):
    from .convex import hausdorff_convex, hull, volume

    for _ in range(40):
        pts1 = [
            (Dyadic(rng.randrange(0, 65), 6), Dyadic(rng.randrange(0, 65), 6))
            for _ in range(rng.randrange(3, 9))
        ]
        pts2 = [
            (Dyadic(rng.randrange(0, 65), 6), Dyadic(rng.randrange(0, 65), 6))
            for _ in range(rng.randrange(3, 9))
        ]
        b1, b2 = hull(pts1), hull(pts2)
        dv = abs(volume(b1) - volume(b2))
        h = hausdorff_convex(b1, b2, 18)
        if dv > Dyadic(4) * h.hi + pow2(16):
            return False, "volume lipschitz"
    return True, ""


def _check_optimize(_rng):
    from .optimize import OptProblem, maximize

    p = OptProblem.from_text(1, "x0", "x0 - 1/2")
    r = maximize(p, 10)
    if not (r.enclosure.contains(dy("1/2")) and r.enclosure.width() <= pow2(10)):
        return False, "fixture optimum"
    return True, ""


def run(seed: int = 0):
    checks = [
        ("dyadic arithmetic and rounding", _check_dyadic),
        ("space covering and rounding contracts", _check_spaces),
        ("name covers, selection, standardization", _check_names),
        ("expression enclosures and lipschitz bounds", _check_expr),
        ("discrete frechet vs brute force", _check_frechet),
        ("convex volume lipschitz", _check_convex),
        ("optimizer fixture", _check_optimize),
    ]
    report = []
    for name, fn in checks:
        rng = random.Random(seed)
        try:
            ok, note = fn(rng)
        except Exception as e:  # diagnosability over crash
            ok, note = False, f"{type(e).__name__}: {e}"
        report.append((name, ok, note))
    return report

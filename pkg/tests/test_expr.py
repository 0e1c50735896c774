import pytest

from cms.dyadic import D0, D1, Dyadic, DyadicInterval, dy, pow2
from cms.errors import ParseError
from cms.expr import (
    Binary,
    Const,
    Coord,
    Unary,
    arity,
    eval_interval,
    eval_point,
    lipschitz_bound,
    parse,
    to_text,
)

UNIT = DyadicInterval(D0, D1)


def test_parse_examples():
    e = parse("x0 - 1/2")
    assert e == Binary("sub", Coord(0), Const(dy("1/2")))
    e2 = parse("max(x0, x1) * 1/4")
    assert e2 == Binary("mul", Binary("max", Coord(0), Coord(1)), Const(dy("1/4")))


def test_parse_rejects_non_dyadic():
    with pytest.raises(ParseError):
        parse("1/3")
    with pytest.raises(ParseError):
        parse("0.2")


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse("x0 + ")
    assert "at" in str(e.value)
    with pytest.raises(ParseError):
        parse("foo(x0)")
    with pytest.raises(ParseError):
        parse("x0 x1")


def test_eval_interval_examples():
    e = parse("x0 - 1/2")
    assert eval_interval(e, (UNIT,)) == DyadicInterval(dy("-1/2"), dy("1/2"))
    point = (DyadicInterval.point(dy("3/4")),)
    assert eval_interval(e, point) == DyadicInterval.point(dy("1/4"))
    e2 = parse("min(x0, x1)")
    assert eval_interval(e2, (UNIT, UNIT)) == UNIT


def test_eval_point_matches_interval_at_points(rng):
    exprs = [
        parse(t)
        for t in (
            "x0",
            "abs(x0 - 1/2)",
            "x0 * x0",
            "min(x0, x1) + max(x0, x1)",
            "neg(x0) + 1",
            "(x0 - x1) * (x0 + x1)",
        )
    ]
    for e in exprs:
        d = max(arity(e), 1)
        for _ in range(40):
            p = tuple(Dyadic(rng.randrange(0, 257), 8) for _ in range(d))
            box = tuple(DyadicInterval.point(c) for c in p)
            assert eval_interval(e, box) == DyadicInterval.point(eval_point(e, p))


def random_expr(rng, depth, dim):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return Coord(rng.randrange(dim))
        return Const(Dyadic(rng.randrange(-8, 9), 3))
    op = rng.choice(["add", "sub", "mul", "min", "max", "abs", "neg"])
    if op in ("abs", "neg"):
        return Unary(op, random_expr(rng, depth - 1, dim))
    return Binary(op, random_expr(rng, depth - 1, dim), random_expr(rng, depth - 1, dim))


def test_soundness_on_random_exprs(rng):
    for _ in range(200):
        dim = rng.randrange(1, 3)
        e = random_expr(rng, 3, dim)
        lo = tuple(Dyadic(rng.randrange(0, 200), 8) for _ in range(dim))
        box = tuple(
            DyadicInterval(c, min(c + Dyadic(rng.randrange(1, 57), 8), D1)) for c in lo
        )
        enc = eval_interval(e, box)
        for _ in range(64):
            p = tuple(
                iv.lo + Dyadic(rng.randrange(0, 17), 4) * (iv.hi - iv.lo).halve().halve().halve().halve()
                for iv in box
            )
            assert all(iv.lo <= c <= iv.hi for c, iv in zip(p, box))
            assert enc.contains(eval_point(e, p))


def test_monotone_refinement(rng):
    for _ in range(120):
        dim = rng.randrange(1, 3)
        e = random_expr(rng, 3, dim)
        box = tuple(DyadicInterval(D0, D1) for _ in range(dim))
        whole = eval_interval(e, box)
        axis = rng.randrange(dim)
        mid = box[axis].midpoint()
        left = box[:axis] + (DyadicInterval(box[axis].lo, mid),) + box[axis + 1 :]
        right = box[:axis] + (DyadicInterval(mid, box[axis].hi),) + box[axis + 1 :]
        hullenc = eval_interval(e, left).hull(eval_interval(e, right))
        assert whole.contains_interval(hullenc)


def test_lipschitz_examples():
    assert lipschitz_bound(parse("x0")) == dy(1)
    assert lipschitz_bound(parse("x0 + x1")) == dy(2)
    assert lipschitz_bound(parse("x0 * x0")) <= dy(2)


def test_lipschitz_by_finite_differences(rng):
    h = pow2(8)
    for _ in range(60):
        dim = rng.randrange(1, 3)
        e = random_expr(rng, 3, dim)
        lip = lipschitz_bound(e, dim)
        for _ in range(48):
            p = tuple(Dyadic(rng.randrange(0, 255), 8) for _ in range(dim))
            axis = rng.randrange(dim)
            q = tuple(c + h if i == axis else c for i, c in enumerate(p))
            diff = abs(eval_point(e, p) - eval_point(e, q))
            assert diff <= lip * h + pow2(20)


def test_print_parse_roundtrip(rng):
    for _ in range(150):
        e = random_expr(rng, 3, 2)
        text = to_text(e)
        again = parse(text)
        assert to_text(again) == text
        p = (dy("5/8"), dy("3/16"))
        assert eval_point(again, p) == eval_point(e, p)

import random

import pytest

from cms.dyadic import D0, D1, Dyadic, dy, pow2
from cms.errors import CapExceeded, ContractViolation
from cms.expr import eval_point, lipschitz_bound, parse, to_function
from cms.functions import (
    Modulus,
    compose,
    constant_fn,
    curry,
    eval_from_graph,
    expr_function,
    graph_from_function,
    identity_fn,
    image,
    modulus_from_graph,
    preimage_regular,
    restrict,
)
from cms.names import PointName, load_fixture, space_as_name
from cms.spaces import cube, product, unit_interval

UI = unit_interval()


def fixture(kind, *points):
    return load_fixture(
        {"space": "interval", "kind": kind, "points": [[p] for p in points]}
    )


def graph_defect_against(graph, m, fn, lip):
    """Exact-ish audit of Hausdorff(graph cover, analytic graph) <= 2**(-m):
    outward via pointwise values, inward via a fine parameter grid."""
    space = graph.space
    cover = [space.unpair(w) for w in graph.query(m)]
    pts = [(UI.point(u), UI.point(v)) for u, v in cover]
    bound = pow2(m)
    # Every cover point near the graph: search parameters on a fine grid
    # around the first coordinate (the function is lip-Lipschitz).
    fine = m + 6
    for x, y in pts:
        ok = False
        lo = max(D0, x - bound)
        t = lo
        while t <= min(D1, x + bound):
            if max(abs(t - x), abs(fn(t) - y)) <= bound + lip * pow2(fine):
                ok = True
                break
            t = t + pow2(fine)
        if not ok:
            return False
    # Every graph point near the cover.
    steps = 1 << (m + 2)
    for i in range(steps + 1):
        t = Dyadic(i, m + 2)
        y = fn(t)
        best = min(max(abs(t - x), abs(y - v)) for x, v in pts)
        if best > bound:
            return False
    return True


def test_graph_of_identity():
    g = graph_from_function(identity_fn(UI))
    space = g.space
    for m in (3, 5):
        for w in g.query(m):
            u, v = space.unpair(w)
            assert abs(UI.point(u) - UI.point(v)) <= pow2(m)


def test_graph_of_constant():
    c = constant_fn(UI, PointName.from_value(UI, D0))
    g = graph_from_function(c)
    space = g.space
    for m in (3, 5):
        xs = set()
        for w in g.query(m):
            u, v = space.unpair(w)
            assert abs(UI.point(v)) <= pow2(m)
            xs.add(UI.point(u))
        # first coordinates must cover the whole domain
        for p in UI.enumerate_level(m + 3):
            assert min(abs(UI.point(p) - x) for x in xs) <= pow2(m)


def test_graph_of_halving_map():
    f = to_function(parse("x0 * 1/2"), 0, 1)
    g = graph_from_function(f)
    assert graph_defect_against(g, 6, lambda t: t.halve(), dy(1))


def test_finite_map_ball_contract(rng):
    texts = ["x0", "x0 * 1/2", "abs(x0 - 1/2)", "max(x0 * 1/2, abs(x0 - 3/4))"]
    for text in texts:
        e = parse(text)
        f = to_function(e, 0, 1)
        for n in (4, 7):
            level = f.modulus(n)
            for _ in range(40):
                a = rng.randrange(UI.level_count(level))
                out = UI.point(f.finite_map(n, a))
                x0 = UI.point(a)
                for dt in (-pow2(level), D0, pow2(level)):
                    x = x0 + dt
                    if x < D0 or x > D1:
                        continue
                    assert abs(out - eval_point(e, (x,))) <= pow2(n)


def test_eval_from_graph_identity():
    g = graph_from_function(identity_fn(UI))
    x = PointName.from_value(UI, dy("1/2"))
    v = eval_from_graph(g, x, 6)
    assert abs(UI.point(v) - dy("1/2")) < pow2(6)


def test_eval_from_graph_constant():
    c = constant_fn(UI, PointName.from_value(UI, dy("3/4")))
    g = graph_from_function(c)
    for t in ("0", "1/2", "15/16"):
        v = eval_from_graph(g, PointName.from_value(UI, dy(t)), 6)
        assert abs(UI.point(v) - dy("3/4")) < pow2(6)


def test_eval_from_graph_piecewise():
    f = to_function(parse("max(0, x0 - 1/4)"), 0, 1)
    g = graph_from_function(f)
    v = eval_from_graph(g, PointName.from_value(UI, dy("1/2")), 8)
    assert abs(UI.point(v) - dy("1/4")) < pow2(8)


def test_eval_from_graph_cap_diagnosis():
    # A graph restricted to [0,1/4] has no data near 3/4.
    f = to_function(parse("x0"), 0, 1)
    g = restrict(graph_from_function(f), fixture("interval-hull", "0", "1/4").oracle_name())
    with pytest.raises(CapExceeded):
        eval_from_graph(g, PointName.from_value(UI, dy("3/4")), 4, cap=7)


def test_modulus_from_graph():
    g_id = graph_from_function(identity_fn(UI))
    m_id = modulus_from_graph(g_id, 5)
    assert m_id <= 8
    assert m_id == 7  # scan starts at n+2 and the identity passes immediately
    c = constant_fn(UI, PointName.from_value(UI, dy("1/4")))
    m_const = modulus_from_graph(graph_from_function(c), 5)
    assert m_const == 7  # vacuous pass at the first scanned level
    g_half = graph_from_function(to_function(parse("x0 * 1/2"), 0, 1))
    assert modulus_from_graph(g_half, 5) <= m_id


def test_modulus_feeds_back_as_valid_modulus(rng):
    e = parse("abs(x0 - 1/2)")
    f = to_function(e, 0, 1)
    g = graph_from_function(f)
    n = 5
    m = modulus_from_graph(g, n)
    # check on a fine grid: d(x,x') <= 2**(-m-1) forces values within
    # 2**(-n) + slack from the certificate
    allowed = pow2(n) + pow2(m) + pow2(m + 1)
    for _ in range(200):
        i = rng.randrange(0, (1 << 10) - (1 << (10 - m - 1)))
        x1 = Dyadic(i, 10)
        x2 = x1 + pow2(m + 1)
        assert abs(eval_point(e, (x1,)) - eval_point(e, (x2,))) <= allowed


def test_restrict_to_point():
    g = graph_from_function(identity_fn(UI))
    r = restrict(g, fixture("finite", "1/2").oracle_name())
    space = r.space
    for m in (3, 5):
        for w in r.query(m):
            u, v = space.unpair(w)
            assert abs(UI.point(u) - dy("1/2")) <= pow2(m)
            assert abs(UI.point(v) - dy("1/2")) <= pow2(m)


def test_restrict_to_full_domain_keeps_graph():
    f = to_function(parse("x0 * 1/2"), 0, 1)
    g = graph_from_function(f)
    r = restrict(g, space_as_name(UI))
    assert graph_defect_against(r, 5, lambda t: t.halve(), dy(1))


def test_restrict_to_left_half():
    f = to_function(parse("x0 * 1/2"), 0, 1)
    r = restrict(graph_from_function(f), fixture("interval-hull", "0", "1/2").oracle_name())
    space = r.space
    for m in (4, 6):
        cover = [space.unpair(w) for w in r.query(m)]
        for u, v in cover:
            x, y = UI.point(u), UI.point(v)
            assert x <= dy("1/2") + pow2(m)
            assert abs(y - x.halve()) <= pow2(m - 1) + pow2(m)
        # the restricted graph is fully covered
        steps = 1 << (m + 2)
        for i in range(steps // 2 + 1):
            t = Dyadic(i, m + 2)
            best = min(
                max(abs(t - UI.point(u)), abs(t.halve() - UI.point(v)))
                for u, v in cover
            )
            assert best <= pow2(m)


def test_image_examples():
    ident = image(identity_fn(UI))
    full = fixture("interval-hull", "0", "1")
    for m in range(0, 7):
        assert full.hausdorff_defect(ident, m).sign == 0
    const = image(constant_fn(UI, PointName.from_value(UI, dy("1/4"))))
    quarter = fixture("finite", "1/4")
    for m in range(0, 8):
        assert quarter.hausdorff_defect(const, m).sign == 0
    half_img = image(to_function(parse("x0 * 1/2"), 0, 1))
    left = fixture("interval-hull", "0", "1/2")
    for m in range(0, 7):
        assert left.hausdorff_defect(half_img, m).sign == 0


def test_preimage_identity_full():
    f = to_function(parse("x0"), 0, 1)
    pre = preimage_regular(f, space_as_name(UI), depth=6)
    full = fixture("interval-hull", "0", "1")
    for m in range(0, 6):
        assert full.hausdorff_defect(pre, m).sign == 0


def test_preimage_shifted_halfline():
    # raw f(x) = x - 1/2 through the window [-1,1]; target raw [-1,0].
    f = to_function(parse("x0 - 1/2"), -1, 1)
    target = fixture("interval-hull", "0", "1/2").oracle_name()  # presented [-1,0]
    pre = preimage_regular(f, target, depth=8)
    left = fixture("interval-hull", "0", "1/2")
    for m in range(0, 6):
        assert left.hausdorff_defect(pre, m).sign == 0


def test_preimage_vee():
    # raw f(x) = |x - 1/2| through [0,1]; target raw [0,1/4] -> [1/4,3/4].
    f = to_function(parse("abs(x0 - 1/2)"), 0, 1)
    target = fixture("interval-hull", "0", "1/4").oracle_name()
    pre = preimage_regular(f, target, depth=8)
    band = fixture("interval-hull", "1/4", "3/4")
    for m in range(0, 6):
        assert band.hausdorff_defect(pre, m).sign == 0


def test_curry_projections():
    c2 = cube(2)
    second = to_function(parse("x1"), 0, 1)
    cur = curry(second, PointName.from_value(UI, dy("5/8")))
    for t in ("0", "1/2", "7/8"):
        got = cur.finite_map(7, UI.nearest_index(dy(t), cur.modulus(7)))
        assert abs(UI.point(got) - dy(t)) <= pow2(7)
    first = to_function(parse("x0"), 0, 1, dim=2)
    cur2 = curry(first, PointName.from_value(UI, dy("1/2")))
    for t in ("0", "3/4"):
        got = cur2.finite_map(7, UI.nearest_index(dy(t), cur2.modulus(7)))
        assert abs(UI.point(got) - dy("1/2")) <= pow2(7)


def test_curry_max(rng):
    f = to_function(parse("max(x0, x1)"), 0, 1)
    cur = curry(f, PointName.from_value(UI, dy("1/2")))
    for t in ("0", "1/4", "3/4"):
        got = cur.finite_map(8, UI.nearest_index(dy(t), cur.modulus(8)))
        assert abs(UI.point(got) - max(dy("1/2"), dy(t))) <= pow2(8)


def test_compose():
    half = to_function(parse("x0 * 1/2"), 0, 1)
    quarter = compose(half, half)
    assert quarter.modulus(5) == half.modulus(half.modulus(5))
    for t in ("0", "1/2", "1"):
        a = UI.nearest_index(dy(t), quarter.modulus(6))
        got = UI.point(quarter.finite_map(6, a))
        assert abs(got - dy(t).halve().halve()) <= pow2(5)
    ident = identity_fn(UI)
    both = compose(ident, ident)
    for t in ("0", "5/8"):
        a = UI.nearest_index(dy(t), both.modulus(6))
        assert abs(UI.point(both.finite_map(6, a)) - dy(t)) <= pow2(5)
    const = constant_fn(UI, PointName.from_value(UI, dy("3/8")))
    cc = compose(half, const)
    for t in ("0", "1"):
        a = UI.nearest_index(dy(t), cc.modulus(6))
        assert abs(UI.point(cc.finite_map(6, a)) - dy("3/8")) <= pow2(6)


def _random_function(rng):
    # Small dyadic-affine compositions keep the Lipschitz bound <= 2.
    pieces = [
        f"x0 * {rng.choice(['1/2', '1/4', '1'])}",
        f"abs(x0 - {rng.choice(['1/4', '1/2', '3/4'])})",
        f"{rng.choice(['1/4', '1/2'])}",
    ]
    a = rng.choice(pieces)
    b = rng.choice(pieces)
    op = rng.choice(["min", "max"])
    text = f"{op}({a}, {b})"
    if rng.random() < 0.5:
        text = f"({text} + {rng.choice(['0', '1/8', '1/4'])}) * 1/2"
    e = parse(text)
    if lipschitz_bound(e, 1) > dy(2):
        return _random_function(rng)
    return e


def test_eval_graph_roundtrip_sampled(rng):
    violations = 0
    for _ in range(12):
        e = _random_function(rng)
        f = to_function(e, 0, 1)
        g = graph_from_function(f)
        for _ in range(16):
            x = Dyadic(rng.randrange(0, (1 << 12) + 1), 12)
            v = eval_from_graph(g, PointName.from_value(UI, x), 8)
            direct = f.finite_map(8, UI.nearest_index(x, f.modulus(8)))
            if abs(UI.point(v) - UI.point(direct)) > pow2(7):
                violations += 1
    assert violations == 0


def test_graph_metric_sandwich(rng):
    # Hausdorff(graphs) <= sup-distance <= lip * H + H on sampled pairs.
    pairs = [
        ("x0 * 1/2", "x0 * 1/2 + 1/8"),
        ("abs(x0 - 1/2)", "abs(x0 - 1/2) * 1/2"),
        ("max(x0, 1/2)", "min(x0, 1/2)"),
    ]
    level = 8
    for ta, tb in pairs:
        ea, eb = parse(ta), parse(tb)
        fa = to_function(ea, 0, 1)
        fb = to_function(eb, 0, 1)
        ga, gb = graph_from_function(fa), graph_from_function(fb)
        pa = [ga.space.unpair(w) for w in ga.query(level)]
        pb = [gb.space.unpair(w) for w in gb.query(level)]
        va = [(UI.point(u), UI.point(v)) for u, v in pa]
        vb = [(UI.point(u), UI.point(v)) for u, v in pb]

        def directed(src, dst):
            worst = D0
            for x, y in src:
                best = min(max(abs(x - p), abs(y - q)) for p, q in dst)
                if best > worst:
                    worst = best
            return worst

        h = max(directed(va, vb), directed(vb, va))
        sup = D0
        for i in range(257):
            t = Dyadic(i, 8)
            d = abs(eval_point(ea, (t,)) - eval_point(eb, (t,)))
            if d > sup:
                sup = d
        slack = pow2(level - 1)
        lip = max(lipschitz_bound(ea, 1), lipschitz_bound(eb, 1))
        assert h <= sup + slack
        assert sup <= lip * h + h + slack

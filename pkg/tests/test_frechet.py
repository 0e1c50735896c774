import random

import pytest

from conftest import brute_force_frechet, threshold_frechet

from cms.dyadic import D0, Dyadic, dy, interval_max_metric, pow2
from cms.errors import CapExceeded, DomainError
from cms.expr import parse, to_function
from cms.frechet import (
    Curve,
    chain_is_valid,
    curve_to_json,
    discrete_frechet,
    frechet_loops,
    frechet_paths,
    go_chain_covers,
    lip2_factorize,
    load_curve,
)


def segment(level, fn):
    return tuple((Dyadic(i, level), fn(Dyadic(i, level))) for i in range((1 << level) + 1))


def square_loop(half, level):
    # Perimeter walk of the axis-aligned square centered at (1/2,1/2); the
    # parametrization has Lipschitz bound 8*half.
    n = 1 << level
    c = dy("1/2")
    pts = []
    for i in range(n + 1):
        t = i % n
        side, tt = divmod(t, n // 4)
        s = Dyadic(tt * half.num * 8, half.exp + level)
        if side == 0:
            p = (c - half + s, c - half)
        elif side == 1:
            p = (c + half, c - half + s)
        elif side == 2:
            p = (c + half - s, c + half)
        else:
            p = (c - half, c + half - s)
        pts.append(p)
    return Curve("loop", tuple(pts), Dyadic(8, 0) * half)


def staircase(level, rng):
    ys = [D0]
    for _ in range(1 << level):
        ny = ys[-1] + Dyadic(rng.choice([-1, 0, 1]), level)
        ny = min(max(ny, D0), dy(1))
        ys.append(ny)
    return ys


def test_discrete_frechet_identical():
    P = [(D0, D0), (dy(1), dy(1))]
    v, w = discrete_frechet(P, P)
    assert v == D0
    assert w[0] == (0, 0) and w[-1] == (1, 1)


def test_discrete_frechet_vertical_offset():
    P = [(D0, D0), (dy(1), D0)]
    Q = [(D0, dy(1)), (dy(1), dy(1))]
    v, _ = discrete_frechet(P, Q)
    assert v == dy(1)


def test_discrete_frechet_empty_rejected():
    with pytest.raises(DomainError):
        discrete_frechet([], [(D0, D0)])


def test_discrete_frechet_matches_brute_force(rng):
    for _ in range(60):
        P = [
            (Dyadic(rng.randrange(0, 128), 7), Dyadic(rng.randrange(0, 128), 7))
            for _ in range(rng.randrange(1, 8))
        ]
        Q = [
            (Dyadic(rng.randrange(0, 128), 7), Dyadic(rng.randrange(0, 128), 7))
            for _ in range(rng.randrange(1, 8))
        ]
        v, w = discrete_frechet(P, Q)
        assert v == brute_force_frechet(P, Q)
        assert max(interval_max_metric(P[i], Q[j]) for i, j in w) == v


def test_discrete_frechet_matches_threshold_oracle(rng):
    for _ in range(40):
        P = [
            (Dyadic(rng.randrange(0, 256), 8), Dyadic(rng.randrange(0, 256), 8))
            for _ in range(rng.randrange(2, 13))
        ]
        Q = [
            (Dyadic(rng.randrange(0, 256), 8), Dyadic(rng.randrange(0, 256), 8))
            for _ in range(rng.randrange(2, 13))
        ]
        v, _ = discrete_frechet(P, Q)
        assert v == threshold_frechet(P, Q)


def test_python_fallback_agrees_with_numpy(rng):
    # Huge exponents force the exact big-int path.
    shift = Dyadic(1, 60)
    for _ in range(10):
        P = [
            (Dyadic(rng.randrange(0, 64), 6) + shift, Dyadic(rng.randrange(0, 64), 6))
            for _ in range(5)
        ]
        Q = [
            (Dyadic(rng.randrange(0, 64), 6), Dyadic(rng.randrange(0, 64), 6))
            for _ in range(5)
        ]
        v1, _ = discrete_frechet(P, Q)
        P0 = [(a - shift, b) for a, b in P]
        v2, _ = discrete_frechet(P0, Q)
        diff = abs(v1 - v2)
        assert diff <= shift  # same coupling structure, shifted first coord
        v3, _ = discrete_frechet(P, [(a + shift, b) for a, b in Q])
        assert v3 == v2


def test_frechet_paths_self_is_zero():
    a = Curve("path", segment(5, lambda t: t), dy(1))
    r = frechet_paths(a, a, "oriented", 8)
    assert r.enclosure.contains(D0)
    assert r.enclosure.hi <= pow2(8)


def test_frechet_paths_offset_fixture(rng):
    ys = staircase(10, rng)
    a = Curve("path", tuple((Dyadic(i, 10), ys[i]) for i in range((1 << 10) + 1)), dy(1))
    b = Curve(
        "path",
        tuple((Dyadic(i, 10), ys[i] + dy(1)) for i in range((1 << 10) + 1)),
        dy(1),
    )
    r = frechet_paths(a, b, "oriented", 8)
    assert r.enclosure.contains(dy(1))
    assert r.enclosure.width() <= pow2(8)


def test_frechet_paths_unoriented_reversal():
    a = Curve("path", segment(4, lambda t: t), dy(1))
    b = Curve("path", tuple(reversed(a.samples)), dy(1))
    r = frechet_paths(a, b, "unoriented", 8)
    assert r.enclosure.contains(D0)
    oriented = frechet_paths(a, b, "oriented", 4)
    assert oriented.enclosure.lo > pow2(3)  # forward matching cannot win


def test_frechet_paths_symmetry():
    rng = random.Random(5)
    ys1 = staircase(6, rng)
    ys2 = staircase(6, rng)
    a = Curve("path", tuple((Dyadic(i, 6), ys1[i]) for i in range(65)), dy(1))
    b = Curve("path", tuple((Dyadic(i, 6), ys2[i]) for i in range(65)), dy(1))
    rab = frechet_paths(a, b, "unoriented", 8)
    rba = frechet_paths(b, a, "unoriented", 8)
    assert rab.enclosure.intersects(rba.enclosure)


def test_frechet_paths_triangle_inequality():
    rng = random.Random(9)
    curves = []
    for _ in range(3):
        ys = staircase(6, rng)
        curves.append(Curve("path", tuple((Dyadic(i, 6), ys[i]) for i in range(65)), dy(1)))
    a, b, c = curves
    rab = frechet_paths(a, b, "oriented", 8)
    rbc = frechet_paths(b, c, "oriented", 8)
    rac = frechet_paths(a, c, "oriented", 8)
    widths = rab.enclosure.width() + rbc.enclosure.width() + rac.enclosure.width()
    assert rac.enclosure.hi <= rab.enclosure.hi + rbc.enclosure.hi + widths


def test_enclosure_soundness_under_refinement():
    rng = random.Random(13)
    ys1 = staircase(5, rng)
    ys2 = staircase(5, rng)
    a = Curve("path", tuple((Dyadic(i, 5), ys1[i]) for i in range(33)), dy(1))
    b = Curve("path", tuple((Dyadic(i, 5), ys2[i]) for i in range(33)), dy(1))
    coarse = frechet_paths(a, b, "oriented", 4)
    fine, _ = discrete_frechet(a.sample_at(coarse.resolution + 4), b.sample_at(coarse.resolution + 4))
    assert coarse.enclosure.contains(fine)


def test_reparametrization_invariance():
    rng = random.Random(21)
    ys = staircase(6, rng)
    a = Curve("path", tuple((Dyadic(i, 6), ys[i]) for i in range(65)), dy(1))
    # Precompose a with the increasing bijection sigma(t) = t/2 on [0,1/2],
    # (3t-1)/2 on [1/2,1]: sigma(i/64) lands on the level-7 grid exactly.
    a7 = a.sample_at(7)
    samples = tuple(a7[i] if i <= 32 else a7[3 * i - 64] for i in range(65))
    b = Curve("path", samples, dy(2))
    ysc = staircase(6, rng)
    c = Curve("path", tuple((Dyadic(i, 6), ysc[i]) for i in range(65)), dy(1))
    rac = frechet_paths(a, c, "oriented", 6)
    rbc = frechet_paths(b, c, "oriented", 6)
    # The true oriented distance is reparametrization-invariant, so the two
    # enclosures share it.
    assert rac.enclosure.intersects(rbc.enclosure)


def test_frechet_loops_rotation_contains_zero():
    loop = square_loop(dy("1/4"), 6)
    shift = (1 << 6) // 4
    base = loop.samples[:-1]
    rotated = tuple(base[(i + shift) % len(base)] for i in range(len(base))) + (
        base[shift],
    )
    other = Curve("loop", rotated, loop.lipschitz)
    r = frechet_loops(loop, other, "oriented", 8)
    assert r.enclosure.contains(D0)
    assert r.enclosure.hi <= pow2(8)


def test_frechet_loops_self():
    loop = square_loop(dy("1/4"), 5)
    r = frechet_loops(loop, loop, "oriented", 6)
    assert r.enclosure.contains(D0)


def test_frechet_loops_concentric_squares():
    small = square_loop(dy("1/4"), 5)
    big = square_loop(dy("1/2"), 5)
    r = frechet_loops(small, big, "oriented", 4)
    assert r.enclosure.contains(dy("1/4"))
    # brute-force cross-check at a coarse level: min over all shifts
    m = 4
    P = small.sample_at(m)
    base = list(big.sample_at(m))[:-1]
    best = None
    for s in range(len(base)):
        rot = tuple(base[(i + s) % len(base)] for i in range(len(base))) + (base[s],)
        v, _ = discrete_frechet(P, rot)
        if best is None or v < best:
            best = v
    slack = (small.lipschitz + big.lipschitz + big.lipschitz).scale2(-m)
    assert r.enclosure.lo <= best
    assert best <= r.enclosure.hi + slack


def test_loop_rotation_invariance_of_result():
    small = square_loop(dy("1/4"), 5)
    big = square_loop(dy("1/2"), 5)
    r1 = frechet_loops(small, big, "oriented", 5)
    base = big.samples[:-1]
    rolled = tuple(base[(i + 7) % len(base)] for i in range(len(base))) + (base[7],)
    r2 = frechet_loops(small, Curve("loop", rolled, big.lipschitz), "oriented", 5)
    assert r1.enclosure == r2.enclosure


def test_curve_validation():
    with pytest.raises(DomainError):
        Curve("path", ((D0, D0), (dy(1), dy(1))), dy("1/2"))  # too steep
    with pytest.raises(DomainError):
        Curve("loop", segment(3, lambda t: t), dy(1))  # does not close up
    with pytest.raises(DomainError):
        Curve(
            "path",
            ((D0, D0), (dy("1/4"), D0), (dy("1/2"), D0), (dy("3/4"), D0)),
            dy(1),
        )  # 4 samples is not 2**level + 1


def test_curve_sampling_levels():
    a = Curve("path", segment(4, lambda t: t), dy(1))
    coarse = a.sample_at(2)
    assert len(coarse) == 5
    fine = a.sample_at(6)
    assert len(fine) == 65
    assert fine[::4] == a.samples  # refinement keeps the original samples


def test_curve_from_function_offset():
    f = to_function(parse("x0"), 0, 1)
    a = Curve.from_function(f, "path", 12, lipschitz=1)
    assert a.sample_slack.sign > 0
    r = frechet_paths(a, a, "oriented", 6)
    assert r.enclosure.contains(D0)
    assert r.enclosure.width() <= pow2(6)
    coarse = Curve.from_function(f, "path", 6, lipschitz=1)
    with pytest.raises(DomainError):
        frechet_paths(coarse, coarse, "oriented", 12)


def test_go_chains_level1():
    chains = go_chain_covers(1)
    assert len(chains) == 6
    assert all(chain_is_valid(c, 1) for c in chains)
    diagonal = [c for c in chains if all(abs(x - y) <= 1 for x, y in c)]
    assert diagonal  # a near-diagonal chain realizes the identity


def test_go_chains_cap():
    with pytest.raises(CapExceeded):
        go_chain_covers(9)


def test_go_chains_match_dp_at_coarse_level(rng):
    m = 3
    chains = go_chain_covers(m)
    assert all(chain_is_valid(c, m) for c in chains)
    ys1 = staircase(m, rng)
    ys2 = staircase(m, rng)
    A = [(Dyadic(i, m), ys1[i]) for i in range((1 << m) + 1)]
    B = [(Dyadic(i, m), ys2[i]) for i in range((1 << m) + 1)]
    best_chain = None
    for chain in chains:
        v = max(interval_max_metric(A[i], B[j]) for i, j in chain)
        if best_chain is None or v < best_chain:
            best_chain = v
    dp, _ = discrete_frechet(A, B)
    slack = dy(2).scale2(-m)  # (L_A + L_B) * 2**(-m)
    assert dp <= best_chain
    assert best_chain <= dp + slack


def test_go_chains_cover_sampled_homeomorphisms(rng):
    m = 2
    chains = go_chain_covers(m)
    top = 1 << m
    for _ in range(20):
        # a random 2-Lipschitz-ish increasing lattice path as a stand-in
        # for a sampled reparametrization graph
        phi = sorted(rng.randrange(0, top + 1) for _ in range(top - 1))
        graph = [(i, v) for i, v in enumerate([0] + phi + [top])]
        best = None
        for chain in chains:
            d = max(
                min(max(abs(x - a), abs(y - b)) for a, b in chain) for x, y in graph
            )
            if best is None or d < best:
                best = d
        assert best <= 2  # within 2 * 2**(-m) in grid units


def test_lip2_factorize_identity():
    psi, chi = lip2_factorize([Dyadic(i, 3) for i in range(9)])
    assert psi == chi
    assert psi[0] == (D0, D0)
    assert psi[-1] == (dy(1), dy(1))


def test_lip2_factorize_step():
    vals = [min(Dyadic(2 * i, 4), dy(1)) for i in range(17)]
    psi, chi = lip2_factorize(vals)
    for out in (psi, chi):
        for i in range(len(out) - 1):
            (s1, v1), (s2, v2) = out[i], out[i + 1]
            assert v2 >= v1
            assert v2 - v1 <= (s2 - s1).double()
    # recomposition: psi at chi-breakpoints reproduces phi exactly
    for (s, t), (s2, v) in zip(chi, psi):
        assert s == s2
        idx = int((t.as_fraction() * 16))
        assert vals[idx] == v


def test_lip2_factorize_random_staircases(rng):
    for _ in range(20):
        level = 4
        steps = sorted(rng.randrange(0, 17) for _ in range(15))
        vals = [D0] + [Dyadic(s, 4) for s in steps] + [dy(1)]
        psi, chi = lip2_factorize(vals)
        for out in (psi, chi):
            for i in range(len(out)):
                for j in range(i + 1, len(out)):
                    (s1, v1), (s2, v2) = out[i], out[j]
                    assert D0 <= v2 - v1 <= (s2 - s1).double()
        # breakpoint spacing dominates half the parameter spacing (the
        # factored inner map is strictly expanding at rate >= 1/2)
        for (s1, t1), (s2, t2) in zip(chi, chi[1:]):
            assert s2 - s1 >= (t2 - t1).halve()
        for (s, t), (_, v) in zip(chi, psi):
            i = int(t.as_fraction() * 16)
            assert vals[i] == v


def test_lip2_factorize_rejects_bad_input():
    with pytest.raises(DomainError):
        lip2_factorize([D0, dy("1/2"), dy("1/4"), dy("3/4"), dy(1)])
    with pytest.raises(DomainError):
        lip2_factorize([D0, dy("1/4"), dy("1/2"), dy("3/4"), dy("7/8")])


def test_curve_json_roundtrip():
    a = Curve("path", segment(3, lambda t: t.halve()), dy(1))
    blob = curve_to_json(a)
    again = load_curve(blob)
    assert again.samples == a.samples
    assert again.lipschitz == a.lipschitz
    assert again.topology == "path"

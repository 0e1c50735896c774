"""Names of points and of non-empty compact sets.

A point name answers precision queries with enumeration indices converging at
rate ``2**(-m)``; a set name answers with finite index covers whose points are
Hausdorff-close to the denoted set at the same rate. Set names here carry
positive information only: truncated constructions (intersection, preimage)
over-approximate and expose their truncation depth.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

from .dyadic import D0, Dyadic, DyadicInterval, dy, pow2
from .errors import ContractViolation, DomainError, EmptyResult, SpaceMismatch
from .spaces import (
    PresentedSpace,
    ProductSpace,
    UnitInterval,
    CantorSpace,
    Circle,
    cube_dim,
    cube_point,
    parse_space_id,
)

__all__ = [
    "PointName",
    "SetName",
    "space_as_name",
    "union",
    "standardize",
    "select_point",
    "point_to_singleton",
    "singleton_to_point",
    "intersect_truncated",
    "hausdorff_between",
    "hyper_encode",
    "hyper_decode",
    "FixtureSet",
    "load_fixture",
]


class PointName:
    """A precision-queryable approximator of a point: query(m) is a level-m
    index within ``2**(-m)`` of the denoted point."""

    def __init__(self, space: PresentedSpace, query_fn):
        self.space = space
        self._fn = query_fn
        self._memo: dict[int, int] = {}
        self._lock = threading.Lock()

    def query(self, m: int) -> int:
        with self._lock:
            got = self._memo.get(m)
            if got is None:
                got = self._fn(m)
                if got >= self.space.level_count(m):
                    raise ContractViolation(f"index {got} invalid at level {m}")
                self._memo[m] = got
            return got

    @staticmethod
    def from_index_fn(space: PresentedSpace, fn) -> "PointName":
        return PointName(space, fn)

    @staticmethod
    def from_value(space, value) -> "PointName":
        """Name of an exactly-representable scalar or cube point."""
        if isinstance(space, UnitInterval):
            x = dy(value)
            return PointName(space, lambda m: space.nearest_index(x, m))
        if isinstance(space, Circle):
            x = dy(value)
            return PointName(space, lambda m: space.nearest_index(x, m))
        if isinstance(space, ProductSpace):
            coords = tuple(dy(v) for v in value)
            from .spaces import cube_nearest_index

            return PointName(space, lambda m: cube_nearest_index(space, coords, m))
        raise DomainError(f"no value-based names for {space.space_id}")

    def consistency_defect(self, max_m: int) -> Dyadic:
        """Largest violation of d(u_m, u_n) <= 2**(-m) + 2**(-n); zero if none."""
        worst = D0
        idx = [self.query(m) for m in range(max_m + 1)]
        for m in range(max_m + 1):
            for n in range(m + 1, max_m + 1):
                bound = pow2(m) + pow2(n)
                d = self.space.distance_enclosure(idx[m], idx[n], n + 2).lo
                if d > bound and d - bound > worst:
                    worst = d - bound
        return worst


class SetName:
    """A precision-queryable cover approximator of a non-empty compact set.

    ``query(m)`` returns a sorted tuple of level-m indices whose points have
    Hausdorff distance at most ``2**(-m)`` to the denoted set. ``standard``
    records that the cover additionally satisfies the two-sided membership
    window (points within ``2**(-m-1)`` are always in, points farther than
    ``2**(-m)`` never are).
    """

    def __init__(self, space: PresentedSpace, query_fn, standard: bool = False):
        self.space = space
        self._fn = query_fn
        self.standard = standard
        self._memo: dict[int, tuple[int, ...]] = {}
        self._lock = threading.Lock()

    def query(self, m: int) -> tuple[int, ...]:
        with self._lock:
            got = self._memo.get(m)
            if got is None:
                got = tuple(sorted(set(self._fn(m))))
                if not got:
                    raise EmptyResult(f"empty cover at level {m}")
                count = self.space.level_count(m)
                if got[-1] >= count:
                    raise ContractViolation(f"cover index {got[-1]} invalid at level {m}")
                self._memo[m] = got
            return got


def _require_same_space(a, b):
    if not a.space.same_space(b.space):
        raise SpaceMismatch(f"{a.space.space_id} vs {b.space.space_id}")


def space_as_name(space: PresentedSpace) -> SetName:
    """The whole space as a (standard) set name: the full level-m index set."""
    return SetName(space, lambda m: tuple(space.enumerate_level(m)), standard=True)


def union(a: SetName, b: SetName) -> SetName:
    """Cover union denotes the set union; standardness is preserved."""
    _require_same_space(a, b)
    return SetName(
        a.space,
        lambda m: a.query(m) + b.query(m),
        standard=a.standard and b.standard,
    )


def standardize(a: SetName) -> SetName:
    """Rebuild a name so the two-sided membership window holds.

    Level-m membership is decided from the level-(m+3) cover: a candidate is
    admitted iff some cover point lies certainly below the midpoint
    ``6 * 2**(-m-3)`` of the admissible window, judged through distance
    enclosures at precision m+6 (enclosures that straddle the lower window
    bound admit the candidate, keeping the cover inclusion-safe).
    """

    def query(m: int) -> list[int]:
        fine = a.query(m + 3)
        threshold = Dyadic(6, m + 3)
        out = set()
        space = a.space
        for af in fine:
            for cand in space.indices_within(af, threshold, m):
                if cand in out:
                    continue
                if space.distance_enclosure(af, cand, m + 6).lo < threshold:
                    out.add(cand)
        if not out:
            raise ContractViolation("standardize produced an empty cover")
        return sorted(out)

    return SetName(a.space, query, standard=True)


def select_point(a: SetName) -> PointName:
    """A point name whose limit lies in the denoted set.

    Walks covers at increasing precision, at each step taking the first
    (ascending-index) candidate provably within ``3 * 2**(-m-2)`` (plus
    enclosure slack) of the previous pick; this step bound keeps the whole
    chain consistent and guarantees a candidate exists for every valid name.
    """
    space = a.space
    chain: list[int] = []
    chain_lock = threading.Lock()

    def _extend_to(m: int):
        while len(chain) <= m:
            k = len(chain)
            cover = a.query(k + 2)
            if k == 0:
                chain.append(cover[0])
                continue
            prev = chain[k - 1]
            step_bound = Dyadic(3, k + 2) + pow2(k + 6)
            pick = None
            for cand in cover:
                if space.distance_enclosure(cand, prev, k + 6).hi <= step_bound:
                    pick = cand
                    break
            if pick is None:
                raise ContractViolation(
                    f"point selection found no admissible cover point at level {k}"
                )
            chain.append(pick)

    def query(m: int) -> int:
        with chain_lock:
            _extend_to(m)
            return space.round_index(chain[m], m)

    return PointName(space, query)


def point_to_singleton(x: PointName) -> SetName:
    """The singleton cover {u_m} names the point's singleton set."""
    return SetName(x.space, lambda m: (x.query(m),), standard=False)


def singleton_to_point(a: SetName) -> PointName:
    """Inverse of point_to_singleton; the name must denote a singleton.

    At each level the search requires a level-(m+3) candidate within
    ``2**(-m-2)`` of every cover point; two cover points staying apart make
    this impossible and are reported as a contract violation.
    """
    space = a.space

    def query(m: int) -> int:
        cover = a.query(m + 3)
        bound = pow2(m + 2)
        first = cover[0]
        for cand in sorted(space.indices_within(first, bound, m + 3)):
            if all(
                space.distance_enclosure(cand, c, m + 6).hi < bound for c in cover
            ):
                return space.round_index(cand, m)
        # Diagnose: exhibit two far-apart cover points when present.
        for i, c1 in enumerate(cover):
            for c2 in cover[i + 1 :]:
                if space.distance_enclosure(c1, c2, m + 6).lo >= bound.double():
                    raise ContractViolation(
                        f"cover is not a singleton: indices {c1} and {c2} stay "
                        f"at least {bound.double()} apart at level {m + 3}"
                    )
        raise ContractViolation("singleton search failed; corrupt set name")

    return PointName(space, query)


def intersect_truncated(a: SetName, b: SetName, depth: int) -> SetName:
    """Truncated intersection cover: keeps points of ``a`` that witness
    closeness between the two names at every precision up to ``depth``.

    Over-approximates the intersection for every depth; deeper truncations
    only shrink the cover. An empty result signals either an empty
    intersection or an insufficient depth.
    """
    _require_same_space(a, b)
    space = a.space

    def query(m: int) -> list[int]:
        keep = []
        witness_cache: dict[tuple[int, int], list[int]] = {}

        def witnesses(n: int, n2: int) -> list[int]:
            got = witness_cache.get((n, n2))
            if got is None:
                bound = pow2(n) + pow2(n2)
                prec = max(n, n2) + 3
                got = [
                    av
                    for av in a.query(n)
                    if any(
                        not space.distance_enclosure(av, bv, prec).lo > bound
                        for bv in b.query(n2)
                    )
                ]
                witness_cache[(n, n2)] = got
            return got

        for c in a.query(m):
            ok = True
            for n in range(depth + 1):
                bound2 = pow2(n) + pow2(m)
                prec = max(n, m) + 3
                for n2 in range(depth + 1):
                    ws = witnesses(n, n2)
                    if not any(
                        not space.distance_enclosure(c, av, prec).lo > bound2
                        for av in ws
                    ):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                keep.append(c)
        if not keep:
            raise EmptyResult(
                f"truncated intersection empty at level {m} (depth {depth}): "
                "empty intersection or insufficient depth"
            )
        return keep

    return SetName(space, query, standard=False)


def _finite_hausdorff(space: PresentedSpace, xs, ys, prec: int) -> DyadicInterval:
    """Enclosure of the Hausdorff distance between two finite index sets."""

    def directed(src, dst):
        worst = DyadicInterval.point(D0)
        for u in src:
            best = None
            for v in dst:
                d = space.distance_enclosure(u, v, prec)
                best = d if best is None else best.min_with(d)
            worst = worst.max_with(best)
        return worst

    return directed(xs, ys).max_with(directed(ys, xs))


def hausdorff_between(a: SetName, b: SetName, n: int) -> DyadicInterval:
    """Enclosure of the Hausdorff distance of the denoted sets.

    Uses the exact finite-set Hausdorff distance of the level-(n+2) covers,
    widened by the two cover accuracies ``2 * 2**(-n-2)`` on each side.
    """
    _require_same_space(a, b)
    m = n + 2
    finite = _finite_hausdorff(a.space, a.query(m), b.query(m), n + 6)
    slack = Dyadic(2, m)
    lo = finite.lo - slack
    if lo.sign < 0:
        lo = D0
    return DyadicInterval(lo, finite.hi + slack)


def hyper_encode(indices) -> int:
    """Finite index set -> integer with those bit positions set."""
    out = 0
    for i in indices:
        if i < 0:
            raise DomainError("negative index")
        out |= 1 << i
    if out == 0:
        raise DomainError("empty index set has no encoding")
    return out


def hyper_decode(code: int) -> tuple[int, ...]:
    """Integer -> finite index set of its set bit positions."""
    if code <= 0:
        raise DomainError("hyper index must be a positive integer")
    out = []
    i = 0
    while code:
        if code & 1:
            out.append(i)
        code >>= 1
        i += 1
    return tuple(out)


def cover_from_distance(space: PresentedSpace, dist_fn, window=None) -> SetName:
    """Canonical name from an exact distance oracle ``dist_fn(index) -> Dyadic``.

    Default inclusion threshold ``2**(-m-1)`` yields a standard name;
    ``window(m)`` may widen it up to ``2**(-m)``.
    """
    standard = window is None

    def query(m: int) -> list[int]:
        t = pow2(m + 1) if window is None else window(m)
        if t > pow2(m):
            raise DomainError("window exceeds the name accuracy bound")
        return [u for u in space.enumerate_level(m) if dist_fn(u) <= t]

    return SetName(space, query, standard=standard)


# ---------------------------------------------------------------------------
# Fixture sets: exact distance oracles used to build and audit set names.


@dataclass(frozen=True)
class FixtureSet:
    """An exactly-known compact set used as a test oracle.

    ``kind`` is "finite" (the listed points) or "interval-hull" (the
    per-coordinate bounding box of the listed points; scalar and cube
    spaces only). Distances are exact dyadics under the space's metric.
    """

    space: PresentedSpace
    kind: str
    points: tuple[tuple[Dyadic, ...], ...]

    def __post_init__(self):
        if self.kind not in ("finite", "interval-hull"):
            raise DomainError(f"unknown fixture kind {self.kind!r}")
        if not self.points:
            raise DomainError("fixture needs at least one point")
        if self.kind == "interval-hull" and isinstance(self.space, (Circle, CantorSpace)):
            raise DomainError("interval-hull fixtures need interval or cube spaces")

    def _point_coords(self, u: int) -> tuple[Dyadic, ...]:
        s = self.space
        if isinstance(s, (UnitInterval, Circle)):
            return (s.point(u),)
        if isinstance(s, CantorSpace):
            raise DomainError("use finite fixtures with explicit cantor handling")
        return cube_point(s, u)

    def _coord_metric(self, a: Dyadic, b: Dyadic) -> Dyadic:
        if isinstance(self.space, Circle):
            t = abs(a - b)
            return min(t, Dyadic(1) - t)
        return abs(a - b)

    def distance_to(self, u: int) -> Dyadic:
        """Exact distance from enumerated point u to the denoted set."""
        coords = self._point_coords(u)
        if self.kind == "finite":
            best = None
            for p in self.points:
                d = max(self._coord_metric(a, b) for a, b in zip(coords, p))
                if best is None or d < best:
                    best = d
            return best
        los = [min(p[i] for p in self.points) for i in range(len(coords))]
        his = [max(p[i] for p in self.points) for i in range(len(coords))]
        worst = D0
        for x, lo, hi in zip(coords, los, his):
            d = DyadicInterval(lo, hi).distance_to_point(x)
            if d > worst:
                worst = d
        return worst

    def oracle_name(self, window=None) -> SetName:
        """The canonical standard name: level-m cover of all enumeration
        points within ``2**(-m-1)`` of the set. ``window(m)`` may widen the
        inclusion threshold up to ``2**(-m)`` (producing valid, non-standard
        names for tests)."""
        return cover_from_distance(self.space, self.distance_to, window)

    def set_probe_points(self, m: int):
        """Points of the denoted set on a mesh of step ``2**(-m-3)``; paired
        with the mesh bound this audits the inward Hausdorff direction."""
        if self.kind == "finite":
            return list(self.points)
        dim = len(self.points[0])
        los = [min(p[i] for p in self.points) for i in range(dim)]
        his = [max(p[i] for p in self.points) for i in range(dim)]
        h = pow2(m + 3)
        axes = []
        for lo, hi in zip(los, his):
            vals = [lo]
            v = lo + h
            while v < hi:
                vals.append(v)
                v = v + h
            if hi > lo:
                vals.append(hi)
            axes.append(vals)
        mesh = [()]
        for vals in axes:
            mesh = [p + (v,) for p in mesh for v in vals]
        return mesh

    def hausdorff_defect(self, name: SetName, m: int) -> Dyadic:
        """How far the level-m cover strays from the 2**(-m) name contract.

        Exact for finite fixtures and scalar hulls; for cube hulls the
        inward direction is probed on a mesh and charged the mesh step
        (distance-to-cover is 1-Lipschitz), so a zero defect is a sound
        certificate.
        """
        cover = name.query(m)
        worst_out = max(self.distance_to(u) for u in cover)
        worst_in = D0
        if self.kind == "interval-hull" and len(self.points[0]) == 1:
            worst_in = self._scalar_hull_inward(cover)
        else:
            for p in self.set_probe_points(m):
                best = None
                for u in cover:
                    d = max(
                        self._coord_metric(a, b)
                        for a, b in zip(self._point_coords(u), p)
                    )
                    if best is None or d < best:
                        best = d
                if best > worst_in:
                    worst_in = best
            if self.kind == "interval-hull":
                worst_in = worst_in + pow2(m + 3)
        worst = max(worst_out, worst_in)
        margin = worst - pow2(m)
        return margin if margin.sign > 0 else D0

    def _scalar_hull_inward(self, cover) -> Dyadic:
        """Exact sup over the hull interval of the distance to the cover:
        attained at an endpoint or between consecutive cover values."""
        lo = min(p[0] for p in self.points)
        hi = max(p[0] for p in self.points)
        vals = sorted(self._point_coords(u)[0] for u in cover)
        candidates = [lo, hi]
        for a, b in zip(vals, vals[1:]):
            mid = (a + b).halve()
            if lo <= mid <= hi:
                candidates.append(mid)
        worst = D0
        for x in candidates:
            best = min(abs(x - v) for v in vals)
            if best > worst:
                worst = best
        return worst


def load_fixture(source) -> FixtureSet:
    """Build a fixture from its JSON object form:
    {"space": "interval", "kind": "finite", "points": [["1/2^1"], ...]}
    """
    if isinstance(source, str):
        source = json.loads(source)
    space = parse_space_id(source["space"])
    points = tuple(tuple(dy(c) for c in p) for p in source["points"])
    expected_dim = 1 if not isinstance(space, ProductSpace) else cube_dim(space)
    for p in points:
        if len(p) != expected_dim:
            raise DomainError(f"point {p} has wrong dimension for {space.space_id}")
    return FixtureSet(space=space, kind=source["kind"], points=points)

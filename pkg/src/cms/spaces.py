"""Presented compact metric spaces.

A presented space carries a level-indexed enumeration of points: level ``m``
exposes ``2**D(m)`` indices (``D`` strictly increasing) whose points cover the
space with closed balls of radius ``2**(-m-1)``. Every space provides exact
or enclosed distances between enumerated points, and a rounding map sending
any index to a level-``m`` index at distance at most ``2**(-m-1)``.

Concrete instances: the unit interval, the circle ``[0,1) mod 1``, Cantor
space of binary sequences, and finite Cartesian products under the max
metric (cubes are iterated products of the interval).
"""

from __future__ import annotations

import threading

from .dyadic import D0, Dyadic, DyadicInterval, pow2, _round_half_even
from .errors import CapExceeded, DomainError, ParseError

__all__ = [
    "PresentedSpace",
    "UnitInterval",
    "Circle",
    "CantorSpace",
    "ProductSpace",
    "unit_interval",
    "circle",
    "cantor",
    "product",
    "cube",
    "covering_check",
    "entropy_upper",
    "parse_space_id",
    "cube_point",
    "cube_nearest_index",
]

_LEVEL_SCAN_CAP = 128


class PresentedSpace:
    """Base class; subclasses fill in the enumeration-specific pieces."""

    space_id: str = "?"
    diameter_le_one = True

    def level_exponent(self, m: int) -> int:
        """The exponent D(m); level m has 2**D(m) index slots."""
        raise NotImplementedError

    def level_count(self, m: int) -> int:
        return 1 << self.level_exponent(m)

    def enumerate_level(self, m: int):
        """Iterable of indices valid at level m (full range for our spaces)."""
        return range(self.level_count(m))

    def distance_enclosure(self, u: int, v: int, k: int) -> DyadicInterval:
        """Interval of width <= 2**(-k) containing d(point(u), point(v))."""
        raise NotImplementedError

    def round_index(self, u: int, m: int) -> int:
        """A level-m index within 2**(-m-1) of index u."""
        raise NotImplementedError

    def separation(self, m: int) -> int | None:
        """Exponent s with pairwise level-m distances >= 2**(-s), if declared."""
        return None

    def index_level(self, u: int) -> int:
        """Least level at which index u is valid."""
        for m in range(_LEVEL_SCAN_CAP):
            if u < self.level_count(m):
                return m
        raise CapExceeded(f"index {u} exceeds level scan cap")

    def indices_within(self, u: int, radius: Dyadic, m: int):
        """All level-m indices at distance <= radius from point(u).

        The generic fallback scans the whole level; concrete spaces override
        with direct constructions.
        """
        out = []
        k = m + 4
        for w in self.enumerate_level(m):
            if self.distance_enclosure(u, w, k).lo <= radius:
                out.append(w)
        return out

    def covering_gap(self, m: int, probe_level: int) -> Dyadic:
        """Worst distance from a probe-level point to the level-m cover."""
        worst = D0
        for p in self.enumerate_level(probe_level):
            best = None
            for w in self.enumerate_level(m):
                d = self.distance_enclosure(p, w, probe_level + 4).hi
                if best is None or d < best:
                    best = d
            if best is None:
                raise DomainError("empty level in covering check")
            if best > worst:
                worst = best
        return worst

    def same_space(self, other: "PresentedSpace") -> bool:
        return self.space_id == other.space_id

    def __repr__(self) -> str:
        return f"<space {self.space_id}>"


def _scalar_point(u: int) -> Dyadic:
    """Shared enumeration of [0,1): 0, 1/2, 1/4, 3/4, 1/8, 3/8, ..."""
    if u == 0:
        return D0
    k = u.bit_length() - 1
    a = u - (1 << k)
    return Dyadic(2 * a + 1, k + 1)


def _scalar_index(x: Dyadic) -> int:
    """Inverse of ``_scalar_point`` for canonical x in [0,1)."""
    if x.is_zero():
        return 0
    if x.exp <= 0 or x.num < 0 or x.num >> x.exp:
        raise DomainError(f"{x} is not an enumerated point of [0,1)")
    return (1 << (x.exp - 1)) + (x.num - 1) // 2


class UnitInterval(PresentedSpace):
    """[0,1] with D(m) = m+1; level m enumerates the grid of step 2**(-m-1)."""

    space_id = "interval"

    def level_exponent(self, m: int) -> int:
        return m + 1

    def point(self, u: int) -> Dyadic:
        return _scalar_point(u)

    def point_index(self, x: Dyadic) -> int:
        return _scalar_index(x)

    def distance(self, u: int, v: int) -> Dyadic:
        return abs(_scalar_point(u) - _scalar_point(v))

    def distance_enclosure(self, u: int, v: int, k: int) -> DyadicInterval:
        return DyadicInterval.point(self.distance(u, v))

    def round_index(self, u: int, m: int) -> int:
        if u < (1 << (m + 1)):
            return u
        k = u.bit_length() - 1  # u = a + 2**k, k = m + n
        a = u - (1 << k)
        n = k - m
        j = _round_half_even(2 * a + 1 - (1 << n), n + 1)
        return (1 << m) + j

    def nearest_index(self, x: Dyadic, m: int) -> int:
        """Level-m index whose point is nearest to x in [0,1]."""
        j = _round_half_even(x.num, x.exp - (m + 1)) if x.exp > m + 1 else x.num << (m + 1 - x.exp)
        j = min(max(j, 0), (1 << (m + 1)) - 1)
        return _scalar_index(Dyadic(j, m + 1))

    def nearest_distance(self, x: Dyadic, m: int) -> Dyadic:
        return abs(x - _scalar_point(self.nearest_index(x, m)))

    def separation(self, m: int) -> int:
        return m + 1

    def indices_within(self, u: int, radius: Dyadic, m: int):
        x = _scalar_point(u)
        step = m + 1
        lo = x - radius
        hi = x + radius

        # Work in units of 2**(-step): ceil(lo * 2**step) .. floor(hi * 2**step).
        def _ceil(v: Dyadic) -> int:
            if v.exp <= step:
                return v.num << (step - v.exp)
            return -((-v.num) >> (v.exp - step))

        def _floor(v: Dyadic) -> int:
            if v.exp <= step:
                return v.num << (step - v.exp)
            return v.num >> (v.exp - step)

        start = max(_ceil(lo), 0)
        end = min(_floor(hi), (1 << step) - 1)
        return [_scalar_index(Dyadic(j, step)) for j in range(start, end + 1)]

    def covering_gap(self, m: int, probe_level: int) -> Dyadic:
        worst = D0
        for p in self.enumerate_level(probe_level):
            d = self.nearest_distance(_scalar_point(p), m)
            if d > worst:
                worst = d
        return worst


class Circle(PresentedSpace):
    """[0,1) mod 1 with wrap-around metric and D(m) = m."""

    space_id = "circle"

    def level_exponent(self, m: int) -> int:
        return m

    def point(self, u: int) -> Dyadic:
        return _scalar_point(u)

    def point_index(self, x: Dyadic) -> int:
        return _scalar_index(x)

    def distance(self, u: int, v: int) -> Dyadic:
        t = abs(_scalar_point(u) - _scalar_point(v))
        return min(t, Dyadic(1) - t)

    def distance_enclosure(self, u: int, v: int, k: int) -> DyadicInterval:
        return DyadicInterval.point(self.distance(u, v))

    def round_index(self, u: int, m: int) -> int:
        if u < (1 << m):
            return u
        x = _scalar_point(u)
        j = _round_half_even(x.num, x.exp - m) & ((1 << m) - 1) if x.exp > m else (x.num << (m - x.exp)) & ((1 << m) - 1)
        return _scalar_index(Dyadic(j, m)) if m > 0 else 0

    def nearest_index(self, x: Dyadic, m: int) -> int:
        if m == 0:
            return 0
        j = _round_half_even(x.num, x.exp - m) & ((1 << m) - 1) if x.exp > m else (x.num << (m - x.exp)) & ((1 << m) - 1)
        return _scalar_index(Dyadic(j, m))

    def nearest_distance(self, x: Dyadic, m: int) -> Dyadic:
        p = _scalar_point(self.nearest_index(x, m))
        t = abs(x - p)
        return min(t, Dyadic(1) - t)

    def separation(self, m: int) -> int:
        return m

    def indices_within(self, u: int, radius: Dyadic, m: int):
        if m == 0:
            return [0]
        x = _scalar_point(u)
        out = set()
        mask = (1 << m) - 1

        def _ceil(v: Dyadic) -> int:
            if v.exp <= m:
                return v.num << (m - v.exp)
            return -((-v.num) >> (v.exp - m))

        def _floor(v: Dyadic) -> int:
            if v.exp <= m:
                return v.num << (m - v.exp)
            return v.num >> (v.exp - m)

        for j in range(_ceil(x - radius), _floor(x + radius) + 1):
            out.add(_scalar_index(Dyadic(j & mask, m)))
        return sorted(out)

    def covering_gap(self, m: int, probe_level: int) -> Dyadic:
        worst = D0
        for p in self.enumerate_level(probe_level):
            d = self.nearest_distance(_scalar_point(p), m)
            if d > worst:
                worst = d
        return worst


def _cantor_bits(u: int) -> int:
    """Bitmask of the eventually-zero sequence with index u (bit i = symbol i)."""
    if u == 0:
        return 0
    k = u.bit_length() - 1
    r = u - (1 << k)
    bits = 1 << k
    for i in range(k):  # symbol i is the (k-1-i)-th bit of r (lexicographic order)
        if (r >> (k - 1 - i)) & 1:
            bits |= 1 << i
    return bits


def _cantor_index(bits: int) -> int:
    if bits == 0:
        return 0
    k = bits.bit_length() - 1
    r = 0
    for i in range(k):
        if (bits >> i) & 1:
            r |= 1 << (k - 1 - i)
    return (1 << k) + r


class CantorSpace(PresentedSpace):
    """Binary sequences with metric 2**(-first disagreement); D(m) = m+1.

    Indices denote eventually-zero sequences; level m holds exactly those
    whose last 1 sits at position <= m. Truncation after m+1 symbols is the
    rounding map.
    """

    space_id = "cantor"

    def level_exponent(self, m: int) -> int:
        return m + 1

    def bits(self, u: int) -> int:
        return _cantor_bits(u)

    def bits_index(self, bits: int) -> int:
        return _cantor_index(bits)

    def distance(self, u: int, v: int) -> Dyadic:
        x = _cantor_bits(u) ^ _cantor_bits(v)
        if x == 0:
            return D0
        return pow2((x & -x).bit_length() - 1)

    def distance_enclosure(self, u: int, v: int, k: int) -> DyadicInterval:
        return DyadicInterval.point(self.distance(u, v))

    def round_index(self, u: int, m: int) -> int:
        return _cantor_index(_cantor_bits(u) & ((1 << (m + 1)) - 1))

    def separation(self, m: int) -> int:
        return m

    def indices_within(self, u: int, radius: Dyadic, m: int):
        # Ball of radius 2**(-j) = sequences sharing the first j symbols.
        if radius.sign <= 0:
            prefix_len = m + 1
        else:
            j = 0
            while pow2(j) > radius:
                j += 1
            prefix_len = min(j, m + 1)
        base = _cantor_bits(u) & ((1 << prefix_len) - 1)
        free = (m + 1) - prefix_len
        out = []
        for tail in range(1 << free):
            out.append(_cantor_index(base | (tail << prefix_len)))
        return sorted(set(out))

    def covering_gap(self, m: int, probe_level: int) -> Dyadic:
        # Truncation is within 2**(-m-1) of every probe; the gap is attained.
        worst = D0
        for p in self.enumerate_level(probe_level):
            bits = _cantor_bits(p)
            trunc = bits & ((1 << (m + 1)) - 1)
            x = bits ^ trunc
            d = D0 if x == 0 else pow2((x & -x).bit_length() - 1)
            if d > worst:
                worst = d
        return worst


class ProductSpace(PresentedSpace):
    """Cartesian product under the max metric, block-interleaved index layout.

    Level-m product indices are exactly the pairings of level-m factor
    indices: the first ``2**(D(m)+E(m))`` indices enumerate the level-m
    product grid, and the layout extends level by level with a
    new-left-by-old-right block followed by an all-left-by-new-right block.
    """

    def __init__(self, left: PresentedSpace, right: PresentedSpace):
        self.left = left
        self.right = right
        self.space_id = f"product({left.space_id},{right.space_id})"
        self._counts: list[tuple[int, int, int]] = []  # (left, right, product)
        self._counts_lock = threading.Lock()

    def level_exponent(self, m: int) -> int:
        return self.left.level_exponent(m) + self.right.level_exponent(m)

    def _ensure_level(self, m: int):
        """Cached per-level (left, right, product) counts, extended on demand."""
        while len(self._counts) <= m:
            with self._counts_lock:
                k = len(self._counts)
                if k > m:
                    break
                if k > _LEVEL_SCAN_CAP:
                    raise CapExceeded("product level table exceeded cap")
                nl = self.left.level_count(k)
                nr = self.right.level_count(k)
                self._counts.append((nl, nr, nl * nr))
        return self._counts

    def pair(self, u: int, v: int) -> int:
        table = self._ensure_level(0)
        m = 0
        while u >= table[m][0] or v >= table[m][1]:
            m += 1
            if m >= len(table):
                table = self._ensure_level(m)
        nl = table[m][0]
        if m == 0:
            return v * nl + u
        pl, pr = table[m - 1][0], table[m - 1][1]
        if u >= pl and v < pr:
            return pl * pr + (nl - pl) * v + (u - pl)
        return nl * pr + nl * (v - pr) + u

    def unpair(self, w: int) -> tuple[int, int]:
        table = self._ensure_level(0)
        m = 0
        while w >= table[m][2]:
            m += 1
            if m >= len(table):
                table = self._ensure_level(m)
        if m == 0:
            nl = table[0][0]
            return w % nl, w // nl
        nl = table[m][0]
        pl, pr = table[m - 1][0], table[m - 1][1]
        if w < nl * pr:
            t = w - pl * pr
            v, rem = divmod(t, nl - pl)
            return pl + rem, v
        t = w - nl * pr
        v, u = divmod(t, nl)
        return u, pr + v

    def distance_enclosure(self, w1: int, w2: int, k: int) -> DyadicInterval:
        u1, v1 = self.unpair(w1)
        u2, v2 = self.unpair(w2)
        a = self.left.distance_enclosure(u1, u2, k + 1)
        b = self.right.distance_enclosure(v1, v2, k + 1)
        return a.max_with(b)

    def round_index(self, w: int, m: int) -> int:
        u, v = self.unpair(w)
        return self.pair(self.left.round_index(u, m), self.right.round_index(v, m))

    def separation(self, m: int) -> int | None:
        a, b = self.left.separation(m), self.right.separation(m)
        if a is None or b is None:
            return None
        return max(a, b)

    def indices_within(self, w: int, radius: Dyadic, m: int):
        u, v = self.unpair(w)
        us = self.left.indices_within(u, radius, m)
        vs = self.right.indices_within(v, radius, m)
        return [self.pair(a, b) for a in us for b in vs]

    def covering_gap(self, m: int, probe_level: int) -> Dyadic:
        # Max-metric: the product gap is the max of the factor gaps.
        return max(
            self.left.covering_gap(m, probe_level),
            self.right.covering_gap(m, probe_level),
        )


_unit_interval = UnitInterval()
_circle = Circle()
_cantor = CantorSpace()
_space_cache: dict[str, PresentedSpace] = {}
_space_cache_lock = threading.Lock()


def unit_interval() -> UnitInterval:
    return _unit_interval


def circle() -> Circle:
    return _circle


def cantor() -> CantorSpace:
    return _cantor


def product(left: PresentedSpace, right: PresentedSpace) -> ProductSpace:
    key = f"product({left.space_id},{right.space_id})"
    with _space_cache_lock:
        got = _space_cache.get(key)
        if got is None:
            got = ProductSpace(left, right)
            _space_cache[key] = got
        return got


def cube(d: int) -> PresentedSpace:
    if d < 1:
        raise DomainError("cube dimension must be >= 1")
    s: PresentedSpace = _unit_interval
    for _ in range(d - 1):
        s = product(s, _unit_interval)
    return s


def cube_dim(space: PresentedSpace) -> int:
    if isinstance(space, UnitInterval):
        return 1
    if isinstance(space, ProductSpace):
        return cube_dim(space.left) + cube_dim(space.right)
    raise DomainError(f"{space.space_id} is not a cube")


def cube_point(space: PresentedSpace, w: int) -> tuple[Dyadic, ...]:
    """Coordinates of an enumerated cube point."""
    if isinstance(space, UnitInterval):
        return (space.point(w),)
    if isinstance(space, ProductSpace):
        u, v = space.unpair(w)
        return cube_point(space.left, u) + cube_point(space.right, v)
    raise DomainError(f"{space.space_id} is not a cube")


def cube_nearest_index(space: PresentedSpace, coords, m: int) -> int:
    """Level-m cube index nearest (coordinatewise) to the given point."""
    if isinstance(space, UnitInterval):
        (x,) = coords
        return space.nearest_index(x, m)
    if isinstance(space, ProductSpace):
        dl = cube_dim(space.left)
        u = cube_nearest_index(space.left, coords[:dl], m)
        v = cube_nearest_index(space.right, coords[dl:], m)
        return space.pair(u, v)
    raise DomainError(f"{space.space_id} is not a cube")


def covering_check(space: PresentedSpace, m: int, probe_level: int) -> tuple[bool, Dyadic]:
    """Probe the covering contract: every probe-level point must be within
    ``2**(-m-1) + 2**(-probe_level)`` of the level-m enumeration.

    Returns (verdict, worst gap found).
    """
    if probe_level <= m:
        raise DomainError("probe level must exceed the checked level")
    gap = space.covering_gap(m, probe_level)
    return gap <= pow2(m + 1) + pow2(probe_level), gap


def entropy_upper(space: PresentedSpace, n: int) -> int:
    """D(n): an upper bound on the log2 of the minimal 2**(-n-1) cover count."""
    return space.level_exponent(n)


def parse_space_id(text: str) -> PresentedSpace:
    """Parse identifiers like 'interval', 'cube:3', 'product(interval,circle)'."""
    text = text.strip()
    if text == "interval":
        return unit_interval()
    if text == "circle":
        return circle()
    if text == "cantor":
        return cantor()
    if text.startswith("cube:"):
        try:
            d = int(text.split(":", 1)[1])
        except ValueError as e:
            raise ParseError(f"bad cube dimension in {text!r}") from e
        return cube(d)
    if text.startswith("product(") and text.endswith(")"):
        inner = text[len("product(") : -1]
        depth = 0
        for i, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                return product(parse_space_id(inner[:i]), parse_space_id(inner[i + 1 :]))
        raise ParseError(f"missing comma in {text!r}")
    raise ParseError(f"unknown space id {text!r}")

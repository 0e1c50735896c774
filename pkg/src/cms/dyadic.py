"""Exact dyadic rationals and interval enclosures.

Every certified quantity in this package is carried by these two types.
A :class:`Dyadic` stores ``num / 2**exp`` with ``num`` odd or zero (zero has
``exp == 0``), so equality is structural. All arithmetic here is exact; the
only rounding operations are the explicit ones (:func:`round_to`,
:func:`sqrt_enclosure`).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import DomainError, ParseError

__all__ = [
    "Dyadic",
    "DyadicInterval",
    "D0",
    "D1",
    "dy",
    "round_to",
    "sqrt_enclosure",
    "interval_max_metric",
    "ceil_log2",
]

_STR_FORMS = re.compile(
    r"""^\s*(?P<sign>[+-]?)\s*
        (?:
            (?P<num>\d+)\s*/\s*2\^(?P<pexp>\d+)   # canonical m/2^e
          | (?P<anum>\d+)\s*/\s*(?P<aden>\d+)      # a/b with b a power of two
          | (?P<int>\d+)\.(?P<frac>\d+)            # exact decimal
          | (?P<whole>\d+)
        )\s*$""",
    re.VERBOSE,
)


class Dyadic:
    """An exact binary rational ``num * 2**(-exp)`` in canonical form."""

    __slots__ = ("num", "exp")

    def __init__(self, num: int, exp: int = 0):
        if num == 0:
            self.num = 0
            self.exp = 0
            return
        tz = (num & -num).bit_length() - 1
        self.num = num >> tz
        self.exp = exp - tz

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_fraction(q: Fraction) -> "Dyadic":
        den = q.denominator
        if den & (den - 1):
            raise DomainError(f"{q} is not a dyadic rational")
        return Dyadic(q.numerator, den.bit_length() - 1)

    @staticmethod
    def parse(text: str) -> "Dyadic":
        m = _STR_FORMS.match(text)
        if not m:
            raise ParseError(f"not a dyadic literal: {text!r}")
        sign = -1 if m.group("sign") == "-" else 1
        if m.group("num") is not None:
            return Dyadic(sign * int(m.group("num")), int(m.group("pexp")))
        if m.group("anum") is not None:
            den = int(m.group("aden"))
            if den == 0 or den & (den - 1):
                raise ParseError(f"denominator of {text!r} is not a power of two")
            return Dyadic(sign * int(m.group("anum")), den.bit_length() - 1)
        if m.group("int") is not None:
            frac = m.group("frac")
            q = Fraction(int(m.group("int"))) + Fraction(int(frac), 10 ** len(frac))
            den = q.denominator
            if den & (den - 1):
                raise ParseError(f"decimal {text!r} is not exactly dyadic")
            return Dyadic(sign * q.numerator, den.bit_length() - 1)
        return Dyadic(sign * int(m.group("whole")), 0)

    # -- conversions --------------------------------------------------

    def as_fraction(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.num, 1 << self.exp)
        return Fraction(self.num << (-self.exp), 1)

    def __float__(self) -> float:
        return math.ldexp(self.num, -self.exp)

    def __str__(self) -> str:
        e = self.exp if self.num else 0
        if e < 0:
            return f"{self.num << (-e)}/2^0"
        return f"{self.num}/2^{e}"

    def decimal(self, max_places: int | None = None) -> str:
        """Decimal rendering; exact by default (dyadics are finite in base
        ten), rounded to ``max_places`` fractional digits when asked."""
        if self.exp <= 0:
            return str(self.num << (-self.exp))
        digits = self.num * 5**self.exp
        places = self.exp
        if max_places is not None and places > max_places:
            drop = places - max_places
            digits = _round_half_even_base10(digits, drop)
            places = max_places
            if digits == 0:
                return "0." + "0" * places
        sign = "-" if digits < 0 else ""
        s = str(abs(digits)).rjust(places + 1, "0")
        return f"{sign}{s[:-places]}.{s[-places:]}"

    def __repr__(self) -> str:
        return f"Dyadic({self.num}, {self.exp})"

    # -- exact arithmetic ----------------------------------------------

    def _aligned(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp), e

    def __add__(self, other: "Dyadic") -> "Dyadic":
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        a, b, e = self._aligned(other)
        return Dyadic(a - b, e)

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        return Dyadic(self.num * other.num, self.exp + other.exp)

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.num, self.exp)

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.num), self.exp)

    def halve(self) -> "Dyadic":
        return Dyadic(self.num, self.exp + 1)

    def double(self) -> "Dyadic":
        return Dyadic(self.num, self.exp - 1)

    def scale2(self, k: int) -> "Dyadic":
        """Exact multiplication by ``2**k``."""
        return Dyadic(self.num, self.exp - k)

    # -- comparisons ---------------------------------------------------

    def _cmp(self, other: "Dyadic") -> int:
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        return isinstance(other, Dyadic) and self.num == other.num and self.exp == other.exp

    def __hash__(self) -> int:
        return hash((self.num, self.exp))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    @property
    def sign(self) -> int:
        return (self.num > 0) - (self.num < 0)

    def is_zero(self) -> bool:
        return self.num == 0


D0 = Dyadic(0)
D1 = Dyadic(1)


def dy(value) -> Dyadic:
    """Coerce an int, string literal or Dyadic into a Dyadic."""
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, int):
        return Dyadic(value)
    if isinstance(value, str):
        return Dyadic.parse(value)
    raise DomainError(f"cannot interpret {value!r} as a dyadic")


def pow2(k: int) -> Dyadic:
    """``2**(-k)`` as a Dyadic (k may be negative)."""
    return Dyadic(1, k)


def _round_half_even_base10(a: int, drop: int) -> int:
    q, r = divmod(a, 10**drop)
    half = 5 * 10 ** (drop - 1)
    if r > half or (r == half and (q & 1)):
        q += 1
    return q


def _round_half_even(a: int, shift: int) -> int:
    """Nearest integer to ``a / 2**shift``, ties to even."""
    if shift <= 0:
        return a << (-shift)
    q, r = divmod(a, 1 << shift)
    half = 1 << (shift - 1)
    if r > half or (r == half and (q & 1)):
        q += 1
    return q


def round_to(x: Dyadic, k: int) -> Dyadic:
    """Nearest multiple of ``2**(-k)`` to ``x``; ties go to the even multiple.

    The result differs from ``x`` by at most ``2**(-k-1)``.
    """
    if k < 0:
        raise DomainError("grid level must be non-negative")
    if x.exp <= k:
        return x
    return Dyadic(_round_half_even(x.num, x.exp - k), k)


def ceil_log2(x: Dyadic) -> int:
    """Least integer c with ``x <= 2**c``; requires x > 0."""
    if x.sign <= 0:
        raise DomainError("ceil_log2 requires a positive argument")
    c = x.num.bit_length() - 1 - x.exp
    if x.num != 1 << (x.num.bit_length() - 1):
        c += 1
    return c


class DyadicInterval:
    """A closed interval with exact dyadic endpoints, ``lo <= hi``."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Dyadic, hi: Dyadic):
        if lo > hi:
            raise DomainError(f"interval endpoints out of order: [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @staticmethod
    def point(x: Dyadic) -> "DyadicInterval":
        return DyadicInterval(x, x)

    def width(self) -> Dyadic:
        return self.hi - self.lo

    def midpoint(self) -> Dyadic:
        return (self.lo + self.hi).halve()

    def contains(self, x: Dyadic) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "DyadicInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "DyadicInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def distance_to_point(self, x: Dyadic) -> Dyadic:
        """Exact distance from ``x`` to the interval (0 when inside)."""
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return D0

    def hull(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    # -- exact interval arithmetic --------------------------------------

    def __add__(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(self.lo - other.hi, self.hi - other.lo)

    def __mul__(self, other: "DyadicInterval") -> "DyadicInterval":
        products = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ]
        return DyadicInterval(min(products), max(products))

    def __neg__(self) -> "DyadicInterval":
        return DyadicInterval(-self.hi, -self.lo)

    def __abs__(self) -> "DyadicInterval":
        if self.lo.sign >= 0:
            return self
        if self.hi.sign <= 0:
            return -self
        return DyadicInterval(D0, max(-self.lo, self.hi))

    def min_with(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(min(self.lo, other.lo), min(self.hi, other.hi))

    def max_with(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(max(self.lo, other.lo), max(self.hi, other.hi))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DyadicInterval)
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _isqrt_scaled(x: Dyadic, p: int) -> tuple[int, int]:
    """Floor and ceiling of ``sqrt(x) * 2**p`` as integers; x >= 0, 2p >= x.exp."""
    n = x.num << (2 * p - x.exp)
    r = math.isqrt(n)
    return r, r if r * r == n else r + 1


def sqrt_enclosure(interval: DyadicInterval, k: int) -> DyadicInterval:
    """Enclosure of the square-root image of ``interval``.

    The result contains ``{sqrt(t) : t in interval}`` and is at most
    ``2**(-k)`` wider than that image. Negative inputs are a domain error.
    """
    if interval.lo.sign < 0:
        raise DomainError("sqrt_enclosure requires a non-negative interval")
    p = max(k + 2, (max(interval.lo.exp, interval.hi.exp, 0) + 1) // 2 + 1)
    lo_floor, _ = _isqrt_scaled(interval.lo, p)
    _, hi_ceil = _isqrt_scaled(interval.hi, p)
    return DyadicInterval(Dyadic(lo_floor, p), Dyadic(hi_ceil, p))


def interval_max_metric(p, q) -> Dyadic:
    """Exact max-metric distance between two dyadic coordinate vectors."""
    if len(p) != len(q):
        raise DomainError(f"dimension mismatch: {len(p)} vs {len(q)}")
    best = D0
    for a, b in zip(p, q):
        d = abs(a - b)
        if d > best:
            best = d
    return best

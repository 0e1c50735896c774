"""Equicontinuous functions as evaluator+modulus objects and as graph names.

A :class:`FunctionObject` bundles a domain cover, a codomain space, a binary
modulus of continuity and a finite evaluation map: ``finite_map(n, a)`` takes
a level-``mu(n)`` index of the domain cover and returns a level-``n`` codomain
index valid for every domain point in the ``2**(-mu(n))`` ball around the
queried point. Graph names are set names over the product space denoting the
function's graph; evaluation, modulus extraction, restriction, image and
regular-set preimages all run through these covers.
"""

from __future__ import annotations

import os
from bisect import bisect_left, bisect_right

from .dyadic import D0, D1, Dyadic, DyadicInterval, ceil_log2, pow2
from .errors import CapExceeded, ContractViolation, DomainError, EmptyResult
from .expr import Expr, arity, eval_interval, eval_point, lipschitz_bound
from .names import PointName, SetName, space_as_name, standardize
from .spaces import PresentedSpace, ProductSpace, UnitInterval, cube, cube_dim, cube_point, product

__all__ = [
    "Modulus",
    "FunctionObject",
    "GraphName",
    "identity_fn",
    "constant_fn",
    "projection_fn",
    "expr_function",
    "compose",
    "curry",
    "image",
    "graph_from_function",
    "eval_from_graph",
    "modulus_from_graph",
    "restrict",
    "preimage_regular",
    "default_level_cap",
]


def default_level_cap() -> int:
    value = os.environ.get("CMS_LEVEL_CAP")
    return int(value) if value else 24


class Modulus:
    """A non-decreasing precision translation n -> mu(n)."""

    __slots__ = ("_fn",)

    def __init__(self, fn):
        self._fn = fn

    def __call__(self, n: int) -> int:
        return max(0, self._fn(n))

    @staticmethod
    def identity() -> "Modulus":
        return Modulus(lambda n: n)

    @staticmethod
    def constant() -> "Modulus":
        return Modulus(lambda n: 0)

    @staticmethod
    def from_lipschitz(bound: Dyadic, pad: int = 1) -> "Modulus":
        """Modulus for a Lipschitz function, padded so grid-rounded
        evaluations stay within the advertised precision."""
        if bound.sign < 0:
            raise DomainError("Lipschitz bound must be non-negative")
        if bound.is_zero():
            return Modulus.constant()
        c = ceil_log2(bound)
        return Modulus(lambda n: n + pad + c)

    def compose(self, inner: "Modulus") -> "Modulus":
        return Modulus(lambda n: self._fn(inner(n)))


class FunctionObject:
    """An equicontinuous function given by its finite evaluation maps."""

    def __init__(
        self,
        domain: SetName,
        codomain: PresentedSpace,
        modulus: Modulus,
        finite_map,
        range_enclosure=None,
    ):
        self.domain = domain
        self.codomain = codomain
        self.modulus = modulus
        self._map = finite_map
        self.range_enclosure = range_enclosure

    def finite_map(self, n: int, a: int) -> int:
        v = self._map(n, a)
        if v >= self.codomain.level_count(n):
            raise ContractViolation(f"finite map output {v} invalid at level {n}")
        return v


class GraphName(SetName):
    """A set name over domain x codomain denoting a function graph.

    Carries the modulus of the denoted function: the hyperspace of graphs is
    indexed by an equicontinuity witness, and restriction needs it.
    """

    def __init__(self, space: ProductSpace, query_fn, modulus: Modulus, standard=False):
        super().__init__(space, query_fn, standard=standard)
        self.modulus = modulus


# ---------------------------------------------------------------------------
# Built-in function objects


def identity_fn(space: PresentedSpace) -> FunctionObject:
    return FunctionObject(
        domain=space_as_name(space),
        codomain=space,
        modulus=Modulus.identity(),
        finite_map=lambda n, a: a,
    )


def constant_fn(domain_space: PresentedSpace, value: PointName) -> FunctionObject:
    return FunctionObject(
        domain=space_as_name(domain_space),
        codomain=value.space,
        modulus=Modulus.constant(),
        finite_map=lambda n, a: value.query(n),
    )


def projection_fn(prod: ProductSpace, which: int) -> FunctionObject:
    if which not in (0, 1):
        raise DomainError("projection selects factor 0 or 1")
    factor = prod.left if which == 0 else prod.right

    def fmap(n: int, w: int) -> int:
        u, v = prod.unpair(w)
        return u if which == 0 else v

    return FunctionObject(
        domain=space_as_name(prod),
        codomain=factor,
        modulus=Modulus.identity(),
        finite_map=fmap,
    )


def expr_function(
    e: Expr,
    window_lo: Dyadic,
    window_hi: Dyadic,
    dim: int | None = None,
    domain: SetName | None = None,
) -> FunctionObject:
    """Interpret an expression as a function into the presented unit interval.

    The affine window ``[window_lo, window_hi]`` (whose width must be a power
    of two, so rescaling stays exact) must contain the expression's range
    enclosure over the cube. The finite map evaluates exactly at enumerated
    points and rounds to the requested codomain level; the stored modulus is
    padded by one level to absorb that rounding.
    """
    d = dim if dim is not None else max(arity(e), 1)
    dom_space = cube(d)
    width = window_hi - window_lo
    if width.sign <= 0 or width.num != 1:
        raise DomainError(f"window width {width} must be a power of two")
    scale_k = -width.exp  # width = 2**scale_k

    box = tuple(DyadicInterval(D0, D1) for _ in range(d))
    rng = eval_interval(e, box)
    if rng.lo < window_lo or rng.hi > window_hi:
        raise DomainError(f"range {rng} exceeds window [{window_lo}, {window_hi}]")

    lip = lipschitz_bound(e, d)
    scaled_lip = lip.scale2(-scale_k)
    codomain = UnitInterval()

    def rescale(v: Dyadic) -> Dyadic:
        return (v - window_lo).scale2(-scale_k)

    def fmap(n: int, a: int) -> int:
        value = rescale(eval_point(e, cube_point(dom_space, a)))
        return codomain.nearest_index(value, n)

    def range_enc(coord_box) -> DyadicInterval:
        r = eval_interval(e, coord_box)
        return DyadicInterval(rescale(r.lo), rescale(r.hi))

    fo = FunctionObject(
        domain=domain if domain is not None else space_as_name(dom_space),
        codomain=codomain,
        modulus=Modulus.from_lipschitz(scaled_lip, pad=1),
        finite_map=fmap,
        range_enclosure=range_enc,
    )
    fo.expr = e
    fo.window = (window_lo, window_hi)
    fo.lipschitz_presented = scaled_lip
    return fo


def compose(f: FunctionObject, g: FunctionObject) -> FunctionObject:
    """g after f; requires (caller-asserted) image(f) inside g's domain."""
    if not f.codomain.same_space(g.domain.space):
        raise DomainError("composition spaces do not line up")

    def fmap(n: int, a: int) -> int:
        return g.finite_map(n, f.finite_map(g.modulus(n), a))

    return FunctionObject(
        domain=f.domain,
        codomain=g.codomain,
        modulus=f.modulus.compose(g.modulus),
        finite_map=fmap,
    )


def curry(f: FunctionObject, x: PointName) -> FunctionObject:
    """Partial evaluation of a function on a product domain in its first slot."""
    prod = f.domain.space
    if not isinstance(prod, ProductSpace):
        raise DomainError("curry needs a product domain")
    if not x.space.same_space(prod.left):
        raise DomainError("point lives in the wrong space")

    def fmap(n: int, b: int) -> int:
        level = f.modulus(n)
        return f.finite_map(n, prod.pair(x.query(level), b))

    return FunctionObject(
        domain=space_as_name(prod.right),
        codomain=f.codomain,
        modulus=f.modulus,
        finite_map=fmap,
    )


def image(f: FunctionObject) -> SetName:
    """The image cover: finite-map values over the level-mu(m) domain cover."""

    def query(m: int):
        return [f.finite_map(m, a) for a in f.domain.query(f.modulus(m))]

    return SetName(f.codomain, query, standard=False)


# ---------------------------------------------------------------------------
# Graphs


def graph_from_function(f: FunctionObject) -> GraphName:
    """Level-m graph cover: domain points at level max(mu(m+2), m+2),
    evaluated at precision m+2, both coordinates rounded to level m.

    The max() keeps the first coordinates dense enough when the modulus is
    sparser than the grid (contractions, constants).
    """
    space = product(f.domain.space, f.codomain)
    dom_space = f.domain.space

    def query(m: int):
        eval_level = f.modulus(m + 2)
        level = max(eval_level, m + 2)
        out = set()
        for u in f.domain.query(level):
            u_eval = u if level == eval_level else dom_space.round_index(u, eval_level)
            v = f.finite_map(m + 2, u_eval)
            out.add(space.pair(dom_space.round_index(u, m), f.codomain.round_index(v, m)))
        return sorted(out)

    return GraphName(space, query, modulus=f.modulus)


class _ScalarGraphIndex:
    """Per-level view of a graph cover over a scalar domain, sorted by the
    domain coordinate so distance windows become bisect ranges."""

    def __init__(self, space: ProductSpace, cover):
        self.space = space
        entries = []
        for w in cover:
            u, v = space.unpair(w)
            entries.append((float(space.left.point(u)), u, v))
        entries.sort()
        self.keys = [t[0] for t in entries]
        self.entries = entries

    def window(self, x: Dyadic, radius: Dyadic):
        fx, fr = float(x), float(radius)
        lo = bisect_left(self.keys, fx - fr)
        hi = bisect_right(self.keys, fx + fr)
        return self.entries[lo:hi]


def _graph_pairs(space: ProductSpace, cover):
    return [space.unpair(w) for w in cover]


def _scalar_index_for(g: SetName, m: int) -> _ScalarGraphIndex:
    memo = getattr(g, "_scalar_graph_memo", None)
    if memo is None:
        memo = {}
        g._scalar_graph_memo = memo
    idx = memo.get(m)
    if idx is None:
        idx = _ScalarGraphIndex(g.space, g.query(m))
        memo[m] = idx
    return idx


def eval_from_graph(
    g: SetName, x: PointName, n: int, cap: int | None = None
) -> int:
    """Evaluate the function denoted by a graph name at a point name.

    Searches increasing cover levels m for a level-n codomain index v such
    that every cover pair is either provably far from the queried point
    (first coordinates beyond ``2**(-m+1)``) or provably value-close
    (within ``2**(-n) - 2**(-m)``). Any index returned is within ``2**(-n)``
    of the true value; the level cap turns a contract violation or an
    out-of-domain point into a diagnosable error.
    """
    space = g.space
    if not isinstance(space, ProductSpace):
        raise DomainError("graph names live on product spaces")
    dom, cod = space.left, space.right
    if not x.space.same_space(dom):
        raise DomainError("point lives in the wrong space")
    cap = cap if cap is not None else default_level_cap()
    scalar = isinstance(dom, UnitInterval)

    for m in range(n + 1, cap + 1):
        u_m = x.query(m)
        far = pow2(m - 1)  # 2**(-m+1)
        near = pow2(n) - pow2(m)
        if near.sign <= 0:
            continue
        if scalar:
            idx = _scalar_index_for(g, m)
            xm = dom.point(u_m)
            candidates_src = idx.window(xm, far + pow2(m + 4))
            relevant = [
                (u, v)
                for _, u, v in candidates_src
                if not dom.distance_enclosure(u_m, u, m + 4).lo > far
            ]
        else:
            relevant = [
                (u, v)
                for u, v in _graph_pairs(space, g.query(m))
                if not dom.distance_enclosure(u_m, u, m + 4).lo > far
            ]
        if not relevant:
            continue
        candidates = sorted({cod.round_index(v, n) for _, v in relevant})
        for vn in candidates:
            if all(
                cod.distance_enclosure(vn, v, m + 4).hi < near for _, v in relevant
            ):
                return vn
    raise CapExceeded(
        f"graph evaluation did not settle below level {cap}; the point may "
        "lie outside the function's domain or a name contract is violated"
    )


def modulus_from_graph(g: SetName, n: int, cap: int | None = None) -> int:
    """Smallest m (scanned from n+2) such that level-(m+2) graph-cover pairs
    with first coordinates within ``2**(-m)`` have second coordinates within
    ``2**(-n) + 4*2**(-m-2)``; certifies a binary modulus for the function."""
    space = g.space
    if not isinstance(space, ProductSpace):
        raise DomainError("graph names live on product spaces")
    dom, cod = space.left, space.right
    cap = cap if cap is not None else default_level_cap()
    scalar = isinstance(dom, UnitInterval)

    for m in range(n + 2, cap + 1):
        radius = pow2(m)
        allowed = pow2(n) + pow2(m)
        cover = g.query(m + 2)
        ok = True
        if scalar:
            entries = sorted(
                (float(dom.point(u)), u, v) for u, v in _graph_pairs(space, cover)
            )
            keys = [t[0] for t in entries]
            for i, (fx, u, v) in enumerate(entries):
                hi = bisect_right(keys, fx + float(radius) + 1e-12)
                for j in range(i + 1, hi):
                    u2, v2 = entries[j][1], entries[j][2]
                    if dom.distance_enclosure(u, u2, m + 6).lo > radius:
                        continue
                    if not cod.distance_enclosure(v, v2, m + 6).hi <= allowed:
                        ok = False
                        break
                if not ok:
                    break
        else:
            pairs = _graph_pairs(space, cover)
            for i, (u, v) in enumerate(pairs):
                for u2, v2 in pairs[i + 1 :]:
                    if dom.distance_enclosure(u, u2, m + 6).lo > radius:
                        continue
                    if not cod.distance_enclosure(v, v2, m + 6).hi <= allowed:
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            return m
    raise CapExceeded(f"no modulus certificate found below level {cap}")


def restrict(g: GraphName, v: SetName) -> GraphName:
    """Graph of the restriction to a subset of the domain.

    Both names are standardized, intersected pairwise at level
    ``mu(m+2) + 1`` and rounded down to level m.
    """
    space = g.space
    if not isinstance(space, ProductSpace):
        raise DomainError("graph names live on product spaces")
    if not v.space.same_space(space.left):
        raise DomainError("restriction set lives in the wrong space")
    g_std = g if g.standard else standardize(g)
    v_std = v if v.standard else standardize(v)
    mu = g.modulus

    def query(m: int):
        n = mu(m + 2) + 1
        keep = set(v_std.query(n))
        out = set()
        for w in g_std.query(n):
            u, val = space.unpair(w)
            if u in keep:
                out.add(
                    space.pair(
                        space.left.round_index(u, m), space.right.round_index(val, m)
                    )
                )
        if not out:
            raise EmptyResult(f"restriction cover empty at level {m}")
        return sorted(out)

    return GraphName(space, query, modulus=mu)


def preimage_regular(f: FunctionObject, v: SetName, depth: int) -> SetName:
    """Cover of the preimage of a regular set under an open map.

    Keeps level-``max(m+2, mu(m+2))`` domain points whose value enclosure
    meets the level-``depth`` cover of the target within ``2**(-depth)``,
    then rounds to level m. The true preimage is always within ``2**(-m)``
    of the cover; spurious points shrink as the depth grows.
    """
    if not v.space.same_space(f.codomain):
        raise DomainError("target set lives in the wrong space")
    if not isinstance(f.codomain, UnitInterval):
        raise DomainError("preimage covers need a scalar codomain")
    dom_space = f.domain.space

    def query(m: int):
        ell = max(m + 2, f.modulus(m + 2))
        q = max(depth, m)

        def value_box(a: int) -> DyadicInterval:
            if f.range_enclosure is not None:
                coords = cube_point(dom_space, a)
                r = pow2(ell)
                box = tuple(
                    DyadicInterval(max(D0, c - r), min(D1, c + r)) for c in coords
                )
                return f.range_enclosure(box)
            # Fall back on the finite map: its output is 2**(-q)-accurate on
            # the 2**(-mu(q)) ball, widened by the re-rounding of a.
            level = f.modulus(q)
            a_q = a if ell <= level else dom_space.round_index(a, level)
            val = f.codomain.point(f.finite_map(q, a_q))
            pad = pow2(q) + pow2(ell) + (pow2(level + 1) if ell > level else D0)
            return DyadicInterval(val - pad, val + pad)

        targets = [v.space.point(b) for b in v.query(depth)]
        tol = pow2(depth)
        out = set()
        for a in f.domain.query(ell):
            box = value_box(a)
            if any(box.distance_to_point(t) <= tol for t in targets):
                out.add(dom_space.round_index(a, m))
        if not out:
            raise EmptyResult(
                f"preimage cover empty at level {m} (depth {depth}): "
                "either the preimage is empty or the depth is insufficient"
            )
        return sorted(out)

    return SetName(dom_space, query, standard=False)

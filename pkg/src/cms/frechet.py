"""Certified Frechet distances between curves and between loops.

Curves are uniform dyadic sample grids (denoting their piecewise-linear
interpolants) or function objects sampled on demand. The computational core
is an exact bottleneck dynamic program over monotone couplings; its value
upper-bounds the true distance of the interpolants (the pointwise distance is
convex along each coupled segment pair), and undershoots it by at most the
Lipschitz slack of one grid step, which yields two-sided enclosures. Chain
enumeration and the 2-Lipschitz factorization exist to cross-validate the DP
against the reparametrization family it stands for.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dyadic import D0, Dyadic, DyadicInterval, ceil_log2, dy, pow2
from .errors import CapExceeded, DomainError
from .functions import FunctionObject
from .spaces import UnitInterval, Circle, cube_point

__all__ = [
    "Curve",
    "FrechetResult",
    "discrete_frechet",
    "frechet_paths",
    "frechet_loops",
    "go_chain_covers",
    "chain_is_valid",
    "lip2_factorize",
    "load_curve",
    "curve_to_json",
]

_INT64_EXP_CAP = 40  # beyond this the numpy fast path could overflow


@dataclass(frozen=True)
class Curve:
    """A path or loop given by samples on the level-m uniform parameter grid.

    ``samples`` has ``2**level + 1`` points; loops repeat the first point at
    the end. Consecutive samples must stay within ``lipschitz * 2**(-level)``
    in the max metric, certifying the declared bound for the interpolant.
    ``sample_slack`` widens enclosures for curves produced by rounding an
    evaluator (zero for exact sample data).
    """

    topology: str
    samples: tuple[tuple[Dyadic, ...], ...]
    lipschitz: Dyadic
    sample_slack: Dyadic = field(default_factory=lambda: D0)

    def __post_init__(self):
        if self.topology not in ("path", "loop"):
            raise DomainError(f"unknown topology {self.topology!r}")
        n = len(self.samples) - 1
        if n < 1 or n & (n - 1):
            raise DomainError("need 2**level + 1 samples")
        dims = {len(p) for p in self.samples}
        if len(dims) != 1:
            raise DomainError("inconsistent sample dimensions")
        if self.topology == "loop" and self.samples[0] != self.samples[-1]:
            raise DomainError("loop samples must close up (first == last)")
        step = self.lipschitz.scale2(-self.level)
        for a, b in zip(self.samples, self.samples[1:]):
            d = _max_metric(a, b)
            if d > step:
                raise DomainError(
                    f"samples violate the declared Lipschitz bound: step {d} > {step}"
                )

    @property
    def level(self) -> int:
        return (len(self.samples) - 1).bit_length() - 1

    @property
    def dim(self) -> int:
        return len(self.samples[0])

    def sample_at(self, m: int) -> tuple[tuple[Dyadic, ...], ...]:
        """Samples of the same interpolant on the level-m grid: subsampling
        for coarser grids, exact midpoint refinement for finer ones."""
        base = self.samples
        lvl = self.level
        if m <= lvl:
            stride = 1 << (lvl - m)
            return base[::stride]
        pts = list(base)
        for _ in range(m - lvl):
            refined = []
            for a, b in zip(pts, pts[1:]):
                refined.append(a)
                refined.append(tuple((x + y).halve() for x, y in zip(a, b)))
            refined.append(pts[-1])
            pts = refined
        return tuple(pts)

    @staticmethod
    def from_function(
        f: FunctionObject, topology: str, level: int, lipschitz
    ) -> "Curve":
        """Sample a function object on the parameter grid; the samples denote
        a nearby interpolant and the rounding is charged to sample_slack."""
        lip = dy(lipschitz)
        dom = f.domain.space
        if topology == "path" and not isinstance(dom, UnitInterval):
            raise DomainError("path functions live on the unit interval")
        if topology == "loop" and not isinstance(dom, (Circle, UnitInterval)):
            raise DomainError("loop functions live on the circle")
        n = 1 << level
        prec = level + 2
        pts = []
        for i in range(n + 1):
            t = Dyadic(i % n, level) if topology == "loop" else Dyadic(i, level)
            if isinstance(dom, UnitInterval) and i == n and topology == "path":
                t = Dyadic(1)
            a = dom.nearest_index(t, f.modulus(prec))
            v = f.finite_map(prec, a)
            pts.append(cube_point(f.codomain, v))
        if topology == "loop":
            pts[-1] = pts[0]
        # Distance from the interpolant to the source curve: codomain
        # rounding, parameter rounding, and the within-segment chord error.
        slack = pow2(prec) + lip.scale2(-f.modulus(prec)) + lip.scale2(-level)
        declared = lip + (pow2(prec) + lip.scale2(-f.modulus(prec))).scale2(level + 1)
        return Curve(
            topology=topology,
            samples=tuple(pts),
            lipschitz=declared,
            sample_slack=slack,
        )


@dataclass(frozen=True)
class FrechetResult:
    enclosure: DyadicInterval
    resolution: int
    witness: tuple[tuple[int, int], ...]
    shift: int = 0

    def __post_init__(self):
        if self.enclosure.lo > self.enclosure.hi:
            raise DomainError("malformed enclosure")


def _max_metric(a, b) -> Dyadic:
    best = D0
    for x, y in zip(a, b):
        d = abs(x - y)
        if d > best:
            best = d
    return best


def _common_scale(points_lists) -> tuple[int, list[np.ndarray] | None]:
    """Scale all coordinates to integers; numpy arrays when they fit int64."""
    k = 0
    for pts in points_lists:
        for p in pts:
            for c in p:
                if c.exp > k:
                    k = c.exp
    if k > _INT64_EXP_CAP:
        return k, None
    arrays = []
    for pts in points_lists:
        arr = np.array(
            [[c.num << (k - c.exp) for c in p] for p in pts], dtype=np.int64
        )
        arrays.append(arr)
    return k, arrays


def _dp_matrix_numpy(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Bottleneck DP table over monotone couplings, by anti-diagonals."""
    p, q = len(P), len(Q)
    dist = np.abs(P[:, None, :] - Q[None, :, :]).max(axis=2)
    dp = np.empty((p, q), dtype=np.int64)
    dp[0, 0] = dist[0, 0]
    for j in range(1, q):
        dp[0, j] = max(dp[0, j - 1], dist[0, j])
    for i in range(1, p):
        dp[i, 0] = max(dp[i - 1, 0], dist[i, 0])
    big = np.iinfo(np.int64).max
    for s in range(2, p + q - 1):
        i_lo = max(1, s - (q - 1))
        i_hi = min(p - 1, s - 1)
        if i_lo > i_hi:
            continue
        i = np.arange(i_lo, i_hi + 1)
        j = s - i
        up = dp[i - 1, j]
        left = dp[i, j - 1]
        diag = dp[i - 1, j - 1]
        best = np.minimum(np.minimum(up, left), diag)
        dp[i, j] = np.maximum(best, dist[i, j])
    return dp


def _dp_matrix_python(P, Q):
    p, q = len(P), len(Q)
    dist = [[_max_metric(P[i], Q[j]) for j in range(q)] for i in range(p)]
    dp = [[None] * q for _ in range(p)]
    dp[0][0] = dist[0][0]
    for j in range(1, q):
        dp[0][j] = max(dp[0][j - 1], dist[0][j])
    for i in range(1, p):
        dp[i][0] = max(dp[i - 1][0], dist[i][0])
    for i in range(1, p):
        row = dp[i]
        prev = dp[i - 1]
        drow = dist[i]
        for j in range(1, q):
            best = prev[j]
            if prev[j - 1] < best:
                best = prev[j - 1]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = best if best > drow[j] else drow[j]
    return dp, dist


def _witness_from_matrix(dp, dist, p, q):
    """Backtrack a coupling whose bottleneck equals dp[-1][-1] exactly."""
    path = [(p - 1, q - 1)]
    i, j = p - 1, q - 1
    while (i, j) != (0, 0):
        options = []
        if i > 0 and j > 0:
            options.append((dp[i - 1][j - 1], 0, (i - 1, j - 1)))
        if i > 0:
            options.append((dp[i - 1][j], 1, (i - 1, j)))
        if j > 0:
            options.append((dp[i][j - 1], 2, (i, j - 1)))
        options.sort(key=lambda t: (t[0], t[1]))
        i, j = options[0][2]
        path.append((i, j))
    path.reverse()
    return tuple(path)


def discrete_frechet(P, Q, want_witness: bool = True):
    """Exact bottleneck distance over monotone couplings of two point lists.

    Steps are (1,0), (0,1), (1,1); the value is the min over couplings of the
    max pairwise max-metric distance, an exact dyadic. Returns (value,
    witness) with the witness realizing the value.
    """
    if not P or not Q:
        raise DomainError("discrete_frechet needs non-empty point lists")
    if len(P[0]) != len(Q[0]):
        raise DomainError("dimension mismatch")
    k, arrays = _common_scale([P, Q])
    if arrays is not None:
        dp = _dp_matrix_numpy(arrays[0], arrays[1])
        value = Dyadic(int(dp[-1, -1]), k)
        if not want_witness:
            return value, ()
        dist = np.abs(arrays[0][:, None, :] - arrays[1][None, :, :]).max(axis=2)
        witness = _witness_from_matrix(dp, dist, len(P), len(Q))
        check = max(int(dist[i, j]) for i, j in witness)
        if check != int(dp[-1, -1]):
            raise DomainError("internal: witness does not realize the DP value")
        return value, witness
    dp, dist = _dp_matrix_python(P, Q)
    value = dp[-1][-1]
    if not want_witness:
        return value, ()
    witness = _witness_from_matrix(dp, dist, len(P), len(Q))
    check = max(dist[i][j] for i, j in witness)
    if check != value:
        raise DomainError("internal: witness does not realize the DP value")
    return value, witness


def _resolution_for(total_coeff: Dyadic, n: int, extra: int = 1) -> int:
    """Smallest m with total_coeff * 2**(-m) <= 2**(-n-extra)."""
    if total_coeff.sign <= 0:
        return n + extra
    return max(n + extra + ceil_log2(total_coeff), 2)


def frechet_paths(a: Curve, b: Curve, orientation: str, n: int) -> FrechetResult:
    """Enclosure of width <= 2**(-n) for the (un)oriented path distance.

    Resolution m is chosen so the DP slack ``(L_a + L_b) * 2**(-m)`` plus any
    sampling slack is at most ``2**(-n-1)``; the enclosure is
    ``[DP - slack, DP]`` widened by the sampling slack on both sides.
    """
    if a.topology != "path" or b.topology != "path":
        raise DomainError("frechet_paths needs path curves")
    if orientation not in ("oriented", "unoriented"):
        raise DomainError(f"unknown orientation {orientation!r}")
    if a.dim != b.dim:
        raise DomainError("dimension mismatch")
    coeff = a.lipschitz + b.lipschitz
    extra_slack = a.sample_slack + b.sample_slack
    if extra_slack.double() > pow2(n + 1):
        raise DomainError(
            "sampling slack too coarse for the requested precision; rebuild "
            "the function-sampled curves at a finer level"
        )
    m = _resolution_for(coeff, n, extra=1)
    P = a.sample_at(m)
    Q = b.sample_at(m)
    value, witness = discrete_frechet(P, Q)
    shift_used = 0
    if orientation == "unoriented":
        value_r, witness_r = discrete_frechet(P, tuple(reversed(Q)))
        if value_r < value:
            value, witness = value_r, witness_r
            shift_used = -1  # marks the reversed run
    slack = coeff.scale2(-m)
    lo = value - slack - extra_slack
    if lo.sign < 0:
        lo = D0
    return FrechetResult(
        enclosure=DyadicInterval(lo, value + extra_slack),
        resolution=m,
        witness=witness,
        shift=shift_used,
    )


def _loop_base(samples) -> list:
    return list(samples[:-1])


def _rotated(base, s):
    return tuple(base[(i + s) % len(base)] for i in range(len(base))) + (base[s % len(base)],)


def _shift_schedule(count: int):
    """0, then strided sweeps with halving stride: finds good shifts early."""
    seen = set()
    order = []
    stride = count
    while stride >= 1:
        for s in range(0, count, stride):
            if s not in seen:
                seen.add(s)
                order.append(s)
        stride //= 2
    return order


def frechet_loops(a: Curve, b: Curve, orientation: str, n: int) -> FrechetResult:
    """Enclosure of width <= 2**(-n) for the (un)oriented loop distance.

    Minimizes the path DP over all cyclic shifts of the second loop's
    samples; sub-grid rotations are charged ``L_b * 2**(-m)`` of extra slack.
    Shifts are scanned on a coarse-to-fine schedule with exact Lipschitz
    pruning, which never changes the exact minimum.
    """
    if a.topology != "loop" or b.topology != "loop":
        raise DomainError("frechet_loops needs loop curves")
    if orientation not in ("oriented", "unoriented"):
        raise DomainError(f"unknown orientation {orientation!r}")
    if a.dim != b.dim:
        raise DomainError("dimension mismatch")
    coeff = a.lipschitz + b.lipschitz + b.lipschitz  # DP slack + shift slack
    extra_slack = a.sample_slack + b.sample_slack
    if extra_slack.double() > pow2(n + 1):
        raise DomainError(
            "sampling slack too coarse for the requested precision; rebuild "
            "the function-sampled curves at a finer level"
        )
    m = _resolution_for(coeff, n, extra=0 if extra_slack.is_zero() else 1)
    P = a.sample_at(m)
    base_b = _loop_base(b.sample_at(m))
    count = len(base_b)
    step_lip = b.lipschitz.scale2(-m)  # value shift per unit of rotation

    variants = [(False, base_b)]
    if orientation == "unoriented":
        variants.append((True, list(reversed(base_b))))

    best = None  # (value, shift, base)
    for reversed_flag, base in variants:
        evaluated: list[tuple[int, Dyadic]] = []
        for s in _shift_schedule(count):
            if best is not None:
                # Lipschitz pruning: |DP(s) - DP(s0)| <= step_lip * wrap(s, s0).
                lb = None
                for s0, val in evaluated:
                    delta = min((s - s0) % count, (s0 - s) % count)
                    cand = val - step_lip * Dyadic(delta)
                    if lb is None or cand > lb:
                        lb = cand
                if lb is not None and lb >= best[0]:
                    continue
            value, _ = discrete_frechet(P, _rotated(base, s), want_witness=False)
            evaluated.append((s, value))
            if best is None or value < best[0]:
                best = (value, s, base)
    value, shift, base = best
    _, witness = discrete_frechet(P, _rotated(base, shift))
    slack = coeff.scale2(-m)
    lo = value - slack - extra_slack
    if lo.sign < 0:
        lo = D0
    return FrechetResult(
        enclosure=DyadicInterval(lo, value + extra_slack),
        resolution=m,
        witness=witness,
        shift=shift,
    )


# ---------------------------------------------------------------------------
# Chain enumeration and factorization (cross-validation machinery)

_CHAIN_CAP = 5


def chain_is_valid(chain, m: int) -> bool:
    """Monotone lattice path on the level-m grid from (0,0) to (2^m, 2^m)
    with unit up/right steps and runs of equal steps capped at two."""
    top = 1 << m
    if chain[0] != (0, 0) or chain[-1] != (top, top):
        return False
    run = 0
    last = None
    for (x1, y1), (x2, y2) in zip(chain, chain[1:]):
        dx, dy_ = x2 - x1, y2 - y1
        if (dx, dy_) not in ((1, 0), (0, 1)):
            return False
        step = (dx, dy_)
        run = run + 1 if step == last else 1
        if run > 2:
            return False
        last = step
    return True


def go_chain_covers(m: int):
    """All slope-constrained monotone chains on the level-m grid.

    Exponential in 2**m; capped for cross-validation use only.
    """
    if m > _CHAIN_CAP:
        raise CapExceeded(f"chain enumeration capped at level {_CHAIN_CAP}")
    top = 1 << m
    out = []
    # state: position, last step, run length
    stack = [((0, 0), None, 0, [(0, 0)])]
    while stack:
        (x, y), last, run, path = stack.pop()
        if (x, y) == (top, top):
            out.append(tuple(path))
            continue
        for step in ((1, 0), (0, 1)):
            nx, ny = x + step[0], y + step[1]
            if nx > top or ny > top:
                continue
            nrun = run + 1 if step == last else 1
            if nrun > 2:
                continue
            stack.append(((nx, ny), step, nrun, path + [(nx, ny)]))
    return out


def lip2_factorize(phi):
    """Factor a sampled non-decreasing surjection through two 2-Lipschitz
    non-decreasing surjections.

    ``phi`` lists values on the uniform level-m grid with phi[0] = 0 and
    phi[-1] = 1. Returns two sampled maps as (parameter, value) breakpoint
    lists: psi composed with the inverse of chi re-interpolates to phi, and
    both satisfy the exact two-sided 2-Lipschitz inequalities on all
    breakpoint pairs. Breakpoints sit at (t + phi(t)) / 2, keeping every
    value dyadic-exact.
    """
    vals = [dy(v) for v in phi]
    count = len(vals) - 1
    if count < 1 or count & (count - 1):
        raise DomainError("need 2**level + 1 samples")
    if vals[0] != D0 or vals[-1] != Dyadic(1):
        raise DomainError("endpoints must be 0 and 1")
    for x, y in zip(vals, vals[1:]):
        if y < x:
            raise DomainError("samples must be non-decreasing")
    level = count.bit_length() - 1
    psi = []
    chi = []
    for i, v in enumerate(vals):
        t = Dyadic(i, level)
        s = (t + v).halve()
        chi.append((s, t))
        psi.append((s, v))
    return psi, chi


# ---------------------------------------------------------------------------
# File format


def load_curve(source) -> Curve:
    """Curve from its JSON object form:
    {"topology": "path", "dim": 2, "lipschitz": "2", "samples": [["0","0"], ...]}
    """
    if isinstance(source, str):
        source = json.loads(source)
    samples = tuple(tuple(dy(c) for c in p) for p in source["samples"])
    dim = source.get("dim")
    if dim is not None and samples and len(samples[0]) != dim:
        raise DomainError("sample dimension disagrees with declared dim")
    return Curve(
        topology=source["topology"],
        samples=samples,
        lipschitz=dy(source["lipschitz"]),
    )


def curve_to_json(curve: Curve) -> dict:
    return {
        "topology": curve.topology,
        "dim": curve.dim,
        "lipschitz": str(curve.lipschitz),
        "samples": [[str(c) for c in p] for p in curve.samples],
    }

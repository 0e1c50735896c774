"""Certified constrained maximization by interval branch-and-bound.

Maximizes an objective expression over the part of the unit cube where a
constraint expression is non-positive. Cells carry sound interval enclosures
of both expressions; infeasible cells (constraint certainly positive) are
discarded, certified cells (constraint certainly non-positive) contribute
exact midpoint evaluations as lower bounds, and the upper bound tracks the
best objective enclosure among surviving cells. The returned interval always
contains the true optimum, whatever the budget.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .dyadic import D0, D1, Dyadic, DyadicInterval, pow2
from .errors import DomainError
from .expr import Expr, arity, eval_interval, eval_point, parse
from .names import SetName
from .spaces import cube, cube_nearest_index

__all__ = [
    "OptProblem",
    "Cell",
    "OptResult",
    "maximize",
    "feasible_region",
]

INFEASIBLE = "infeasible"
CERTIFIED = "certified-feasible"
UNDECIDED = "undecided"

CONVERGED = "converged"
UNCONVERGED = "unconverged"
NO_CERTIFIED = "infeasible-at-budget"


@dataclass(frozen=True)
class OptProblem:
    """Objective (range inside [0,1]) and constraint (range inside [-1,1])
    over the unit cube; feasibility (the constraint reaches <= 0 on an open
    set) is the caller's assertion."""

    dim: int
    objective: Expr
    constraint: Expr

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dimension must be >= 1")
        if max(arity(self.objective), arity(self.constraint)) > self.dim:
            raise DomainError("expression mentions coordinates beyond the dimension")
        box = tuple(DyadicInterval(D0, D1) for _ in range(self.dim))
        obj_range = eval_interval(self.objective, box)
        con_range = eval_interval(self.constraint, box)
        if obj_range.lo < D0 or obj_range.hi > D1:
            raise DomainError(f"objective range {obj_range} leaves [0,1]")
        if con_range.lo < Dyadic(-1) or con_range.hi > D1:
            raise DomainError(f"constraint range {con_range} leaves [-1,1]")

    @staticmethod
    def from_text(dim: int, objective: str, constraint: str) -> "OptProblem":
        return OptProblem(dim=dim, objective=parse(objective), constraint=parse(constraint))


@dataclass(frozen=True)
class Cell:
    box: tuple[DyadicInterval, ...]
    objective: DyadicInterval
    constraint: DyadicInterval

    @property
    def status(self) -> str:
        if self.constraint.lo > D0:
            return INFEASIBLE
        if self.constraint.hi <= D0:
            return CERTIFIED
        return UNDECIDED


@dataclass(frozen=True)
class OptResult:
    enclosure: DyadicInterval
    witness: tuple[DyadicInterval, ...] | None
    status: str
    cells_processed: int
    certified_found: bool


def _make_cell(problem: OptProblem, box) -> Cell:
    return Cell(
        box=box,
        objective=eval_interval(problem.objective, box),
        constraint=eval_interval(problem.constraint, box),
    )


def _box_key(box) -> tuple:
    return tuple((iv.lo.num, iv.lo.exp, iv.hi.num, iv.hi.exp) for iv in box)


def _split(problem: OptProblem, cell: Cell):
    widths = [iv.width() for iv in cell.box]
    widest = max(range(len(widths)), key=lambda i: (widths[i].as_fraction(), -i))
    iv = cell.box[widest]
    mid = iv.midpoint()
    left = cell.box[:widest] + (DyadicInterval(iv.lo, mid),) + cell.box[widest + 1 :]
    right = cell.box[:widest] + (DyadicInterval(mid, iv.hi),) + cell.box[widest + 1 :]
    return _make_cell(problem, left), _make_cell(problem, right)


def maximize(problem: OptProblem, n: int, budget: int = 200_000) -> OptResult:
    """Enclose ``max { objective : constraint <= 0 }`` to width ``2**(-n)``.

    Best-first on the objective's upper bound, bisecting the widest
    coordinate (ties to the lowest index). Certified-feasible cells raise the
    lower bound through exact midpoint evaluation; the upper bound is the
    best upper enclosure over cells not yet proven infeasible or dominated.
    On budget exhaustion the current sound interval is returned unconverged.
    """
    root = _make_cell(problem, tuple(DyadicInterval(D0, D1) for _ in range(problem.dim)))
    target = pow2(n)
    width_floor = pow2(max(4 * n, 64))

    lo: Dyadic | None = None
    witness: Cell | None = None
    certified_found = False
    heap: list = []
    terminal_hi: Dyadic | None = None

    def push(cell: Cell):
        # Max-heap on objective.hi with a canonical tiebreak for determinism.
        heapq.heappush(
            heap, ((-cell.objective.hi.as_fraction(), _box_key(cell.box)), cell)
        )

    def sample_points(cell: Cell):
        yield tuple(iv.midpoint() for iv in cell.box)
        corners = [()]
        for iv in cell.box:
            corners = [c + (e,) for c in corners for e in (iv.lo, iv.hi)]
        yield from corners

    def consider(cell: Cell) -> bool:
        """Raise the lower bound from exact feasible points in the cell;
        returns False if the cell can be dropped."""
        nonlocal lo, witness, certified_found, terminal_hi
        if cell.status == INFEASIBLE:
            return False
        if cell.status == CERTIFIED:
            certified_found = True
        for p in sample_points(cell):
            if eval_point(problem.constraint, p).sign <= 0:
                value = eval_point(problem.objective, p)
                if lo is None or value > lo:
                    lo = value
                    witness = cell
        if lo is not None and cell.objective.hi <= lo:
            return False  # dominated: cannot improve the enclosure
        if max(iv.width() for iv in cell.box) <= width_floor:
            # Too small to keep splitting: keep its bound, stop refining.
            if terminal_hi is None or cell.objective.hi > terminal_hi:
                terminal_hi = cell.objective.hi
            return False
        return True

    processed = 0
    if consider(root):
        push(root)

    while heap and processed < budget:
        top = heap[0][1]
        if lo is not None and top.objective.hi - lo <= target:
            if terminal_hi is None or terminal_hi - lo <= target:
                break
        _, cell = heapq.heappop(heap)
        if lo is not None and cell.objective.hi <= lo:
            continue
        processed += 1
        for child in _split(problem, cell):
            if consider(child):
                push(child)

    # Upper bound: best surviving cell bound, or the achieved lower bound.
    candidates = []
    if heap:
        candidates.append(heap[0][1].objective.hi)
    if terminal_hi is not None:
        candidates.append(terminal_hi)
    if lo is not None:
        candidates.append(lo)
    hi_d = max(candidates) if candidates else D0

    if lo is None:
        # No feasible point certified: sound upper bound, zero-knowledge
        # lower (the objective window pins the trivial bound 0).
        return OptResult(
            enclosure=DyadicInterval(D0, hi_d if (heap or terminal_hi is not None) else D1),
            witness=None,
            status=NO_CERTIFIED,
            cells_processed=processed,
            certified_found=certified_found,
        )

    status = CONVERGED if (hi_d - lo) <= target else UNCONVERGED
    return OptResult(
        enclosure=DyadicInterval(lo, hi_d),
        witness=witness.box if witness is not None else None,
        status=status,
        cells_processed=processed,
        certified_found=certified_found,
    )


def feasible_region(problem: OptProblem, m: int, budget: int = 200_000) -> SetName:
    """Cover of the feasible set at level m from non-infeasible cells.

    Cells are refined to diameter 2**(-m-1); enumeration points within
    2**(-m-1) of a surviving cell enter the cover, so the true feasible set
    is always within 2**(-m) of the cover (one-sided soundness, as for
    preimages)."""
    space = cube(problem.dim)

    def query(level: int) -> list[int]:
        size = pow2(level + 1)
        cells = [tuple(DyadicInterval(D0, D1) for _ in range(problem.dim))]
        final = []
        spent = 0
        while cells and spent < budget:
            box = cells.pop()
            spent += 1
            con = eval_interval(problem.constraint, box)
            if con.lo > D0:
                continue
            if max(iv.width() for iv in box) <= size:
                final.append(box)
                continue
            widths = [iv.width() for iv in box]
            widest = max(range(len(widths)), key=lambda i: (widths[i].as_fraction(), -i))
            iv = box[widest]
            mid = iv.midpoint()
            cells.append(box[:widest] + (DyadicInterval(iv.lo, mid),) + box[widest + 1 :])
            cells.append(box[:widest] + (DyadicInterval(mid, iv.hi),) + box[widest + 1 :])
        if cells:
            final.extend(cells)  # budget exhausted: keep coarse cells (sound)
        out = set()
        pad = pow2(level + 1)
        for box in final:
            ranges = []
            for iv in box:
                lo = iv.lo - pad
                hi = iv.hi + pad
                step = level + 1
                lo_j = max(0, _ceil_scaled(lo, step))
                hi_j = min((1 << step) - 1, _floor_scaled(hi, step))
                ranges.append(range(lo_j, hi_j + 1))
            for combo in _product_ranges(ranges):
                coords = tuple(Dyadic(j, level + 1) for j in combo)
                out.add(cube_nearest_index(space, coords, level))
        return sorted(out)

    return SetName(space, query, standard=False)


def _ceil_scaled(v: Dyadic, step: int) -> int:
    if v.exp <= step:
        return v.num << (step - v.exp)
    return -((-v.num) >> (v.exp - step))


def _floor_scaled(v: Dyadic, step: int) -> int:
    if v.exp <= step:
        return v.num << (step - v.exp)
    return v.num >> (v.exp - step)


def _product_ranges(ranges):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for tail in _product_ranges(ranges[1:]):
            yield (head,) + tail

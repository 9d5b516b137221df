"""Closed-form colorability and non-colorability tests.

These are the cheap region checks run before any exhaustive search: a
column-pair pigeonhole bound, a weighted refinement of it, and the thin-grid
rule that any valid partial coloring of a grid with min(N, M) <= c extends.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import comb

from .grid import RECTANGLE, GridDims, PartialColoring, validate


class Verdict(Enum):
    UNCOLORABLE = "UNCOLORABLE"
    TRIVIALLY_EXTENDABLE = "TRIVIALLY_EXTENDABLE"
    NEEDS_SEARCH = "NEEDS_SEARCH"


# reason tags reported alongside a verdict
THIN_GRID = "thin-grid"
PIGEONHOLE = "column-pigeonhole"
WEIGHTED_PIGEONHOLE = "weighted-pigeonhole"


@dataclass(frozen=True)
class RegionVerdict:
    kind: Verdict
    reason: str = ""


def pigeonhole_uncolorable(N: int, M: int, c: int) -> bool:
    """True when a column-to-(row pair, color) pigeonhole argument rules out
    any c-coloring: c+1 <= N and c*C(c+1,2) < M, or the transpose."""
    _check_args(N, M, c)

    def hits(n: int, m: int) -> bool:
        return c + 1 <= n and c * comb(c + 1, 2) < m

    return hits(N, M) or hits(M, N)


def better_uncolorable(N: int, M: int, c: int) -> bool:
    """Weighted pigeonhole: for some c' in [1, c-1], N >= c+c' and
    M > (c/c')*C(c+c', 2), or the transpose. Exact rational comparison."""
    _check_args(N, M, c)

    def hits(n: int, m: int) -> bool:
        for cp in range(1, c):
            if n >= c + cp and m > Fraction(c, cp) * comb(c + cp, 2):
                return True
        return False

    return hits(N, M) or hits(M, N)


def thin_grid_extendable(pc: PartialColoring) -> bool:
    """For grids with min(N, M) <= c: extendable iff the partial coloring is
    valid (blanks can then take per-line fresh colors)."""
    n, m = pc.dims.rows, pc.dims.cols
    if min(n, m) > pc.colors:
        raise ValueError(f"thin-grid test needs min(N,M) <= c, got {n}x{m} with c={pc.colors}")
    return validate(pc, RECTANGLE) is None


def classify(N: int, M: int, c: int, pc: PartialColoring | None = None) -> RegionVerdict:
    """Apply, in order: thin-grid test, pigeonhole, weighted pigeonhole.
    Anything that survives needs exhaustive search.

    An invalid partial coloring on a thin grid falls through to NEEDS_SEARCH;
    rejecting it is the solver's job, not a statement about the grid.
    """
    _check_args(N, M, c)
    if pc is None:
        pc = PartialColoring(GridDims(N, M), c)
    if (pc.dims.rows, pc.dims.cols) != (N, M) or pc.colors != c:
        raise ValueError("partial coloring does not match (N, M, c)")
    if min(N, M) <= c and validate(pc, RECTANGLE) is None:
        return RegionVerdict(Verdict.TRIVIALLY_EXTENDABLE, THIN_GRID)
    if pigeonhole_uncolorable(N, M, c):
        return RegionVerdict(Verdict.UNCOLORABLE, PIGEONHOLE)
    if better_uncolorable(N, M, c):
        return RegionVerdict(Verdict.UNCOLORABLE, WEIGHTED_PIGEONHOLE)
    return RegionVerdict(Verdict.NEEDS_SEARCH)


def _check_args(N: int, M: int, c: int) -> None:
    if N < 1 or M < 1 or c < 1:
        raise ValueError(f"need N, M, c >= 1, got ({N}, {M}, {c})")

"""Grid coloring data model: dimensions, partial colorings, shape families,
and the forbidden monochromatic sets they generate.

Coordinates are 1-based: cell (i, j) means row i in [1..rows], column j in
[1..cols]. A forbidden set is a set of cells that must not all receive the
same color.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import gcd
from typing import Iterator, NamedTuple

import numpy as np

Point = tuple[int, int]


class GridFormatError(ValueError):
    """Malformed grid or shape file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StretchMode(Enum):
    FULL = "full"   # independent rational stretch per axis
    HALF = "half"   # one shared rational stretch for both axes


@dataclass(frozen=True)
class GridDims:
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid dimensions must be >= 1, got {self.rows}x{self.cols}")

    def transpose(self) -> "GridDims":
        return GridDims(self.cols, self.rows)

    def contains(self, p: Point) -> bool:
        return 1 <= p[0] <= self.rows and 1 <= p[1] <= self.cols

    def cells(self) -> Iterator[Point]:
        for i in range(1, self.rows + 1):
            for j in range(1, self.cols + 1):
                yield (i, j)


@dataclass(frozen=True)
class ShapeFamily:
    """Generator point set plus the stretch mode that spawns forbidden sets."""

    generator: frozenset[Point]
    mode: StretchMode = StretchMode.FULL

    def __post_init__(self):
        if len(self.generator) < 2:
            raise ValueError("shape generator needs at least 2 distinct points")


RECTANGLE = ShapeFamily(frozenset({(0, 0), (0, 1), (1, 0), (1, 1)}), StretchMode.FULL)


@dataclass(frozen=True)
class ForbiddenSet:
    points: frozenset[Point]

    @property
    def sorted_points(self) -> tuple[Point, ...]:
        return tuple(sorted(self.points))

    def __len__(self) -> int:
        return len(self.points)


class Violation(NamedTuple):
    forbidden: ForbiddenSet
    color: int


@dataclass
class PartialColoring:
    """A (possibly partial) assignment of colors 1..colors to grid cells.

    Validity against a shape family is not enforced here; use validate().
    """

    dims: GridDims
    colors: int
    cells: dict[Point, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.colors < 1:
            raise ValueError("color count must be >= 1")
        for p, k in self.cells.items():
            if not self.dims.contains(p):
                raise ValueError(f"cell {p} outside grid {self.dims.rows}x{self.dims.cols}")
            if not 1 <= k <= self.colors:
                raise ValueError(f"color {k} at {p} outside [1..{self.colors}]")

    def uncolored_cells(self) -> list[Point]:
        return [p for p in self.dims.cells() if p not in self.cells]

    def is_total(self) -> bool:
        return len(self.cells) == self.dims.rows * self.dims.cols

    def with_cells(self, extra: dict[Point, int]) -> "PartialColoring":
        merged = dict(self.cells)
        merged.update(extra)
        return PartialColoring(self.dims, self.colors, merged)

    def agrees_with(self, other: "PartialColoring") -> bool:
        """True when self assigns every cell of `other` the same color."""
        return all(self.cells.get(p) == k for p, k in other.cells.items())

    def transpose(self) -> "PartialColoring":
        return PartialColoring(
            self.dims.transpose(), self.colors,
            {(j, i): k for (i, j), k in self.cells.items()},
        )

    def to_array(self) -> np.ndarray:
        """Dense int32 array, 0 for blank, colors as-is. Index [i-1, j-1]."""
        a = np.zeros((self.dims.rows, self.dims.cols), dtype=np.int32)
        for (i, j), k in self.cells.items():
            a[i - 1, j - 1] = k
        return a

    @classmethod
    def from_array(cls, a: np.ndarray, colors: int) -> "PartialColoring":
        cells = {}
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                if a[i, j]:
                    cells[(i + 1, j + 1)] = int(a[i, j])
        return cls(GridDims(a.shape[0], a.shape[1]), colors, cells)

    def to_text(self) -> str:
        lines = [f"{self.dims.rows} {self.dims.cols} {self.colors}"]
        for i in range(1, self.dims.rows + 1):
            row = [str(self.cells[(i, j)]) if (i, j) in self.cells else "."
                   for j in range(1, self.dims.cols + 1)]
            lines.append(" ".join(row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PartialColoring":
        lines = text.splitlines()
        if not lines:
            raise GridFormatError("empty grid file")
        head = lines[0].split()
        if len(head) != 3:
            raise GridFormatError("expected header 'N M c'", 1)
        try:
            n, m, c = (int(t) for t in head)
        except ValueError:
            raise GridFormatError("non-integer header field", 1) from None
        cells: dict[Point, int] = {}
        body = [ln for ln in lines[1:] if ln.strip() != ""]
        if len(body) != n:
            raise GridFormatError(f"expected {n} grid rows, found {len(body)}", len(lines))
        for i, ln in enumerate(body, start=1):
            toks = ln.split()
            if len(toks) != m:
                raise GridFormatError(f"expected {m} tokens in row {i}", i + 1)
            for j, t in enumerate(toks, start=1):
                if t == ".":
                    continue
                try:
                    k = int(t)
                except ValueError:
                    raise GridFormatError(f"bad token {t!r}", i + 1) from None
                if not 1 <= k <= c:
                    raise GridFormatError(f"color {k} outside [1..{c}]", i + 1)
                cells[(i, j)] = k
        return cls(GridDims(n, m), c, cells)


def write_shape(family: ShapeFamily) -> str:
    lines = [f"mode: {family.mode.value}"]
    for x, y in sorted(family.generator):
        lines.append(f"{x} {y}")
    return "\n".join(lines) + "\n"


def parse_shape(text: str) -> ShapeFamily:
    mode: StretchMode | None = None
    pts: set[Point] = set()
    for lineno, ln in enumerate(text.splitlines(), start=1):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if ln.startswith("mode:"):
            name = ln.split(":", 1)[1].strip().lower()
            try:
                mode = StretchMode(name)
            except ValueError:
                raise GridFormatError(f"unknown mode {name!r}", lineno) from None
            continue
        toks = ln.split()
        if len(toks) != 2:
            raise GridFormatError("expected 'x y' point line", lineno)
        try:
            pts.add((int(toks[0]), int(toks[1])))
        except ValueError:
            raise GridFormatError("non-integer point coordinate", lineno) from None
    if mode is None:
        raise GridFormatError("missing 'mode: full|half' header")
    return ShapeFamily(frozenset(pts), mode)


# ---------------------------------------------------------------------------
# Forbidden-set generation.
#
# A forbidden set is the image of the generator under (x, y) -> (s*x + a,
# t*y + b) with rational stretches and translations (s == t in HALF mode),
# restricted to images that are all lattice points inside the grid and that
# preserve cardinality (no collapsing, so s, t != 0). Only such images can be
# monochromatic in a grid, so nothing else needs to be emitted.
# ---------------------------------------------------------------------------


def _axis_maps(values: tuple[int, ...], limit: int) -> list[dict[int, int]]:
    """All affine lattice embeddings of the distinct sorted `values` into
    [1..limit]. Each map sends value v to s*v + a for one rational s != 0."""
    if len(values) == 1:
        return [{values[0]: u} for u in range(1, limit + 1)]
    v0 = values[0]
    g = 0
    for v in values[1:]:
        g = gcd(g, v - v0)
    span = values[-1] - v0
    # s = k/g keeps every s*(v - v0) integral; |s|*span must fit in the axis
    kmax = (limit - 1) * g // span
    maps: list[dict[int, int]] = []
    for k in range(-kmax, kmax + 1):
        if k == 0:
            continue
        offs = {v: k * (v - v0) // g for v in values}
        lo = min(offs.values())
        hi = max(offs.values())
        for base in range(1 - lo, limit - hi + 1):
            maps.append({v: base + off for v, off in offs.items()})
    return maps


def _half_stretches(xs: tuple[int, ...], ys: tuple[int, ...],
                    dims: GridDims) -> Iterator[tuple[dict[int, int], dict[int, int]]]:
    gx = 0
    for v in xs[1:]:
        gx = gcd(gx, v - xs[0])
    gy = 0
    for v in ys[1:]:
        gy = gcd(gy, v - ys[0])
    g = gcd(gx, gy)  # shared stretch s = k/g serves both axes
    span_x = xs[-1] - xs[0]
    span_y = ys[-1] - ys[0]
    kmax = None
    if span_x:
        kmax = (dims.rows - 1) * g // span_x
    if span_y:
        ky = (dims.cols - 1) * g // span_y
        kmax = ky if kmax is None else min(kmax, ky)
    assert kmax is not None  # |S| >= 2 distinct points forces a nonzero span
    for k in range(-kmax, kmax + 1):
        if k == 0:
            continue
        for xmap in _anchored(xs, k, g, dims.rows):
            for ymap in _anchored(ys, k, g, dims.cols):
                yield xmap, ymap


def _anchored(values: tuple[int, ...], k: int, g: int, limit: int) -> list[dict[int, int]]:
    if values[-1] == values[0]:
        return [{values[0]: u} for u in range(1, limit + 1)]
    offs = {v: k * (v - values[0]) // g for v in values}
    lo = min(offs.values())
    hi = max(offs.values())
    return [{v: base + off for v, off in offs.items()}
            for base in range(1 - lo, limit - hi + 1)]


def enumerate_forbidden_sets(dims: GridDims, family: ShapeFamily = RECTANGLE) -> list[ForbiddenSet]:
    """Every forbidden set of the family inside the grid, deduplicated,
    in lexicographic order of the sorted point list."""
    pts = sorted(family.generator)
    xs = tuple(sorted({p[0] for p in pts}))
    ys = tuple(sorted({p[1] for p in pts}))
    seen: set[frozenset[Point]] = set()
    if family.mode is StretchMode.FULL:
        for xmap in _axis_maps(xs, dims.rows):
            for ymap in _axis_maps(ys, dims.cols):
                seen.add(frozenset((xmap[x], ymap[y]) for x, y in pts))
    else:
        for xmap, ymap in _half_stretches(xs, ys, dims):
            seen.add(frozenset((xmap[x], ymap[y]) for x, y in pts))
    out = [ForbiddenSet(s) for s in seen]
    out.sort(key=lambda f: f.sorted_points)
    return out


def rectangle_count(dims: GridDims) -> int:
    """Number of axis-aligned rectangles, C(n,2)*C(m,2)."""
    n, m = dims.rows, dims.cols
    return (n * (n - 1) // 2) * (m * (m - 1) // 2)


def _validate_rectangles(pc: PartialColoring) -> Violation | None:
    """Vectorized monochromatic-rectangle search returning the first witness
    in canonical order (r1, c1, c2, r2), matching enumeration order."""
    a = pc.to_array()
    n, m = a.shape
    for r1 in range(n - 1):
        row1 = a[r1]
        below = a[r1 + 1:]
        eq = (below == row1) & (row1 > 0)
        if not eq.any():
            continue
        best: tuple[int, int, int, int] | None = None  # (c1, c2, r2, color)
        rows_idx, cols_idx = np.nonzero(eq)
        # group matches by (r2, color); a duplicate group is a rectangle
        colors = row1[cols_idx]
        keys = rows_idx.astype(np.int64) * (int(a.max()) + 1) + colors
        order = np.argsort(keys, kind="stable")
        ks = keys[order]
        cs = cols_idx[order]
        rs = rows_idx[order]
        col_sorted = colors[order]
        dup = np.nonzero(ks[:-1] == ks[1:])[0]
        for t in dup:
            cand = (int(cs[t]), int(cs[t + 1]), int(rs[t]), int(col_sorted[t]))
            if best is None or cand < best:
                best = cand
        if best is not None:
            c1, c2, r2, color = best
            pts = frozenset({(r1 + 1, c1 + 1), (r1 + 1, c2 + 1),
                             (r1 + 2 + r2, c1 + 1), (r1 + 2 + r2, c2 + 1)})
            return Violation(ForbiddenSet(pts), color)
    return None


def validate(pc: PartialColoring, family: ShapeFamily = RECTANGLE) -> Violation | None:
    """None when no forbidden set is fully colored monochromatically,
    else the first violation in canonical enumeration order."""
    if family == RECTANGLE:
        return _validate_rectangles(pc)
    for fs in enumerate_forbidden_sets(pc.dims, family):
        it = iter(fs.points)
        k = pc.cells.get(next(it))
        if k is None:
            continue
        if all(pc.cells.get(p) == k for p in it):
            return Violation(fs, k)
    return None

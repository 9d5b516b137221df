"""Boolean and integer-program encodings of grid colorability.

Variables x_{ijk} say "cell (i,j) has color k". The CNF has one
at-least-one-color clause per cell and, for every forbidden set F and color
k, one all-negative clause over F at color k. No at-most-one clauses: a model
decodes by taking the least true color per cell.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from .grid import RECTANGLE, ForbiddenSet, GridDims, PartialColoring, ShapeFamily, enumerate_forbidden_sets

Model = dict[int, bool]


class DimacsError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NoColorError(ValueError):
    """A model leaves some cell with no true color variable."""

    def __init__(self, cell):
        self.cell = cell
        super().__init__(f"no true color variable for cell {cell}")


@dataclass(frozen=True)
class GridVarIndex:
    """Bijection (i, j, k) <-> variable id, row-major cells, color minor."""

    n: int
    m: int
    c: int

    def var(self, i: int, j: int, k: int) -> int:
        return ((i - 1) * self.m + (j - 1)) * self.c + k

    def cell_color(self, v: int) -> tuple[int, int, int]:
        v -= 1
        k = v % self.c
        j = (v // self.c) % self.m
        i = v // (self.c * self.m)
        return (i + 1, j + 1, k + 1)


@dataclass
class CnfInstance:
    var_count: int
    clauses: list[list[int]]
    index: GridVarIndex | None = None  # present for grid-built formulas

    def clause_sets(self) -> set[frozenset[int]]:
        return {frozenset(cl) for cl in self.clauses}


def build_cnf(n: int, m: int, c: int, family: ShapeFamily = RECTANGLE) -> CnfInstance:
    """Colorability formula for the n x m grid with c colors. For rectangles
    this yields n*m positive clauses plus c*C(n,2)*C(m,2) negative ones."""
    if n < 1 or m < 1 or c < 1:
        raise ValueError("need n, m, c >= 1")
    idx = GridVarIndex(n, m, c)
    clauses: list[list[int]] = []
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            clauses.append([idx.var(i, j, k) for k in range(1, c + 1)])
    for fs in enumerate_forbidden_sets(GridDims(n, m), family):
        pts = fs.sorted_points
        for k in range(1, c + 1):
            clauses.append([-idx.var(i, j, k) for (i, j) in pts])
    return CnfInstance(n * m * c, clauses, idx)


def coloring_to_model(pc: PartialColoring) -> Model:
    """Indicator model of a total coloring: x_{ijk} true iff color(i,j) == k."""
    if not pc.is_total():
        raise ValueError("need a total coloring")
    idx = GridVarIndex(pc.dims.rows, pc.dims.cols, pc.colors)
    model: Model = {}
    for (i, j), col in pc.cells.items():
        for k in range(1, pc.colors + 1):
            model[idx.var(i, j, k)] = (col == k)
    return model


def decode_model(model: Model, n: int, m: int, c: int) -> PartialColoring:
    """Total coloring taking the least true color per cell."""
    idx = GridVarIndex(n, m, c)
    cells = {}
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            for k in range(1, c + 1):
                if model.get(idx.var(i, j, k)):
                    cells[(i, j)] = k
                    break
            else:
                raise NoColorError((i, j))
    return PartialColoring(GridDims(n, m), c, cells)


# ---------------------------------------------------------------------------
# Integer program translation. Every CNF variable v gets a column pair
# (x_v, xbar_v); all rows are kept in <= form.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IlpRow:
    coeffs: tuple[tuple[int, int], ...]  # sorted (column, coefficient), no zeros
    bound: int

    @staticmethod
    def make(coeffs: dict[int, int], bound: int) -> "IlpRow":
        return IlpRow(tuple(sorted((c, v) for c, v in coeffs.items() if v != 0)), bound)

    def coeff_dict(self) -> dict[int, int]:
        return dict(self.coeffs)

    def eval_lhs(self, assignment: dict[int, int]) -> int:
        return sum(v * assignment.get(c, 0) for c, v in self.coeffs)

    def satisfied_by(self, assignment: dict[int, int]) -> bool:
        return self.eval_lhs(assignment) <= self.bound


@dataclass
class IlpInstance:
    cnf_var_count: int
    rows: list[IlpRow] = field(default_factory=list)

    @property
    def column_count(self) -> int:
        return 2 * self.cnf_var_count

    @staticmethod
    def pos_col(v: int) -> int:
        return 2 * v - 1

    @staticmethod
    def neg_col(v: int) -> int:
        return 2 * v

    def assignment_from_model(self, model: Model) -> dict[int, int]:
        out = {}
        for v in range(1, self.cnf_var_count + 1):
            b = 1 if model.get(v) else 0
            out[self.pos_col(v)] = b
            out[self.neg_col(v)] = 1 - b
        return out


def literal_column(lit: int) -> int:
    return IlpInstance.pos_col(lit) if lit > 0 else IlpInstance.neg_col(-lit)


def cnf_to_ilp(cnf: CnfInstance) -> IlpInstance:
    """Pairing rows x + xbar <= 1 and -x - xbar <= -1 per variable, then one
    row -sum(literal columns) <= -1 per clause. 0-1 solutions correspond
    exactly to satisfying assignments."""
    ilp = IlpInstance(cnf.var_count)
    for v in range(1, cnf.var_count + 1):
        p, q = ilp.pos_col(v), ilp.neg_col(v)
        ilp.rows.append(IlpRow.make({p: 1, q: 1}, 1))
        ilp.rows.append(IlpRow.make({p: -1, q: -1}, -1))
    for cl in cnf.clauses:
        coeffs: dict[int, int] = {}
        for lit in cl:
            col = literal_column(lit)
            coeffs[col] = coeffs.get(col, 0) - 1
        ilp.rows.append(IlpRow.make(coeffs, -1))
    return ilp


def format_ilp(ilp: IlpInstance) -> str:
    """One row per line: 'coef*var ... <= b' with columns named x<v>/nx<v>."""

    def name(col: int) -> str:
        v = (col + 1) // 2
        return f"x{v}" if col % 2 == 1 else f"nx{v}"

    lines = []
    for row in ilp.rows:
        terms = " + ".join(f"{v}*{name(c)}" for c, v in row.coeffs) or "0"
        lines.append(f"{terms} <= {row.bound}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# DIMACS import/export.
# ---------------------------------------------------------------------------


def write_dimacs(cnf: CnfInstance, comments: list[str] | None = None) -> str:
    lines = [f"c {c}" for c in (comments or [])]
    lines.append(f"p cnf {cnf.var_count} {len(cnf.clauses)}")
    for cl in cnf.clauses:
        lines.append(" ".join(str(lit) for lit in cl) + " 0")
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfInstance:
    var_count = None
    clause_count = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, ln in enumerate(text.splitlines(), start=1):
        ln = ln.strip()
        if not ln or ln.startswith("c"):
            continue
        if ln.startswith("p"):
            parts = ln.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError("malformed problem line", lineno)
            try:
                var_count, clause_count = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError("non-integer problem counts", lineno) from None
            continue
        if var_count is None:
            raise DimacsError("clause before problem line", lineno)
        for tok in ln.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(current)
                current = []
                continue
            if abs(lit) > var_count:
                raise DimacsError(f"literal {lit} outside declared variable range", lineno)
            current.append(lit)
    if var_count is None:
        raise DimacsError("missing problem line")
    if current:
        raise DimacsError("unterminated clause at end of file")
    if clause_count != len(clauses):
        raise DimacsError(f"header declares {clause_count} clauses, found {len(clauses)}")
    return CnfInstance(var_count, clauses)


def parse_dimacs_model(text: str) -> Model:
    """Solution lines of signed integers terminated by 0. Lines starting with
    'c' or 's' are skipped; a leading 'v' token is stripped."""
    model: Model = {}
    terminated = False
    for lineno, ln in enumerate(text.splitlines(), start=1):
        ln = ln.strip()
        if not ln or ln[0] in "cs":
            continue
        toks = ln.split()
        if toks and toks[0] == "v":
            toks = toks[1:]
        for tok in toks:
            if terminated:
                raise DimacsError("trailing tokens after terminating 0", lineno)
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                terminated = True
                continue
            model[abs(lit)] = lit > 0
    if not terminated:
        raise DimacsError("model not terminated by 0")
    return model


# ---------------------------------------------------------------------------
# The just-barely-uncolorable instance family used by the cutting-planes
# lower-bound story.
# ---------------------------------------------------------------------------


def gcc_instance(c: int, variant: str = "standard") -> tuple[int, int]:
    """Dimensions (c+1, c*C(c,2)+1); variant='wide' gives (c+1, c*C(c+1,2)+1).

    Only the wide variant is forced uncolorable by the pigeonhole bound
    implemented here; the standard one cites tighter external results and is
    exposed as a named generator only.
    """
    if c < 2:
        raise ValueError("need c >= 2")
    if variant == "standard":
        return (c + 1, c * comb(c, 2) + 1)
    if variant == "wide":
        return (c + 1, c * comb(c + 1, 2) + 1)
    raise ValueError(f"unknown variant {variant!r}")

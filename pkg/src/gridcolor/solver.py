"""Exact decision procedures for grid coloring extension.

Three engines share one contract (same decisions, valid witnesses):

* extend_subset_dp -- the table f(S, i) over subsets S of the uncolored
  cells and color budgets i, where f(S, i) says S can be colored with colors
  {1..i} on top of the fixed cells. The table is materialized for all
  (S, i); a witness is reconstructed by peeling color classes off it.
* extend_backtrack -- most-constrained-first DFS with conflict pruning.
* decide_gce_fpt -- region classification first (thin grid, pigeonhole
  bounds), exhaustive search only on the residual region.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import proofs
from .bounds import RegionVerdict, Verdict, classify
from .encode import CnfInstance
from .grid import (
    RECTANGLE,
    ForbiddenSet,
    GridDims,
    PartialColoring,
    Point,
    ShapeFamily,
    enumerate_forbidden_sets,
    rectangle_count,
    validate,
)


class CapExceeded(RuntimeError):
    """Instance too large for the subset table; use backtracking instead."""


DEFAULT_CELL_CAP = 24
# beyond this many forbidden sets we refuse to materialize the family
SET_MATERIALIZE_CAP = 2_000_000


@dataclass
class SolveStats:
    nodes: int = 0
    table_entries: int = 0
    seconds: float = 0.0
    engine: str = ""
    region_reason: str = ""
    searched: bool = False


@dataclass
class ExtensionResult:
    decision: bool
    witness: PartialColoring | None
    stats: SolveStats = field(default_factory=SolveStats)


# ---------------------------------------------------------------------------
# Subset dynamic program.
# ---------------------------------------------------------------------------


def _danger_masks(pc: PartialColoring, family: ShapeFamily,
                  cells: list[Point]) -> list[list[int]]:
    """For each color k (1-based index k, list index k-1): bitmasks d over the
    uncolored cells such that coloring all of d with k completes a forbidden
    set (its pre-colored part, possibly empty, is uniformly k)."""
    if family == RECTANGLE and rectangle_count(pc.dims) > SET_MATERIALIZE_CAP:
        raise CapExceeded("forbidden-set family too large for the table solver")
    pos = {p: t for t, p in enumerate(cells)}
    danger: list[list[int]] = [[] for _ in range(pc.colors)]
    for fs in enumerate_forbidden_sets(pc.dims, family):
        mask = 0
        fixed: int | None = None
        mixed = False
        for p in fs.points:
            t = pos.get(p)
            if t is not None:
                mask |= 1 << t
            else:
                k = pc.cells[p]
                if fixed is None:
                    fixed = k
                elif fixed != k:
                    mixed = True
                    break
        if mixed or mask == 0:
            continue  # harmless, or a pre-existing violation caught earlier
        if fixed is None:
            for k in range(pc.colors):
                danger[k].append(mask)
        else:
            danger[fixed - 1].append(mask)
    return danger


def _zeta(a: np.ndarray, u: int) -> np.ndarray:
    for b in range(u):
        step = 1 << b
        v = a.reshape(-1, 2, step)
        v[:, 1, :] += v[:, 0, :]
    return a


def _mobius(a: np.ndarray, u: int) -> np.ndarray:
    for b in range(u):
        step = 1 << b
        v = a.reshape(-1, 2, step)
        v[:, 1, :] -= v[:, 0, :]
    return a


def _ascending_submasks(mask: int):
    s = 0
    while True:
        yield s
        if s == mask:
            return
        s = (s - mask) & mask


def extend_subset_dp(pc: PartialColoring, family: ShapeFamily = RECTANGLE,
                     max_cells: int = DEFAULT_CELL_CAP,
                     keep_tables: bool = False) -> ExtensionResult:
    """Decide extension by filling the full f(S, i) table.

    Level i is computed from level i-1 through subset-lattice transforms:
    with g_i[T] = 1 iff T plus the pre-colored i-cells stay violation-free,
    f_i[S] > 0 iff S splits into classes T_1..T_i with each T_j allowed at
    color j. Exact integer counting makes the test exact.
    """
    t0 = time.perf_counter()
    stats = SolveStats(engine="dp")
    if validate(pc, family) is not None:
        stats.seconds = time.perf_counter() - t0
        return ExtensionResult(False, None, stats)
    cells = pc.uncolored_cells()
    u = len(cells)
    if u > max_cells:
        raise CapExceeded(f"{u} uncolored cells exceed the cap of {max_cells}")
    c = pc.colors
    if u == 0:
        stats.seconds = time.perf_counter() - t0
        return ExtensionResult(True, pc, stats)

    danger = _danger_masks(pc, family, cells)
    size = 1 << u
    # intermediate Moebius sums are bounded by (2^c + 1)^u; stay in int64
    # when that fits, otherwise fall back to exact python integers
    dtype: object = np.int64 if u * math.log2(2 ** c + 1) <= 62 else object
    idx = np.arange(size)

    safe_arrays: list[np.ndarray] = []
    f_levels: list[np.ndarray] = []
    z_product = np.ones(size, dtype=dtype)
    for k in range(c):
        g = np.ones(size, dtype=np.uint8)
        for d in danger[k]:
            g[(idx & d) == d] = 0
        safe_arrays.append(g)
        zg = _zeta(g.astype(dtype), u)
        z_product = z_product * zg
        counts = _mobius(z_product.copy(), u)
        f_levels.append(counts > 0)
    stats.table_entries = size * c

    full = size - 1
    if not bool(f_levels[-1][full]):
        stats.seconds = time.perf_counter() - t0
        if keep_tables:
            stats.tables = f_levels  # type: ignore[attr-defined]
        return ExtensionResult(False, None, stats)

    # peel color classes: at level i take the smallest allowed class whose
    # remainder is colorable with i-1 colors
    assignment: dict[Point, int] = {}
    remaining = full
    for i in range(c, 0, -1):
        if remaining == 0:
            break
        chosen = None
        if i == 1:
            chosen = remaining
        else:
            prev = f_levels[i - 2]
            g = safe_arrays[i - 1]
            for t in _ascending_submasks(remaining):
                if g[t] and prev[remaining ^ t]:
                    chosen = t
                    break
        assert chosen is not None, "table peel failed"
        for t in range(u):
            if chosen >> t & 1:
                assignment[cells[t]] = i
        remaining ^= chosen
    witness = pc.with_cells(assignment)
    stats.seconds = time.perf_counter() - t0
    if keep_tables:
        stats.tables = f_levels  # type: ignore[attr-defined]
    return ExtensionResult(True, witness, stats)


# ---------------------------------------------------------------------------
# Backtracking search.
# ---------------------------------------------------------------------------


class _RectChecker:
    """Lazy rectangle-completion tests on a dense grid; never materializes
    the forbidden-set family, so reduction-sized instances stay cheap."""

    def __init__(self, pc: PartialColoring):
        self.grid = pc.to_array()

    def assign(self, p: Point, k: int) -> None:
        self.grid[p[0] - 1, p[1] - 1] = k

    def unassign(self, p: Point) -> None:
        self.grid[p[0] - 1, p[1] - 1] = 0

    def feasible(self, p: Point, k: int) -> bool:
        r, c = p[0] - 1, p[1] - 1
        rows_k = np.nonzero(self.grid[:, c] == k)[0]
        if rows_k.size == 0:
            return True
        cols_k = np.nonzero(self.grid[r, :] == k)[0]
        if cols_k.size == 0:
            return True
        return not (self.grid[np.ix_(rows_k, cols_k)] == k).any()


class _SetChecker:
    """Materialized forbidden sets with incremental per-set color counts."""

    def __init__(self, pc: PartialColoring, family: ShapeFamily):
        self.sets = enumerate_forbidden_sets(pc.dims, family)
        self.by_cell: dict[Point, list[int]] = {}
        self.size = [len(fs) for fs in self.sets]
        self.counts: list[dict[int, int]] = [{} for _ in self.sets]
        for sid, fs in enumerate(self.sets):
            for p in fs.points:
                self.by_cell.setdefault(p, []).append(sid)
        for p, k in pc.cells.items():
            for sid in self.by_cell.get(p, []):
                cnt = self.counts[sid]
                cnt[k] = cnt.get(k, 0) + 1

    def assign(self, p: Point, k: int) -> None:
        for sid in self.by_cell.get(p, []):
            cnt = self.counts[sid]
            cnt[k] = cnt.get(k, 0) + 1

    def unassign_color(self, p: Point, k: int) -> None:
        for sid in self.by_cell.get(p, []):
            cnt = self.counts[sid]
            cnt[k] -= 1
            if cnt[k] == 0:
                del cnt[k]

    def feasible(self, p: Point, k: int) -> bool:
        for sid in self.by_cell.get(p, []):
            if self.counts[sid].get(k, 0) == self.size[sid] - 1:
                return False
        return True


def extend_backtrack(pc: PartialColoring, family: ShapeFamily = RECTANGLE) -> ExtensionResult:
    """Most-constrained-cell-first search, colors tried in ascending order,
    so a YES witness is the lexicographically least one along that order."""
    t0 = time.perf_counter()
    stats = SolveStats(engine="bt")
    if validate(pc, family) is not None:
        stats.seconds = time.perf_counter() - t0
        return ExtensionResult(False, None, stats)
    cells = pc.uncolored_cells()
    if not cells:
        stats.seconds = time.perf_counter() - t0
        return ExtensionResult(True, pc, stats)
    c = pc.colors

    checker = _RectChecker(pc) if family == RECTANGLE else _SetChecker(pc, family)
    feas: dict[Point, set[int]] = {
        p: {k for k in range(1, c + 1) if checker.feasible(p, k)} for p in cells
    }
    uncolored = set(cells)
    assignment: dict[Point, int] = {}

    def dfs() -> bool:
        if not uncolored:
            return True
        cell = min(uncolored, key=lambda p: (len(feas[p]), p))
        if not feas[cell]:
            return False
        uncolored.discard(cell)
        for k in sorted(feas[cell]):
            stats.nodes += 1
            checker.assign(cell, k)
            assignment[cell] = k
            # only color k can gain new conflicts from this assignment
            removed: list[Point] = []
            for q in uncolored:
                if k in feas[q] and not checker.feasible(q, k):
                    feas[q].discard(k)
                    removed.append(q)
            if dfs():
                return True
            for q in removed:
                feas[q].add(k)
            del assignment[cell]
            if isinstance(checker, _RectChecker):
                checker.unassign(cell)
            else:
                checker.unassign_color(cell, k)
        uncolored.add(cell)
        return False

    ok = dfs()
    stats.seconds = time.perf_counter() - t0
    witness = pc.with_cells(assignment) if ok else None
    return ExtensionResult(ok, witness, stats)


# ---------------------------------------------------------------------------
# Region-based driver.
# ---------------------------------------------------------------------------


def _thin_completion(pc: PartialColoring) -> PartialColoring:
    """Complete a valid thin-grid coloring: every blank gets the smallest
    color unused in its short line, so no line ever repeats a fresh color."""
    n, m, c = pc.dims.rows, pc.dims.cols, pc.colors
    if n > c and m <= c:
        return _thin_completion(pc.transpose()).transpose()
    assert n <= c
    extra: dict[Point, int] = {}
    for j in range(1, m + 1):
        used = {pc.cells[(i, j)] for i in range(1, n + 1) if (i, j) in pc.cells}
        for i in range(1, n + 1):
            if (i, j) in pc.cells:
                continue
            k = next(k for k in range(1, c + 1) if k not in used)
            extra[(i, j)] = k
            used.add(k)
    return pc.with_cells(extra)


def decide_gce_fpt(pc: PartialColoring, max_cells: int = DEFAULT_CELL_CAP) -> ExtensionResult:
    """Thin-grid validity test, then the pigeonhole bounds, then exact search
    on whatever region survives. Rectangle family only."""
    t0 = time.perf_counter()
    n, m = pc.dims.rows, pc.dims.cols
    verdict: RegionVerdict = classify(n, m, pc.colors, pc)
    if verdict.kind is Verdict.UNCOLORABLE:
        stats = SolveStats(engine="fpt", region_reason=verdict.reason,
                           seconds=time.perf_counter() - t0)
        return ExtensionResult(False, None, stats)
    if verdict.kind is Verdict.TRIVIALLY_EXTENDABLE:
        witness = _thin_completion(pc)
        assert validate(witness, RECTANGLE) is None
        stats = SolveStats(engine="fpt", region_reason=verdict.reason,
                           seconds=time.perf_counter() - t0)
        return ExtensionResult(True, witness, stats)
    try:
        if len(pc.uncolored_cells()) <= max_cells:
            res = extend_subset_dp(pc, RECTANGLE, max_cells=max_cells)
        else:
            res = extend_backtrack(pc, RECTANGLE)
    except CapExceeded:
        res = extend_backtrack(pc, RECTANGLE)
    res.stats.engine = "fpt"
    res.stats.searched = True
    res.stats.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------------------
# DPLL refutation export: a split-and-propagate search over an unsatisfiable
# CNF whose conflict trace is emitted as a resolution proof. Axiom lines are
# re-emitted per use, so the proof is tree shaped.
# ---------------------------------------------------------------------------


class Satisfiable(RuntimeError):
    """Raised when the formula given to export_refutation has a model."""


def export_refutation(cnf: CnfInstance, var_order: list[int] | None = None,
                      max_nodes: int = 2_000_000) -> proofs.ResolutionProof:
    clauses = [list(dict.fromkeys(cl)) for cl in cnf.clauses]
    nclauses = len(clauses)
    occ_true: dict[int, list[int]] = {}
    occ_false: dict[int, list[int]] = {}
    for cid, cl in enumerate(clauses):
        for lit in cl:
            occ_true.setdefault(lit, []).append(cid)
            occ_false.setdefault(-lit, []).append(cid)
    false_count = [0] * nclauses
    sat_count = [0] * nclauses
    sizes = [len(cl) for cl in clauses]

    assignment: dict[int, bool] = {}
    antecedent: dict[int, int | None] = {}
    trail: list[int] = []
    order = var_order or list(range(1, cnf.var_count + 1))
    lines: list[proofs.ResLine] = []
    nodes = 0

    def emit_axiom(cid: int) -> int:
        lines.append(proofs.ResLine(frozenset(clauses[cid]), "A", None, None))
        return len(lines)

    def emit_resolve(a: int, b: int, pivot: int, clause: frozenset[int]) -> int:
        lines.append(proofs.ResLine(clause, "R", (a, b), pivot))
        return len(lines)

    def lit_value(lit: int) -> bool | None:
        v = assignment.get(abs(lit))
        if v is None:
            return None
        return v if lit > 0 else not v

    def do_assign(var: int, val: bool, ante: int | None) -> int | None:
        """Returns a conflicting clause id, or None."""
        assignment[var] = val
        antecedent[var] = ante
        trail.append(var)
        conflict = None
        sat_lit = var if val else -var
        for cid in occ_true.get(sat_lit, []):
            sat_count[cid] += 1
        for cid in occ_true.get(-sat_lit, []):
            false_count[cid] += 1
            if sat_count[cid] == 0 and false_count[cid] == sizes[cid] and conflict is None:
                conflict = cid
        return conflict

    def undo_to(mark: int) -> None:
        while len(trail) > mark:
            var = trail.pop()
            val = assignment.pop(var)
            antecedent.pop(var)
            sat_lit = var if val else -var
            for cid in occ_true.get(sat_lit, []):
                sat_count[cid] -= 1
            for cid in occ_true.get(-sat_lit, []):
                false_count[cid] -= 1

    def propagate() -> int | None:
        changed = True
        while changed:
            changed = False
            for cid in range(nclauses):
                if sat_count[cid] > 0:
                    continue
                if false_count[cid] == sizes[cid]:
                    return cid
                if false_count[cid] == sizes[cid] - 1:
                    unit = next(l for l in clauses[cid] if lit_value(l) is None)
                    conflict = do_assign(abs(unit), unit > 0, cid)
                    changed = True
                    if conflict is not None:
                        return conflict
        return None

    def analyze(conflict_cid: int) -> tuple[int, frozenset[int]]:
        line = emit_axiom(conflict_cid)
        clause = frozenset(clauses[conflict_cid])
        for var in reversed(trail):
            ante = antecedent[var]
            if ante is None:
                continue
            falsified = -var if assignment[var] else var
            if falsified not in clause:
                continue
            true_lit = var if assignment[var] else -var
            ante_clause = frozenset(clauses[ante])
            resolvent = (clause - {falsified}) | (ante_clause - {true_lit})
            aline = emit_axiom(ante)
            line = emit_resolve(line, aline, abs(var), resolvent)
            clause = resolvent
        return line, clause

    def search() -> tuple[int, frozenset[int]]:
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise RuntimeError("refutation search exceeded the node budget")
        mark = len(trail)
        conflict = propagate()
        if conflict is not None:
            result = analyze(conflict)
            undo_to(mark)
            return result
        var = next((v for v in order if v not in assignment), None)
        if var is None:
            raise Satisfiable("formula has a satisfying assignment")
        conflict = do_assign(var, True, None)
        line_t, clause_t = analyze(conflict) if conflict is not None else search()
        undo_to(mark)
        if -var not in clause_t:
            return line_t, clause_t
        conflict = do_assign(var, False, None)
        line_f, clause_f = analyze(conflict) if conflict is not None else search()
        undo_to(mark)
        if var not in clause_f:
            return line_f, clause_f
        resolvent = (clause_f - {var}) | (clause_t - {-var})
        return emit_resolve(line_f, line_t, var, resolvent), resolvent

    _, final_clause = search()
    assert final_clause == frozenset(), "refutation did not close"
    return proofs.ResolutionProof(lines)

"""Exact two-phase simplex over the rationals with Bland's anti-cycling rule.

The solver is deliberately plain: a dense tableau of Fractions. Problems
coming from curvature computations have a few dozen columns at most.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)


@dataclass(frozen=True)
class LpProblem:
    """maximize / minimize c.x subject to rows (a, rel, b), rel in <=, =, >=.

    ``free[j]`` marks variable j as unbounded; all other variables are >= 0.
    """

    objective: Sequence[Fraction]
    constraints: Sequence[tuple[Sequence[Fraction], str, Fraction]]
    sense: str = "max"
    free: Sequence[bool] | None = None

    def __post_init__(self):
        n = len(self.objective)
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        for a, rel, _ in self.constraints:
            if len(a) != n:
                raise ValueError("constraint length does not match objective")
            if rel not in ("<=", "=", ">="):
                raise ValueError(f"bad relation {rel!r}")
        if self.free is not None and len(self.free) != n:
            raise ValueError("free mask length does not match objective")


@dataclass(frozen=True)
class LpSolution:
    status: str
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None
    basis: tuple[int, ...] | None = field(default=None, compare=False)
    pivots: int = field(default=0, compare=False)


class _Tableau:
    __slots__ = ("rows", "basis", "ncols", "pivots")

    def __init__(self, rows, basis, ncols):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def pivot(self, r: int, c: int, obj_rows: list[list[Fraction]]):
        prow = self.rows[r]
        piv = prow[c]
        if piv != 1:
            inv = 1 / piv
            prow = [v * inv if v else v for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i != r:
                f = row[c]
                if f:
                    for j in nz:
                        row[j] -= f * prow[j]
        for row in obj_rows:
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        self.basis[r] = c
        self.pivots += 1

    def run(self, obj: list[Fraction], allowed: int) -> bool:
        """Maximise with reduced-cost row ``obj`` (obj[j] > 0 improves).

        Returns False when unbounded. Bland: smallest improving column, then
        smallest basic index among tied ratios.
        """
        rows = self.rows
        rhs = self.ncols
        while True:
            col = next((j for j in range(allowed) if obj[j] > 0), None)
            if col is None:
                return True
            best = None
            best_ratio = None
            for i, row in enumerate(rows):
                a = row[col]
                if a > 0:
                    ratio = row[rhs] / a
                    if (
                        best is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[best])
                    ):
                        best, best_ratio = i, ratio
            if best is None:
                return False
            self.pivot(best, col, [obj])


def _standard_form(prob: LpProblem):
    n = len(prob.objective)
    free = list(prob.free) if prob.free is not None else [False] * n
    # structural columns: x_j (or x_j+ , x_j-)
    colmap: list[tuple[int, int]] = []  # (original var, sign)
    for j in range(n):
        colmap.append((j, 1))
        if free[j]:
            colmap.append((j, -1))
    nstruct = len(colmap)
    rows = []
    rels = []
    for a, rel, b in prob.constraints:
        a = [Fraction(v) for v in a]
        b = Fraction(b)
        row = [a[j] * s for j, s in colmap]
        if b < 0:
            row = [-v for v in row]
            b = -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        rows.append((row, b))
        rels.append(rel)
    nslack = sum(1 for r in rels if r != "=")
    return colmap, nstruct, rows, rels, nslack


def solve_lp(prob: LpProblem, warm_basis: Sequence[int] | None = None) -> LpSolution:
    """Solve ``prob`` exactly.

    ``warm_basis`` is the ``basis`` of an earlier solution of a problem with
    the same sparsity structure; when it is still primal feasible the first
    phase is skipped. Results do not depend on whether a warm basis was used
    except through the choice among tied optima.
    """
    colmap, nstruct, srows, rels, nslack = _standard_form(prob)
    m = len(srows)
    sign = 1 if prob.sense == "max" else -1
    c_struct = [sign * Fraction(prob.objective[j]) * s for j, s in colmap]
    nreal = nstruct + nslack
    nart = sum(1 for r in rels if r != "<=")
    ncols = nreal + nart
    rows = []
    basis = [-1] * m
    slack = nstruct
    art = nreal
    for i, ((a, b), rel) in enumerate(zip(srows, rels)):
        row = a + [_ZERO] * (nslack + nart) + [b]
        if rel == "<=":
            row[slack] = Fraction(1)
            basis[i] = slack
            slack += 1
        elif rel == ">=":
            row[slack] = Fraction(-1)
            slack += 1
            row[art] = Fraction(1)
            basis[i] = art
            art += 1
        else:
            row[art] = Fraction(1)
            basis[i] = art
            art += 1
        rows.append(row)

    tab = None
    if warm_basis is not None and len(warm_basis) == m and all(0 <= c < nreal for c in warm_basis):
        tab = _try_warm(rows, list(warm_basis), ncols)
    if tab is None:
        tab = _Tableau([list(r) for r in rows], basis, ncols)
        if nart:
            # phase 1: maximise -(sum of artificials)
            obj1 = [_ZERO] * (ncols + 1)
            for i, row in enumerate(tab.rows):
                if tab.basis[i] >= nreal:
                    for j in range(ncols + 1):
                        obj1[j] += row[j]
            for j in range(nreal, ncols):
                obj1[j] = _ZERO
            # obj1[j] is the reduced gain of column j; obj1[-1] = current infeasibility
            tab.run(obj1, nreal)
            if obj1[ncols] != 0:
                return LpSolution(INFEASIBLE, pivots=tab.pivots)
            _drive_out_artificials(tab, nreal)
    # phase 2
    obj = [_ZERO] * (ncols + 1)
    for j in range(nstruct):
        obj[j] = c_struct[j]
    for i, b in enumerate(tab.basis):
        cb = obj[b] if b < ncols else _ZERO
        if cb:
            row = tab.rows[i]
            for j in range(ncols + 1):
                if row[j]:
                    obj[j] -= cb * row[j]
    if not tab.run(obj, nreal):
        return LpSolution(UNBOUNDED, pivots=tab.pivots)
    xs = [_ZERO] * ncols
    for i, b in enumerate(tab.basis):
        if b >= 0:
            xs[b] = tab.rows[i][ncols]
    x = [_ZERO] * len(prob.objective)
    for k, (j, s) in enumerate(colmap):
        x[j] += s * xs[k]
    value = sum((Fraction(prob.objective[j]) * x[j] for j in range(len(x))), _ZERO)
    basis_out = tuple(tab.basis) if all(0 <= b < nreal for b in tab.basis) else None
    return LpSolution(OPTIMAL, value, tuple(x), basis_out, tab.pivots)


def _try_warm(rows, basis, ncols):
    tab = _Tableau([list(r) for r in rows], [-1] * len(rows), ncols)
    for c in basis:
        r = next((i for i in range(len(rows)) if tab.basis[i] == -1 and tab.rows[i][c] != 0), None)
        if r is None:
            return None
        tab.pivot(r, c, [])
    if any(row[ncols] < 0 for row in tab.rows):
        return None
    return tab


def _drive_out_artificials(tab: _Tableau, nreal: int):
    keep = []
    for i in range(len(tab.rows)):
        if tab.basis[i] >= nreal:
            row = tab.rows[i]
            col = next((j for j in range(nreal) if row[j] != 0), None)
            if col is None:
                continue  # redundant constraint
            tab.pivot(i, col, [])
        keep.append(i)
    tab.rows = [tab.rows[i] for i in keep]
    tab.basis = [tab.basis[i] for i in keep]
    for row in tab.rows:
        for j in range(nreal, tab.ncols):
            row[j] = _ZERO

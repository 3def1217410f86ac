"""Exact rational scalars and dense linear algebra over Q.

Everything here works on ``fractions.Fraction`` (or plain ``int``) entries
stored in lists of lists. Matrices are small (desk-scale graphs), so dense
storage is fine.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "as_rational",
    "fmt_rational",
    "zeros",
    "identity",
    "matmul",
    "rank_exact",
    "rref",
    "nullspace",
    "solve_square",
]


def as_rational(value) -> Fraction:
    """Parse ``value`` into an exact Fraction.

    Accepts ints, Fractions and strings of the form ``"p/q"`` or ``"p"``.
    Floats are rejected: they would silently import rounding error.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational string")
        try:
            if "/" in text:
                num, den = text.split("/")
                return Fraction(int(num), int(den))
            return Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def fmt_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def zeros(rows: int, cols: int) -> list[list[Fraction]]:
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(n: int) -> list[list[Fraction]]:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in range(len(a))]
    inner = len(b)
    cols = len(b[0])
    out = []
    for row in a:
        if len(row) != inner:
            raise ValueError("dimension mismatch")
        acc = [0] * cols
        for k, aik in enumerate(row):
            if aik:
                bk = b[k]
                for j in range(cols):
                    if bk[j]:
                        acc[j] += aik * bk[j]
        out.append(acc)
    return out


def _integer_rows(m: Iterable[Sequence]) -> list[list[int]]:
    # Scale each row by the lcm of its denominators; rank is unchanged.
    out = []
    for row in m:
        row = [Fraction(v) for v in row]
        den = 1
        for v in row:
            if v:
                den = lcm(den, v.denominator)
        out.append([int(v * den) for v in row])
    return out


def rank_exact(m: Sequence[Sequence]) -> int:
    """Rank via fraction-free (Bareiss) elimination on integer-scaled rows.

    Pivots are chosen as the first row with an exactly nonzero entry in the
    current column. All intermediate values are integers, and each division
    by the previous pivot is exact.
    """
    a = _integer_rows(m)
    if not a:
        return 0
    rows, cols = len(a), len(a[0])
    rank = 0
    prev = 1
    for col in range(cols):
        if rank == rows:
            break
        piv = None
        for r in range(rank, rows):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        prow = a[rank]
        for r in range(rank + 1, rows):
            row = a[r]
            f = row[col]
            if f == 0:
                # Bareiss step still has to rescale the row to keep exact division
                # valid for later steps.
                for c in range(col + 1, cols):
                    if row[c]:
                        row[c] = (p * row[c]) // prev
                continue
            for c in range(col + 1, cols):
                row[c] = (p * row[c] - f * prow[c]) // prev
            row[col] = 0
        prev = p
        rank += 1
    return rank


def rref(m: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (matrix, pivot columns)."""
    a = [[Fraction(v) for v in row] for row in m]
    if not a:
        return a, []
    rows, cols = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        prow = [v * inv for v in a[r]]
        a[r] = prow
        nz = [j for j in range(c, cols) if prow[j] != 0]
        for i in range(rows):
            if i != r:
                f = a[i][c]
                if f != 0:
                    row = a[i]
                    for j in nz:
                        row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def nullspace(m: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {v : m v = 0}, one vector per free column of the RREF."""
    if not m:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    cols = len(m[0])
    red, pivots = rref(m)
    pivset = set(pivots)
    basis = []
    for free in range(cols):
        if free in pivset:
            continue
        v = [Fraction(0)] * cols
        v[free] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[free]
        basis.append(v)
    return basis


def solve_square(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Solve a x = b for square nonsingular a; None when a is singular."""
    n = len(a)
    aug = [[Fraction(v) for v in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            return None
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        prow = [v * inv for v in aug[c]]
        aug[c] = prow
        for i in range(n):
            if i != c:
                f = aug[i][c]
                if f != 0:
                    row = aug[i]
                    for j in range(c, n + 1):
                        row[j] -= f * prow[j]
    return [aug[i][n] for i in range(n)]

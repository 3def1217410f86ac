"""Bakry-Emery curvature K_{G,x}(N) from exact quadratic forms on the 2-ball."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import eigh

from .graph_core import Model


class ResidualError(ArithmeticError):
    """Eigen-residual above tolerance."""


@dataclass(frozen=True)
class BakryEmeryResult:
    vertex: int
    N: Fraction | None  # None means N = infinity
    K: float
    residual: float


def _two_ball(g: Model, x: int):
    s1 = list(g.nbrs[x])
    seen = {x, *s1}
    s2 = []
    for y in s1:
        for z in g.nbrs[y]:
            if z not in seen:
                seen.add(z)
                s2.append(z)
    return s1, sorted(s2)


def _add(mat, i, j, v):
    row = mat.setdefault(i, {})
    row[j] = row.get(j, 0) + v


def _gamma_matrix(g: Model, v: int, pos, scale):
    """Sparse M with Gamma(f, h)(v) = f^T M h, times ``scale``."""
    out = {}
    pv = pos[v]
    for y in g.nbrs[v]:
        r = scale * g.rate(v, y) / 2
        py = pos[y]
        _add(out, py, py, r)
        _add(out, pv, pv, r)
        _add(out, py, pv, -r)
        _add(out, pv, py, -r)
    return out


def quadratic_forms(g: Model, x: int, N=None):
    """Exact (Q, B, s1, s2) with Q = Gamma_2 - (1/N)(Delta f)^2 and B = Gamma at x.

    Coordinates are f on S1(x) then S2(x), with f(x) = 0. With M_v the
    matrix of Gamma at v and L the Laplacian rows,
    Gamma_2 = (1/2) sum_y p(x,y) (M_y - M_x) - (1/2) sym(M_x L).
    """
    s1, s2 = _two_ball(g, x)
    coords = [x] + s1 + s2
    pos = {v: i for i, v in enumerate(coords)}
    acc: dict[int, dict[int, Fraction]] = {}
    for y in s1:
        for i, row in _gamma_matrix(g, y, pos, g.rate(x, y) / 2).items():
            for j, v in row.items():
                _add(acc, i, j, v)
    total = sum(g.rate(x, y) for y in s1)
    for i, row in _gamma_matrix(g, x, pos, -total / 2).items():
        for j, v in row.items():
            _add(acc, i, j, v)
    # Gamma(f, Delta h)(x) = 1/2 sum_y p(x,y) (f_y - f_x) ((L h)_y - (L h)_x)
    lap = {}
    for v in [x] + s1:
        row = {pos[z]: g.rate(v, z) for z in g.nbrs[v]}
        row[pos[v]] = row.get(pos[v], 0) - sum(g.rate(v, z) for z in g.nbrs[v])
        lap[v] = row
    for y in s1:
        r = g.rate(x, y) / 4
        diff = dict(lap[y])
        for j, v in lap[x].items():
            diff[j] = diff.get(j, 0) - v
        for j, v in diff.items():
            if v:
                for i, sgn in ((pos[y], 1), (pos[x], -1)):
                    _add(acc, i, j, -sgn * r * v)
                    _add(acc, j, i, -sgn * r * v)
    k = len(coords) - 1
    q = [[Fraction(acc.get(i, {}).get(j, 0)) for j in range(1, k + 1)] for i in range(1, k + 1)]
    if N is not None:
        lap_x = [g.rate(x, v) for v in s1] + [Fraction(0)] * len(s2)
        for i in range(k):
            for j in range(k):
                q[i][j] -= lap_x[i] * lap_x[j] / N
    b = [Fraction(1, 2) * g.rate(x, v) for v in s1]
    return q, b, s1, s2


def schur_reduce(q, ns1: int):
    """Minimise over the S2 block (diagonal, nonnegative) in closed form.

    Returns the reduced matrix on S1, or None when some S2 direction has
    zero curvature weight but couples to S1 (the form is then unbounded
    below on Gamma(f) = 1).
    """
    k = len(q)
    a11 = [row[:ns1] for row in q[:ns1]]
    for z in range(ns1, k):
        for z2 in range(ns1, k):
            if z != z2 and q[z][z2] != 0:
                raise AssertionError("S2 block of Gamma_2 is not diagonal")
        dz = q[z][z]
        if dz < 0:
            raise AssertionError("negative S2 diagonal in Gamma_2")
        col = [q[i][z] for i in range(ns1)]
        if dz == 0:
            if any(col):
                return None
            continue
        for i in range(ns1):
            if col[i]:
                for j in range(ns1):
                    if col[j]:
                        a11[i][j] -= col[i] * col[j] / dz
    return a11


def bakry_emery(g: Model, x: int, N=None, tol: float = 1e-9) -> BakryEmeryResult:
    """K_{G,x}(N): the smallest generalised eigenvalue of the reduced pencil."""
    if N is not None:
        N = Fraction(N)
        if N <= 0:
            raise ValueError("dimension parameter N must be positive")
    q, b, s1, _ = quadratic_forms(g, x, N)
    a = schur_reduce(q, len(s1))
    if a is None:
        return BakryEmeryResult(x, N, float("-inf"), 0.0)
    A = np.array([[float(v) for v in row] for row in a])
    B = np.diag([float(v) for v in b])
    vals, vecs = eigh(A, B)
    lam = float(vals[0])
    v = vecs[:, 0]
    res = float(np.max(np.abs(A @ v - lam * (B @ v))))
    if res > tol:
        raise ResidualError(f"eigen-residual {res:.3g} exceeds {tol:.3g} at vertex {g.vertices[x]}")
    return BakryEmeryResult(x, N, lam, res)

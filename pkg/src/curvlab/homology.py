"""First Betti numbers and harmonic 1-forms over the rationals."""
from __future__ import annotations

from fractions import Fraction

from .complex import CellComplex
from .exact import fmt_rational, nullspace, rank_exact
from .graph_core import MarkovChain, Metric, Model, PreconditionError, WeightedGraph


def betti1(cx: CellComplex) -> int:
    """|X1| - rank(delta1) - (|X0| - 1), i.e. dim ker(delta1) / im(delta0)."""
    n0, n1, n2 = cx.sizes
    r = rank_exact(cx.delta1) if n2 else 0
    return n1 - r - (n0 - 1)


def divergence_matrix(cx: CellComplex, g: Model) -> list[list[Fraction]]:
    """Row x: the functional alpha -> sum_y rate(x, y) alpha(x, y).

    For a weighted graph this is delta*; for a chain it is delta^(*).
    """
    rows = [[Fraction(0)] * len(cx.edges) for _ in range(g.n)]
    for k, (i, j) in enumerate(cx.edges):
        rows[i][k] += g.rate(i, j)
        rows[j][k] -= g.rate(j, i)
    return rows


def _normalise(v, edges, metric: Metric | None):
    if metric is None:
        scale = max(abs(x) for x in v)
    else:
        scale = max(abs(x) / metric.d[i][j] for x, (i, j) in zip(v, edges))
    first = next(x for x in v if x)
    if first < 0:
        scale = -scale
    return [x / scale for x in v]


def harmonic_basis(cx: CellComplex, g: WeightedGraph | None = None) -> list[list[Fraction]]:
    """Kernel basis of [delta1; delta*], each scaled to sup-norm 1 (relative to d)."""
    g = cx.model if g is None else g
    if not g.reversible:
        raise PreconditionError("harmonic forms with delta* need a reversible model")
    rows = [list(map(Fraction, r)) for r in cx.delta1] + divergence_matrix(cx, g)
    basis = nullspace(rows, len(cx.edges))
    return [_normalise(v, cx.edges, cx.metric) for v in basis]


def betti1_markov(cx: CellComplex, c: Model | None = None) -> int:
    """dim{alpha : delta1 alpha = 0, delta^(*) alpha constant}."""
    c = cx.model if c is None else c
    ne = len(cx.edges)
    rows = [list(map(Fraction, r)) + [Fraction(0)] for r in cx.delta1]
    for r in divergence_matrix(cx, c):
        rows.append(r + [Fraction(-1)])
    return ne + 1 - rank_exact(rows)


def markov_harmonic_basis(cx: CellComplex, c: Model | None = None) -> list[list[Fraction]]:
    """alpha-parts of a kernel basis of the stacked (alpha, c) system."""
    c = cx.model if c is None else c
    ne = len(cx.edges)
    rows = [list(map(Fraction, r)) + [Fraction(0)] for r in cx.delta1]
    for r in divergence_matrix(cx, c):
        rows.append(r + [Fraction(-1)])
    return [_normalise(v[:ne], cx.edges, cx.metric) for v in nullspace(rows, ne + 1)]


def first_betti(cx: CellComplex) -> int:
    """The appropriate formulation for the complex's model."""
    if isinstance(cx.model, MarkovChain):
        return betti1_markov(cx)
    return betti1(cx)


def hodge_check(cx: CellComplex, g: WeightedGraph | None = None) -> bool:
    dim = len(harmonic_basis(cx, g))
    b = betti1(cx)
    if dim != b:
        raise AssertionError(f"harmonic dimension {dim} != betti number {b}")
    return True


def basis_to_json(cx: CellComplex, basis) -> list[dict[str, str]]:
    g = cx.model
    return [{g.label(e): fmt_rational(v) for e, v in zip(cx.edges, vec) if v} for vec in basis]

"""The metric-dependent 2-cell complex and its oriented coboundary matrices."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .graph_core import Edge, Metric, Model, WeightedGraph

log = logging.getLogger(__name__)


def canonical_cycle(seq) -> tuple[int, ...]:
    """Anchor at the least vertex; direction with second vertex < last vertex."""
    seq = tuple(seq)
    k = seq.index(min(seq))
    rot = seq[k:] + seq[:k]
    if len(rot) > 2 and rot[1] > rot[-1]:
        rot = (rot[0],) + tuple(reversed(rot[1:]))
    return rot


@dataclass(frozen=True)
class CycleCell:
    vertices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) < 3 or len(set(self.vertices)) != len(self.vertices):
            raise ValueError("a 2-cell needs at least 3 distinct vertices")
        object.__setattr__(self, "vertices", canonical_cycle(self.vertices))

    def __len__(self) -> int:
        return len(self.vertices)

    def boundary(self):
        """Consecutive pairs (x_i, x_{i+1 mod n}) in traversal order."""
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]


@dataclass(frozen=True, eq=False)
class CellComplex:
    model: Model
    metric: Metric | None
    cells: tuple[CycleCell, ...]
    delta0: tuple[tuple[int, ...], ...]
    delta1: tuple[tuple[int, ...], ...]
    length_bound: int | None = None
    m0: tuple = field(default=())
    m1: tuple = field(default=())

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.model.edges

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.model.n, len(self.model.edges), len(self.cells)

    @property
    def m2(self) -> tuple[int, ...]:
        return (1,) * len(self.cells)

    def to_json(self) -> dict:
        g = self.model
        ids = g.vertices
        return {
            "X0": list(ids),
            "X1": [[ids[i], ids[j]] for i, j in g.edges],
            "X2": [[ids[v] for v in c.vertices] for c in self.cells],
            "delta0": [[r, c, v] for r, row in enumerate(self.delta0) for c, v in enumerate(row) if v],
            "delta1": [[r, c, v] for r, row in enumerate(self.delta1) for c, v in enumerate(row) if v],
            "length_bound": self.length_bound,
        }


def two_cell_length_bound(g: Model, metric: Metric) -> int:
    """Largest possible length of a 2-cell for this metric.

    For an n-cell (n > 3) the return path x3 ~ ... ~ x0 is a geodesic of
    n - 3 edges, each at least l_min, while d(x0, x3) is strictly below
    three edges of at most l_max. Hence n < 3 + 3 l_max / l_min.
    """
    dists = [metric.d[i][j] for i, j in g.edges]
    bound = 3 + 3 * max(dists) / min(dists)
    largest = math.ceil(bound) - 1  # largest integer strictly below the bound
    return max(largest, 4)


def _simple_cycles(g: Model, max_len: int):
    """Each simple cycle of length 3..max_len once, in canonical form."""
    nbrs = g.nbrs
    for s in range(g.n):
        path = [s]
        on_path = {s}

        def dfs(u):
            for v in nbrs[u]:
                if v == s and len(path) >= 3 and path[1] < path[-1]:
                    yield tuple(path)
                elif v > s and v not in on_path and len(path) < max_len:
                    path.append(v)
                    on_path.add(v)
                    yield from dfs(v)
                    path.pop()
                    on_path.discard(v)

        yield from dfs(s)


def qualifies(cycle, d) -> bool:
    """Cell condition for one cycle under metric matrix ``d``."""
    n = len(cycle)
    if n == 3:
        return True
    for seq in (cycle, cycle[::-1]):
        for r in range(n):
            x = seq[r:] + seq[:r]
            d03 = d[x[0]][x[3]]
            if d03 >= d[x[0]][x[1]] + d[x[1]][x[2]] + d[x[2]][x[3]]:
                continue
            back = sum(d[x[k]][x[(k + 1) % n]] for k in range(3, n))
            if back == d03:
                return True
    return False


def enumerate_two_cells(g: Model, metric: Metric, max_len: int | None = None) -> list[CycleCell]:
    bound = two_cell_length_bound(g, metric)
    if max_len is None:
        max_len = bound
    elif max_len != bound:
        log.warning("2-cell length bound overridden (%d, computed %d); betti numbers "
                    "are only certified at the computed bound", max_len, bound)
    d = metric.d
    return [CycleCell(c) for c in _simple_cycles(g, max_len) if qualifies(c, d)]


def _coboundaries(g: Model, cells):
    e_idx = g.edge_index
    d0 = []
    for i, j in g.edges:
        row = [0] * g.n
        row[i], row[j] = 1, -1
        d0.append(tuple(row))
    d1 = []
    for c in cells:
        row = [0] * len(g.edges)
        for a, b in c.boundary():
            k = e_idx[(min(a, b), max(a, b))]
            row[k] += 1 if a < b else -1
        d1.append(tuple(row))
    for row in d1:
        for v in range(g.n):
            if sum(row[k] * d0[k][v] for k in range(len(row)) if row[k]):
                raise AssertionError("delta1 * delta0 != 0")
    return tuple(d0), tuple(d1)


def _weights(g: Model):
    if isinstance(g, WeightedGraph):
        return g.mu, tuple(g.w[i][j] for i, j in g.edges)
    return (), ()


def build_complex(g: Model, metric: Metric, max_len: int | None = None) -> CellComplex:
    cells = tuple(sorted(enumerate_two_cells(g, metric, max_len), key=lambda c: (len(c), c.vertices)))
    d0, d1 = _coboundaries(g, cells)
    m0, m1 = _weights(g)
    bound = two_cell_length_bound(g, metric) if max_len is None else max_len
    return CellComplex(g, metric, cells, d0, d1, bound, m0, m1)


def build_path_complex(g: Model, metric: Metric | None = None) -> CellComplex:
    """All combinatorial 3- and 4-cycles glued in, whatever the metric."""
    cells = tuple(sorted((CycleCell(c) for c in _simple_cycles(g, 4)), key=lambda c: (len(c), c.vertices)))
    d0, d1 = _coboundaries(g, cells)
    m0, m1 = _weights(g)
    return CellComplex(g, metric, cells, d0, d1, 4, m0, m1)


def one_form(cx: CellComplex, values) -> dict[Edge, Fraction]:
    return {e: Fraction(v) for e, v in zip(cx.edges, values)}


def form_value(alpha, x: int, y: int) -> Fraction:
    """alpha(x, y) with the antisymmetric convention on stored orientations."""
    if x < y:
        return alpha[(x, y)]
    return -alpha[(y, x)]

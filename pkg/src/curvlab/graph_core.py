"""Graph and Markov-chain models, path metrics, invariant distributions.

Vertices carry string ids; internally everything is indexed by load order
and stored densely. All scalars are exact ``Fraction`` values.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence

from .exact import as_rational, fmt_rational, solve_square, zeros

Edge = tuple[int, int]


class ModelError(ValueError):
    """Invalid input model (parse or validation failure)."""


class PreconditionError(ValueError):
    """A valid model that does not satisfy an operation's precondition."""


def _edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True, eq=False)
class _Model:
    vertices: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ModelError("duplicate vertex ids")
        object.__setattr__(self, "index", {v: i for i, v in enumerate(self.vertices)})

    @property
    def n(self) -> int:
        return len(self.vertices)

    def rate(self, i: int, j: int) -> Fraction:
        raise NotImplementedError

    @property
    def reversible(self) -> bool:
        raise NotImplementedError

    def _init_support(self, support: Sequence[Sequence[bool]]):
        nbrs = tuple(tuple(j for j in range(self.n) if support[i][j]) for i in range(self.n))
        edges = tuple(sorted({_edge(i, j) for i in range(self.n) for j in nbrs[i]}))
        object.__setattr__(self, "nbrs", nbrs)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "edge_index", {e: k for k, e in enumerate(edges)})
        if self.n == 0:
            raise ModelError("empty vertex set")
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in nbrs[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != self.n:
            raise ModelError("graph is disconnected")

    def adjacent(self, i: int, j: int) -> bool:
        return _edge(i, j) in self.edge_index

    def ball(self, i: int) -> tuple[int, ...]:
        """Closed combinatorial 1-ball, centre first."""
        return (i,) + self.nbrs[i]

    def label(self, e: Edge) -> str:
        return f"{self.vertices[e[0]]}~{self.vertices[e[1]]}"


@dataclass(frozen=True, eq=False)
class WeightedGraph(_Model):
    """Reversible model ``(V, w, mu)``; ``w`` and ``mu`` are exact and dense."""

    w: tuple[tuple[Fraction, ...], ...] = ()
    mu: tuple[Fraction, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        n = self.n
        if len(self.w) != n or any(len(r) != n for r in self.w) or len(self.mu) != n:
            raise ModelError("dimension mismatch in w or mu")
        for i in range(n):
            if self.w[i][i] != 0:
                raise ModelError(f"nonzero diagonal weight at {self.vertices[i]}")
            if self.mu[i] <= 0:
                raise ModelError(f"vertex weight must be positive at {self.vertices[i]}")
            for j in range(n):
                if self.w[i][j] < 0:
                    raise ModelError("negative edge weight")
                if self.w[i][j] != self.w[j][i]:
                    raise ModelError(
                        f"asymmetric weight between {self.vertices[i]} and {self.vertices[j]}"
                    )
        self._init_support([[self.w[i][j] > 0 for j in range(n)] for i in range(n)])

    @property
    def reversible(self) -> bool:
        return True

    def rate(self, i: int, j: int) -> Fraction:
        return self.w[i][j] / self.mu[i]

    @property
    def stochastic(self) -> bool:
        """True iff sum_y w(x,y) = mu(x) at every vertex."""
        return all(sum(self.w[i]) == self.mu[i] for i in range(self.n))

    def scaled(self, c) -> "WeightedGraph":
        c = as_rational(c)
        return WeightedGraph(
            self.vertices,
            tuple(tuple(v * c for v in row) for row in self.w),
            tuple(m * c for m in self.mu),
        )

    def with_weights(self, w=None, mu=None) -> "WeightedGraph":
        return WeightedGraph(self.vertices, self.w if w is None else w, self.mu if mu is None else mu)


@dataclass(frozen=True, eq=False)
class MarkovChain(_Model):
    """Row-stochastic kernel with symmetric support; possibly non-reversible."""

    p: tuple[tuple[Fraction, ...], ...] = ()

    def __post_init__(self):
        super().__post_init__()
        n = self.n
        if len(self.p) != n or any(len(r) != n for r in self.p):
            raise ModelError("dimension mismatch in p")
        for i in range(n):
            if any(v < 0 for v in self.p[i]):
                raise ModelError("negative transition probability")
            if self.p[i][i] != 0:
                raise ModelError("self-loops are not supported")
            s = sum(self.p[i])
            if s != 1:
                raise ModelError(
                    f"row {self.vertices[i]} sums to {fmt_rational(s)}, not 1 (non-stochastic)"
                )
            for j in range(n):
                if (self.p[i][j] > 0) != (self.p[j][i] > 0):
                    raise ModelError(
                        f"asymmetric support between {self.vertices[i]} and {self.vertices[j]}"
                    )
        self._init_support([[self.p[i][j] > 0 for j in range(n)] for i in range(n)])

    @property
    def reversible(self) -> bool:
        return False

    def rate(self, i: int, j: int) -> Fraction:
        return self.p[i][j]

    @property
    def stochastic(self) -> bool:
        return True


Model = WeightedGraph | MarkovChain


@dataclass(frozen=True)
class LaplacianKernel:
    """p(x,y) = w(x,y)/mu(x) of a weighted graph; rows need not sum to one."""

    p: tuple[tuple[Fraction, ...], ...]
    stochastic: bool


def to_markov(g: Model) -> LaplacianKernel:
    n = g.n
    p = tuple(tuple(g.rate(i, j) for j in range(n)) for i in range(n))
    return LaplacianKernel(p, all(sum(row) == 1 for row in p))


# ---------------------------------------------------------------- metrics


def combinatorial_lengths(g: _Model) -> dict[Edge, Fraction]:
    return {e: Fraction(1) for e in g.edges}


@dataclass(frozen=True, eq=False)
class Metric:
    """Dense all-pairs path distance with the list of non-geodesic edges."""

    d: tuple[tuple[Fraction, ...], ...]
    lengths: Mapping[Edge, Fraction]
    shortcuts: tuple[Edge, ...] = field(default=())

    def __call__(self, i: int, j: int) -> Fraction:
        return self.d[i][j]

    @property
    def n(self) -> int:
        return len(self.d)

    def diameter(self) -> Fraction:
        return max(max(row) for row in self.d)


def path_metric(g: _Model, lengths: Mapping[Edge, Fraction] | None = None) -> Metric:
    """Floyd-Warshall closure of the edge lengths over exact rationals."""
    if lengths is None:
        lengths = combinatorial_lengths(g)
    n = g.n
    if set(lengths) != set(g.edges):
        raise ModelError("edge lengths must be given exactly on the support")
    lengths = {e: as_rational(v) for e, v in lengths.items()}
    for e, ln in lengths.items():
        if ln <= 0:
            raise ModelError(f"edge length must be positive on {g.label(e)}")
    # Work on integers over a common denominator; Fraction arithmetic in the
    # cubic loop is far slower than big-int arithmetic.
    den = 1
    for ln in lengths.values():
        den = lcm(den, ln.denominator)
    inf = None
    d: list[list] = [[inf] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
    for (i, j), ln in lengths.items():
        d[i][j] = d[j][i] = ln.numerator * (den // ln.denominator)
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik is None:
                continue
            di = d[i]
            for j in range(n):
                dkj = dk[j]
                if dkj is None:
                    continue
                s = dik + dkj
                if di[j] is None or s < di[j]:
                    di[j] = s
    dq = tuple(tuple(Fraction(v, den) for v in row) for row in d)
    shortcuts = tuple(e for e in g.edges if dq[e[0]][e[1]] < lengths[e])
    return Metric(dq, lengths, shortcuts)


def check_path_metric(g: _Model, m: Metric) -> bool:
    """Full O(n^3) check: symmetry, triangle inequality, geodesic closure."""
    n = g.n
    d = m.d
    for i in range(n):
        if d[i][i] != 0:
            return False
        for j in range(n):
            if d[i][j] != d[j][i] or (i != j and d[i][j] <= 0):
                return False
            for k in range(n):
                if d[i][j] > d[i][k] + d[k][j]:
                    return False
    # Every distance is realised by a first step along an edge.
    for i in range(n):
        for j in range(n):
            if i != j and min(d[i][k] + d[k][j] for k in g.nbrs[i]) != d[i][j]:
                return False
    return True


# ---------------------------------------------------------------- chains


def invariant_distribution(c: MarkovChain) -> list[Fraction]:
    """Exact solution of pi P = pi with sum(pi) = 1."""
    n = c.n
    # (P^T - I) with its last row replaced by the normalisation row.
    a = zeros(n, n)
    for i in range(n):
        for j in range(n):
            a[i][j] = c.p[j][i] - (1 if i == j else 0)
    a[n - 1] = [Fraction(1)] * n
    b = [Fraction(0)] * (n - 1) + [Fraction(1)]
    pi = solve_square(a, b)
    if pi is None:
        raise ModelError("invariant distribution is not unique (reducible chain?)")
    for y in range(n):
        if sum(pi[x] * c.p[x][y] for x in range(n)) != pi[y]:
            raise AssertionError("pi P != pi")  # pragma: no cover
    if any(v <= 0 for v in pi):
        raise ModelError("invariant distribution is not strictly positive")
    return pi


def degree_stats(g: _Model) -> tuple[int, int, list[int]]:
    degs = [len(nb) for nb in g.nbrs]
    return min(degs), max(degs), degs


# ---------------------------------------------------------------- JSON I/O


def parse_graph(text: str | bytes) -> tuple[Model, dict[Edge, Fraction]]:
    """Parse the JSON interchange format; returns the model and its edge lengths."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError("top-level JSON value must be an object")
    kind = doc.get("model")
    verts = doc.get("vertices")
    if kind not in ("weighted", "markov"):
        raise ModelError("'model' must be 'weighted' or 'markov'")
    if not isinstance(verts, list) or not all(isinstance(v, str) for v in verts):
        raise ModelError("'vertices' must be a list of strings")
    index = {v: i for i, v in enumerate(verts)}
    if len(index) != len(verts):
        raise ModelError("duplicate vertex ids")
    n = len(verts)
    mat = zeros(n, n)
    raw_len: dict[Edge, Fraction] = {}
    try:
        for rec in doc.get("edges", []):
            u, v = index[rec["u"]], index[rec["v"]]
            if u == v:
                raise ModelError("self-loop edge")
            if kind == "weighted":
                wv = as_rational(rec["w"])
                if wv <= 0:
                    raise ModelError("edge weight must be positive")
                for a, b in ((u, v), (v, u)):
                    if mat[a][b] not in (0, wv):
                        raise ModelError(
                            f"asymmetric weight between {verts[u]} and {verts[v]}"
                        )
                    mat[a][b] = wv
                if mat[u][v] != wv or mat[v][u] != wv:  # pragma: no cover
                    raise ModelError("asymmetric weight")
            else:
                puv, pvu = as_rational(rec["p_uv"]), as_rational(rec["p_vu"])
                if puv <= 0 or pvu <= 0:
                    raise ModelError("asymmetric support: both directions need p > 0")
                mat[u][v], mat[v][u] = puv, pvu
            if "d" in rec:
                raw_len[_edge(u, v)] = as_rational(rec["d"])
    except KeyError as exc:
        raise ModelError(f"missing field or unknown vertex: {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(str(exc)) from exc
    if kind == "weighted":
        mu_doc = doc.get("mu")
        if not isinstance(mu_doc, dict) or set(mu_doc) != set(verts):
            raise ModelError("'mu' must map every vertex to a rational")
        try:
            mu = tuple(as_rational(mu_doc[v]) for v in verts)
        except (TypeError, ValueError) as exc:
            raise ModelError(str(exc)) from exc
        model: Model = WeightedGraph(tuple(verts), tuple(map(tuple, mat)), mu)
    else:
        model = MarkovChain(tuple(verts), tuple(map(tuple, mat)))
    lengths = combinatorial_lengths(model)
    for e, ln in raw_len.items():
        if ln <= 0:
            raise ModelError("edge length 'd' must be positive")
        lengths[e] = ln
    return model, lengths


def dump_graph(g: Model, lengths: Mapping[Edge, Fraction] | None = None) -> str:
    """Serialise to the JSON interchange format (deterministic key order)."""
    verts = g.vertices
    doc: dict = {"model": "weighted" if isinstance(g, WeightedGraph) else "markov"}
    doc["vertices"] = list(verts)
    if isinstance(g, WeightedGraph):
        doc["mu"] = {v: fmt_rational(g.mu[i]) for i, v in enumerate(verts)}
    edges = []
    for i, j in g.edges:
        rec = {"u": verts[i], "v": verts[j]}
        if isinstance(g, WeightedGraph):
            rec["w"] = fmt_rational(g.w[i][j])
        else:
            rec["p_uv"] = fmt_rational(g.p[i][j])
            rec["p_vu"] = fmt_rational(g.p[j][i])
        if lengths is not None and lengths.get((i, j), 1) != 1:
            rec["d"] = fmt_rational(lengths[(i, j)])
        edges.append(rec)
    doc["edges"] = edges
    return json.dumps(doc, indent=1)

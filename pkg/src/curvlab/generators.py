"""Deterministic constructors for the example families and standard fixtures.

Every generator returns ``(model, lengths)``; lengths are combinatorial
unless stated otherwise.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import as_rational
from .graph_core import (
    Edge,
    MarkovChain,
    Model,
    ModelError,
    WeightedGraph,
    combinatorial_lengths,
)


def _weighted(vertices, edges, mu=None, w=None):
    """Dense WeightedGraph from an edge list.

    ``mu=None`` normalises (mu = weighted degree, so the kernel is
    stochastic); ``w`` maps edges to weights, default 1.
    """
    vertices = tuple(vertices)
    idx = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    mat = [[Fraction(0)] * n for _ in range(n)]
    for u, v in edges:
        i, j = idx[u], idx[v]
        if i == j:
            raise ModelError(f"self-loop at {u}")
        wt = Fraction(1) if w is None else as_rational(w.get((u, v), w.get((v, u), 1)))
        mat[i][j] = mat[j][i] = wt
    if mu is None:
        mus = tuple(sum(row) for row in mat)
    elif isinstance(mu, dict):
        mus = tuple(as_rational(mu[v]) for v in vertices)
    else:
        mus = (as_rational(mu),) * n
    g = WeightedGraph(vertices, tuple(map(tuple, mat)), mus)
    return g, combinatorial_lengths(g)


# ---------------------------------------------------------------- cycles


def random_kernel(n: int, seed: int) -> list[Fraction]:
    """Forward probabilities q_i = p(i, i+1) from {1/10, ..., 9/10}."""
    rng = random.Random(seed)
    return [Fraction(rng.randint(1, 9), 10) for _ in range(n)]


def gen_cycle(n: int, kernel=None, seed: int | None = None):
    """C_n on vertices "0".."n-1".

    Without ``kernel``/``seed`` this is the normalized weighted cycle
    (uniform 1/2 kernel). ``kernel`` is either one forward probability used
    at every vertex or a list of length n; ``seed`` draws a random one.
    """
    if n < 3:
        raise ModelError("a cycle needs at least 3 vertices")
    verts = [str(i) for i in range(n)]
    if kernel is None and seed is None:
        return _weighted(verts, [(verts[i], verts[(i + 1) % n]) for i in range(n)])
    if kernel is None:
        q = random_kernel(n, seed)
    elif isinstance(kernel, (list, tuple)):
        q = [as_rational(k) for k in kernel]
    else:
        q = [as_rational(kernel)] * n
    if len(q) != n or any(not 0 < v < 1 for v in q):
        raise ModelError("cycle kernel needs n forward probabilities strictly inside (0, 1)")
    p = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        p[i][(i + 1) % n] += q[i]
        p[i][(i - 1) % n] += 1 - q[i]
    c = MarkovChain(tuple(verts), tuple(map(tuple, p)))
    return c, combinatorial_lengths(c)


# ---------------------------------------------------------------- example families


def gen_rope_ladder(n: int):
    """n four-cycles (a_k, b_k, a_{k+1}, c_k) glued in a ring at the a's.

    mu = 1 and w = 1 on edges, so degree 4 at the a's and 2 elsewhere.
    """
    if n < 3:
        raise ModelError("rope ladder needs n >= 3")
    verts = []
    edges = []
    for k in range(n):
        verts += [f"a{k}", f"b{k}", f"c{k}"]
    for k in range(n):
        nxt = f"a{(k + 1) % n}"
        edges += [(f"a{k}", f"b{k}"), (f"b{k}", nxt), (nxt, f"c{k}"), (f"c{k}", f"a{k}")]
    return _weighted(verts, edges, mu=1)


def gen_zrp(l: int):
    """Two indistinguishable particles on C_l; one particle hops per step."""
    if l < 6:
        raise ModelError("zero-range process needs l >= 6")
    confs = [(i, j) for i in range(l) for j in range(i, l)]
    label = {c: f"({c[0]},{c[1]})" for c in confs}
    edges = set()
    for i, j in confs:
        for src, other in ((i, j), (j, i)):
            for step in (1, -1):
                new = tuple(sorted(((src + step) % l, other)))
                if new != (i, j):
                    edges.add(tuple(sorted((label[(i, j)], label[new]))))
    return _weighted([label[c] for c in confs], sorted(edges), mu=1)


def gen_bi(n: int):
    """Two n-cycles x, y with extra edges x_k ~ y_{k-1}, x_k ~ y_{k+1}; normalized."""
    if n < 6:
        raise ModelError("BI_n needs n >= 6")
    verts = [f"x{k}" for k in range(n)] + [f"y{k}" for k in range(n)]
    edges = set()
    for k in range(n):
        edges.add((f"x{k}", f"x{(k + 1) % n}"))
        edges.add((f"y{k}", f"y{(k + 1) % n}"))
        edges.add((f"x{k}", f"y{(k - 1) % n}"))
        edges.add((f"x{k}", f"y{(k + 1) % n}"))
    return _weighted(verts, sorted(edges))


def _chess_rep(x: int, y: int) -> tuple[int, int]:
    # Lattice spanned by (4,4) and (4,-4); representatives 0 <= y < 4, 0 <= x < 8.
    k = y // 4
    x, y = x - 4 * k, y - 4 * k
    return x % 8, y


def gen_chessboard():
    """Quotient of the chessboard lattice by <(4,4), (4,-4)>; normalized.

    Stencil (read off the figure): all axis edges of Z^2, plus both
    diagonals of the unit square with lower-left corner (i, j) exactly when
    i + j is even. Every vertex then has two axis pairs and one diagonal
    pair in each diagonal direction, i.e. degree 6. The lattice preserves
    the parity of i + j, so the pattern descends to the 32-vertex quotient.
    """
    reps = sorted({_chess_rep(x, y) for x in range(8) for y in range(4)}, key=lambda r: (r[1], r[0]))
    label = {r: f"({r[0]},{r[1]})" for r in reps}
    edges = set()

    def add(a, b):
        ra, rb = _chess_rep(*a), _chess_rep(*b)
        if ra == rb:
            raise AssertionError("stencil edge collapses in the quotient")  # pragma: no cover
        edges.add(tuple(sorted((label[ra], label[rb]))))

    for x in range(-8, 16):
        for y in range(-8, 16):
            add((x, y), (x + 1, y))
            add((x, y), (x, y + 1))
            if (x + y) % 2 == 0:
                add((x, y), (x + 1, y + 1))
                add((x + 1, y), (x, y + 1))
    return _weighted([label[r] for r in reps], sorted(edges))


def torus_label(v: tuple[int, ...]) -> str:
    return "(" + ",".join(map(str, v)) + ")"


def gen_torus(moduli, w=None, mu=1):
    """Cayley graph of Z_{n_1} x ... x Z_{n_m} for the coordinate generators.

    ``w`` is one weight per generator (both directions) or None for 1;
    ``mu`` is a constant vertex weight or "normalized". Moduli must be at
    least 6 so that no generator word of length <= 5 is trivial.
    """
    moduli = tuple(int(n) for n in moduli)
    if not moduli:
        raise ModelError("torus needs at least one modulus")
    for n in moduli:
        if n <= 5:
            raise ModelError(
                f"modulus {n} <= 5 gives a trivial generator word of length {n} <= 5"
            )
    wts = [Fraction(1)] * len(moduli) if w is None else [as_rational(x) for x in w]
    if len(wts) != len(moduli):
        raise ModelError("one weight per generator required")
    group = list(itertools.product(*(range(n) for n in moduli)))
    verts = [torus_label(v) for v in group]
    edges = {}
    for v in group:
        for i, n in enumerate(moduli):
            u = list(v)
            u[i] = (u[i] + 1) % n
            edges[tuple(sorted((torus_label(v), torus_label(tuple(u)))))] = wts[i]
    return _weighted(
        verts, sorted(edges), mu=None if mu == "normalized" else mu, w=edges
    )


# ---------------------------------------------------------------- standard fixtures


def gen_complete(n: int):
    if n < 2:
        raise ModelError("complete graph needs n >= 2")
    verts = [str(i) for i in range(n)]
    return _weighted(verts, list(itertools.combinations(verts, 2)))


def gen_hypercube(k: int):
    if k < 1:
        raise ModelError("hypercube needs dimension >= 1")
    verts = ["".join(b) for b in itertools.product("01", repeat=k)]
    edges = []
    for v in verts:
        for i in range(k):
            if v[i] == "0":
                edges.append((v, v[:i] + "1" + v[i + 1:]))
    return _weighted(verts, edges)


def gen_path(n: int):
    if n < 2:
        raise ModelError("path needs n >= 2")
    verts = [str(i) for i in range(n)]
    return _weighted(verts, list(zip(verts, verts[1:])))


def gen_tree(branching: int = 2, depth: int = 2):
    """Complete ``branching``-ary tree of the given depth."""
    if branching < 1 or depth < 1:
        raise ModelError("tree needs branching >= 1 and depth >= 1")
    verts = ["r"]
    edges = []
    level = ["r"]
    for _ in range(depth):
        nxt = []
        for v in level:
            for c in range(branching):
                u = f"{v}.{c}"
                verts.append(u)
                edges.append((v, u))
                nxt.append(u)
        level = nxt
    return _weighted(verts, edges)


def gen_random_weighted(n: int, seed: int, density: float = 0.4, stochastic: bool = False,
                        random_lengths: bool = False):
    """Connected random graph with random rational w, mu (and optionally lengths).

    A random spanning tree plus each remaining pair with probability
    ``density``. ``stochastic`` sets mu to the weighted degree.
    """
    if n < 2:
        raise ModelError("random graph needs n >= 2")
    rng = random.Random(seed)
    verts = [str(i) for i in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    es = set()
    for k in range(1, n):
        a, b = order[k], order[rng.randrange(k)]
        es.add((min(a, b), max(a, b)))
    for a, b in itertools.combinations(range(n), 2):
        if (a, b) not in es and rng.random() < density:
            es.add((a, b))
    w = {(verts[a], verts[b]): Fraction(rng.randint(1, 6), rng.randint(1, 4)) for a, b in sorted(es)}
    mu = None if stochastic else {v: Fraction(rng.randint(1, 5), rng.randint(1, 3)) for v in verts}
    g, lengths = _weighted(verts, list(w), mu=mu, w=w)
    if random_lengths:
        lengths = {e: Fraction(rng.randint(1, 5), rng.randint(1, 3)) for e in g.edges}
    return g, lengths


# ---------------------------------------------------------------- generator strings


@dataclass
class GeneratorSpec:
    family: str
    params: list[str] = field(default_factory=list)
    options: list[str] = field(default_factory=list)
    seed: int | None = None


def parse_spec(text: str, seed: int | None = None) -> GeneratorSpec:
    parts = text.split(":")
    fam = parts[0].strip().lower()
    params = [p for p in parts[1].split(",") if p] if len(parts) > 1 else []
    return GeneratorSpec(fam, params, parts[2:], seed)


def _ints(spec: GeneratorSpec, count: int | None = None) -> list[int]:
    try:
        vals = [int(p) for p in spec.params]
    except ValueError as exc:
        raise ModelError(f"bad integer parameter in {spec.family}: {exc}") from exc
    if count is not None and len(vals) != count:
        raise ModelError(f"{spec.family} takes {count} integer parameter(s)")
    return vals


FAMILIES = (
    "cycle:n[:q]", "rope-ladder:n", "zrp:l", "bi:n", "chessboard", "torus:n1,n2,...[:normalized]",
    "complete:n", "hypercube:k", "path:n", "tree:b,depth", "random:n",
)


def generate(text: str, seed: int | None = None) -> tuple[Model, dict[Edge, Fraction]]:
    """Build a model from ``family:params[:option]`` (see ``FAMILIES``)."""
    spec = parse_spec(text, seed)
    f = spec.family
    if f == "cycle":
        (n,) = _ints(spec, 1)
        kernel = as_rational(spec.options[0]) if spec.options else None
        return gen_cycle(n, kernel=kernel, seed=seed)
    if f in ("rope-ladder", "ropeladder"):
        return gen_rope_ladder(*_ints(spec, 1))
    if f == "zrp":
        return gen_zrp(*_ints(spec, 1))
    if f == "bi":
        return gen_bi(*_ints(spec, 1))
    if f == "chessboard":
        return gen_chessboard()
    if f == "torus":
        mu = "normalized" if "normalized" in spec.options else 1
        return gen_torus(_ints(spec), mu=mu)
    if f == "complete":
        return gen_complete(*_ints(spec, 1))
    if f == "hypercube":
        return gen_hypercube(*_ints(spec, 1))
    if f == "path":
        return gen_path(*_ints(spec, 1))
    if f == "tree":
        vals = _ints(spec)
        return gen_tree(*vals) if vals else gen_tree()
    if f == "random":
        (n,) = _ints(spec, 1)
        return gen_random_weighted(n, 0 if seed is None else seed)
    raise ModelError(f"unknown generator family {f!r}; known: {', '.join(FAMILIES)}")

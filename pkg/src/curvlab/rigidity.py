"""Betti sharpness, bone-idleness and discrete flat torus recognition."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .complex import CellComplex, build_complex
from .curvature import edge_pairs, kappa_eps, ollivier_primal
from .exact import fmt_rational, nullspace, rank_exact, solve_square
from .graph_core import Edge, Metric, Model, PreconditionError, WeightedGraph, degree_stats
from .homology import first_betti, harmonic_basis, markov_harmonic_basis


class StructureError(RuntimeError):
    """A certificate that should hold under the preconditions failed."""

    def __init__(self, message: str, record: dict | None = None):
        super().__init__(message)
        self.record = record or {}


# ---------------------------------------------------------------- sharpness


@dataclass
class SharpnessReport:
    kappa: dict[Edge, Fraction]
    kappa_min: Fraction
    betti: int
    deg_min: int
    deg_max: int

    @property
    def nonnegative(self) -> bool:
        return self.kappa_min >= 0

    @property
    def sharp_max(self) -> bool:
        return self.nonnegative and 2 * self.betti == self.deg_max

    @property
    def sharp_min(self) -> bool:
        return self.nonnegative and 2 * self.betti == self.deg_min

    def to_json(self) -> dict:
        return {
            "kappa_min": fmt_rational(self.kappa_min),
            "betti1": self.betti,
            "deg_min": self.deg_min,
            "deg_max": self.deg_max,
            "sharp_max": self.sharp_max,
            "sharp_min": self.sharp_min,
        }


def sharpness(g: Model, metric: Metric, cx: CellComplex | None = None) -> SharpnessReport:
    kap = {e: ollivier_primal(g, metric, *e) for e in edge_pairs(g)}
    cx = build_complex(g, metric) if cx is None else cx
    dmin, dmax, _ = degree_stats(g)
    return SharpnessReport(kap, min(kap.values()), first_betti(cx), dmin, dmax)


# ---------------------------------------------------------------- bone-idleness


@dataclass
class BoneIdleReport:
    stochastic: bool
    kappa: dict[Edge, Fraction] = field(default_factory=dict)
    kappa1: dict[Edge, Fraction] = field(default_factory=dict)
    spot_checks: dict[str, bool] = field(default_factory=dict)
    reason: str = ""

    @property
    def bone_idle(self) -> bool:
        return (
            self.stochastic
            and all(v == 0 for v in self.kappa.values())
            and all(v == 0 for v in self.kappa1.values())
        )

    def to_json(self, g: Model) -> dict:
        return {
            "bone_idle": self.bone_idle,
            "stochastic": self.stochastic,
            "reason": self.reason,
            "kappa": {g.label(e): fmt_rational(v) for e, v in self.kappa.items()},
            "kappa1": {g.label(e): fmt_rational(v) for e, v in self.kappa1.items()},
            "spot_checks": self.spot_checks,
        }


SPOT_EPS = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


def bone_idle(g: Model, metric: Metric) -> BoneIdleReport:
    """kappa_eps == 0 on [0, 1] for every edge, decided from kappa and kappa_1.

    kappa_eps is concave in eps with kappa_0 = 0 and slope kappa at 0, so
    kappa = kappa_1 = 0 forces it to vanish identically.
    """
    if not g.stochastic:
        return BoneIdleReport(False, reason="sum_y w(x,y) != mu(x) at some vertex")
    pairs = edge_pairs(g)
    kap = {e: ollivier_primal(g, metric, *e) for e in pairs}
    kap1 = {e: kappa_eps(g, metric, e[0], e[1], 1) for e in pairs}
    rep = BoneIdleReport(True, kap, kap1)
    if rep.bone_idle:
        for eps in SPOT_EPS:
            ok = all(kappa_eps(g, metric, e[0], e[1], eps) == 0 for e in pairs)
            rep.spot_checks[fmt_rational(eps)] = ok
            if not ok:
                raise StructureError(f"kappa_eps != 0 at eps = {eps} despite kappa = kappa_1 = 0")
    else:
        bad = next(e for e in pairs if kap[e] != 0 or kap1[e] != 0)
        rep.reason = (f"{g.label(bad)}: kappa = {fmt_rational(kap[bad])}, "
                      f"kappa_1 = {fmt_rational(kap1[bad])}")
    return rep


# ---------------------------------------------------------------- indicator basis


@dataclass
class IndicatorBasis:
    forms: list[list[Fraction]]  # one value per stored edge orientation
    plus: list[tuple[int, ...]]  # plus[i][x] = y(i, x)
    minus: list[tuple[int, ...]]  # minus[i][x] = z(i, x)
    base: int

    @property
    def m(self) -> int:
        return len(self.forms)


def _in_span(rows, v) -> bool:
    if not rows:
        return not any(v)
    return rank_exact(rows + [v]) == rank_exact(rows)


def _restrict(rows, coords):
    """Basis of {v in span(rows): v_c = 0 for c in coords}."""
    if not rows:
        return []
    k = len(rows)
    cons = [[rows[r][c] for r in range(k)] for c in coords]
    lams = nullspace(cons, k) if cons else [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]
    width = len(rows[0])
    return [[sum(l[r] * rows[r][c] for r in range(k)) for c in range(width)] for l in lams]


def _pair_partition(rows, free: list[int]):
    """Pairs (a, b) with e_a - e_b in the span, partitioning ``free``.

    This is the constructive form of the sup-norm splitting: pick a vector
    of the subspace supported on exactly two coordinates, restrict to the
    complement and recurse, backtracking when a choice leads nowhere.
    """
    if not free:
        return [] if not rows else None
    dim = rank_exact(rows) if rows else 0
    if 2 * dim != len(free):
        return None
    width = len(rows[0])
    for a, b in itertools.combinations(free, 2):
        for s, t in ((a, b), (b, a)):
            v = [Fraction(0)] * width
            v[s], v[t] = Fraction(1), Fraction(-1)
            if _in_span(rows, v):
                rest = [c for c in free if c not in (a, b)]
                sub = _restrict(rows, [a, b])
                sub = [r for r in sub if any(r)]
                tail = _pair_partition(sub, rest)
                if tail is not None:
                    return [(s, t)] + tail
                break
    return None


def indicator_basis(cx: CellComplex, g: Model, metric: Metric,
                    report: SharpnessReport | None = None) -> IndicatorBasis:
    report = sharpness(g, metric, cx) if report is None else report
    if not report.sharp_max:
        raise PreconditionError(
            f"indicator basis needs kappa >= 0 and betti1 = deg_max/2 "
            f"(betti1 = {report.betti}, deg_max = {report.deg_max}, "
            f"kappa_min = {fmt_rational(report.kappa_min)})"
        )
    H = harmonic_basis(cx, g) if g.reversible else markov_harmonic_basis(cx, g)
    m = len(H)
    edges = cx.edges
    e_idx = g.edge_index
    d = metric.d

    def val(alpha, x, y):
        k = e_idx[(min(x, y), max(x, y))]
        return alpha[k] if x < y else -alpha[k]

    for x0 in range(g.n):
        if len(g.nbrs[x0]) == report.deg_max:
            break
    star = g.nbrs[x0]
    # psi: alpha -> (alpha(x0, y) / d(x0, y))_y on the star of x0
    psi = [[val(a, x0, y) / d[x0][y] for y in star] for a in H]
    pairs = _pair_partition(psi, list(range(len(star))))
    if pairs is None:
        raise StructureError("no two-point splitting of the star", {"base": g.vertices[x0]})
    forms = []
    for s, t in pairs:
        target = [Fraction(0)] * len(star)
        target[s], target[t] = Fraction(1), Fraction(-1)
        # psi is injective on H; solve sum c_k psi(H_k) = target in the least squares sense
        gram = [[sum(pa * pb for pa, pb in zip(psi[i], psi[j])) for j in range(m)] for i in range(m)]
        rhs = [sum(pa * tb for pa, tb in zip(psi[i], target)) for i in range(m)]
        coef = solve_square(gram, rhs)
        if coef is None:
            raise StructureError("psi is not injective on harmonic forms")
        forms.append([sum(coef[k] * H[k][j] for k in range(m)) for j in range(len(edges))])
    plus, minus = [], []
    for i, alpha in enumerate(forms):
        yi, zi = [], []
        for x in range(g.n):
            ratios = {y: val(alpha, x, y) / d[x][y] for y in g.nbrs[x]}
            ps = [y for y, r in ratios.items() if r == 1]
            ms = [y for y, r in ratios.items() if r == -1]
            others = [y for y, r in ratios.items() if r not in (0, 1, -1)]
            if len(ps) != 1 or len(ms) != 1 or others or sum(1 for r in ratios.values() if r) != 2:
                raise StructureError(
                    "not torus-structured",
                    {"form": i, "vertex": g.vertices[x],
                     "values": {g.vertices[y]: fmt_rational(r) for y, r in ratios.items()}},
                )
            yi.append(ps[0])
            zi.append(ms[0])
        plus.append(tuple(yi))
        minus.append(tuple(zi))
    return IndicatorBasis(forms, plus, minus, x0)


def sup_norm(cx: CellComplex, metric: Metric, alpha) -> Fraction:
    return max(abs(v) / metric.d[i][j] for v, (i, j) in zip(alpha, cx.edges))


# ---------------------------------------------------------------- phi maps


def _compose(p, q):
    """(p o q)(x) = p[q[x]]."""
    return tuple(p[v] for v in q)


def _inverse(p):
    inv = [0] * len(p)
    for x, y in enumerate(p):
        inv[y] = x
    return tuple(inv)


def certify_maps(g: Model, phis) -> list[dict]:
    """Failures of bijectivity, automorphism, commutation and distinctness."""
    fails = []
    n = g.n
    for i, p in enumerate(phis):
        if sorted(p) != list(range(n)):
            fails.append({"check": "bijective", "map": i})
            continue
        for a, b in g.edges:
            if not g.adjacent(p[a], p[b]):
                fails.append({"check": "automorphism", "map": i, "edge": g.label((a, b))})
                break
        else:
            if sum(1 for a, b in itertools.combinations(range(n), 2) if g.adjacent(p[a], p[b])) != len(g.edges):
                fails.append({"check": "automorphism", "map": i})
    if fails:
        return fails
    invs = [_inverse(p) for p in phis]
    for i, j in itertools.combinations(range(len(phis)), 2):
        if _compose(phis[i], phis[j]) != _compose(phis[j], phis[i]):
            x = next(x for x in range(n) if phis[i][phis[j][x]] != phis[j][phis[i][x]])
            fails.append({"check": "commute", "maps": [i, j], "vertex": g.vertices[x]})
    for i, j in itertools.permutations(range(len(phis)), 2):
        for x in range(n):
            if phis[i][x] in (phis[j][x], invs[j][x]):
                fails.append({"check": "distinct", "maps": [i, j], "vertex": g.vertices[x]})
                break
    return fails


def phi_maps(g: Model, basis: IndicatorBasis) -> list[tuple[int, ...]]:
    phis = [tuple(p) for p in basis.plus]
    fails = certify_maps(g, phis)
    for i, p in enumerate(phis):
        if _inverse(p) != basis.minus[i]:
            fails.append({"check": "minus neighbour is the inverse image", "map": i})
    if fails:
        raise StructureError("phi certification failed", {"failures": fails})
    return phis


# ---------------------------------------------------------------- torus structure


@dataclass
class TorusStructure:
    generators: list[tuple[int, ...]]  # vertex permutations a_i
    base: int
    elements: dict[int, tuple[int, ...]]  # vertex -> exponent vector
    orders: list[int]
    relations: list[tuple[int, ...]]  # generators of the relation lattice
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.generators)

    def act(self, v, x: int | None = None) -> int:
        """Apply a_1^{v_1} ... a_m^{v_m} to x (default: the base vertex)."""
        x = self.base if x is None else x
        for i, k in enumerate(v):
            p = self.generators[i] if k >= 0 else _inverse(self.generators[i])
            for _ in range(abs(k)):
                x = p[x]
        return x

    def to_json(self, g: Model) -> dict:
        return {
            "m": self.m,
            "base": g.vertices[self.base],
            "orders": self.orders,
            "relations": [list(r) for r in self.relations],
            "generators": [{g.vertices[x]: g.vertices[p[x]] for x in range(g.n)} for p in self.generators],
            "elements": {g.vertices[x]: list(v) for x, v in self.elements.items()},
            "checks": self.checks,
        }


def _lattice_basis(vectors, m: int) -> list[tuple[int, ...]]:
    """Integer row-echelon (Hermite-style) basis of the lattice spanned by vectors."""
    rows = [list(v) for v in vectors if any(v)]
    basis = []
    col = 0
    while rows and col < m:
        rows = [r for r in rows if any(r)]
        nz = [r for r in rows if r[col] != 0]
        if not nz:
            col += 1
            continue
        while len([r for r in rows if r[col] != 0]) > 1:
            nz = sorted((r for r in rows if r[col] != 0), key=lambda r: abs(r[col]))
            piv = nz[0]
            for r in nz[1:]:
                q = r[col] // piv[col]
                for k in range(m):
                    r[k] -= q * piv[k]
        piv = next(r for r in rows if r[col] != 0)
        if piv[col] < 0:
            piv = [-v for v in piv]
        basis.append(tuple(piv))
        rows = [r for r in rows if r[col] == 0]
        col += 1
    return basis


def group_structure(g: Model, phis, base: int) -> TorusStructure:
    """Exponent vectors by BFS over generator moves, plus the relation lattice."""
    m = len(phis)
    invs = [_inverse(p) for p in phis]
    elements = {base: (0,) * m}
    queue = deque([base])
    rels = []
    while queue:
        x = queue.popleft()
        vx = elements[x]
        for i in range(m):
            for sgn, perm in ((1, phis[i]), (-1, invs[i])):
                y = perm[x]
                vy = tuple(vx[k] + (sgn if k == i else 0) for k in range(m))
                if y in elements:
                    r = tuple(a - b for a, b in zip(vy, elements[y]))
                    if any(r):
                        rels.append(r)
                else:
                    elements[y] = vy
                    queue.append(y)
    orders = []
    for p in phis:
        k, x = 1, p[base]
        while x != base:
            x = p[x]
            k += 1
        orders.append(k)
    rels += [tuple(o if k == i else 0 for k in range(m)) for i, o in enumerate(orders)]
    return TorusStructure(list(phis), base, elements, orders, _lattice_basis(rels, m))


def recognize_torus(g: Model, metric: Metric) -> TorusStructure:
    cx = build_complex(g, metric)
    rep = sharpness(g, metric, cx)
    basis = indicator_basis(cx, g, metric, rep)
    phis = phi_maps(g, basis)
    st = group_structure(g, phis, basis.base)
    reasons = torus_axioms(g, metric, st, betti=rep.betti)
    if reasons:
        raise StructureError("torus axioms failed", {"failures": reasons})
    st.checks = {item: True for item in _axiom_items(g, metric)}
    return st


def _is_combinatorial(g: Model, metric: Metric) -> bool:
    return all(metric.d[i][j] == 1 for i, j in g.edges)


def _axiom_items(g, metric):
    items = ["group", "(i)", "(ii)" if g.reversible else "(ii)/(b)", "(iii)", "(iv)", "(v)"]
    if _is_combinatorial(g, metric):
        items.append("short-words")
    return items


def torus_axioms(g: Model, metric: Metric, st: TorusStructure, betti: int | None = None) -> list[dict]:
    """Every violated torus axiom with a counterexample record."""
    fails: list[dict] = []
    n, m = g.n, st.m
    d = metric.d
    V = g.vertices
    phis = st.generators
    if any(sorted(p) != list(range(n)) for p in phis):
        return [{"item": "group", "detail": "a generator is not a permutation"}]
    invs = [_inverse(p) for p in phis]
    # group: commuting, transitive, distinct generators
    for i, j in itertools.combinations(range(m), 2):
        if _compose(phis[i], phis[j]) != _compose(phis[j], phis[i]):
            fails.append({"item": "group", "detail": f"generators {i} and {j} do not commute"})
        if phis[i] in (phis[j], invs[j]):
            fails.append({"item": "group", "detail": f"generator {i} equals generator {j} or its inverse"})
    if len(st.elements) != n or any(st.act(v) != x for x, v in st.elements.items()):
        fails.append({"item": "group", "detail": "exponent vectors do not parametrise the vertices"})
    # (i) support = generator moves
    for x in range(n):
        moves = [p[x] for p in phis] + [q[x] for q in invs]
        if len(set(moves)) != 2 * m or set(moves) != set(g.nbrs[x]):
            fails.append({"item": "(i)", "vertex": V[x],
                          "neighbours": sorted(V[y] for y in g.nbrs[x]),
                          "moves": sorted(V[y] for y in set(moves))})
            break
    if any(f["item"] == "(i)" for f in fails):
        return fails
    # (ii) / (b)
    for i in range(m):
        diffs = set()
        for x in range(n):
            fwd, back = phis[i][x], invs[i][x]
            if g.reversible:
                lhs, rhs = g.w[x][fwd] * d[x][fwd], g.w[x][back] * d[x][back]
                if lhs != rhs:
                    fails.append({"item": "(ii)", "generator": i, "vertex": V[x],
                                  "forward": fmt_rational(lhs), "backward": fmt_rational(rhs)})
                    break
            else:
                diffs.add(g.rate(x, fwd) * d[x][fwd] - g.rate(x, back) * d[x][back])
        if not g.reversible and len(diffs) > 1:
            fails.append({"item": "(ii)/(b)", "generator": i,
                          "values": sorted(fmt_rational(v) for v in diffs)})
    # (iii) p invariant under the other generators; (iv) d invariant likewise
    for i, j in itertools.permutations(range(m), 2):
        for x in range(n):
            bad = False
            for e1, e2 in itertools.product((1, -1), repeat=2):
                ai = phis[i] if e1 == 1 else invs[i]
                aj = phis[j] if e2 == 1 else invs[j]
                if g.rate(x, ai[x]) != g.rate(aj[x], ai[aj[x]]):
                    fails.append({"item": "(iii)", "generators": [i, j], "vertex": V[x],
                                  "signs": [e1, e2]})
                    bad = True
                    break
            if bad:
                break
        for x in range(n):
            ax, ajx = phis[i][x], phis[j][x]
            if d[x][ax] != d[ajx][phis[i][ajx]]:
                fails.append({"item": "(iv)", "generators": [i, j], "vertex": V[x],
                              "values": [fmt_rational(d[x][ax]), fmt_rational(d[ajx][phis[i][ajx]])]})
                break
    # (v)
    if betti is None:
        betti = first_betti(build_complex(g, metric))
    if betti != m:
        fails.append({"item": "(v)", "betti1": betti, "m": m})
    if _is_combinatorial(g, metric):
        for v in short_words(m, 5):
            if st.act(v) == st.base:
                fails.append({"item": "short-words", "word": list(v)})
                break
    return fails


def short_words(m: int, bound: int):
    """Nonzero integer vectors with 0 < |v|_1 <= bound."""
    for v in itertools.product(range(-bound, bound + 1), repeat=m):
        if 0 < sum(map(abs, v)) <= bound:
            yield v


@dataclass
class TorusVerdict:
    ok: bool
    reasons: list[dict]

    def __bool__(self) -> bool:
        return self.ok


def verify_torus(g: Model, metric: Metric, st: TorusStructure) -> TorusVerdict:
    """Re-check all axioms and confirm kappa >= 0 on every edge."""
    reasons = torus_axioms(g, metric, st)
    for e in edge_pairs(g):
        k = ollivier_primal(g, metric, *e)
        if k < 0:
            reasons.append({"item": "curvature", "edge": g.label(e), "kappa": fmt_rational(k)})
            break
    return TorusVerdict(not reasons, reasons)


# ---------------------------------------------------------------- negative set bound


@dataclass
class NegativeSetReport:
    betti: int
    boundary_edges: int
    holds: bool


def negative_set_bound(g: Model, metric: Metric, W, kappa=None, betti=None) -> NegativeSetReport:
    """beta1 against |E(W, V)|; ``kappa`` and ``betti`` may be passed in precomputed."""
    W = set(W)
    if not W:
        raise PreconditionError("the vertex set W must be non-empty")
    if not W <= set(range(g.n)):
        raise PreconditionError("W contains unknown vertices")
    for e in edge_pairs(g):
        if e[0] not in W and e[1] not in W:
            k = ollivier_primal(g, metric, *e) if kappa is None else kappa[e]
            if k < 0:
                raise PreconditionError(
                    f"edge {g.label(e)} outside W has negative curvature {fmt_rational(k)}"
                )
    b = first_betti(build_complex(g, metric)) if betti is None else betti
    count = sum(1 for i, j in g.edges if i in W or j in W)
    return NegativeSetReport(b, count, b <= count)


# ---------------------------------------------------------------- bone-idle sharpness


@dataclass
class EquivalenceVerdicts:
    sharp_and_bone_idle: bool
    sharp_and_kappa1: bool
    flat_constant_torus: bool
    notes: list[str] = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return self.sharp_and_bone_idle == self.sharp_and_kappa1 == self.flat_constant_torus

    def to_json(self) -> dict:
        return {
            "sharp_and_bone_idle": self.sharp_and_bone_idle,
            "sharp_and_kappa1_nonnegative": self.sharp_and_kappa1,
            "flat_torus_constant_measure": self.flat_constant_torus,
            "agree": self.agree,
            "notes": self.notes,
        }


def obs_bone_idle_equivalence(g: Model, metric: Metric) -> EquivalenceVerdicts:
    if not isinstance(g, WeightedGraph) or not g.stochastic:
        raise PreconditionError("needs a reversible model with sum_y w(x,y) = mu(x)")
    rep = sharpness(g, metric)
    bi = bone_idle(g, metric)
    v1 = rep.sharp_max and bi.bone_idle
    v2 = rep.sharp_max and all(k >= 0 for k in bi.kappa1.values())
    notes = []
    try:
        st = recognize_torus(g, metric)
    except (PreconditionError, StructureError) as exc:
        v3 = False
        notes.append(f"no torus structure: {exc}")
    else:
        const_mu = len(set(g.mu)) == 1
        const_d = all(len({metric.d[x][p[x]] for x in range(g.n)}) == 1 for p in st.generators)
        v3 = const_mu and const_d
        if not const_mu:
            notes.append("mu is not constant")
        if not const_d:
            notes.append("generator edge lengths vary")
    return EquivalenceVerdicts(v1, v2, v3, notes)

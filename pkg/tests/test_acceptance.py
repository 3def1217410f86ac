"""The eleven acceptance criteria, one test each.

Every test prints a single ``[acceptance k] PASS|FAIL ...`` line to the
terminal (outside pytest's capture) so ``pytest -s`` is not needed.
"""
import contextlib
import itertools
import random
import time
from fractions import Fraction
from functools import lru_cache


from curvlab import rigidity as rg
from curvlab.bakry_emery import bakry_emery
from curvlab.complex import build_complex, build_path_complex
from curvlab.curvature import edge_pairs, kappa_eps, ollivier_dual, ollivier_primal
from curvlab.flow import FlowConfig, constant_curvature_cycle, zero_curvature_equivalence
from curvlab.generators import (
    _weighted,
    gen_bi,
    gen_chessboard,
    gen_complete,
    gen_cycle,
    gen_hypercube,
    gen_random_weighted,
    gen_rope_ladder,
    gen_torus,
    gen_zrp,
)
from curvlab.graph_core import WeightedGraph, degree_stats, path_metric
from curvlab.homology import betti1, first_betti, harmonic_basis

TORUS_MODULI = [tuple(sorted(p)) for p in itertools.combinations_with_replacement((6, 7, 8), 2)]
HALF, QUARTER, THREE_Q = Fraction(1, 2), Fraction(1, 4), Fraction(3, 4)


@contextlib.contextmanager
def criterion(capsys, k, title):
    t0 = time.perf_counter()
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        with capsys.disabled():
            print(f"\n[acceptance {k}] FAIL {title}: {type(exc).__name__}: {str(exc)[:200]}")
        raise
    extra = " ".join(f"{a}={b}" for a, b in detail.items())
    with capsys.disabled():
        print(f"\n[acceptance {k}] PASS {title} ({time.perf_counter() - t0:.1f}s) {extra}".rstrip())


def bridged_cycles():
    verts = [f"a{i}" for i in range(6)] + [f"b{i}" for i in range(6)]
    edges = [(f"{s}{i}", f"{s}{(i + 1) % 6}") for s in "ab" for i in range(6)] + [("a0", "b0")]
    return _weighted(verts, edges)


BUILDERS = {
    **{f"rope{n}": (lambda n=n: gen_rope_ladder(n)) for n in range(3, 9)},
    **{f"zrp{n}": (lambda n=n: gen_zrp(n)) for n in (6, 7, 8)},
    **{f"bi{n}": (lambda n=n: gen_bi(n)) for n in range(6, 11)},
    "chessboard": gen_chessboard,
    **{"torus" + "x".join(map(str, m)): (lambda m=m: gen_torus(m)) for m in TORUS_MODULI},
    "K4": lambda: gen_complete(4),
    "K5": lambda: gen_complete(5),
    "Q3": lambda: gen_hypercube(3),
    "C5": lambda: gen_cycle(5),
    "C6": lambda: gen_cycle(6),
    "bridged": bridged_cycles,
}


class Fixture:
    def __init__(self, name):
        self.name = name
        self.g, lengths = BUILDERS[name]()
        self.m = path_metric(self.g, lengths)
        self._kappa = self._cx = self._betti = None

    @property
    def kappa(self):
        if self._kappa is None:
            self._kappa = {e: ollivier_primal(self.g, self.m, *e) for e in edge_pairs(self.g)}
        return self._kappa

    @property
    def cx(self):
        if self._cx is None:
            self._cx = build_complex(self.g, self.m)
        return self._cx

    @property
    def betti(self):
        if self._betti is None:
            self._betti = first_betti(self.cx)
        return self._betti

    def sharpness(self):
        lo, hi, _ = degree_stats(self.g)
        return rg.SharpnessReport(self.kappa, min(self.kappa.values()), self.betti, lo, hi)


@lru_cache(maxsize=None)
def fx(name) -> Fixture:
    return Fixture(name)


@lru_cache(maxsize=None)
def corpus(stochastic):
    """200 seeded random rational-weighted graphs on 3..10 vertices."""
    out = []
    for seed in range(200):
        n = 3 + seed % 8
        g, lengths = gen_random_weighted(n, seed=seed, stochastic=stochastic, random_lengths=True)
        out.append((seed, g, path_metric(g, lengths)))
    return out


# ---------------------------------------------------------------- 1-5: example families


def test_criterion_1_rope_ladder(capsys):
    with criterion(capsys, 1, "rope ladder n=3..8: kappa=0, beta1=1, degrees (2,4)") as det:
        for n in range(3, 9):
            f = fx(f"rope{n}")
            assert set(f.kappa.values()) == {0}
            assert f.betti == 1
            assert degree_stats(f.g)[:2] == (2, 4)
        det["graphs"] = 6


def test_criterion_2_zero_range(capsys):
    with criterion(capsys, 2, "zero-range process l=6..8: kappa=0, beta1=1"):
        for n in (6, 7, 8):
            f = fx(f"zrp{n}")
            assert set(f.kappa.values()) == {0}
            assert f.betti == 1


def test_criterion_3_bi(capsys):
    with criterion(capsys, 3, "BI_n n=6..10: bone-idle, beta1=1<2, not sharp_max"):
        for n in range(6, 11):
            f = fx(f"bi{n}")
            rep = rg.bone_idle(f.g, f.m)
            assert rep.bone_idle
            assert set(rep.kappa.values()) == {0} and set(rep.kappa1.values()) == {0}
            assert f.betti == 1 and degree_stats(f.g)[1] == 4
            assert not f.sharpness().sharp_max


def test_criterion_4_chessboard(capsys):
    with criterion(capsys, 4, "chessboard quotient: 6-regular, bone-idle, beta1=0") as det:
        f = fx("chessboard")
        assert degree_stats(f.g)[:2] == (6, 6)
        rep = rg.bone_idle(f.g, f.m)
        assert rep.bone_idle
        assert f.betti == 0
        det["edges"] = len(f.g.edges)


def independent_torus_items(g, st):
    """Recheck the combinatorial torus characterisation straight from st.act."""
    m = st.m
    units = [tuple(1 if k == i else 0 for k in range(m)) for i in range(m)]
    neg = [tuple(-c for c in u) for u in units]
    p = g.rate
    for x in range(g.n):
        # (i) neighbours are exactly the generator moves
        moves = {st.act(u, x) for u in units + neg}
        assert moves == set(g.nbrs[x])
        for i in range(m):
            # (ii) symmetric generator weights
            assert g.w[x][st.act(units[i], x)] == g.w[x][st.act(neg[i], x)]
            for j in range(m):
                if i == j:
                    continue
                for a in (units[i], neg[i]):
                    for b in (units[j], neg[j]):
                        # (iii) translation invariance of the kernel
                        bx = st.act(b, x)
                        assert p(x, st.act(a, x)) == p(bx, st.act(a, bx))
    # (iv) no short word is the identity
    for v in itertools.product(range(-5, 6), repeat=m):
        if 0 < sum(map(abs, v)) <= 5:
            assert all(st.act(v, x) != x for x in range(g.n))
    # abelian: generators commute and the orbit of the base is everything
    for a, b in itertools.combinations(st.generators, 2):
        assert all(a[b[x]] == b[a[x]] for x in range(g.n))
    assert len({st.act(v) for v in st.elements.values()}) == g.n


def test_criterion_5_tori(capsys):
    with criterion(capsys, 5, "tori Z_n1 x Z_n2, n_i in {6,7,8}: recognised, perturbation rejected") as det:
        for mod in TORUS_MODULI:
            f = fx("torus" + "x".join(map(str, mod)))
            assert min(f.kappa.values()) >= 0
            assert f.betti == 2 == degree_stats(f.g)[1] // 2
            st = rg.recognize_torus(f.g, f.m)
            assert st.m == 2 and sorted(st.orders) == sorted(mod)
            assert st.checks and all(st.checks.values())
            assert rg.verify_torus(f.g, f.m, st).ok
            independent_torus_items(f.g, st)
            i, j = f.g.edges[len(f.g.edges) // 2]
            w = [list(r) for r in f.g.w]
            w[i][j] = w[j][i] = w[i][j] + 1
            bad = f.g.with_weights(w=tuple(map(tuple, w)))
            verdict = rg.verify_torus(bad, f.m, st)
            assert not verdict.ok
        det["tori"] = len(TORUS_MODULI)


# ---------------------------------------------------------------- 6: theorem bounds


def random_W(f, rng):
    """A random vertex set meeting every negatively curved edge."""
    W = {x for x in range(f.g.n) if rng.random() < 0.25}
    for (a, b), k in f.kappa.items():
        if k < 0 and a not in W and b not in W:
            W.add(rng.choice((a, b)))
    if not W:
        W.add(rng.randrange(f.g.n))
    return W


def test_criterion_6_theorem_bounds(capsys):
    with criterion(capsys, 6, "beta1 bounds over all fixtures") as det:
        counts = dict(nonneg=0, positive_vertex=0, bakry_emery=0, negative_sets=0)
        rng = random.Random(6)
        for name in BUILDERS:
            f = fx(name)
            lo, _, _ = degree_stats(f.g)
            if min(f.kappa.values()) >= 0:
                counts["nonneg"] += 1
                assert f.betti <= Fraction(lo, 2), name
                if any(all(f.kappa[e] > 0 for e in f.kappa if x in e) for x in range(f.g.n)):
                    counts["positive_vertex"] += 1
                    assert f.betti == 0, name
            if all(bakry_emery(f.g, x).K >= -1e-9 for x in range(f.g.n)):
                counts["bakry_emery"] += 1
                assert first_betti(build_path_complex(f.g)) <= lo - 1, name
            for _ in range(20):
                rep = rg.negative_set_bound(f.g, f.m, random_W(f, rng), kappa=f.kappa, betti=f.betti)
                assert rep.holds, name
                counts["negative_sets"] += 1
        # K_n and C_5 must witness the positive-vertex theorem
        assert fx("K4").betti == fx("K5").betti == fx("C5").betti == 0
        assert min(fx("C5").kappa.values()) > 0 and min(fx("K5").kappa.values()) > 0
        assert min(fx("bridged").kappa.values()) < 0
        det.update(counts)


# ---------------------------------------------------------------- 7-8: random corpus


def test_criterion_7_primal_dual(capsys):
    with criterion(capsys, 7, "primal = dual on 200 random graphs") as det:
        edges = 0
        for seed, g, m in corpus(False):
            for e in edge_pairs(g):
                assert ollivier_primal(g, m, *e) == ollivier_dual(g, m, *e), (seed, e)
                edges += 1
        det["edges"] = edges


def test_criterion_8_idleness_chords(capsys):
    with criterion(capsys, 8, "eps*kappa1 <= kappa_eps <= eps*kappa at eps in {1/4,1/2,3/4}") as det:
        checks = 0
        for seed, g, m in corpus(True):
            for e in edge_pairs(g):
                k = ollivier_primal(g, m, *e)
                k1 = kappa_eps(g, m, *e, 1)
                for eps in (QUARTER, HALF, THREE_Q):
                    ke = kappa_eps(g, m, *e, eps)
                    assert eps * k1 <= ke <= eps * k, (seed, e, eps)
                    checks += 1
        det["checks"] = checks


# ---------------------------------------------------------------- 9: flow on cycles


def flow_kernels():
    """25 non-reversible seeded kernels: 7 on C5, then 6 each on C6, C7, C9."""
    out = []
    for n, count in ((5, 7), (6, 6), (7, 6), (9, 6)):
        seed = 0
        while sum(1 for k in out if k[0] == n) < count:
            g, _ = gen_cycle(n, seed=1000 * n + seed)
            if not g.reversible:
                out.append((n, 1000 * n + seed, g))
            seed += 1
    return out


def test_criterion_9_cycle_flow(capsys):
    with criterion(capsys, 9, "Ricci flow on 25 non-reversible cycles") as det:
        # Stopping at spread < 1e-9 (inside the required 1e-8) keeps the gap
        # between the two stopped runs, about 10x the stopping spread, under 1e-7.
        cfg = FlowConfig(alpha=Fraction(1, 10), tol=1e-9, max_iter=10_000)
        worst_diff, iters, zero = 0.0, 0, 0
        for n, seed, g in flow_kernels():
            res = constant_curvature_cycle(g, cfg, seed=seed, agree_tol=1e-7)
            for run in (res.primary, res.secondary):
                assert run.converged and run.iterations <= 10_000, (n, seed)
                assert run.spread < 1e-8
                assert min(run.kappa.values()) >= -1e-8, (n, seed)
            assert res.max_difference <= 1e-7, (n, seed)
            eq = zero_curvature_equivalence(g, res.primary, tol=1e-8)
            assert eq.agree, (n, seed, eq.notes)
            zero += eq.zero_curvature
            worst_diff = max(worst_diff, res.max_difference)
            iters = max(iters, res.primary.iterations, res.secondary.iterations)
        det.update(runs=25, max_iterations=iters, max_difference=f"{worst_diff:.2e}", flat=zero)


# ---------------------------------------------------------------- 10-11


def test_criterion_10_hodge(capsys):
    with criterion(capsys, 10, "dim harmonic basis = beta1 on reversible graphs") as det:
        graphs = 0
        for name in BUILDERS:
            f = fx(name)
            if isinstance(f.g, WeightedGraph) or f.g.reversible:
                assert len(harmonic_basis(f.cx, f.g)) == betti1(f.cx), name
                graphs += 1
        for seed, g, m in corpus(False)[:40]:
            cx = build_complex(g, m)
            assert len(harmonic_basis(cx, g)) == betti1(cx), seed
            graphs += 1
        det["graphs"] = graphs


BE_FIXTURES = ["K4", "K5", "Q3", "C5", "C6", "rope3", "rope5", "bi6", "zrp6", "torus6x6", "bridged"]
DIMS = [Fraction(1, 2), Fraction(1), Fraction(2), Fraction(5), None]


def test_criterion_11_bakry_emery(capsys):
    with criterion(capsys, 11, "Bakry-Emery scaling, N-monotonicity, residuals") as det:
        values = 0
        graphs = [fx(n).g for n in BE_FIXTURES] + [g for _, g, _ in corpus(False)[:20]]
        for g in graphs:
            h = g.scaled(Fraction(7, 3))
            for x in range(g.n):
                prev = None
                for N in DIMS:
                    r = bakry_emery(g, x, N, tol=1e-9)
                    assert r.residual <= 1e-9
                    s = bakry_emery(h, x, N, tol=1e-9)
                    assert abs(r.K - s.K) <= 1e-12 * max(1.0, abs(r.K))
                    if prev is not None:
                        assert r.K >= prev - 1e-9
                    prev = r.K
                    values += 2
        det["values"] = values

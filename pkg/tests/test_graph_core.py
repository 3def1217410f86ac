import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvlab.generators import gen_chessboard, gen_cycle, gen_random_weighted, gen_rope_ladder
from curvlab.graph_core import (
    MarkovChain,
    ModelError,
    WeightedGraph,
    check_path_metric,
    degree_stats,
    dump_graph,
    invariant_distribution,
    parse_graph,
    path_metric,
    to_markov,
)

from oracles import numpy_stationary


def weighted_doc(vertices, edges, mu):
    return json.dumps({
        "model": "weighted",
        "vertices": vertices,
        "mu": {v: mu for v in vertices},
        "edges": [{"u": u, "v": v, "w": w} for u, v, w in edges],
    })


def triangle(mu="2"):
    text = weighted_doc(["a", "b", "c"], [("a", "b", "1"), ("b", "c", "1"), ("a", "c", "1")], mu)
    return parse_graph(text)[0]


def test_parse_triangle():
    g = triangle()
    assert isinstance(g, WeightedGraph)
    assert g.n == 3 and len(g.edges) == 3
    assert g.mu == (2, 2, 2)


def test_parse_markov_row_sums():
    ok = {"model": "markov", "vertices": ["x", "y"], "edges": [{"u": "x", "v": "y", "p_uv": "1", "p_vu": "1"}]}
    g, _ = parse_graph(json.dumps(ok))
    assert isinstance(g, MarkovChain)
    bad = dict(ok, edges=[{"u": "x", "v": "y", "p_uv": "99/100", "p_vu": "1"}])
    with pytest.raises(ModelError, match="non-stochastic"):
        parse_graph(json.dumps(bad))


def test_conflicting_weights_are_asymmetric():
    text = weighted_doc(["a", "b"], [("a", "b", "1"), ("b", "a", "2")], "1")
    with pytest.raises(ModelError, match="asymmetric weight"):
        parse_graph(text)


def test_in_memory_asymmetry_rejected():
    with pytest.raises(ModelError, match="asymmetric"):
        WeightedGraph(("a", "b"), ((0, 1), (2, 0)), (1, 1))
    with pytest.raises(ModelError, match="asymmetric support"):
        MarkovChain(("a", "b", "c"), ((0, 1, 0), (Fraction(1, 2), 0, Fraction(1, 2)), (1, 0, 0)))


@pytest.mark.parametrize("text, msg", [
    ("{not json", "malformed"),
    (json.dumps({"model": "weighted", "vertices": ["a", "b"], "mu": {"a": "1", "b": "1"},
                 "edges": [{"u": "a", "v": "b", "w": "-1"}]}), "positive"),
    (json.dumps({"model": "weighted", "vertices": ["a", "b", "c"],
                 "mu": {"a": "1", "b": "1", "c": "1"}, "edges": [{"u": "a", "v": "b", "w": "1"}]}),
     "disconnected"),
    (json.dumps({"model": "weighted", "vertices": ["a", "b"], "mu": {"a": "1", "b": "0"},
                 "edges": [{"u": "a", "v": "b", "w": "1"}]}), "positive"),
    (json.dumps({"model": "graph", "vertices": []}), "model"),
    (json.dumps({"model": "weighted", "vertices": ["a", "b"], "mu": {"a": "1", "b": "1"},
                 "edges": [{"u": "a", "v": "z", "w": "1"}]}), "unknown vertex"),
])
def test_parse_errors(text, msg):
    with pytest.raises(ModelError, match=msg):
        parse_graph(text)


def test_lengths_from_file_and_round_trip():
    text = json.dumps({"model": "weighted", "vertices": ["a", "b", "c"], "mu": {"a": "1", "b": "1", "c": "1"},
                       "edges": [{"u": "a", "v": "b", "w": "1/2", "d": "3/2"}, {"u": "b", "v": "c", "w": "1"}]})
    g, lengths = parse_graph(text)
    assert lengths == {(0, 1): Fraction(3, 2), (1, 2): 1}
    g2, lengths2 = parse_graph(dump_graph(g, lengths))
    assert g2.w == g.w and g2.mu == g.mu and lengths2 == lengths


def test_to_markov_examples():
    k2 = WeightedGraph(("x", "y"), ((0, 1), (1, 0)), (1, 1))
    lk = to_markov(k2)
    assert lk.p[0][1] == lk.p[1][0] == 1 and lk.stochastic
    lk = to_markov(triangle("3"))
    assert lk.p[0][1] == Fraction(1, 3) and sum(lk.p[0]) == Fraction(2, 3) and not lk.stochastic
    rope, _ = gen_rope_ladder(6)
    lk = to_markov(rope)
    assert [sum(r) for r in lk.p] == [len(nb) for nb in rope.nbrs]
    assert not lk.stochastic


def test_path_metric_examples():
    g = triangle()
    m = path_metric(g, {(0, 1): 1, (1, 2): 1, (0, 2): 3})
    assert m.d[0][2] == 2 and m.shortcuts == ((0, 2),)
    p3 = WeightedGraph(("a", "b", "c"), ((0, 1, 0), (1, 0, 1), (0, 1, 0)), (1, 1, 1))
    assert path_metric(p3).d[0][2] == 2
    c6, lengths = gen_cycle(6)
    assert path_metric(c6, lengths).d[0][3] == 3


def test_path_metric_rejects_bad_lengths():
    g = triangle()
    with pytest.raises(ModelError):
        path_metric(g, {(0, 1): 1, (1, 2): 1})
    with pytest.raises(ModelError):
        path_metric(g, {(0, 1): 1, (1, 2): 0, (0, 2): 1})


def test_invariant_distribution_examples():
    c5, _ = gen_cycle(5, kernel=Fraction(1, 2))
    assert invariant_distribution(c5) == [Fraction(1, 5)] * 5
    c3, _ = gen_cycle(3, kernel=Fraction(2, 3))
    assert invariant_distribution(c3) == [Fraction(1, 3)] * 3
    g, _ = gen_random_weighted(6, seed=3, stochastic=True)
    chain = MarkovChain(g.vertices, to_markov(g).p)
    total = sum(g.mu)
    assert invariant_distribution(chain) == [m / total for m in g.mu]


@given(st.integers(3, 8), st.integers(0, 10**6))
def test_invariant_distribution_is_exact(n, seed):
    c, _ = gen_cycle(n, seed=seed)
    pi = invariant_distribution(c)
    assert sum(pi) == 1 and all(v > 0 for v in pi)
    assert all(sum(pi[x] * c.p[x][y] for x in range(n)) == pi[y] for y in range(n))
    ref = numpy_stationary(c.p)
    assert max(abs(float(a) - b) for a, b in zip(pi, ref)) < 1e-9


def test_degree_stats_examples():
    assert degree_stats(gen_rope_ladder(6)[0])[:2] == (2, 4)
    assert degree_stats(gen_cycle(7)[0])[:2] == (2, 2)
    assert degree_stats(gen_chessboard()[0])[:2] == (6, 6)


@given(st.integers(2, 9), st.integers(0, 10**6))
def test_path_metric_is_certified(n, seed):
    g, lengths = gen_random_weighted(n, seed, random_lengths=True)
    m = path_metric(g, lengths)
    assert check_path_metric(g, m)
    for (i, j), ln in lengths.items():
        assert m.d[i][j] <= ln
        assert ((i, j) in m.shortcuts) == (m.d[i][j] < ln)


@given(st.integers(2, 8), st.integers(0, 10**6), st.fractions(min_value=Fraction(1, 20), max_value=20))
def test_laplacian_scale_invariance(n, seed, c):
    g, _ = gen_random_weighted(n, seed)
    assert to_markov(g.scaled(c)).p == to_markov(g).p

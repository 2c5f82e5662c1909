"""Canonical counting kernels against brute-force oracles."""

from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reglab.counting import (
    automorphism_count,
    canonical_count,
    constrained_count,
    extension_degree,
    gk_bruteforce,
    greedy_order,
    mu_star,
)
from reglab.errors import BudgetError, PreconditionError
from reglab.graphs import MultipartiteGraph, PatternGraph
from reglab.randgraph import RngStream
from reglab import smallgraphs

from helpers import naive_canonical_count, naive_constrained_count, patterns


def random_multipartite(pattern: PatternGraph, n: int, density: float, stream: RngStream):
    gen = stream.np_rng()
    pair_edges = {}
    for i, j in pattern.sorted_edges():
        pair_edges[(i, j)] = [
            (u, v) for u in range(n) for v in range(n) if gen.random() < density
        ]
    return MultipartiteGraph.from_pair_edges(pattern, n, pair_edges)


def random_sub_multipartite(graph: MultipartiteGraph, keep: float, stream: RngStream):
    gen = stream.np_rng()
    pair_edges = {}
    for i, j in graph.pattern.sorted_edges():
        pair_edges[(i, j)] = [e for e in graph.pair_edges(i, j) if gen.random() < keep]
    return MultipartiteGraph.from_pair_edges(graph.pattern, graph.part_size, pair_edges)


def test_complete_blowup_count():
    for k in (2, 3, 4):
        blowup = MultipartiteGraph.complete_blowup(PatternGraph.complete(k), 2)
        assert canonical_count(blowup).count == 2**k


def test_single_edge_count_equals_edges():
    k2 = PatternGraph.complete(2)
    mg = MultipartiteGraph.from_pair_edges(k2, 4, {(0, 1): [(0, 1), (2, 3), (3, 3)]})
    assert canonical_count(mg).count == 3


def test_path_matching_complete_example():
    p3 = PatternGraph.from_edges(3, [(0, 1), (1, 2)])
    mg = MultipartiteGraph.from_pair_edges(
        p3, 2, {(0, 1): [(0, 0), (1, 1)], (1, 2): [(0, 0), (0, 1), (1, 0), (1, 1)]}
    )
    assert canonical_count(mg).count == 4


def test_constrained_with_empty_subpattern_equals_plain():
    k3 = PatternGraph.complete(3)
    graph = random_multipartite(k3, 4, 0.5, RngStream(1))
    overlay = random_sub_multipartite(graph, 0.5, RngStream(2))
    empty = PatternGraph(3, frozenset())
    assert constrained_count(graph, empty, overlay).count == canonical_count(graph).count
    assert constrained_count(graph, k3, graph).count == canonical_count(graph).count


def test_extension_degree_trivial_cases():
    k2 = PatternGraph.complete(2)
    mg = MultipartiteGraph.from_pair_edges(k2, 3, {(0, 1): [(0, 0), (1, 2)]})
    empty = PatternGraph(2, frozenset())
    assert extension_degree(mg, empty, mg, 0, 1, 0, 0) == 1
    blowup = MultipartiteGraph.complete_blowup(PatternGraph.complete(3), 2)
    empty3 = PatternGraph(3, frozenset())
    assert extension_degree(blowup, empty3, blowup, 0, 1, 0, 0) == 2


def test_extension_degree_missing_edge_rejected():
    k2 = PatternGraph.complete(2)
    mg = MultipartiteGraph.from_pair_edges(k2, 3, {(0, 1): [(0, 0)]})
    with pytest.raises(PreconditionError):
        extension_degree(mg, PatternGraph(2, frozenset()), mg, 0, 1, 1, 1)


@settings(max_examples=60, deadline=None)
@given(patterns(max_k=4), st.integers(0, 10**9))
def test_count_matches_naive(pattern, seed):
    n = 3
    graph = random_multipartite(pattern, n, 0.5, RngStream(seed))
    assert canonical_count(graph).count == naive_canonical_count(graph)


@settings(max_examples=40, deadline=None)
@given(patterns(max_k=4), st.integers(0, 10**9), st.data())
def test_constrained_matches_naive(pattern, seed, data):
    n = 3
    graph = random_multipartite(pattern, n, 0.6, RngStream(seed))
    overlay = random_sub_multipartite(graph, 0.6, RngStream(seed + 1))
    edge_list = pattern.sorted_edges()
    sub_edges = data.draw(
        st.lists(st.sampled_from(edge_list), max_size=len(edge_list), unique=True)
    ) if edge_list else []
    sub = PatternGraph.from_edges(pattern.k, sub_edges) if sub_edges else PatternGraph(pattern.k, frozenset())
    assert constrained_count(graph, sub, overlay).count == naive_constrained_count(
        graph, sub, overlay
    )


def test_edge_sum_identity_random_instances():
    # summing extension degrees over a pair's edges recovers the constrained count
    k3 = PatternGraph.complete(3)
    for seed in range(25):
        graph = random_multipartite(k3, 4, 0.5, RngStream(9000 + seed))
        overlay = random_sub_multipartite(graph, 0.6, RngStream(9100 + seed))
        sub = PatternGraph.from_edges(3, [(0, 1)])
        target = constrained_count(graph, sub, overlay).count
        for i, j in ((1, 2), (0, 2)):  # pairs outside the sub-pattern
            total = sum(
                extension_degree(graph, sub, overlay, i, j, u, v)
                for u, v in graph.pair_edges(i, j)
            )
            assert total == target


def test_count_monotone_in_edges():
    k3 = PatternGraph.complete(3)
    graph = random_multipartite(k3, 4, 0.4, RngStream(77))
    base = canonical_count(graph).count
    edges = dict((key, set(graph.pair_edges(*key))) for key in k3.sorted_edges())
    missing = next(
        (u, v) for u in range(4) for v in range(4) if (u, v) not in edges[(0, 1)]
    )
    edges[(0, 1)].add(missing)
    bigger = MultipartiteGraph.from_pair_edges(k3, 4, {k: sorted(v) for k, v in edges.items()})
    assert canonical_count(bigger).count >= base


def test_count_result_normalizations():
    k3 = PatternGraph.complete(3)
    blowup = MultipartiteGraph.complete_blowup(k3, 3)
    result = canonical_count(blowup)
    assert result.count == 27
    assert result.normalized == 1
    assert result.expected == 27
    assert result.ratio == 1.0
    assert '"count": "27"' in result.to_json()


def test_mu_star():
    k3 = PatternGraph.complete(3)
    blowup = MultipartiteGraph.complete_blowup(k3, 2)
    assert mu_star(blowup, 2) == 1
    assert mu_star(blowup, 4) == Fraction(8, 64)
    empty = MultipartiteGraph.from_pair_edges(k3, 2, {})
    assert mu_star(empty, 2) == 0
    k2 = PatternGraph.complete(2)
    mg = MultipartiteGraph.from_pair_edges(k2, 3, {(0, 1): [(0, 0), (1, 2)]})
    assert mu_star(mg, 5) == Fraction(2, 25)
    with pytest.raises(PreconditionError):
        mu_star(mg, 0)


def test_greedy_order_prefers_back_degree():
    p4 = PatternGraph.path(4)
    order = greedy_order(p4)
    assert set(order) == {0, 1, 2, 3}
    # after the first vertex, each next one is adjacent to a placed vertex
    for idx in range(1, 4):
        assert any((min(order[idx], order[s]), max(order[idx], order[s])) in p4.edges for s in range(idx))


def test_automorphism_count():
    assert automorphism_count(PatternGraph.complete(3)) == 6
    assert automorphism_count(PatternGraph.path(3)) == 2
    assert automorphism_count(PatternGraph.cycle(4)) == 8


def test_gk_zero_region_and_complete():
    # a complete bipartite graph on 6 vertices has 9 >= ceil(0.5 * 15) = 8 edges
    assert gk_bruteforce(3, Fraction(1, 2), 6) == 0
    assert gk_bruteforce(3, 1, 5) == 1
    assert gk_bruteforce(3, Fraction(1), 4) == 1


def test_gk_regression_constant():
    # exhaustive minimum over 6-vertex graphs with >= 12 edges; K_{2,2,2}
    # attains 8 triangles, so the normalized value is 8 / C(6,3)
    assert gk_bruteforce(3, Fraction(4, 5), 6) == Fraction(8, 20)


def test_gk_small_cross_check():
    # direct check against full labelled enumeration at n = 5
    import math
    from itertools import combinations as comb

    slots = list(comb(range(5), 2))
    for rho_num in (6, 7, 8):
        rho = Fraction(rho_num, 10)
        m0 = math.ceil(rho * len(slots))
        best = None
        for edges in comb(slots, m0):
            adj = [0] * 5
            for a, b in edges:
                adj[a] |= 1 << b
                adj[b] |= 1 << a
            count = smallgraphs.clique_count(5, tuple(adj), 3)
            best = count if best is None else min(best, count)
        assert gk_bruteforce(3, rho, 5) == Fraction(best, 10)


def test_gk_budget_and_preconditions():
    with pytest.raises(BudgetError):
        gk_bruteforce(3, Fraction(1, 2), 10)
    with pytest.raises(PreconditionError):
        gk_bruteforce(3, Fraction(11, 10), 6)
    with pytest.raises(PreconditionError):
        gk_bruteforce(1, Fraction(1, 2), 6)

"""Shared hypothesis strategies and brute-force oracles for the test suite."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

from hypothesis import strategies as st

from reglab.graphs import PatternGraph, SimpleGraph


@st.composite
def patterns(draw, min_k=2, max_k=6, require_edge=True):
    k = draw(st.integers(min_k, max_k))
    slots = list(combinations(range(k), 2))
    min_edges = 1 if require_edge else 0
    edges = draw(
        st.lists(st.sampled_from(slots), min_size=min_edges, max_size=len(slots), unique=True)
    )
    return PatternGraph.from_edges(k, edges)


@st.composite
def simple_graphs(draw, min_n=1, max_n=10):
    n = draw(st.integers(min_n, max_n))
    slots = list(combinations(range(n), 2))
    edges = draw(st.lists(st.sampled_from(slots), max_size=len(slots), unique=True)) if slots else []
    return SimpleGraph.from_edges(n, edges)


def naive_m2(pattern: PatternGraph) -> Fraction:
    """Literal 2-density: maximum over all (not only induced) subgraphs."""
    best = Fraction(1, 2)
    edge_list = sorted(pattern.edges)
    for size in range(3, pattern.k + 1):
        for vertices in combinations(range(pattern.k), size):
            vset = set(vertices)
            inside = [e for e in edge_list if e[0] in vset and e[1] in vset]
            for count in range(len(inside) + 1):
                value = Fraction(count - 1, size - 2)
                if value > best:
                    best = value
    return best


def naive_strictly_balanced(pattern: PatternGraph) -> bool:
    """Literal definition: m2 strictly exceeds m2 of every proper subgraph."""
    full = naive_m2(pattern)
    edge_list = sorted(pattern.edges)
    for size in range(2, pattern.k + 1):
        for vertices in combinations(range(pattern.k), size):
            vset = set(vertices)
            inside = [e for e in edge_list if e[0] in vset and e[1] in vset]
            for keep in range(len(inside) + 1):
                for sub_edges in combinations(inside, keep):
                    if size == pattern.k and len(sub_edges) == pattern.edge_count:
                        continue  # not a proper subgraph
                    if not sub_edges:
                        continue
                    relabel = {v: i for i, v in enumerate(sorted(vset))}
                    sub = PatternGraph.from_edges(size, [(relabel[a], relabel[b]) for a, b in sub_edges])
                    if naive_m2(sub) >= full:
                        return False
    return True


def naive_canonical_count(multipartite) -> int:
    """Full tuple enumeration over the parts."""
    n = multipartite.part_size
    k = multipartite.k
    total = 0
    for tup in product(range(n), repeat=k):
        if all(
            multipartite.has_pair_edge(i, j, tup[i], tup[j])
            for i, j in multipartite.pattern.sorted_edges()
        ):
            total += 1
    return total


def naive_constrained_count(graph, sub_pattern, overlay) -> int:
    n = graph.part_size
    total = 0
    sub_edges = set(sub_pattern.sorted_edges())
    for tup in product(range(n), repeat=graph.k):
        ok = True
        for i, j in graph.pattern.sorted_edges():
            if not graph.has_pair_edge(i, j, tup[i], tup[j]):
                ok = False
                break
            if (i, j) in sub_edges and not overlay.has_pair_edge(i, j, tup[i], tup[j]):
                ok = False
                break
        if ok:
            total += 1
    return total


def full_quantifier_regular(graph, pair, epsilon: float, p: float) -> bool:
    """Literal definition: all subsets of size >= ceil(eps * side) on both sides."""
    from reglab.graphs import pair_density, VertexSetPair
    from reglab.regularity import subset_floor

    d_pair = pair_density(graph, pair)
    s_u = subset_floor(epsilon, len(pair.U))
    s_v = subset_floor(epsilon, len(pair.V))
    bound = Fraction(epsilon) * Fraction(p) + Fraction(1, 10**12)
    for size_u in range(s_u, len(pair.U) + 1):
        for subset_u in combinations(pair.U, size_u):
            for size_v in range(s_v, len(pair.V) + 1):
                for subset_v in combinations(pair.V, size_v):
                    cand = VertexSetPair(subset_u, subset_v)
                    if abs(pair_density(graph, cand) - d_pair) > bound:
                        return False
    return True

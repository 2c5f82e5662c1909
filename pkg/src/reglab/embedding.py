"""Exact subgraph search on host graphs (not restricted to canonical copies).

Backtracking over a greedy template order with bitset candidate pruning.
Embeddings are injective vertex maps realizing every template edge; host
edges not demanded by the template are allowed (subgraph containment, not
induced).
"""

from __future__ import annotations

from .counting import automorphism_count, greedy_order
from .graphs import PatternGraph, SimpleGraph, iter_bits


def _prepare(pattern: PatternGraph, fixed: dict[int, int]):
    order = greedy_order(pattern, tuple(fixed))
    constraints: list[list[int]] = []
    for t, v in enumerate(order):
        cons = [s for s in range(t) if (min(order[s], v), max(order[s], v)) in pattern.edges]
        constraints.append(cons)
    return order, constraints


def find_embedding(
    graph: SimpleGraph,
    pattern: PatternGraph,
    candidate_masks: list[int] | None = None,
    fixed: dict[int, int] | None = None,
) -> tuple[int, ...] | None:
    """First embedding found, as host vertices indexed by template vertex.

    ``candidate_masks[i]`` restricts template vertex i to a host subset;
    ``fixed`` pins template vertices to specific hosts.
    """
    fixed = fixed or {}
    full = (1 << graph.n) - 1
    masks = candidate_masks or [full] * pattern.k
    for a, b in pattern.edges:
        if a in fixed and b in fixed and not graph.has_edge(fixed[a], fixed[b]):
            return None
    for v, host in fixed.items():
        if not masks[v] >> host & 1:
            return None
    order, constraints = _prepare(pattern, fixed)
    start = len(fixed)
    assignment = [-1] * pattern.k
    for t in range(start):
        assignment[t] = fixed[order[t]]
    used = 0
    for host in fixed.values():
        used |= 1 << host

    def rec(t: int, used: int) -> bool:
        if t == pattern.k:
            return True
        cand = masks[order[t]] & ~used
        for s in constraints[t]:
            cand &= graph.adj[assignment[s]]
            if not cand:
                return False
        for v in iter_bits(cand):
            assignment[t] = v
            if rec(t + 1, used | (1 << v)):
                return True
        return False

    if not rec(start, used):
        return None
    result = [0] * pattern.k
    for t, v in enumerate(order):
        result[v] = assignment[t]
    return tuple(result)


def count_embeddings(
    graph: SimpleGraph,
    pattern: PatternGraph,
    candidate_masks: list[int] | None = None,
    fixed: dict[int, int] | None = None,
) -> int:
    """Number of labelled embeddings (injective maps realizing all template edges)."""
    fixed = fixed or {}
    full = (1 << graph.n) - 1
    masks = candidate_masks or [full] * pattern.k
    for a, b in pattern.edges:
        if a in fixed and b in fixed and not graph.has_edge(fixed[a], fixed[b]):
            return 0
    for v, host in fixed.items():
        if not masks[v] >> host & 1:
            return 0
    order, constraints = _prepare(pattern, fixed)
    start = len(fixed)
    assignment = [-1] * pattern.k
    for t in range(start):
        assignment[t] = fixed[order[t]]
    used0 = 0
    for host in fixed.values():
        used0 |= 1 << host

    def rec(t: int, used: int) -> int:
        if t == pattern.k:
            return 1
        cand = masks[order[t]] & ~used
        for s in constraints[t]:
            cand &= graph.adj[assignment[s]]
            if not cand:
                return 0
        if t == pattern.k - 1:
            return cand.bit_count()
        total = 0
        for v in iter_bits(cand):
            assignment[t] = v
            total += rec(t + 1, used | (1 << v))
        return total

    return rec(start, used0)


def iter_embeddings(
    graph: SimpleGraph,
    pattern: PatternGraph,
    candidate_masks: list[int] | None = None,
):
    """Yield every labelled embedding (host tuple indexed by template vertex)."""
    full = (1 << graph.n) - 1
    masks = candidate_masks or [full] * pattern.k
    order, constraints = _prepare(pattern, {})
    assignment = [-1] * pattern.k

    def rec(t: int, used: int):
        if t == pattern.k:
            result = [0] * pattern.k
            for pos, v in enumerate(order):
                result[v] = assignment[pos]
            yield tuple(result)
            return
        cand = masks[order[t]] & ~used
        for s in constraints[t]:
            cand &= graph.adj[assignment[s]]
            if not cand:
                return
        for v in iter_bits(cand):
            assignment[t] = v
            yield from rec(t + 1, used | (1 << v))

    yield from rec(0, 0)


def count_copies(graph: SimpleGraph, pattern: PatternGraph) -> int:
    """Unlabelled copies: embeddings divided by the automorphism count."""
    emb = count_embeddings(graph, pattern)
    aut = automorphism_count(pattern)
    assert emb % aut == 0
    return emb // aut


def count_embeddings_through_edge(
    graph: SimpleGraph, pattern: PatternGraph, u: int, v: int
) -> int:
    """Labelled embeddings whose image uses the host edge {u, v}.

    Each qualifying embedding maps exactly one template edge onto {u, v},
    so summing over template edges and both orientations counts it once.
    """
    total = 0
    for a, b in pattern.sorted_edges():
        total += count_embeddings(graph, pattern, fixed={a: u, b: v})
        total += count_embeddings(graph, pattern, fixed={a: v, b: u})
    return total


def count_kcliques(graph: SimpleGraph, k: int) -> int:
    """Exact number of k-vertex cliques."""
    if k < 1:
        return 0
    if k == 1:
        return graph.n
    if k == 2:
        return graph.edge_count
    higher = [((1 << graph.n) - 1) >> (v + 1) << (v + 1) for v in range(graph.n)]

    def rec(common: int, depth: int, last: int) -> int:
        if depth == k:
            return 1
        remaining = common & higher[last]
        if depth == k - 1:
            return remaining.bit_count()
        total = 0
        for w in iter_bits(remaining):
            total += rec(common & graph.adj[w], depth + 1, w)
        return total

    total = 0
    for u in range(graph.n):
        for v in iter_bits(graph.adj[u] & higher[u]):
            total += rec(graph.adj[u] & graph.adj[v], 2, v)
    return total

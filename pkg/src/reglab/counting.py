"""Exact canonical-copy counting and related quantities.

A canonical copy of a k-vertex template H in a multipartite graph G is a
tuple (v_1, ..., v_k), v_i in part i, realizing every template edge between
the prescribed parts.  Copies are labelled tuples: no automorphism factor
is divided out (an optional helper exposes that normalization for
experiments that want unlabelled counts).

The kernel is plain backtracking over a greedy maximum-back-degree order
of the template vertices with bitset candidate intersection; the last
level is a popcount rather than a loop.  Counts are Python ints, so n^k
overflow is a non-issue.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .errors import BudgetError, PreconditionError
from .graphs import MultipartiteGraph, PatternGraph, iter_bits
from . import smallgraphs

GK_BUDGET = 9


@dataclass(frozen=True)
class CountResult:
    """An exact count plus its natural normalizations.

    ``expected`` is prod(m_ij / n^2) * n^k computed from the instance's own
    pair edge counts; ``ratio`` is count / expected when that is positive.
    """

    count: int
    normalized: Fraction
    expected: Fraction
    ratio: float | None

    def to_json(self) -> str:
        return json.dumps(
            {
                "count": str(self.count),
                "normalized": str(self.normalized),
                "expected": str(self.expected),
                "ratio": self.ratio,
            }
        )


def greedy_order(pattern: PatternGraph, fixed: tuple[int, ...] = ()) -> list[int]:
    """Template vertices ordered by maximum back-degree into already-placed ones."""
    placed = list(fixed)
    remaining = [v for v in range(pattern.k) if v not in placed]
    neigh = [pattern.neighbors(v) for v in range(pattern.k)]
    while remaining:
        def back_degree(v: int) -> int:
            return sum(1 for u in placed if u in neigh[v])

        nxt = max(remaining, key=lambda v: (back_degree(v), len(neigh[v]), -v))
        placed.append(nxt)
        remaining.remove(nxt)
    return placed


def _count_with_rows(
    pattern: PatternGraph,
    n: int,
    rows: dict[tuple[int, int], list[int]],
    fixed: dict[int, int] | None = None,
) -> int:
    """Count completions of ``fixed`` (template vertex -> local index) to canonical copies."""
    fixed = fixed or {}
    # template edges inside the fixed prefix must already be realized
    for a, b in pattern.edges:
        if a in fixed and b in fixed:
            if not rows[(a, b)][fixed[a]] >> fixed[b] & 1:
                return 0
    order = greedy_order(pattern, tuple(fixed))
    start = len(fixed)
    constraints: list[list[tuple[int, tuple[int, int]]]] = []
    for t, v in enumerate(order):
        cons = []
        for s in range(t):
            u = order[s]
            if (min(u, v), max(u, v)) in pattern.edges:
                cons.append((s, (u, v)))
        constraints.append(cons)

    full = (1 << n) - 1
    assignment = [0] * pattern.k
    for t in range(start):
        assignment[t] = fixed[order[t]]

    def rec(t: int) -> int:
        cand = full
        for s, key in constraints[t]:
            cand &= rows[key][assignment[s]]
            if not cand:
                return 0
        if t == pattern.k - 1:
            return cand.bit_count()
        total = 0
        for v in iter_bits(cand):
            assignment[t] = v
            total += rec(t + 1)
        return total

    if start == pattern.k:
        return 1
    return rec(start)


def _result(pattern: PatternGraph, n: int, count: int, pair_counts: dict[tuple[int, int], int]) -> CountResult:
    expected = Fraction(n) ** pattern.k
    for e in pattern.sorted_edges():
        expected *= Fraction(pair_counts[e], n * n)
    normalized = Fraction(count, n**pattern.k)
    ratio = float(Fraction(count) / expected) if expected > 0 else None
    return CountResult(count=count, normalized=normalized, expected=expected, ratio=ratio)


def canonical_count(graph: MultipartiteGraph) -> CountResult:
    """Exact number of canonical copies of the template in ``graph``."""
    count = _count_with_rows(graph.pattern, graph.part_size, graph.rows)
    return _result(graph.pattern, graph.part_size, count, graph.pair_edge_counts)


def _effective_rows(
    graph: MultipartiteGraph, sub_pattern: PatternGraph, overlay: MultipartiteGraph
) -> tuple[dict[tuple[int, int], list[int]], dict[tuple[int, int], int]]:
    """Rows of ``graph`` with sub-pattern edges restricted to ``overlay`` as well."""
    if overlay.part_size != graph.part_size or overlay.k != graph.k:
        raise PreconditionError("overlay graph must share part count and part size")
    if not set(sub_pattern.edges) <= set(graph.pattern.edges):
        raise PreconditionError("sub-pattern edges must be a subset of the template's")
    rows = dict(graph.rows)
    counts = dict(graph.pair_edge_counts)
    for i, j in sub_pattern.sorted_edges():
        if (i, j) not in overlay.rows:
            raise PreconditionError(f"overlay missing pair {(i + 1, j + 1)}")
        fwd = [a & b for a, b in zip(graph.rows[(i, j)], overlay.rows[(i, j)])]
        rev = [a & b for a, b in zip(graph.rows[(j, i)], overlay.rows[(j, i)])]
        rows[(i, j)] = fwd
        rows[(j, i)] = rev
        counts[(i, j)] = sum(r.bit_count() for r in fwd)
    return rows, counts


def constrained_count(
    graph: MultipartiteGraph, sub_pattern: PatternGraph, overlay: MultipartiteGraph
) -> CountResult:
    """Canonical copies whose sub-pattern edges additionally lie in ``overlay``."""
    rows, counts = _effective_rows(graph, sub_pattern, overlay)
    count = _count_with_rows(graph.pattern, graph.part_size, rows)
    return _result(graph.pattern, graph.part_size, count, counts)


def extension_degree(
    graph: MultipartiteGraph,
    sub_pattern: PatternGraph,
    overlay: MultipartiteGraph,
    i: int,
    j: int,
    u: int,
    v: int,
) -> int:
    """Number of constrained copies using the pair edge (u in part i, v in part j)."""
    a, b = min(i, j), max(i, j)
    if (a, b) not in graph.pattern.edges:
        raise PreconditionError(f"{(i + 1, j + 1)} is not a template edge")
    if not graph.has_pair_edge(i, j, u, v):
        raise PreconditionError(f"edge ({u}, {v}) not present in pair {(i + 1, j + 1)}")
    rows, _ = _effective_rows(graph, sub_pattern, overlay)
    return _count_with_rows(graph.pattern, graph.part_size, rows, fixed={i: u, j: v})


def mu_star(graph: MultipartiteGraph, normalizer: int) -> Fraction:
    """Canonical copy count divided by normalizer^k.

    The normalizer is explicit because the natural choice (part size versus
    ambient host order) depends on the experiment; callers must document
    theirs.
    """
    if normalizer < 1:
        raise PreconditionError("normalizer must be >= 1")
    count = _count_with_rows(graph.pattern, graph.part_size, graph.rows)
    return Fraction(count, normalizer**graph.k)


def automorphism_count(pattern: PatternGraph) -> int:
    """|Aut(H)| by brute force; for unlabelled-count postprocessing only."""
    edges = set(pattern.edges)
    total = 0
    for perm in permutations(range(pattern.k)):
        if all((min(perm[a], perm[b]), max(perm[a], perm[b])) in edges for a, b in edges):
            total += 1
    return total


def gk_bruteforce(k: int, rho: Fraction | float, n: int) -> Fraction:
    """Minimum K_k density over n-vertex graphs with edge density at least rho.

    Exhausts non-isomorphic graphs with exactly ceil(rho * C(n, 2)) edges
    (adding edges never lowers the clique count, so the minimum over "at
    least" is attained there) and normalizes the minimum count by C(n, k).
    When the required edge count is above half the slots, the complements
    are enumerated instead.
    """
    if n > GK_BUDGET:
        raise BudgetError(f"clique-minimum oracle limited to {GK_BUDGET} vertices, got {n}")
    if not 2 <= k <= n:
        raise PreconditionError(f"need 2 <= k <= n, got k={k}, n={n}")
    rho_frac = rho if isinstance(rho, Fraction) else Fraction(rho)
    if rho_frac > 1:
        raise PreconditionError(f"density rho must be at most 1, got {rho}")
    total_slots = n * (n - 1) // 2
    m0 = max(0, math.ceil(rho_frac * total_slots))
    if m0 <= total_slots // 2:
        reps = smallgraphs.nonisomorphic_graphs(n, m0)
        best = min(smallgraphs.clique_count(n, adj, k) for adj in reps)
    else:
        reps = smallgraphs.nonisomorphic_graphs(n, total_slots - m0)
        best = min(
            smallgraphs.clique_count(n, smallgraphs.complement(n, adj), k) for adj in reps
        )
    return Fraction(best, math.comb(n, k))

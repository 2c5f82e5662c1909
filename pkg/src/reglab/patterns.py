"""Structural analysis of template graphs: 2-density, balance, chromatic number.

The 2-density of a template H is the maximum of (e' - 1) / (v' - 2) over
subgraphs with at least three vertices, with the single-edge convention
m2(K2) = 1/2.  It controls the edge-probability threshold p ~ n^(-1/m2)
at which sparse counting statements become non-vacuous, so the values
here must be exact rationals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import BudgetError, PreconditionError
from .graphs import PatternGraph

CHROMATIC_BUDGET = 16


@dataclass(frozen=True)
class DensityReport:
    """2-density of a template together with the witnessing vertex subset.

    ``maximizing_subset`` is ``None`` only when the single-edge convention
    value 1/2 wins (no subset with >= 3 vertices attains more).
    """

    m2: Fraction
    maximizing_subset: tuple[int, ...] | None
    balanced: bool
    strictly_balanced: bool
    chromatic_number: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "m2": str(self.m2),
                "maximizing_subset": (
                    [v + 1 for v in self.maximizing_subset]
                    if self.maximizing_subset is not None
                    else None
                ),
                "balanced": self.balanced,
                "strictly_balanced": self.strictly_balanced,
                "chromatic_number": self.chromatic_number,
            }
        )


def _subset_edges(pattern: PatternGraph, subset: tuple[int, ...]) -> int:
    s = set(subset)
    return sum(1 for a, b in pattern.edges if a in s and b in s)


def _subset_values(pattern: PatternGraph):
    """Yield ((e' - 1) / (v' - 2), subset) over vertex subsets with >= 3 vertices."""
    for size in range(3, pattern.k + 1):
        for subset in combinations(range(pattern.k), size):
            yield Fraction(_subset_edges(pattern, subset) - 1, size - 2), subset


def two_density(pattern: PatternGraph) -> DensityReport:
    """Exact 2-density report for a template with at least one edge.

    Maximization runs over vertex subsets only; adding edges on a fixed
    vertex set never decreases (e - 1) / (v - 2), so induced subgraphs
    suffice (cross-checked against the all-subgraphs definition in tests).
    Ties break toward the smallest subset, then lexicographically.
    """
    if pattern.edge_count == 0:
        raise PreconditionError("2-density is undefined for edgeless templates")
    best = Fraction(1, 2)
    best_subset: tuple[int, ...] | None = None
    for value, subset in _subset_values(pattern):
        if value > best:
            best, best_subset = value, subset
    full_value = (
        Fraction(pattern.edge_count - 1, pattern.k - 2) if pattern.k >= 3 else None
    )
    balanced = full_value == best if full_value is not None else True
    strictly = _strictly_balanced_given(pattern, best)
    return DensityReport(
        m2=best,
        maximizing_subset=best_subset,
        balanced=balanced,
        strictly_balanced=strictly,
        chromatic_number=chromatic_number(pattern),
    )


def _strictly_balanced_given(pattern: PatternGraph, m2: Fraction) -> bool:
    if pattern.k < 3:
        return True  # single-edge convention: no proper subgraph to compare
    full = Fraction(pattern.edge_count - 1, pattern.k - 2)
    if full != m2:
        return False  # some proper subset already attains the maximum
    for size in range(3, pattern.k):
        for subset in combinations(range(pattern.k), size):
            if Fraction(_subset_edges(pattern, subset) - 1, size - 2) >= full:
                return False
    return True


def is_strictly_balanced(pattern: PatternGraph) -> bool:
    """True iff every proper subgraph has strictly smaller 2-density."""
    return two_density(pattern).strictly_balanced


def chromatic_number(pattern: PatternGraph) -> int:
    """Exact chromatic number by branch and bound over colourings."""
    if pattern.k > CHROMATIC_BUDGET:
        raise BudgetError(
            f"chromatic number search budget is {CHROMATIC_BUDGET} vertices, got {pattern.k}"
        )
    if pattern.edge_count == 0:
        return 1
    neigh = [pattern.neighbors(v) for v in range(pattern.k)]
    order = sorted(range(pattern.k), key=lambda v: -len(neigh[v]))

    def colourable(num_colours: int) -> bool:
        colours: dict[int, int] = {}

        def place(idx: int, used: int) -> bool:
            if idx == len(order):
                return True
            v = order[idx]
            banned = {colours[u] for u in neigh[v] if u in colours}
            # allowing at most one brand-new colour kills permutation symmetry
            for c in range(min(used + 1, num_colours)):
                if c in banned:
                    continue
                colours[v] = c
                if place(idx + 1, max(used, c + 1)):
                    return True
                del colours[v]
            return False

        return place(0, 0)

    lower = max(2, _greedy_clique(pattern))
    for c in range(lower, pattern.k + 1):
        if colourable(c):
            return c
    return pattern.k


def _greedy_clique(pattern: PatternGraph) -> int:
    best = 1
    for start in range(pattern.k):
        clique = [start]
        for v in range(pattern.k):
            if v != start and all(v in pattern.neighbors(u) for u in clique):
                clique.append(v)
        best = max(best, len(clique))
    return best

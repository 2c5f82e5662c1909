"""Seeded random graph generation, exposure schedules, and tail bounds.

Reproducibility contract: every randomized routine takes an explicit
:class:`RngStream`.  Substreams are addressed by integer paths and derived
through a fixed 64-bit mixing function, so results depend only on
``(master_seed, path)`` and never on scheduling or worker count.  The
mixing function is an implementation constant pinned by test vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError, RejectionBudgetError
from .graphs import MultipartiteGraph, PatternGraph, SimpleGraph

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer; the substream mixing primitive."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_key(master_seed: int, path: tuple[int, ...]) -> int:
    """Fold a substream path into a 64-bit key (counter-mode mixing)."""
    key = mix64((master_seed + _GOLDEN) & _MASK64)
    for element in path:
        key = mix64((key + _GOLDEN) & _MASK64 ^ mix64((element + _GOLDEN) & _MASK64))
    return key


@dataclass(frozen=True)
class RngStream:
    """Address of an independent random substream.

    ``child(i, j, ...)`` extends the path; distinct paths give streams that
    are independent for experimental purposes.  Each leaf stream should be
    consumed by exactly one sampling routine.
    """

    master_seed: int
    path: tuple[int, ...] = ()

    def child(self, *elements: int) -> "RngStream":
        return RngStream(self.master_seed, self.path + elements)

    @property
    def key(self) -> int:
        return derive_key(self.master_seed, self.path)

    def np_rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.key))


@dataclass(frozen=True)
class ExposureSchedule:
    """Per-round probabilities p_1..p_R with geometric growth ratio L.

    The rounds satisfy prod(1 - p_s) = 1 - p, so the union of R independent
    p_s-random subgraphs of a host has the same distribution as a single
    p-random subgraph.
    """

    p: float
    rounds: int
    ratio: float
    probabilities: tuple[float, ...]

    def reconstruction_error(self) -> float:
        prod = 1.0
        for q in self.probabilities:
            prod *= 1.0 - q
        return abs((1.0 - self.p) - prod)


def exposure_schedule(p: float, rounds: int, ratio: float) -> ExposureSchedule:
    """Solve for p_1 with p_{s+1} = ratio * p_s and prod(1 - p_s) = 1 - p.

    Found by bisection on the strictly monotone map
    p_1 -> 1 - prod_s(1 - ratio^(s-1) p_1), to absolute precision 1e-14.
    """
    if not 0.0 < p < 1.0:
        raise PreconditionError(f"p must be in (0, 1), got {p}")
    if rounds < 1:
        raise PreconditionError("rounds must be >= 1")
    if ratio < 1.0:
        raise PreconditionError("growth ratio must be >= 1")
    if rounds == 1:
        return ExposureSchedule(p, 1, ratio, (p,))

    factors = [ratio**s for s in range(rounds)]

    def union_prob(p1: float) -> float:
        prod = 1.0
        for f in factors:
            prod *= 1.0 - f * p1
        return 1.0 - prod

    hi = 1.0 / factors[-1]  # largest p1 keeping every round's probability <= 1
    if union_prob(hi) < p:
        raise PreconditionError(
            f"no feasible schedule: even p_R = 1 reaches only {union_prob(hi):.6f} < p = {p}"
        )
    lo = 0.0
    while True:  # bisect to the last representable bit (well below 1e-14)
        mid = (lo + hi) / 2.0
        if mid == lo or mid == hi:
            break
        if union_prob(mid) < p:
            lo = mid
        else:
            hi = mid
    p1 = hi
    probs = [p1]
    for _ in range(rounds - 1):
        probs.append(probs[-1] * ratio)
    return ExposureSchedule(p, rounds, ratio, tuple(probs))


@dataclass(frozen=True)
class ChernoffBounds:
    """Binomial tail bounds for X ~ Bin(t, p) and deviation a > 0."""

    lower_tail: float  # bound on Pr(X < pt - a)
    upper_tail: float  # bound on Pr(X > pt + a)


def chernoff_bounds(t: int, p: float, a: float) -> ChernoffBounds:
    if t < 1:
        raise PreconditionError("t must be a positive integer")
    if a <= 0:
        raise PreconditionError("deviation a must be positive")
    if p <= 0:
        raise PreconditionError("p must be positive for these bounds")
    pt = p * t
    lower = math.exp(-(a * a) / pt)
    upper = math.exp(-(a * a) / (2 * pt) + (a * a * a) / (2 * pt * pt))
    return ChernoffBounds(lower_tail=lower, upper_tail=upper)


def double_mean_tail_bound(t: int, p: float) -> float:
    """Bound exp(-pt/16) on Pr(X > 2pt) for X ~ Bin(t, p)."""
    if t < 1 or p <= 0:
        raise PreconditionError("need t >= 1 and p > 0")
    return math.exp(-p * t / 16.0)


def gnp(n: int, p: float, rng: RngStream) -> SimpleGraph:
    """Erdos-Renyi graph: each unordered pair present independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"p must be in [0, 1], got {p}")
    if n <= 0:
        raise PreconditionError("vertex count must be positive")
    if p == 0.0:
        return SimpleGraph.empty(n)
    if p == 1.0:
        return SimpleGraph.complete(n)
    gen = rng.np_rng()
    num_pairs = n * (n - 1) // 2
    mask = gen.random(num_pairs) < p
    matrix = np.zeros((n, n), dtype=bool)
    iu = np.triu_indices(n, k=1)
    matrix[iu] = mask
    matrix |= matrix.T
    return SimpleGraph.from_bool_matrix(matrix)


def random_bipartite_rows(n: int, m: int, gen: np.random.Generator) -> tuple[list[int], list[int], set[tuple[int, int]]]:
    """Uniform m-subset of the n*n bipartite slots, as bitset rows both ways."""
    slots = gen.choice(n * n, size=m, replace=False)
    fwd = [0] * n
    rev = [0] * n
    edges = set()
    for s in map(int, slots):
        u, v = divmod(s, n)
        fwd[u] |= 1 << v
        rev[v] |= 1 << u
        edges.add((u, v))
    return fwd, rev, edges


def sample_class(
    pattern: PatternGraph,
    n: int,
    m: int,
    p: float,
    epsilon: float,
    rng: RngStream,
    mode: str = "raw",
    max_attempts: int = 10_000,
) -> MultipartiteGraph:
    """Sample a pattern-shaped multipartite graph with exactly m edges per pair.

    Every pair is a uniformly random m-edge bipartite graph.  Mode
    ``rejection`` re-draws any pair the regularity checker refutes
    (exhaustive below its budget, sampled refuter above) until the pair is
    not refuted; mode ``raw`` skips the filter.
    """
    from .regularity import EXHAUSTIVE_PAIR_BUDGET, check_regular_exhaustive, refute_regular_sampled
    from .graphs import VertexSetPair

    if m > n * n:
        raise PreconditionError(f"m = {m} exceeds the n^2 = {n * n} available slots")
    if mode not in ("raw", "rejection"):
        raise PreconditionError(f"unknown mode {mode!r}")

    rows: dict[tuple[int, int], list[int]] = {}
    counts: dict[tuple[int, int], int] = {}
    for pair_index, (i, j) in enumerate(pattern.sorted_edges()):
        pair_stream = rng.child(pair_index)
        attempt = 0
        while True:
            gen = pair_stream.child(attempt).np_rng()
            fwd, rev, edges = random_bipartite_rows(n, m, gen)
            if mode == "raw":
                break
            pair_graph = SimpleGraph(
                2 * n,
                [row << n for row in fwd] + rev,
                m,
            )
            sides = VertexSetPair(tuple(range(n)), tuple(range(n, 2 * n)))
            if n <= EXHAUSTIVE_PAIR_BUDGET:
                verdict = check_regular_exhaustive(pair_graph, sides, epsilon, p)
            else:
                verdict = refute_regular_sampled(
                    pair_graph, sides, epsilon, p, trials=32, rng=pair_stream.child(attempt, 1)
                )
            if verdict.status != "refuted":
                break
            attempt += 1
            if attempt >= max_attempts:
                rate = 0.0
                raise RejectionBudgetError(
                    f"pair {(i + 1, j + 1)} rejected {attempt} consecutive draws "
                    f"(acceptance rate < {1.0 / max_attempts:.0e})",
                    acceptance_rate=rate,
                )
        rows[(i, j)] = fwd
        rows[(j, i)] = rev
        counts[(i, j)] = m
    return MultipartiteGraph(pattern, n, rows, counts)


def relative_density(subgraph_edges: int, p: float, n: int) -> Fraction:
    """e(G') / (p * C(n, 2)), exact in the edge count."""
    if p <= 0:
        raise PreconditionError("p must be positive")
    return Fraction(subgraph_edges) / (Fraction(p) * Fraction(n * (n - 1), 2))

"""Core graph representations and density primitives.

All graphs are simple and undirected.  Adjacency is stored as one Python
integer bitset per vertex (bit ``u`` of ``adj[v]`` set iff ``uv`` is an
edge), which makes the intersection/popcount kernels used by the counting
and regularity modules fast without any native extension.

Densities are exact :class:`fractions.Fraction` values throughout;
probabilities are floats and only enter comparisons through documented
tolerance helpers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import PreconditionError

#: Slack applied when an exact rational is compared against a float
#: threshold (verdict boundaries must not depend on float rounding).
COMPARISON_TOLERANCE = Fraction(1, 10**12)


def bitmask_of(vertices: Iterable[int]) -> int:
    """Pack vertex indices into a bitset."""
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def leq_with_tolerance(value: Fraction, threshold: float) -> bool:
    """Exact-rational ``value <= threshold`` with the declared boundary slack."""
    return value <= Fraction(threshold) + COMPARISON_TOLERANCE


def geq_with_tolerance(value: Fraction, threshold: float) -> bool:
    return value >= Fraction(threshold) - COMPARISON_TOLERANCE


@dataclass(frozen=True)
class PatternGraph:
    """A small template graph on vertices ``0..k-1``.

    The on-disk JSON format labels vertices ``1..k``; the in-memory form is
    0-indexed like every other vertex set in the package.
    """

    k: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.k < 2:
            raise PreconditionError(f"pattern needs at least 2 vertices, got {self.k}")
        for a, b in self.edges:
            if not (0 <= a < b < self.k):
                raise PreconditionError(f"bad pattern edge ({a}, {b}) for k={self.k}")

    @staticmethod
    def from_edges(k: int, edges: Iterable[Sequence[int]]) -> "PatternGraph":
        canon = set()
        for a, b in edges:
            if a == b:
                raise PreconditionError(f"loop at pattern vertex {a}")
            canon.add((min(a, b), max(a, b)))
        return PatternGraph(k, frozenset(canon))

    @staticmethod
    def complete(k: int) -> "PatternGraph":
        return PatternGraph.from_edges(k, [(i, j) for i in range(k) for j in range(i + 1, k)])

    @staticmethod
    def cycle(k: int) -> "PatternGraph":
        return PatternGraph.from_edges(k, [(i, (i + 1) % k) for i in range(k)])

    @staticmethod
    def path(k: int) -> "PatternGraph":
        return PatternGraph.from_edges(k, [(i, i + 1) for i in range(k - 1)])

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def neighbors(self, v: int) -> set[int]:
        out = set()
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def max_degree(self) -> int:
        return max(self.degree(v) for v in range(self.k))

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "edges": [[a + 1, b + 1] for a, b in self.sorted_edges()]})

    @staticmethod
    def from_json(text: str) -> "PatternGraph":
        obj = json.loads(text)
        edges = [(a - 1, b - 1) for a, b in obj["edges"]]
        return PatternGraph.from_edges(int(obj["k"]), edges)


class SimpleGraph:
    """Undirected simple graph with bitset adjacency rows.

    Instances are immutable by convention: all operations build new graphs.
    """

    __slots__ = ("n", "adj", "edge_count")

    def __init__(self, n: int, adj: list[int], edge_count: int):
        self.n = n
        self.adj = adj
        self.edge_count = edge_count

    @staticmethod
    def from_edges(n: int, edges: Iterable[Sequence[int]]) -> "SimpleGraph":
        if n <= 0:
            raise PreconditionError("vertex count must be positive")
        adj = [0] * n
        count = 0
        for u, v in edges:
            if u == v:
                raise PreconditionError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise PreconditionError(f"edge ({u}, {v}) out of range for n={n}")
            if not adj[u] >> v & 1:
                adj[u] |= 1 << v
                adj[v] |= 1 << u
                count += 1
        return SimpleGraph(n, adj, count)

    @staticmethod
    def empty(n: int) -> "SimpleGraph":
        return SimpleGraph.from_edges(n, [])

    @staticmethod
    def complete(n: int) -> "SimpleGraph":
        full = (1 << n) - 1
        adj = [full ^ (1 << v) for v in range(n)]
        return SimpleGraph(n, adj, n * (n - 1) // 2)

    @staticmethod
    def from_bool_matrix(matrix: np.ndarray) -> "SimpleGraph":
        """Build from a symmetric boolean adjacency matrix (diagonal ignored)."""
        n = matrix.shape[0]
        m = np.asarray(matrix, dtype=bool).copy()
        np.fill_diagonal(m, False)
        if not (m == m.T).all():
            raise PreconditionError("adjacency matrix is not symmetric")
        packed = np.packbits(m, axis=1, bitorder="little")
        adj = [int.from_bytes(packed[v].tobytes(), "little") for v in range(n)]
        count = int(m.sum()) // 2
        return SimpleGraph(n, adj, count)

    def to_bool_matrix(self) -> np.ndarray:
        nbytes = (self.n + 7) // 8
        rows = np.frombuffer(
            b"".join(row.to_bytes(nbytes, "little") for row in self.adj), dtype=np.uint8
        ).reshape(self.n, nbytes)
        return np.unpackbits(rows, axis=1, bitorder="little")[:, : self.n].astype(bool)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            row = self.adj[u] >> (u + 1) << (u + 1)
            for v in iter_bits(row):
                yield (u, v)

    def edges_within(self, mask: int) -> int:
        """Number of edges with both endpoints in the bitset ``mask``."""
        total = 0
        for v in iter_bits(mask):
            total += (self.adj[v] & mask).bit_count()
        return total // 2

    def edges_between(self, mask_a: int, mask_b: int) -> int:
        """Number of edges between two disjoint bitsets."""
        total = 0
        for v in iter_bits(mask_a):
            total += (self.adj[v] & mask_b).bit_count()
        return total

    def drop_edges(self, pairs: Iterable[tuple[int, int]]) -> "SimpleGraph":
        adj = list(self.adj)
        removed = 0
        for u, v in pairs:
            if adj[u] >> v & 1:
                adj[u] &= ~(1 << v)
                adj[v] &= ~(1 << u)
                removed += 1
        return SimpleGraph(self.n, adj, self.edge_count - removed)

    def keep_edges_between(self, groups: Sequence[int]) -> "SimpleGraph":
        """Keep only edges whose endpoints lie in different ``groups`` labels.

        ``groups[v]`` is an arbitrary integer label; ``-1`` drops the vertex's
        edges entirely.
        """
        label_masks: dict[int, int] = {}
        for v, g in enumerate(groups):
            label_masks[g] = label_masks.get(g, 0) | (1 << v)
        adj = [0] * self.n
        count = 0
        for v in range(self.n):
            g = groups[v]
            if g == -1:
                continue
            keep = self.adj[v] & ~label_masks.get(g, 0)
            drop_mask = label_masks.get(-1, 0)
            keep &= ~drop_mask
            adj[v] = keep
            count += keep.bit_count()
        return SimpleGraph(self.n, adj, count // 2)

    def to_edge_list(self) -> str:
        lines = [f"vertices {self.n}"]
        lines.extend(f"edge {u} {v}" for u, v in self.edges())
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_edge_list(text: str) -> "SimpleGraph":
        n = None
        edges = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "vertices":
                n = int(parts[1])
            elif parts[0] == "edge":
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise PreconditionError(f"unrecognized edge-list line: {raw!r}")
        if n is None:
            raise PreconditionError("edge-list text missing 'vertices <N>' header")
        return SimpleGraph.from_edges(n, edges)

    def __eq__(self, other) -> bool:
        return isinstance(other, SimpleGraph) and self.n == other.n and self.adj == other.adj

    def __repr__(self) -> str:
        return f"SimpleGraph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class VertexSetPair:
    """Two disjoint vertex subsets of a host graph."""

    U: tuple[int, ...]
    V: tuple[int, ...]

    def __post_init__(self):
        if set(self.U) & set(self.V):
            raise PreconditionError("vertex sets must be disjoint")
        object.__setattr__(self, "U", tuple(sorted(self.U)))
        object.__setattr__(self, "V", tuple(sorted(self.V)))

    @property
    def mask_u(self) -> int:
        return bitmask_of(self.U)

    @property
    def mask_v(self) -> int:
        return bitmask_of(self.V)


def pair_density(graph: SimpleGraph, pair: VertexSetPair) -> Fraction:
    """Edge density e(U, V) / (|U| |V|) as an exact rational."""
    if not pair.U or not pair.V:
        raise PreconditionError("pair density needs nonempty sets")
    e = graph.edges_between(pair.mask_u, pair.mask_v)
    return Fraction(e, len(pair.U) * len(pair.V))


def min_degree(graph: SimpleGraph) -> int:
    if graph.n == 0:
        return 0
    return min(graph.degree(v) for v in range(graph.n))


class MultipartiteGraph:
    """k parts of equal size ``n`` with one bipartite graph per pattern edge.

    Edges exist only between parts ``i`` and ``j`` with ``ij`` an edge of the
    pattern.  Adjacency per pair is stored as local bitset rows in both
    directions.
    """

    __slots__ = ("pattern", "part_size", "rows", "pair_edge_counts")

    def __init__(
        self,
        pattern: PatternGraph,
        part_size: int,
        rows: dict[tuple[int, int], list[int]],
        pair_edge_counts: dict[tuple[int, int], int],
    ):
        # rows[(i, j)][u] = bitset over part-j local indices adjacent to local u of part i,
        # present for both orientations of every pattern edge.
        self.pattern = pattern
        self.part_size = part_size
        self.rows = rows
        self.pair_edge_counts = pair_edge_counts

    @staticmethod
    def from_pair_edges(
        pattern: PatternGraph,
        part_size: int,
        pair_edges: dict[tuple[int, int], Iterable[tuple[int, int]]],
    ) -> "MultipartiteGraph":
        """Build from local-index edge lists keyed by pattern edge (i < j)."""
        n = part_size
        if n <= 0:
            raise PreconditionError("part size must be positive")
        rows: dict[tuple[int, int], list[int]] = {}
        counts: dict[tuple[int, int], int] = {}
        for i, j in pattern.sorted_edges():
            fwd = [0] * n
            rev = [0] * n
            count = 0
            for u, v in pair_edges.get((i, j), ()):  # u in part i, v in part j
                if not (0 <= u < n and 0 <= v < n):
                    raise PreconditionError(f"local edge ({u}, {v}) out of range for n={n}")
                if not fwd[u] >> v & 1:
                    fwd[u] |= 1 << v
                    rev[v] |= 1 << u
                    count += 1
            rows[(i, j)] = fwd
            rows[(j, i)] = rev
            counts[(i, j)] = count
        unknown = set(pair_edges) - set(pattern.sorted_edges())
        if unknown:
            raise PreconditionError(f"edges supplied for non-pattern pairs: {sorted(unknown)}")
        return MultipartiteGraph(pattern, n, rows, counts)

    @staticmethod
    def complete_blowup(pattern: PatternGraph, part_size: int) -> "MultipartiteGraph":
        full = (1 << part_size) - 1
        rows = {}
        counts = {}
        for i, j in pattern.sorted_edges():
            rows[(i, j)] = [full] * part_size
            rows[(j, i)] = [full] * part_size
            counts[(i, j)] = part_size * part_size
        return MultipartiteGraph(pattern, part_size, rows, counts)

    @property
    def k(self) -> int:
        return self.pattern.k

    def pair_edges(self, i: int, j: int) -> Iterator[tuple[int, int]]:
        """Local (u in part i, v in part j) edges of pair {i, j}."""
        for u in range(self.part_size):
            for v in iter_bits(self.rows[(i, j)][u]):
                yield (u, v)

    def edge_count(self, i: int, j: int) -> int:
        return self.pair_edge_counts[(min(i, j), max(i, j))]

    def total_edges(self) -> int:
        return sum(self.pair_edge_counts.values())

    def has_pair_edge(self, i: int, j: int, u: int, v: int) -> bool:
        return bool(self.rows[(i, j)][u] >> v & 1)

    def flatten(self) -> SimpleGraph:
        """Join the parts into one SimpleGraph; part i occupies [i*n, (i+1)*n)."""
        n = self.part_size
        edges = []
        for i, j in self.pattern.sorted_edges():
            base_i, base_j = i * n, j * n
            for u, v in self.pair_edges(i, j):
                edges.append((base_i + u, base_j + v))
        return SimpleGraph.from_edges(self.k * n, edges)

    def pair_subgraph(self, i: int, j: int) -> tuple[SimpleGraph, VertexSetPair]:
        """The bipartite pair {i, j} as a standalone graph plus its sides."""
        n = self.part_size
        a, b = min(i, j), max(i, j)
        edges = [(u, n + v) for u, v in self.pair_edges(a, b)]
        g = SimpleGraph.from_edges(2 * n, edges)
        return g, VertexSetPair(tuple(range(n)), tuple(range(n, 2 * n)))

    def to_json(self) -> str:
        pairs = {}
        for i, j in self.pattern.sorted_edges():
            pairs[f"{i + 1}-{j + 1}"] = [[u, v] for u, v in self.pair_edges(i, j)]
        return json.dumps(
            {
                "pattern": {"k": self.k, "edges": [[a + 1, b + 1] for a, b in self.pattern.sorted_edges()]},
                "part_size": self.part_size,
                "pairs": pairs,
            }
        )

    @staticmethod
    def from_json(text: str) -> "MultipartiteGraph":
        obj = json.loads(text)
        pattern = PatternGraph.from_edges(obj["pattern"]["k"], [(a - 1, b - 1) for a, b in obj["pattern"]["edges"]])
        pair_edges = {}
        for key, arr in obj["pairs"].items():
            i_s, j_s = key.split("-")
            pair_edges[(int(i_s) - 1, int(j_s) - 1)] = [tuple(e) for e in arr]
        return MultipartiteGraph.from_pair_edges(pattern, int(obj["part_size"]), pair_edges)


def induced_multipartite(
    graph: SimpleGraph, classes: Sequence[Sequence[int]], pattern: PatternGraph
) -> MultipartiteGraph:
    """Extract the pattern-shaped multipartite subgraph of ``graph``.

    ``classes`` are pairwise disjoint, equally sized vertex sets, one per
    pattern vertex.  Edges of ``graph`` between classes ``i`` and ``j`` are
    kept iff ``ij`` is a pattern edge; everything else is dropped.
    """
    if len(classes) != pattern.k:
        raise PreconditionError(f"expected {pattern.k} classes, got {len(classes)}")
    sizes = {len(c) for c in classes}
    if len(sizes) != 1:
        raise PreconditionError(f"classes must have equal sizes, got {sorted(sizes)}")
    seen: set[int] = set()
    for c in classes:
        cs = set(c)
        if len(cs) != len(c) or cs & seen:
            raise PreconditionError("classes must be pairwise disjoint without repeats")
        seen |= cs
    n = sizes.pop()
    class_lists = [sorted(c) for c in classes]

    matrix = graph.to_bool_matrix()
    rows: dict[tuple[int, int], list[int]] = {}
    counts: dict[tuple[int, int], int] = {}
    for i, j in pattern.sorted_edges():
        block = matrix[np.ix_(class_lists[i], class_lists[j])]
        packed = np.packbits(block, axis=1, bitorder="little")
        rows[(i, j)] = [int.from_bytes(packed[u].tobytes(), "little") for u in range(n)]
        packed_t = np.packbits(block.T, axis=1, bitorder="little")
        rows[(j, i)] = [int.from_bytes(packed_t[v].tobytes(), "little") for v in range(n)]
        counts[(i, j)] = int(block.sum())
    return MultipartiteGraph(pattern, n, rows, counts)

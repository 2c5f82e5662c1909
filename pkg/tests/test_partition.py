"""Partition refinement, cleaning, reduced graphs, trimming."""

from fractions import Fraction

import numpy as np
import pytest

from reglab.errors import PreconditionError
from reglab.graphs import SimpleGraph, bitmask_of
from reglab.partition import (
    ClusterGraph,
    clean_partition,
    equipartition_classes,
    evaluate_partition,
    partition_energy,
    reduced_weighted_graph,
    sparse_regular_partition,
    trim_min_degree,
)
from reglab.randgraph import RngStream, gnp
from reglab.regularity import REFUTED


def planted_two_block(n: int, p_in: float, p_out: float, stream: RngStream):
    gen = stream.np_rng()
    labels = gen.permutation(n) < n // 2
    matrix = np.zeros((n, n), dtype=bool)
    upper = np.triu_indices(n, k=1)
    draws = gen.random(len(upper[0]))
    same = labels[upper[0]] == labels[upper[1]]
    matrix[upper] = np.where(same, draws < p_in, draws < p_out)
    matrix |= matrix.T
    return SimpleGraph.from_bool_matrix(matrix), labels


def test_equipartition_sizes():
    classes = equipartition_classes(list(range(11)), 3)
    sizes = sorted(len(c) for c in classes)
    assert sizes == [3, 4, 4]
    assert sorted(v for c in classes for v in c) == list(range(11))


def test_empty_graph_partitions_immediately():
    g = SimpleGraph.empty(20)
    part = sparse_regular_partition(g, 0.25, 0.5, t0=4, max_t=16, rng=RngStream(1))
    assert part.converged
    assert part.t == 4
    assert part.check_equipartition()
    assert len(part.refuted_pairs()) == 0


def test_random_graph_converges_unrefuted():
    g = gnp(300, 0.5, RngStream(2).child(0))
    part = sparse_regular_partition(g, 0.25, 0.5, t0=4, max_t=32, rng=RngStream(2).child(1))
    assert part.converged
    assert len(part.refuted_pairs()) <= 0.25 * part.t**2


def test_degenerate_inputs_rejected():
    with pytest.raises(PreconditionError):
        sparse_regular_partition(SimpleGraph.empty(3), 0.25, 0.5, t0=4, max_t=8, rng=RngStream(3))
    with pytest.raises(PreconditionError):
        sparse_regular_partition(SimpleGraph.empty(10), 0.25, 0.0, t0=2, max_t=8, rng=RngStream(3))


def test_planted_blocks_recovered():
    hits = 0
    for seed in range(5):
        g, labels = planted_two_block(300, 0.8, 0.2, RngStream(40).child(seed))
        part = sparse_regular_partition(
            g, 0.1, 1.0, t0=4, max_t=16, rng=RngStream(41).child(seed), refuter_trials=48
        )
        purity = min(
            max(sum(labels[v] for v in cls), sum(1 - labels[v] for v in cls)) / len(cls)
            for cls in part.classes
        )
        hits += purity >= 0.9
    assert hits >= 4


def test_energy_increases_on_refinement_round():
    g, _ = planted_two_block(200, 0.8, 0.2, RngStream(50))
    from reglab.partition import _equalize_affinity, _split_by_best_probe

    perm = [int(v) for v in RngStream(51).np_rng().permutation(200)]
    classes = equipartition_classes(perm, 4)
    before = evaluate_partition(g, classes, 0.1, 1.0, RngStream(52), refuter_trials=48)
    atoms = _split_by_best_probe(g, before.classes, before.pair_info)
    assert len(atoms) > before.t
    refined = _equalize_affinity(g, atoms, 200)
    after = evaluate_partition(g, refined, 0.1, 1.0, RngStream(53), refuter_trials=48)
    assert after.energy > before.energy


def test_energy_bounded_under_uniformity():
    # energy <= D^2 when all pair densities are at most D p
    g = gnp(200, 0.3, RngStream(54))
    part = sparse_regular_partition(g, 0.3, 0.3, t0=4, max_t=8, rng=RngStream(55))
    assert part.energy <= 4  # D = 2 comfortably covers a random graph


def test_partition_json_fields():
    g = gnp(60, 0.4, RngStream(56))
    part = sparse_regular_partition(g, 0.3, 0.4, t0=3, max_t=8, rng=RngStream(57))
    text = part.to_json()
    assert '"membership"' in text and '"energy"' in text and '"pairs"' in text


def test_clean_keeps_dense_unrefuted_pairs():
    g = gnp(240, 0.5, RngStream(60).child(0))
    part = sparse_regular_partition(g, 0.3, 0.5, t0=4, max_t=8, rng=RngStream(60).child(1))
    result = clean_partition(g, part, 0.3, 0.5, 0.05, 2.0)
    # only within-class edges go
    assert result.deleted_refuted == 0
    assert result.deleted_sparse == 0
    within = sum(g.edges_within(bitmask_of(c)) for c in part.classes)
    assert result.deleted_total == within == g.edge_count - result.graph.edge_count
    assert len(result.cluster.edges) == part.t * (part.t - 1) // 2
    assert result.bound_inputs_hold
    g2, cluster = result  # tuple unpacking contract
    assert g2.edge_count == result.graph.edge_count


def test_clean_drops_everything_when_threshold_high():
    g = gnp(80, 0.2, RngStream(61).child(0))
    part = sparse_regular_partition(g, 0.3, 0.2, t0=4, max_t=8, rng=RngStream(61).child(1))
    result = clean_partition(g, part, 0.3, 0.2, 10.0, 2.0)  # d p n^2 above every count
    assert result.graph.edge_count == 0
    assert len(result.cluster.edges) == 0


def test_clean_deletion_bound_measured():
    for seed in range(5):
        g = gnp(300, 0.2, RngStream(62).child(seed, 0))
        part = sparse_regular_partition(g, 0.25, 0.2, t0=4, max_t=16, rng=RngStream(62).child(seed, 1))
        result = clean_partition(g, part, 0.25, 0.2, 0.05, 2.0)
        if result.bound_inputs_hold:
            assert Fraction(result.deleted_total) <= result.deletion_bound


def test_reduced_weighted_graph_formula():
    g = SimpleGraph.from_edges(8, [(0, 4), (1, 5), (2, 6)])
    part = evaluate_partition(
        g, [[0, 1, 2, 3], [4, 5, 6, 7]], 0.5, 0.5, RngStream(63), refuter_trials=4
    )
    reduced = reduced_weighted_graph(g, part, 0.5)
    assert reduced.weight(0, 1) == min(Fraction(3) / (Fraction(1, 2) * 16), Fraction(1))
    assert reduced.weight(0, 1) == Fraction(3, 8)
    saturated = SimpleGraph.from_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
    part2 = evaluate_partition(saturated, [[0, 1], [2, 3]], 0.5, 1.0, RngStream(64), refuter_trials=4)
    reduced2 = reduced_weighted_graph(saturated, part2, 1.0)
    assert reduced2.weight(0, 1) == 1
    with pytest.raises(PreconditionError):
        reduced_weighted_graph(g, part, 0.0)


def full_cluster(t: int) -> ClusterGraph:
    edges = frozenset((i, j) for i in range(t) for j in range(i + 1, t))
    return ClusterGraph(t, edges, {e: Fraction(1) for e in edges})


def test_trim_no_deletions_on_complete():
    result = trim_min_degree(full_cluster(12), 3, 0.5)
    assert result.success
    assert result.removed == ()
    assert result.subgraph.t == 12


def test_trim_removes_isolated_vertex_first():
    base = full_cluster(12)
    edges = frozenset((i + 1, j + 1) for i, j in base.edges)
    cluster = ClusterGraph(13, edges, {e: Fraction(1) for e in edges})  # vertex 0 isolated
    result = trim_min_degree(cluster, 3, 0.5)
    assert result.success
    assert result.removed[0] == 0
    assert result.subgraph.t == 12


def test_trim_star_fails():
    edges = frozenset((0, i) for i in range(1, 10))
    star = ClusterGraph(10, edges, {e: Fraction(1) for e in edges})
    result = trim_min_degree(star, 3, 0.3)
    assert not result.success
    assert result.subgraph is None


def test_trim_pads_to_divisibility():
    result = trim_min_degree(full_cluster(13), 3, 0.5)
    assert result.success
    assert result.subgraph.t == 12
    assert len(result.removed) == 1


def test_cluster_graph_validation():
    with pytest.raises(PreconditionError):
        ClusterGraph(3, frozenset({(0, 1)}), {})
    with pytest.raises(PreconditionError):
        ClusterGraph(3, frozenset({(0, 1)}), {(0, 1): Fraction(3, 2)})

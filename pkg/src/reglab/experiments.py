"""End-to-end statistical verification pipelines.

Each experiment samples seeded random hosts, runs the partition/clean/
cluster machinery, and checks the relevant counting, removal, packing, or
stability inequality with exact integer accounting.  Reports are plain
data: every per-trial record is reproducible from the master seed and
trial index, deletion budgets are compared in rational arithmetic, and
"regular" always means "not refuted by the configured sampled checker",
which the caveats repeat explicitly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .counting import automorphism_count, canonical_count, gk_bruteforce
from .embedding import (
    count_embeddings,
    count_embeddings_through_edge,
    count_kcliques,
    find_embedding,
    iter_embeddings,
)
from .errors import BudgetError, PreconditionError, RejectionBudgetError, SoundnessError
from .graphs import (
    MultipartiteGraph,
    PatternGraph,
    SimpleGraph,
    VertexSetPair,
    bitmask_of,
    induced_multipartite,
)
from .parallel import map_ordered
from .partition import (
    ClusterGraph,
    Partition,
    clean_partition,
    reduced_weighted_graph,
    sparse_regular_partition,
    trim_min_degree,
)
from .patterns import chromatic_number, two_density
from .randgraph import RngStream, gnp, random_bipartite_rows, sample_class
from .regularity import (
    EXHAUSTIVE_PAIR_BUDGET,
    REFUTED,
    check_regular_exhaustive,
    refute_regular_sampled,
)

REGULARITY_CAVEAT = (
    "regular means: not refuted by the sampled checker at the configured trial budget"
)

CLIQUE_FACTOR_BUDGET = 30


@dataclass
class ExperimentReport:
    """Parameter block, per-trial records, and the aggregate verdict."""

    name: str
    params: dict
    seed: int
    trials: list[dict]
    aggregate: dict
    caveats: list[str]
    schema: int = 1

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": self.schema,
                "name": self.name,
                "params": self.params,
                "seed": self.seed,
                "trials": self.trials,
                "aggregate": self.aggregate,
                "caveats": self.caveats,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "ExperimentReport":
        obj = json.loads(text)
        return ExperimentReport(
            name=obj["name"],
            params=obj["params"],
            seed=obj["seed"],
            trials=obj["trials"],
            aggregate=obj["aggregate"],
            caveats=obj["caveats"],
            schema=obj["schema"],
        )

    def to_csv(self) -> str:
        keys: list[str] = []
        for trial in self.trials:
            for key in trial:
                if key not in keys:
                    keys.append(key)
        keys.sort()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["trial"] + keys)
        for index, trial in enumerate(self.trials):
            writer.writerow([index] + [trial.get(k, "") for k in keys])
        return buf.getvalue()


def _pair_verdicts(
    graph: MultipartiteGraph, epsilon: float, p: float, trials: int, rng: RngStream
) -> dict[str, str]:
    """Regularity status per pattern pair (exhaustive below budget, sampled above)."""
    out = {}
    for index, (i, j) in enumerate(graph.pattern.sorted_edges()):
        pair_graph, sides = graph.pair_subgraph(i, j)
        if graph.part_size <= EXHAUSTIVE_PAIR_BUDGET:
            verdict = check_regular_exhaustive(pair_graph, sides, epsilon, p)
        else:
            verdict = refute_regular_sampled(
                pair_graph, sides, epsilon, p, trials, rng.child(index), guided=False
            )
        out[f"{i + 1}-{j + 1}"] = verdict.status
    return out


def run_counting(
    pattern: PatternGraph,
    host_n: int,
    p: float,
    eta: float,
    d: float,
    delta: float,
    trials: int,
    rng: RngStream,
    epsilon: float = 0.25,
    refuter_trials: int = 32,
    pass_fraction: float = 0.9,
    threads: int = 1,
) -> ExperimentReport:
    """Canonical-count concentration in random multipartite slices of a random host.

    Per trial: sample the host, pick disjoint classes of size ceil(eta * N),
    extract the pattern-shaped multipartite subgraph, check pair regularity,
    and compare the exact canonical count against prod(m_ij / n^2) * n^k.
    Trials where some pair has fewer than d * p * n^2 edges are skipped
    (below the density floor the statement does not apply).
    """
    if pattern.edge_count == 0:
        raise PreconditionError("counting experiment needs a template with edges")
    k = pattern.k
    n = math.ceil(eta * host_n)
    if k * n > host_n:
        raise PreconditionError(f"need k * ceil(eta N) = {k * n} <= N = {host_n}")
    caveats = [REGULARITY_CAVEAT]
    m2 = two_density(pattern).m2
    threshold = host_n ** (-1.0 / float(m2))
    if p < threshold:
        caveats.append(
            f"p = {p} is below N^(-1/m2) = {threshold:.6f}; the counting statement "
            "is only expected to hold above that scale"
        )
    floor = Fraction(d) * Fraction(p) * n * n

    def one_trial(index: int) -> dict:
        stream = rng.child(index)
        host = gnp(host_n, p, stream.child(0))
        perm = [int(v) for v in stream.child(1).np_rng().permutation(host_n)]
        classes = [perm[i * n : (i + 1) * n] for i in range(k)]
        slice_graph = induced_multipartite(host, classes, pattern)
        edges = {f"{i + 1}-{j + 1}": slice_graph.edge_count(i, j) for i, j in pattern.sorted_edges()}
        thin = [key for key, m in edges.items() if Fraction(m) < floor]
        record: dict = {"edges": json.dumps(edges)}
        if thin:
            record.update(skipped=True, skip_reason=f"pairs below d p n^2: {thin}", in_band=None)
            return record
        statuses = _pair_verdicts(slice_graph, epsilon, p, refuter_trials, stream.child(2))
        result = canonical_count(slice_graph)
        in_band = result.ratio is not None and abs(result.ratio - 1.0) <= delta
        record.update(
            skipped=False,
            count=str(result.count),
            expected=str(result.expected),
            ratio=result.ratio,
            refuted_pairs=sum(1 for s in statuses.values() if s == REFUTED),
            in_band=bool(in_band),
        )
        return record

    records = map_ordered(one_trial, list(range(trials)), threads)
    effective = [r for r in records if not r["skipped"]]
    band = sum(1 for r in effective if r["in_band"])
    fraction = band / len(effective) if effective else 0.0
    aggregate = {
        "effective_trials": len(effective),
        "in_band": band,
        "band_fraction": fraction,
        "passed": bool(effective) and fraction >= pass_fraction,
        "p_threshold": threshold,
    }
    return ExperimentReport(
        name="counting",
        params={
            "pattern": json.loads(pattern.to_json()),
            "N": host_n,
            "p": p,
            "eta": eta,
            "d": d,
            "delta": delta,
            "epsilon": epsilon,
            "trials": trials,
            "refuter_trials": refuter_trials,
            "pass_fraction": pass_fraction,
        },
        seed=rng.master_seed,
        trials=records,
        aggregate=aggregate,
        caveats=caveats,
    )


def _bipartite_plant(
    host: SimpleGraph,
    pattern: PatternGraph,
    copy_budget_labelled: int,
    stream: RngStream,
) -> tuple[SimpleGraph, int, int]:
    """Few-copies subgraph: a random cut of the host plus an interior trickle.

    Keeps only host edges across a random balanced bipartition (copy-free
    for any template with an odd cycle; sparse regardless), then re-adds
    random interior host edges while the labelled-embedding count stays
    within budget.  Returns (subgraph, planted edges, labelled embeddings).
    """
    n = host.n
    perm = [int(v) for v in stream.child(0).np_rng().permutation(n)]
    side = [0] * n
    for v in perm[: n // 2]:
        side[v] = 1
    cut = host.keep_edges_between(side)
    interior = [(u, v) for u, v in host.edges() if side[u] == side[v]]
    order = stream.child(1).np_rng().permutation(len(interior))
    adj = list(cut.adj)
    working = SimpleGraph(n, adj, cut.edge_count)
    planted = 0
    labelled = count_embeddings(working, pattern)  # 0 for odd-cycle-containing templates
    for idx in order:
        u, v = interior[int(idx)]
        adj[u] |= 1 << v
        adj[v] |= 1 << u
        working = SimpleGraph(n, adj, working.edge_count + 1)
        gained = count_embeddings_through_edge(working, pattern, u, v)
        if labelled + gained > copy_budget_labelled:
            adj[u] &= ~(1 << v)
            adj[v] &= ~(1 << u)
            working = SimpleGraph(n, adj, working.edge_count - 1)
            break
        labelled += gained
        planted += 1
    return working, planted, labelled


def run_removal(
    pattern: PatternGraph,
    host_n: int,
    p: float,
    delta: float,
    eps_copies: float,
    rng: RngStream,
    trials: int = 20,
    t0: int = 8,
    max_t: int = 32,
    epsilon: float = 0.3,
    d: float = 0.25,
    uniformity: float = 2.0,
    refuter_trials: int = 24,
    pass_fraction: float = 0.9,
    threads: int = 1,
) -> ExperimentReport:
    """Few-copies subgraphs become template-free after bounded deletions.

    Per trial: build a subgraph of the random host with at most
    eps_copies * p^e(H) * N^v(H) copies (random cut plus interior trickle),
    run partition -> clean, then delete one edge from each surviving copy
    (the honest route when copies are scarce; at desk scale the cleaned
    graph may retain stragglers that no counting contradiction removes).
    The output must be exactly template-free, verified by independent
    search, with total deletions at most delta * p * N^2.
    """
    aut = automorphism_count(pattern)
    copy_budget = Fraction(eps_copies) * Fraction(p) ** pattern.edge_count * host_n**pattern.k
    labelled_budget = int(copy_budget * aut)
    deletion_budget = Fraction(delta) * Fraction(p) * host_n * host_n

    def one_trial(index: int) -> dict:
        stream = rng.child(index)
        host = gnp(host_n, p, stream.child(0))
        sub, planted, labelled = _bipartite_plant(host, pattern, labelled_budget, stream.child(1))
        record: dict = {
            "host_edges": host.edge_count,
            "subgraph_edges": sub.edge_count,
            "planted_interior_edges": planted,
            "copies_before": labelled // aut,
        }
        part = sparse_regular_partition(
            sub, epsilon, p, t0, max_t, stream.child(2), refuter_trials=refuter_trials
        )
        record["partition_t"] = part.t
        record["partition_converged"] = part.converged
        cleaned = clean_partition(sub, part, epsilon, p, d, uniformity)
        record["deleted_clean"] = cleaned.deleted_total
        record["cluster_supported_copies"] = _cluster_supported_count(
            cleaned.graph, part, cleaned.cluster, pattern
        )
        # one edge deleted per surviving copy: enumerate all embeddings once,
        # then break each still-alive copy at its first template edge
        adj = list(cleaned.graph.adj)
        per_copy = 0
        first_a, first_b = pattern.sorted_edges()[0]
        for emb in iter_embeddings(cleaned.graph, pattern):
            if all(adj[emb[x]] >> emb[y] & 1 for x, y in pattern.sorted_edges()):
                u, v = emb[first_a], emb[first_b]
                adj[u] &= ~(1 << v)
                adj[v] &= ~(1 << u)
                per_copy += 1
        working = SimpleGraph(
            cleaned.graph.n, adj, cleaned.graph.edge_count - per_copy
        )
        record["deleted_per_copy"] = per_copy
        total_deleted = sub.edge_count - working.edge_count
        assert total_deleted == cleaned.deleted_total + per_copy
        template_free = find_embedding(working, pattern) is None
        record["deleted_total"] = total_deleted
        record["deletion_budget"] = str(deletion_budget)
        record["template_free"] = bool(template_free)
        record["inconclusive"] = not part.converged
        record["success"] = bool(template_free and Fraction(total_deleted) <= deletion_budget)
        return record

    records = map_ordered(one_trial, list(range(trials)), threads)
    successes = sum(1 for r in records if r["success"])
    fraction = successes / len(records) if records else 0.0
    return ExperimentReport(
        name="removal",
        params={
            "pattern": json.loads(pattern.to_json()),
            "N": host_n,
            "p": p,
            "delta": delta,
            "eps_copies": eps_copies,
            "trials": trials,
            "t0": t0,
            "max_t": max_t,
            "epsilon": epsilon,
            "d": d,
            "uniformity": uniformity,
            "refuter_trials": refuter_trials,
            "pass_fraction": pass_fraction,
        },
        seed=rng.master_seed,
        trials=records,
        aggregate={
            "successes": successes,
            "success_fraction": fraction,
            "passed": bool(records) and fraction >= pass_fraction,
        },
        caveats=[
            REGULARITY_CAVEAT,
            "surviving copies after cleaning are removed one edge per copy; "
            "the deletion budget check covers all stages",
        ],
    )


def _cluster_supported_count(
    graph: SimpleGraph, part: Partition, cluster: ClusterGraph, pattern: PatternGraph
) -> int:
    """Canonical copies summed over injective class assignments supported by the cluster.

    Counts copies whose template vertices land in pairwise distinct classes
    with every template edge on a cluster edge; copies collapsing two
    non-adjacent template vertices into one class are not visited (for
    complete templates none exist, since within-class edges are gone).
    """
    classes = part.classes
    t = len(classes)
    masks = [bitmask_of(c) for c in classes]
    total = 0

    def assignments(prefix: list[int]):
        if len(prefix) == pattern.k:
            yield list(prefix)
            return
        v = len(prefix)
        for c in range(t):
            if c in prefix:
                continue
            ok = True
            for u in range(v):
                if (min(u, v), max(u, v)) in pattern.edges and not cluster.has_edge(prefix[u], c):
                    ok = False
                    break
            if ok:
                prefix.append(c)
                yield from assignments(prefix)
                prefix.pop()

    for assign in assignments([]):
        total += count_embeddings(
            graph, pattern, candidate_masks=[masks[c] for c in assign]
        )
    return total


def clique_factor(cluster: ClusterGraph, k: int) -> list[tuple[int, ...]] | None:
    """Partition of all cluster vertices into disjoint k-cliques, or None.

    Exact backtracking with memoized dead states; ``None`` is an
    exhaustively verified absence.  k must divide the vertex count.
    """
    t = cluster.t
    if k < 2:
        raise PreconditionError("k must be >= 2")
    if t > CLIQUE_FACTOR_BUDGET:
        raise BudgetError(f"clique factor search limited to {CLIQUE_FACTOR_BUDGET} vertices")
    if t % k != 0:
        raise PreconditionError(f"k = {k} does not divide the cluster size t = {t}")
    adj = [0] * t
    for i, j in cluster.edges:
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    dead: set[int] = set()

    def rec(uncovered: int, chosen: list[tuple[int, ...]]) -> bool:
        if uncovered == 0:
            return True
        if uncovered in dead:
            return False
        v = (uncovered & -uncovered).bit_length() - 1
        pool = adj[v] & uncovered

        def extend(clique: list[int], cand: int) -> bool:
            if len(clique) == k:
                chosen.append(tuple(clique))
                mask = bitmask_of(clique)
                if rec(uncovered & ~mask, chosen):
                    return True
                chosen.pop()
                return False
            w = cand
            while w:
                low = w & -w
                u = low.bit_length() - 1
                w ^= low
                clique.append(u)
                if extend(clique, cand & adj[u] & ~((1 << (u + 1)) - 1)):
                    return True
                clique.pop()
            return False

        if extend([v], pool):
            return True
        dead.add(uncovered)
        return False

    chosen: list[tuple[int, ...]] = []
    if rec((1 << t) - 1, chosen):
        return chosen
    return None


def _induced_on(graph: SimpleGraph, vertices: list[int]) -> tuple[SimpleGraph, list[int]]:
    """Induced subgraph with dense relabeling; returns (graph, original ids)."""
    order = sorted(vertices)
    pos = {v: i for i, v in enumerate(order)}
    edges = []
    mask = bitmask_of(order)
    for v in order:
        row = graph.adj[v] & mask
        for w in (x for x in order if x > v):
            if row >> w & 1:
                edges.append((pos[v], pos[w]))
    return SimpleGraph.from_edges(len(order), edges), order


def _peel_to_min_degree(
    graph: SimpleGraph, target: float, max_removals: int
) -> tuple[list[int], bool]:
    """Greedily drop lowest-degree vertices until all degrees reach target."""
    alive = set(range(graph.n))
    degrees = {v: graph.degree(v) for v in alive}
    removed = 0
    while removed < max_removals:
        victim = min(alive, key=lambda v: (degrees[v], v))
        if degrees[victim] >= target:
            return sorted(alive), True
        alive.remove(victim)
        removed += 1
        for u in alive:
            if graph.has_edge(victim, u):
                degrees[u] -= 1
    achieved = all(degrees[v] >= target for v in alive)
    return sorted(alive), achieved


def packing_pipeline(
    graph: SimpleGraph,
    k: int,
    gamma: float,
    p: float,
    rng: RngStream,
    host_n: int | None = None,
    t0: int = 12,
    max_t: int = 32,
    epsilon: float = 0.3,
    d: float = 0.15,
    uniformity: float = 2.0,
    refuter_trials: int = 24,
) -> dict:
    """Partition -> clean -> trim -> cluster factor -> greedy clique extraction.

    ``graph`` is the min-degree subgraph under test; coverage is measured
    against ``host_n`` (the ambient vertex count) so peeled vertices count
    as uncovered.  Returns the trial record; a stage that cannot proceed
    marks the trial inconclusive with the stage named.
    """
    ambient = host_n if host_n is not None else graph.n
    record: dict = {"subgraph_n": graph.n, "subgraph_edges": graph.edge_count}
    part = sparse_regular_partition(
        graph, epsilon, p, t0, max_t, rng.child(0), refuter_trials=refuter_trials
    )
    record["partition_t"] = part.t
    record["partition_converged"] = part.converged
    cleaned = clean_partition(graph, part, epsilon, p, d, uniformity)
    record["deleted_clean"] = cleaned.deleted_total
    beta = min(gamma / 2.0, 1.0 / (2 * k))
    trim = trim_min_degree(cleaned.cluster, k, beta)
    if trim.success:
        record["trim_removed"] = len(trim.removed)
        cluster = trim.subgraph
        kept = list(trim.kept)
    else:
        # the degree threshold (1 - 1/k) t + k is unreachable for small t
        # even on tight instances; fall back to the whole cluster (padded
        # to divisibility by dropping lowest-degree classes) and let the
        # exact factor search decide
        record["trim_removed"] = None
        record["trim_fallback"] = True
        kept = list(range(cleaned.cluster.t))
        degrees = {v: cleaned.cluster.degree(v) for v in kept}
        while len(kept) % k != 0:
            kept.remove(min(kept, key=lambda v: (degrees[v], v)))
        if not kept:
            record.update(stage_failed="trim", inconclusive=True, coverage=0.0, success=False)
            return record
        cluster = cleaned.cluster.induced(kept)
    factor = clique_factor(cluster, k)
    if factor is None:
        record.update(stage_failed="clique_factor", inconclusive=True, coverage=0.0, success=False)
        return record
    covered: list[tuple[int, ...]] = []
    complete_k = PatternGraph.complete(k)
    uncovered_mask = (1 << graph.n) - 1
    for clique in factor:
        class_lists = [part.classes[kept[c]] for c in clique]
        masks = [bitmask_of(c) for c in class_lists]
        while True:
            found = find_embedding(cleaned.graph, complete_k, candidate_masks=masks)
            if found is None:
                break
            covered.append(found)
            for v in found:
                uncovered_mask &= ~(1 << v)
                for idx in range(k):
                    masks[idx] &= ~(1 << v)
    # mop-up: keep extracting disjoint cliques among the leftovers wherever
    # they sit, searching the input graph (the packing claim is about it,
    # not the cleaned working copy)
    while True:
        found = find_embedding(graph, complete_k, candidate_masks=[uncovered_mask] * k)
        if found is None:
            break
        covered.append(found)
        for v in found:
            uncovered_mask &= ~(1 << v)
    # verification: disjointness and cliquehood in the input graph
    seen: set[int] = set()
    for tup in covered:
        assert len(set(tup)) == k and not (set(tup) & seen)
        seen |= set(tup)
        for a in range(k):
            for b in range(a + 1, k):
                assert graph.has_edge(tup[a], tup[b])
    coverage = len(seen) / ambient
    record.update(
        factor_cliques=len(factor),
        packed_cliques=len(covered),
        covered_vertices=len(seen),
        coverage=coverage,
        inconclusive=not part.converged,
        success=bool(Fraction(len(seen), ambient) >= 1 - Fraction(gamma)),
    )
    return record


def run_packing(
    k: int,
    host_n: int,
    p: float,
    gamma: float,
    rng: RngStream,
    trials: int = 10,
    pass_fraction: float = 0.8,
    threads: int = 1,
    **pipeline_kwargs,
) -> ExperimentReport:
    """Near-spanning clique packings of high-min-degree subgraphs of a random host.

    Per trial: peel low-degree vertices toward min degree
    (1 - 1/k + gamma) p N (the peel stops after gamma N / 2 removals and
    reports whether the target was met; at desk scale it usually is not,
    which the record carries), then run the packing pipeline and require
    coverage of at least (1 - gamma) N ambient vertices.
    """
    target = (1 - 1 / k + gamma) * p * host_n

    def one_trial(index: int) -> dict:
        stream = rng.child(index)
        host = gnp(host_n, p, stream.child(0))
        keep, target_met = _peel_to_min_degree(host, target, max_removals=int(gamma * host_n / 4))
        sub, original = _induced_on(host, keep)
        record = {
            "peeled": host.n - len(keep),
            "min_degree_target": target,
            "min_degree_target_met": bool(target_met),
        }
        inner = packing_pipeline(
            sub, k, gamma, p, stream.child(1), host_n=host_n, **pipeline_kwargs
        )
        record.update(inner)
        return record

    records = map_ordered(one_trial, list(range(trials)), threads)
    successes = sum(1 for r in records if r["success"])
    fraction = successes / len(records) if records else 0.0
    return ExperimentReport(
        name="packing",
        params={
            "k": k,
            "N": host_n,
            "p": p,
            "gamma": gamma,
            "trials": trials,
            "pass_fraction": pass_fraction,
            **{key: val for key, val in pipeline_kwargs.items()},
        },
        seed=rng.master_seed,
        trials=records,
        aggregate={
            "successes": successes,
            "success_fraction": fraction,
            "passed": bool(records) and fraction >= pass_fraction,
        },
        caveats=[
            REGULARITY_CAVEAT,
            "min-degree premise is best-effort at desk scale; records carry the achieved target flag",
        ],
    )


def run_clique_density(
    k: int,
    host_n: int,
    p: float,
    rho: float | Fraction,
    eps: float,
    rng: RngStream,
    trials: int = 5,
    oracle_n: int = 6,
    t0: int = 6,
    max_t: int = 24,
    epsilon: float = 0.3,
    d: float = 0.05,
    uniformity: float = 2.0,
    refuter_trials: int = 24,
    threads: int = 1,
) -> ExperimentReport:
    """Clique counts of relative-density-rho subgraphs versus the dense minimum.

    Per trial: keep a uniform random rho-fraction of the host's edges,
    compute the reduced weighted cluster graph, evaluate the weighted
    clique sum, count actual k-cliques, and compare both against
    (g_hat(rho) - eps) p^C(k,2) C(N, k), where g_hat comes from the exact
    small-n minimum extended by zero below the (k-1)-partite threshold.
    """
    if k not in (3, 4):
        raise PreconditionError("desk-scale clique-density experiment supports k in {3, 4}")
    rho_frac = rho if isinstance(rho, Fraction) else Fraction(rho)
    if rho_frac > 1:
        raise PreconditionError("relative density rho must be at most 1")
    if rho_frac <= 1 - Fraction(1, k - 1):
        g_hat = Fraction(0)
    else:
        g_hat = gk_bruteforce(k, rho_frac, oracle_n)
    bound = (g_hat - Fraction(eps)) * Fraction(p) ** math.comb(k, 2) * math.comb(host_n, k)

    def one_trial(index: int) -> dict:
        stream = rng.child(index)
        host = gnp(host_n, p, stream.child(0))
        m_target = math.ceil(rho_frac * p * host_n * (host_n - 1) / 2)
        edges = list(host.edges())
        if m_target >= len(edges):
            sub = host
            m_target = len(edges)
        else:
            picks = stream.child(1).np_rng().choice(len(edges), size=m_target, replace=False)
            sub = SimpleGraph.from_edges(host.n, [edges[int(i)] for i in picks])
        achieved_rho = float(sub.edge_count / (p * host_n * (host_n - 1) / 2))
        part = sparse_regular_partition(
            sub, epsilon, p, t0, max_t, stream.child(2), refuter_trials=refuter_trials
        )
        cleaned = clean_partition(sub, part, epsilon, p, d, uniformity)
        reduced = reduced_weighted_graph(cleaned.graph, part, p)
        t = reduced.t
        weighted_sum = Fraction(0)
        estimate = Fraction(0)
        from itertools import combinations as comb_iter

        for tup in comb_iter(range(t), k):
            w = Fraction(1)
            for a in range(k):
                for b in range(a + 1, k):
                    w *= reduced.weight(tup[a], tup[b])
                    if w == 0:
                        break
                if w == 0:
                    break
            if w == 0:
                continue
            weighted_sum += w
            sizes = 1
            for c in tup:
                sizes *= len(part.classes[c])
            estimate += w * Fraction(p) ** math.comb(k, 2) * sizes
        true_count = count_kcliques(sub, k)
        return {
            "subgraph_edges": sub.edge_count,
            "achieved_rho": achieved_rho,
            "partition_t": part.t,
            "weighted_clique_sum": float(weighted_sum),
            "cluster_estimate": float(estimate),
            "true_count": true_count,
            "bound": float(bound),
            "count_meets_bound": bool(Fraction(true_count) >= bound),
            "estimate_meets_bound": bool(estimate >= bound),
        }

    records = map_ordered(one_trial, list(range(trials)), threads)
    meets = sum(1 for r in records if r["count_meets_bound"])
    return ExperimentReport(
        name="cliquedensity",
        params={
            "k": k,
            "N": host_n,
            "p": p,
            "rho": str(rho_frac),
            "eps": eps,
            "oracle_n": oracle_n,
            "trials": trials,
            "g_hat": str(g_hat),
        },
        seed=rng.master_seed,
        trials=records,
        aggregate={
            "count_meets_bound": meets,
            "passed": meets == len(records),
        },
        caveats=[
            REGULARITY_CAVEAT,
            f"g_hat evaluated by exact search at n = {oracle_n}, extended by the "
            "classical zero region below 1 - 1/(k-1)",
        ],
    )


def _min_deletion_partition(
    cluster: ClusterGraph, weights: dict[tuple[int, int], int], parts: int
) -> tuple[list[int], int]:
    """Minimum-weight monochromatic assignment of cluster vertices into parts.

    Branch and bound over part assignments with an admissible remaining-cost
    bound; weights are the sparse edge counts carried by each cluster pair.
    """
    t = cluster.t
    order = sorted(range(t), key=lambda v: (-sum(weights.get((min(v, u), max(v, u)), 0) for u in range(t)), v))
    best_cost = math.inf
    best_assign: list[int] = [0] * t
    assign = [-1] * t

    def mono_cost(v: int, part: int) -> int:
        total = 0
        for u in range(t):
            if assign[u] == part and u != v:
                total += weights.get((min(u, v), max(u, v)), 0)
        return total

    def lower_bound(position: int, cost: int) -> float:
        extra = 0
        for rest in order[position:]:
            extra += min(mono_cost(rest, part) for part in range(parts))
        return cost + extra

    def rec(position: int, cost: int, used_parts: int):
        nonlocal best_cost, best_assign
        if cost >= best_cost:
            return
        if position == t:
            best_cost = cost
            best_assign = list(assign)
            return
        v = order[position]
        if lower_bound(position, cost) >= best_cost:
            return
        for part in range(min(used_parts + 1, parts)):
            delta = mono_cost(v, part)
            assign[v] = part
            rec(position + 1, cost + delta, max(used_parts, part + 1))
            assign[v] = -1

    rec(0, 0, 0)
    return best_assign, int(best_cost)


def run_partite_stability(
    pattern: PatternGraph,
    host_n: int,
    p: float,
    gamma: float,
    rng: RngStream,
    trials: int = 10,
    perturb_fraction: float = 0.0,
    t0: int = 6,
    max_t: int = 20,
    epsilon: float = 0.3,
    d: float = 0.15,
    uniformity: float = 2.0,
    refuter_trials: int = 24,
    pass_fraction: float = 0.8,
    threads: int = 1,
) -> ExperimentReport:
    """Template-free min-degree subgraphs become (chi-1)-partite after small deletions.

    Per trial: intersect the host with a random balanced (chi-1)-partite
    template (template-free by construction), optionally re-add a perturbing
    fraction of interior edges while staying template-free, then run
    partition -> clean -> trim -> exact minimum-deletion (chi-1)-partition
    of the cluster graph -> lift.  Total deletions (clean + trim + lift)
    must stay within gamma * p * N^2.  Template copies derived from a
    cluster copy of the template are counted exactly; a positive count for
    a template-free input raises a soundness error.
    """
    chi = chromatic_number(pattern)
    parts = chi - 1
    if parts < 2:
        raise PreconditionError("template must have chromatic number at least 3")
    budget = Fraction(gamma) * Fraction(p) * host_n * host_n

    def trim_threshold_for(t: int) -> float:
        return (1 - 3 / (3 * chi - 4) + gamma / 2) * t

    def one_trial(index: int) -> dict:
        stream = rng.child(index)
        host = gnp(host_n, p, stream.child(0))
        perm = [int(v) for v in stream.child(1).np_rng().permutation(host_n)]
        side = [0] * host_n
        for pos, v in enumerate(perm):
            side[v] = pos % parts
        sub = host.keep_edges_between(side)
        if perturb_fraction > 0:
            interior = [(u, v) for u, v in host.edges() if side[u] == side[v]]
            order = stream.child(2).np_rng().permutation(len(interior))
            adj = list(sub.adj)
            working = SimpleGraph(host_n, adj, sub.edge_count)
            budget_edges = int(perturb_fraction * len(interior))
            added = 0
            for idx in order:
                if added >= budget_edges:
                    break
                u, v = interior[int(idx)]
                adj[u] |= 1 << v
                adj[v] |= 1 << u
                working = SimpleGraph(host_n, adj, working.edge_count + 1)
                if count_embeddings_through_edge(working, pattern, u, v) > 0:
                    adj[u] &= ~(1 << v)
                    adj[v] &= ~(1 << u)
                    working = SimpleGraph(host_n, adj, working.edge_count - 1)
                else:
                    added += 1
            sub = working
        record: dict = {
            "subgraph_edges": sub.edge_count,
            "min_degree": min(sub.degree(v) for v in range(host_n)),
            "premise_min_degree": (1 - 3 / (3 * chi - 4) + gamma) * p * host_n,
        }
        record["premise_met"] = record["min_degree"] >= record["premise_min_degree"]
        part = sparse_regular_partition(
            sub, epsilon, p, t0, max_t, stream.child(3), refuter_trials=refuter_trials
        )
        cleaned = clean_partition(sub, part, epsilon, p, d, uniformity)
        record["partition_t"] = part.t
        record["deleted_clean"] = cleaned.deleted_total

        cluster = cleaned.cluster
        trim_threshold = trim_threshold_for(cluster.t)
        alive = set(range(cluster.t))
        degrees = {v: cluster.degree(v) for v in alive}
        removed = []
        while True:
            low = [v for v in alive if degrees[v] < trim_threshold]
            if not low:
                break
            victim = min(low, key=lambda v: (degrees[v], v))
            alive.remove(victim)
            removed.append(victim)
            for u in cluster.neighbors(victim):
                if u in alive:
                    degrees[u] -= 1
            if not alive:
                break
        kept = sorted(alive)
        record["trimmed_clusters"] = len(removed)
        sub_cluster = cluster.induced(kept)

        # cluster-level template search, cross-checked by exact counting
        cluster_graph = SimpleGraph.from_edges(
            max(sub_cluster.t, 1), list(sub_cluster.edges)
        )
        cluster_copy = find_embedding(cluster_graph, pattern)
        record["cluster_template_free"] = cluster_copy is None
        if cluster_copy is not None:
            classes = [part.classes[kept[c]] for c in cluster_copy]
            size = min(len(c) for c in classes)
            slice_graph = induced_multipartite(
                cleaned.graph, [c[:size] for c in classes], pattern
            )
            derived = canonical_count(slice_graph).count
            if find_embedding(sub, pattern) is None and derived > 0:
                raise SoundnessError(
                    "cluster tuple yields canonical copies inside a template-free subgraph"
                )
            record["cluster_copy_supported_count"] = derived

        pair_weights: dict[tuple[int, int], int] = {}
        masks = [bitmask_of(part.classes[c]) for c in kept]
        for a in range(len(kept)):
            for b in range(a + 1, len(kept)):
                if sub_cluster.has_edge(a, b):
                    pair_weights[(a, b)] = cleaned.graph.edges_between(masks[a], masks[b])
        assignment, lift_deleted = _min_deletion_partition(sub_cluster, pair_weights, parts)
        trim_deleted = 0
        removed_set = set(removed)
        all_masks = [bitmask_of(c) for c in part.classes]
        for (a, b) in cluster.edges:
            if a in removed_set or b in removed_set:
                trim_deleted += cleaned.graph.edges_between(all_masks[a], all_masks[b])
        total = cleaned.deleted_total + trim_deleted + lift_deleted
        record["deleted_trim"] = trim_deleted
        record["deleted_lift"] = lift_deleted
        record["deleted_total"] = total
        record["deletion_budget"] = str(budget)
        record["inconclusive"] = not part.converged
        record["success"] = bool(Fraction(total) <= budget)
        return record

    records = map_ordered(one_trial, list(range(trials)), threads)
    successes = sum(1 for r in records if r["success"])
    fraction = successes / len(records) if records else 0.0
    return ExperimentReport(
        name="aes",
        params={
            "pattern": json.loads(pattern.to_json()),
            "N": host_n,
            "p": p,
            "gamma": gamma,
            "trials": trials,
            "perturb_fraction": perturb_fraction,
            "pass_fraction": pass_fraction,
        },
        seed=rng.master_seed,
        trials=records,
        aggregate={
            "successes": successes,
            "success_fraction": fraction,
            "passed": bool(records) and fraction >= pass_fraction,
        },
        caveats=[
            REGULARITY_CAVEAT,
            "min-degree premise is best-effort at desk scale; records carry the achieved value",
        ],
    )


def run_turan(
    pattern: PatternGraph,
    host_n: int,
    p: float,
    eps: float,
    rng: RngStream,
    trials: int = 10,
    threads: int = 1,
) -> ExperimentReport:
    """Subgraphs above the Turan fraction contain the template.

    The quantifier over all subgraphs is untestable; per trial this draws a
    named adversarial subgraph (all edges across a random (chi-1)-partition,
    topped up with random interior edges to reach the threshold fraction)
    and searches for the template exactly.
    """
    chi = chromatic_number(pattern)
    fraction_required = 1 - 1 / (chi - 1) + eps

    def one_trial(index: int) -> dict:
        stream = rng.child(index)
        host = gnp(host_n, p, stream.child(0))
        required = math.ceil(fraction_required * host.edge_count)
        perm = [int(v) for v in stream.child(1).np_rng().permutation(host_n)]
        side = [0] * host_n
        for pos, v in enumerate(perm):
            side[v] = pos % (chi - 1)
        sub = host.keep_edges_between(side)
        interior = [(u, v) for u, v in host.edges() if side[u] == side[v]]
        order = stream.child(2).np_rng().permutation(len(interior))
        adj = list(sub.adj)
        count = sub.edge_count
        for idx in order:
            if count >= required:
                break
            u, v = interior[int(idx)]
            adj[u] |= 1 << v
            adj[v] |= 1 << u
            count += 1
        sub = SimpleGraph(host_n, adj, count)
        found = find_embedding(sub, pattern)
        return {
            "host_edges": host.edge_count,
            "subgraph_edges": sub.edge_count,
            "required_edges": required,
            "at_threshold": bool(sub.edge_count >= required),
            "found": found is not None,
            "witness": list(found) if found else None,
            "strategy": "partite-plus-interior-topup",
        }

    records = map_ordered(one_trial, list(range(trials)), threads)
    found = sum(1 for r in records if r["found"])
    return ExperimentReport(
        name="turan",
        params={
            "pattern": json.loads(pattern.to_json()),
            "N": host_n,
            "p": p,
            "eps": eps,
            "trials": trials,
        },
        seed=rng.master_seed,
        trials=records,
        aggregate={"found": found, "found_fraction": found / len(records) if records else 0.0},
        caveats=[
            "the theorem quantifies over all subgraphs; this tests one named "
            "adversarial strategy, recorded per trial"
        ],
    )


def probe_copy_free_class(
    pattern: PatternGraph,
    n: int,
    m: int,
    eps: float,
    trials: int,
    rng: RngStream,
    threads: int = 1,
) -> ExperimentReport:
    """Estimate how often regular m-edge members of the product class miss the template.

    Samples uniform members (independent uniform m-edge bipartite graphs per
    template edge), filters to those whose every pair the exhaustive checker
    certifies (eps, m/n^2)-regular, and estimates the probability that a
    regular member contains no canonical copy.  Reports a Wilson 95 percent
    interval and the implied per-edge rate estimate^(1/m).
    """
    if n > 12:
        raise PreconditionError("exhaustive filtering is limited to n <= 12 per part")
    if m > n * n:
        raise PreconditionError("m exceeds the n^2 slots per pair")
    p_scale = m / (n * n)

    def one_trial(index: int) -> dict:
        stream = rng.child(index)
        sample = sample_class(pattern, n, m, p_scale, eps, stream, mode="raw")
        regular = True
        for pair_index, (i, j) in enumerate(pattern.sorted_edges()):
            pair_graph, sides = sample.pair_subgraph(i, j)
            verdict = check_regular_exhaustive(pair_graph, sides, eps, p_scale)
            if verdict.status == REFUTED:
                regular = False
                break
        if not regular:
            return {"regular": False, "copy_free": None}
        count = canonical_count(sample).count
        return {"regular": True, "copy_free": count == 0, "count": str(count)}

    records = map_ordered(one_trial, list(range(trials)), threads)
    regular_records = [r for r in records if r["regular"]]
    if not regular_records:
        raise RejectionBudgetError(
            f"no regular samples among {trials} draws at eps = {eps}", acceptance_rate=0.0
        )
    bad = sum(1 for r in regular_records if r["copy_free"])
    total = len(regular_records)
    estimate = bad / total
    z = 1.959963984540054  # two-sided 95 percent normal quantile
    denom = 1 + z * z / total
    centre = (estimate + z * z / (2 * total)) / denom
    half = z * math.sqrt(estimate * (1 - estimate) / total + z * z / (4 * total * total)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    return ExperimentReport(
        name="classprobe",
        params={
            "pattern": json.loads(pattern.to_json()),
            "n": n,
            "m": m,
            "eps": eps,
            "trials": trials,
        },
        seed=rng.master_seed,
        trials=records,
        aggregate={
            "regular_samples": total,
            "acceptance_rate": total / trials,
            "copy_free": bad,
            "estimate": estimate,
            "wilson_95": [lo, hi],
            "beta_hat": estimate ** (1.0 / m) if bad else 0.0,
            "beta_hat_upper": hi ** (1.0 / m),
        },
        caveats=[
            "a single (n, m, eps) estimate can neither confirm nor refute the "
            "counting conjecture's quantifier order; this probe is descriptive"
        ],
    )

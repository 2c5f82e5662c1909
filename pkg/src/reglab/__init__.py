"""Desk-scale toolkit for sparse graph regularity.

Graph and template types, pair-regularity checking and refutation, sparse
regular partitions with cleaning and cluster graphs, exact canonical-copy
counting, seeded random graph classes with exposure schedules, and
statistical experiment pipelines over all of it.
"""

from .counting import CountResult, canonical_count, constrained_count, extension_degree, gk_bruteforce, mu_star
from .errors import BudgetError, PreconditionError, RejectionBudgetError, SoundnessError
from .graphs import (
    MultipartiteGraph,
    PatternGraph,
    SimpleGraph,
    VertexSetPair,
    induced_multipartite,
    min_degree,
    pair_density,
)
from .partition import (
    ClusterGraph,
    Partition,
    clean_partition,
    reduced_weighted_graph,
    sparse_regular_partition,
    trim_min_degree,
)
from .patterns import DensityReport, chromatic_number, is_strictly_balanced, two_density
from .randgraph import (
    ExposureSchedule,
    RngStream,
    chernoff_bounds,
    double_mean_tail_bound,
    exposure_schedule,
    gnp,
    sample_class,
)
from .regularity import (
    RegularityVerdict,
    check_lower_regular,
    check_regular_exhaustive,
    check_upper_uniform,
    refute_regular_sampled,
)

__all__ = [
    "BudgetError",
    "ClusterGraph",
    "CountResult",
    "DensityReport",
    "ExposureSchedule",
    "MultipartiteGraph",
    "Partition",
    "PatternGraph",
    "PreconditionError",
    "RegularityVerdict",
    "RejectionBudgetError",
    "RngStream",
    "SimpleGraph",
    "SoundnessError",
    "VertexSetPair",
    "canonical_count",
    "chernoff_bounds",
    "check_lower_regular",
    "check_regular_exhaustive",
    "check_upper_uniform",
    "chromatic_number",
    "clean_partition",
    "constrained_count",
    "double_mean_tail_bound",
    "exposure_schedule",
    "extension_degree",
    "gk_bruteforce",
    "gnp",
    "induced_multipartite",
    "is_strictly_balanced",
    "min_degree",
    "mu_star",
    "pair_density",
    "reduced_weighted_graph",
    "refute_regular_sampled",
    "sample_class",
    "sparse_regular_partition",
    "trim_min_degree",
    "two_density",
]

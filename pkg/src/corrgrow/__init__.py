"""Simulation and statistical inference for correlated randomly growing trees.

Two trees grown from a common seed share their history up to an unknown
time and evolve independently afterwards.  This package simulates such
pairs under uniform and preferential attachment, computes the tree
statistics that expose the correlation (maximum degree, balancedness,
anti-centrality of the centroid), runs calibrated hypothesis tests, and
estimates the shared-history length from a single snapshot pair.
"""

from .errors import (
    CorrgrowError,
    DegenerateRank,
    DegenerateZeroGap,
    InvalidSize,
    InvalidTStar,
    NotAnEdge,
    NotATree,
    OutOfSupport,
    SizeMismatch,
)
from .rng import RngSpec
from .tree_core import (
    CorrelatedPair,
    GrowingTree,
    GrowthRule,
    SeedTree,
    grow,
    grow_correlated,
    load_tree,
    make_seed,
    save_tree,
    timestamp,
)
from .stats import (
    CentroidResult,
    RankedSubtree,
    H_statistic,
    anti_centrality,
    anti_centrality_all,
    centroid,
    f_min_anticentrality,
    h_edge,
    max_degree,
    ranked_pendent_subtrees,
    subtree_sizes,
)
from .detect import (
    ANTICENTRALITY_GAP,
    H_PRODUCT,
    MAX_DEGREE_JOINT,
    DetectionOutcome,
    PowerReport,
    TestStatistic,
    calibrate_threshold,
    estimate_power,
    eval_statistic,
    run_test,
)
from .estimate import (
    EstimatorReport,
    batch_estimate,
    coarse_estimate,
    fine_estimate,
    k_reference,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

"""Clustering of multivariate extremes through a sparse max-linear factor model."""

__version__ = "0.1.0"

from .clique import (IndependenceGraph, CliqueResult, build_independence_graph, max_clique,
                     max_clique_bron_kerbosch, max_clique_branch_and_bound, run_clique_benchmark)
from .clustering import (PurePartition, SoftClusters, SimplexVector, simplex_project, pure_var,
                         merge, estimate_pure_rows, htsp, scram)
from .extremal_stats import (extract_block_maxima, rank_transform, pairwise_madogram,
                             multivariate_madogram, chi_from_madogram, empirical_chi,
                             min_sum_product)
from .loading import LoadingMatrix
from .metrics import l2_loss, support_errors, centroid_distance, tail_probability
from .simulate import SimConfig, synthesize_panel
from .tuning import practical_delta, theoretical_delta, select_delta, goodness_criterion

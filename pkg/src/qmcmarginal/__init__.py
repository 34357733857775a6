"""Marginal shape approximation on grids, rank-1 lattices and random point sets.

An s-dimensional function is evaluated on a point set, the values are
projected onto one axis at a time, and a degree-(n-1) least-squares
polynomial through the projected data approximates the shape of each
one-dimensional marginal.
"""

__version__ = "0.1.0"

from .errors import (
    AlgorithmChoiceError,
    ArgumentError,
    CapacityError,
    EmptyPartitionError,
    EvaluationError,
    MarginalError,
)
from .pointset import (
    PointSet,
    ProjectionProfile,
    grid_points,
    korobov_criterion,
    korobov_lattice,
    korobov_search,
    maximal_rank_lattice,
    projection_profile,
    random_points,
    rank1_lattice,
)
from .evaluation import EvaluatedSet, evaluate, project, transform_domain
from .marginal import (
    MarginalPoly,
    NodeRule,
    PartitionFit,
    algorithm_I,
    algorithm_II,
    approximate,
    fit_ls_poly,
    fit_partition_poly,
    fit_projection_poly,
    fit_wls_poly,
    partition_means,
    pointwise_means,
)
from .distributions import (
    Beta,
    Exponential,
    Gamma,
    GaussianMixture,
    ProductDistribution,
    joint_density,
    load_distribution,
    preset,
    true_marginal,
)
from .analysis import ConvergenceReport, compare_grid_vs_lattice, convergence_study, sup_error, theorem_bound

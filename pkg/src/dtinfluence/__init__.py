"""Exact influence and decision-tree cost computations on product spaces."""
from .arith import FLOAT_SLACK, parse_number, pretty, to_str
from .measures import (
    InfluenceVector, bias_polynomial, covariance, covariation, influence, influences, output_distribution,
    rho1_view, rho2_view, to_flip_convention, total_influence, variation,
)
from .model import (
    CapExceeded, CoordDomain, ModelError, OutputSpace, ParseError, ProductSpace, SpaceMismatch,
    TabulatedFunction, format_function, parse_function,
)
from .optimal import enumerate_all_ddts, optimal_depth, optimal_expected_cost
from .report import NotApplicable, VerificationReport
from .thresholds import critical_probability, is_monotone, theorem21_pipeline
from .tree import (
    DecisionTree, Leaf, Query, RandomizedTree, TreeError, compose_disjoint, computes, delta, depth, evaluate,
    expected_cost, format_tree, is_read_once, is_separated, leaf_count, parse_tree, sequential_tree,
)
from .verify import (
    check_approximation_bound, check_covariance, check_efron_stein, check_entropy_bound, check_hybrid_identity,
    check_imax_corollary, check_main, check_os_inequality, check_real_corollary, check_real_influence_floor,
    check_semimetric, check_separated_equality, check_two_function, defect, hybrid_trace,
)

__version__ = "0.1.0"

__all__ = [
    "FLOAT_SLACK", "parse_number", "pretty", "to_str", "InfluenceVector", "bias_polynomial", "covariance",
    "covariation", "influence", "influences", "output_distribution", "rho1_view", "rho2_view",
    "to_flip_convention", "total_influence", "variation", "CapExceeded", "CoordDomain", "ModelError",
    "OutputSpace", "ParseError", "ProductSpace", "SpaceMismatch", "TabulatedFunction", "format_function",
    "parse_function", "enumerate_all_ddts", "optimal_depth", "optimal_expected_cost", "NotApplicable",
    "VerificationReport", "critical_probability", "is_monotone", "theorem21_pipeline", "DecisionTree",
    "Leaf", "Query", "RandomizedTree", "TreeError", "compose_disjoint", "computes", "delta", "depth",
    "evaluate", "expected_cost", "format_tree", "is_read_once", "is_separated", "leaf_count", "parse_tree",
    "sequential_tree", "check_approximation_bound", "check_covariance", "check_efron_stein",
    "check_entropy_bound", "check_hybrid_identity", "check_imax_corollary", "check_main",
    "check_os_inequality", "check_real_corollary", "check_real_influence_floor", "check_semimetric",
    "check_separated_equality", "check_two_function", "defect", "hybrid_trace",
]

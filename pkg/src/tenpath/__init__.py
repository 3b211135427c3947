"""Contraction-path search for einsum tensor networks.

The package finds pairwise contraction orders for Einstein-summation
expressions with a three-phase greedy algorithm whose pair-scoring cost
function is selected at runtime from a fixed set, plus evaluators and
brute-force oracles for verifying path cost and semantics.
"""

from .costs import (
    CostFnSpec,
    UnknownCostFnError,
    default_cost_fn_set,
    pair_cost,
    registered_names,
    spec_from_name,
)
from .evaluate import (
    PathValidationError,
    contraction_tree,
    evaluate,
    format_tree,
)
from .exprio import (
    InstanceDocument,
    InstanceFormatError,
    gen_grid_network,
    gen_random_network,
    gen_regular_network,
    parse_einsum_string,
    parse_instance_document,
    parse_instance_file,
    parse_path,
    serialize_instance,
    serialize_path,
)
from .greedy import (
    BudgetConfigError,
    OptimizeConfig,
    OptimizeReport,
    derive_trial_seed,
    greedy_path,
    optimize,
)
from .model import (
    ContractionPath,
    ContractionTree,
    NetworkValidationError,
    PairCandidate,
    PathStats,
    TensorNetwork,
    TreeNode,
    pair_output_indices,
    pairwise_flops,
    term_size,
    validate_label,
)
from .oracle import (
    OracleLimitError,
    contract_along_path,
    naive_contract,
    optimal_path,
    random_tensor_data,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetConfigError",
    "ContractionPath",
    "ContractionTree",
    "CostFnSpec",
    "InstanceDocument",
    "InstanceFormatError",
    "NetworkValidationError",
    "OptimizeConfig",
    "OptimizeReport",
    "OracleLimitError",
    "PairCandidate",
    "PathStats",
    "PathValidationError",
    "TensorNetwork",
    "TreeNode",
    "UnknownCostFnError",
    "contract_along_path",
    "contraction_tree",
    "default_cost_fn_set",
    "derive_trial_seed",
    "evaluate",
    "format_tree",
    "gen_grid_network",
    "gen_random_network",
    "gen_regular_network",
    "greedy_path",
    "naive_contract",
    "optimal_path",
    "optimize",
    "pair_cost",
    "pair_output_indices",
    "pairwise_flops",
    "parse_einsum_string",
    "parse_instance_document",
    "parse_instance_file",
    "parse_path",
    "random_tensor_data",
    "registered_names",
    "serialize_instance",
    "serialize_path",
    "spec_from_name",
    "term_size",
    "validate_label",
]

"""Weighted rule-fact networks: evaluation, training, pruning, experiments."""

from .network import (
    DEFAULT_CHANGE_EPSILON,
    Fact,
    NonConvergenceError,
    Rule,
    RuleFactNetwork,
    RunOutcome,
    RunStatus,
    ValidationReport,
    evaluate,
    normalize_weights,
    reachable,
    renormalize,
    settle,
    validate,
)
from .generators import (
    GenerationError,
    TopologySpec,
    build,
    clone_structure_fresh_weights,
    gen_dense,
    gen_fully_connected,
    gen_layered,
    gen_random,
)
from .training import (
    CANONICAL_SOURCE_VALUE,
    EpochRecord,
    TrainingConfig,
    apply_epoch,
    canonical_assignment,
    contributing_rules,
    difference_value,
    rule_share,
    train,
    weight_delta,
)
from .pruning import (
    FilterOutcome,
    PruneConfig,
    PruneReport,
    PruneVerdict,
    adaptive_prune,
    apply_active_filter,
    contribution_prune,
)
from .experiments import (
    ConditionConfig,
    ConditionStats,
    OracleSpec,
    RecordStatus,
    RunRecord,
    classify_and_aggregate,
    iteration_seed,
    run_condition,
    run_iteration,
)

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_SOURCE_VALUE",
    "DEFAULT_CHANGE_EPSILON",
    "ConditionConfig",
    "ConditionStats",
    "EpochRecord",
    "Fact",
    "FilterOutcome",
    "GenerationError",
    "NonConvergenceError",
    "OracleSpec",
    "PruneConfig",
    "PruneReport",
    "PruneVerdict",
    "RecordStatus",
    "Rule",
    "RuleFactNetwork",
    "RunOutcome",
    "RunRecord",
    "RunStatus",
    "TopologySpec",
    "TrainingConfig",
    "ValidationReport",
    "adaptive_prune",
    "apply_active_filter",
    "apply_epoch",
    "build",
    "canonical_assignment",
    "classify_and_aggregate",
    "clone_structure_fresh_weights",
    "contributing_rules",
    "contribution_prune",
    "difference_value",
    "evaluate",
    "gen_dense",
    "gen_fully_connected",
    "gen_layered",
    "gen_random",
    "iteration_seed",
    "normalize_weights",
    "reachable",
    "renormalize",
    "rule_share",
    "run_condition",
    "run_iteration",
    "settle",
    "train",
    "validate",
    "weight_delta",
]

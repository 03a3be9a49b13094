"""Random-search CASH optimizer, workflow executor and ensemble builders."""

from .ensemble import (
    Ensemble,
    build_ensemble,
    build_fitnumber,
    build_forward_selection,
    build_topn,
    f1_weighted_batch,
    fit_number_curve,
    forward_selection_counts,
)
from .executor import WorkflowExecutor, format_workflow_line
from .search import (
    ENSEMBLE_METHODS,
    FAILED_SCORE,
    EvaluatedWorkflow,
    InnerSplit,
    NoViableWorkflowError,
    OptimizerConfig,
    RandomSearchResult,
    evaluate_workflow,
    inner_splits,
    optimize,
    random_search,
    rank_workflows,
    sample_configs,
)

__all__ = [
    "ENSEMBLE_METHODS",
    "FAILED_SCORE",
    "Ensemble",
    "EvaluatedWorkflow",
    "InnerSplit",
    "NoViableWorkflowError",
    "OptimizerConfig",
    "RandomSearchResult",
    "WorkflowExecutor",
    "build_ensemble",
    "build_fitnumber",
    "build_forward_selection",
    "build_topn",
    "evaluate_workflow",
    "f1_weighted_batch",
    "fit_number_curve",
    "format_workflow_line",
    "forward_selection_counts",
    "inner_splits",
    "optimize",
    "random_search",
    "rank_workflows",
    "sample_configs",
]

"""Workflow executor: evaluates sampled workflows in parallel and logs one line each.

Evaluations are independent joblib tasks; results come back in sample order,
so scores, ranking and the per-workflow log do not depend on the worker count.
"""

import logging
from typing import List, Sequence

from joblib import Parallel, delayed

from ..dataset import FeatureDataset
from ..logging_config import WORKFLOW_LOGGER
from ..search_space import WorkflowConfig, config_digest
from .search import EvaluatedWorkflow, InnerSplit, evaluate_workflow

logger = logging.getLogger(__name__)
workflow_logger = logging.getLogger(WORKFLOW_LOGGER)

# Progress is reported at roughly these fractions of the pool.
PROGRESS_STEPS = 10


def format_workflow_line(split_index: int, workflow: EvaluatedWorkflow) -> str:
    """One log line: split, sample index, mean validation F1_w, config digest."""
    status = "" if not workflow.failed else "  FAILED"
    return (
        f"split={split_index} workflow={workflow.index} "
        f"f1w={workflow.mean_score:.6f} digest={config_digest(workflow.config)}{status}"
    )


class WorkflowExecutor:
    """Run evaluate_workflow over a pool of configs."""

    def __init__(self, n_jobs: int = 1, split_index: int = 0):
        self.n_jobs = max(1, int(n_jobs))
        self.split_index = split_index

    def evaluate(
        self,
        configs: Sequence[WorkflowConfig],
        training_set: FeatureDataset,
        splits: Sequence[InnerSplit],
    ) -> List[EvaluatedWorkflow]:
        """Evaluate every config on the shared inner splits.

        Args:
            configs: Sampled workflows; list position is the sample index
            training_set: Rows the search may see
            splits: Inner train/validation splits shared by all workflows

        Returns:
            EvaluatedWorkflows in sample order
        """
        total = len(configs)
        logger.debug(f"Evaluating {total} workflows with {self.n_jobs} worker(s)")
        chunk = max(1, total // PROGRESS_STEPS)
        results: List[EvaluatedWorkflow] = []
        for start in range(0, total, chunk):
            batch = range(start, min(start + chunk, total))
            evaluated = Parallel(n_jobs=self.n_jobs)(
                delayed(evaluate_workflow)(
                    configs[i], training_set, len(splits), index=i, splits=splits
                )
                for i in batch
            )
            for workflow in evaluated:
                if workflow.failed:
                    logger.warning(
                        f"Workflow {workflow.index} ({workflow.config.classifier}) failed: "
                        f"{workflow.failure}"
                    )
                workflow_logger.info(format_workflow_line(self.split_index, workflow))
            results.extend(evaluated)
            best = max(w.mean_score for w in results)
            logger.debug(f"  {len(results)}/{total} workflows evaluated (best F1_w {best:.4f})")
        return results

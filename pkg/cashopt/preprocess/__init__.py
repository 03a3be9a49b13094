"""Workflow steps 1-8 and the composed workflow pipeline."""

from .base import ColumnSelector, FittedStep
from .groupwise import GroupwiseSelector
from .impute import Imputer
from .model_selection import SelectFromModel
from .pca import PCAStep
from .pipeline import WorkflowPipeline, build_steps, component_seeds
from .relief import ReliefSelector, relieff_weights
from .scaling import RobustZScore
from .univariate import UnivariateSelector, mann_whitney_pvalues
from .variance import VarianceThreshold

__all__ = [
    "ColumnSelector",
    "FittedStep",
    "GroupwiseSelector",
    "Imputer",
    "PCAStep",
    "ReliefSelector",
    "RobustZScore",
    "SelectFromModel",
    "UnivariateSelector",
    "VarianceThreshold",
    "WorkflowPipeline",
    "build_steps",
    "component_seeds",
    "mann_whitney_pvalues",
    "relieff_weights",
]

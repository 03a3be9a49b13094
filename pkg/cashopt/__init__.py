"""cashopt: random-search CASH engine for tabular binary classification.

Builds complete classification workflows (feature selection, imputation,
scaling, resampling, classifier) by random search over a joint search space,
ensembles the best of them and evaluates the result with nested
cross-validation or a fixed train/test split.
"""

__version__ = "0.1.0"

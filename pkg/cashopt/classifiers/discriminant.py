"""Linear and quadratic discriminant analysis with shrinkage."""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import expit

from .base import BaseClassifier

logger = logging.getLogger(__name__)

LDA_SOLVERS = ("svd", "lsqr", "eigen")
RIDGE_FACTOR = 1e-6


def clamp_unit(value: float) -> float:
    return float(min(max(value, 0.0), 1.0))


def factor_covariance(cov: np.ndarray) -> Tuple[tuple, float]:
    """Cholesky factor of ``cov``; on failure add a ridge of 1e-6 * trace and retry.

    Returns:
        (cho_factor result, ridge that was added)
    """
    try:
        return cho_factor(cov, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    trace = float(np.trace(cov))
    ridge = RIDGE_FACTOR * trace if trace > 0 else RIDGE_FACTOR
    for _ in range(8):
        try:
            return cho_factor(cov + ridge * np.eye(len(cov)), lower=True), ridge
        except np.linalg.LinAlgError:
            ridge *= 10.0
    raise np.linalg.LinAlgError("covariance stays singular after ridge regularisation")


def _log_det(chol: tuple) -> float:
    return 2.0 * float(np.log(np.diag(chol[0])).sum())


class LDAClassifier(BaseClassifier):
    """Shared covariance, shrunk toward its diagonal by ``shrinkage`` clamped to [0, 1].

    The solver tag is recorded only; for two classes every solver yields the
    same discriminant.
    """

    name = "lda"

    def __init__(self, solver: str = "svd", shrinkage: float = 0.0, seed: Optional[int] = None):
        super().__init__(seed)
        if solver not in LDA_SOLVERS:
            raise ValueError(f"unknown LDA solver {solver!r}")
        self.solver = solver
        self.shrinkage = float(shrinkage)
        self.ridge_ = 0.0

    def _fit(self, X, y):
        s = clamp_unit(self.shrinkage)
        means = np.stack([X[y == k].mean(axis=0) for k in (0, 1)])
        centered = X - means[y]
        cov = centered.T @ centered / len(y)
        cov = (1.0 - s) * cov + s * np.diag(np.diag(cov))
        chol, self.ridge_ = factor_covariance(cov)
        direction = cho_solve(chol, means[1] - means[0])
        priors = np.bincount(y, minlength=2) / len(y)
        self.coef_ = direction
        self.intercept_ = float(
            -0.5 * (means[1] + means[0]) @ direction + np.log(priors[1] / priors[0])
        )

    def _predict_proba(self, X):
        return expit(X @ self.coef_ + self.intercept_)

    def _state(self):
        return {
            "solver": self.solver,
            "shrinkage": clamp_unit(self.shrinkage),
            "ridge": self.ridge_,
        }


class QDAClassifier(BaseClassifier):
    """Per-class covariance blended toward the pooled covariance by ``reg_param`` in [0, 1]."""

    name = "qda"

    def __init__(self, reg_param: float = 0.0, seed: Optional[int] = None):
        super().__init__(seed)
        self.reg_param = float(reg_param)
        self.ridge_ = 0.0

    def _fit(self, X, y):
        r = clamp_unit(self.reg_param)
        n_features = X.shape[1]
        self.means_ = np.stack([X[y == k].mean(axis=0) for k in (0, 1)])
        centered = X - self.means_[y]
        pooled = centered.T @ centered / len(y)
        self.log_priors_ = np.log(np.bincount(y, minlength=2) / len(y))
        self._factors = []
        self.ridge_ = 0.0
        for k in (0, 1):
            rows = centered[y == k]
            if len(rows) > 1:
                cov = rows.T @ rows / (len(rows) - 1)
            else:
                cov = np.zeros((n_features, n_features))
            blended = (1.0 - r) * cov + r * pooled
            chol, ridge = factor_covariance(blended)
            self.ridge_ = max(self.ridge_, ridge)
            self._factors.append(chol)

    def _log_likelihood(self, X, k):
        chol = self._factors[k]
        diff = X - self.means_[k]
        mahalanobis = np.einsum("ij,ij->i", diff, cho_solve(chol, diff.T).T)
        return -0.5 * (mahalanobis + _log_det(chol)) + self.log_priors_[k]

    def _predict_proba(self, X):
        return expit(self._log_likelihood(X, 1) - self._log_likelihood(X, 0))

    def _state(self):
        return {"reg_param": clamp_unit(self.reg_param), "ridge": self.ridge_}

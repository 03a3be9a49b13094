"""Support vector machine trained with SMO on a precomputed kernel, Platt-calibrated."""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit
from sklearn.metrics.pairwise import pairwise_kernels
from sklearn.model_selection import StratifiedKFold

from .base import BaseClassifier

logger = logging.getLogger(__name__)

KERNELS = ("linear", "poly", "rbf")
CALIBRATION_FOLDS = 3
_TAU = 1e-12


def kernel_matrix(
    X: np.ndarray, Z: np.ndarray, kernel: str, degree: int, coef0: float, gamma: float
) -> np.ndarray:
    """k(x, z): linear x.z, poly (x.z + coef0)^degree, rbf exp(-gamma |x - z|^2)."""
    if kernel == "linear":
        K = pairwise_kernels(X, Z, metric="linear")
    elif kernel == "poly":
        K = pairwise_kernels(X, Z, metric="poly", degree=degree, gamma=1.0, coef0=coef0)
    elif kernel == "rbf":
        K = pairwise_kernels(X, Z, metric="rbf", gamma=gamma)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    if not np.isfinite(K).all():
        raise ValueError(f"{kernel} kernel overflowed (degree={degree})")
    return K


def smo_solve(
    K: np.ndarray, y_pm: np.ndarray, C: float, tol: float = 1e-4, max_iter: int = 20_000
) -> Tuple[np.ndarray, float, bool]:
    """Solve the SVM dual with maximal-violating-pair SMO.

    min_a 1/2 a'Qa - e'a  s.t.  0 <= a <= C, y'a = 0, with Q_ij = y_i y_j K_ij.

    Args:
        K: Kernel matrix of the training rows
        y_pm: Labels in {-1, +1}
        C: Box constraint
        tol: Stop when the maximal KKT violation drops below this
        max_iter: Iteration cap

    Returns:
        (alpha, bias, converged)
    """
    n = len(y_pm)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.diag(K)
    converged = False
    i = j = 0
    for _ in range(max_iter):
        score = -y_pm * grad
        up = ((y_pm > 0) & (alpha < C)) | ((y_pm < 0) & (alpha > 0))
        low = ((y_pm > 0) & (alpha > 0)) | ((y_pm < 0) & (alpha < C))
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = score[i] - score[j]
        if gap < tol:
            converged = True
            break
        eta = max(diag[i] + diag[j] - 2.0 * K[i, j], _TAU)
        t = gap / eta
        t = min(t, C - alpha[i] if y_pm[i] > 0 else alpha[i])
        t = min(t, alpha[j] if y_pm[j] > 0 else C - alpha[j])
        alpha[i] += y_pm[i] * t
        alpha[j] -= y_pm[j] * t
        grad += y_pm * t * (K[:, i] - K[:, j])
    np.clip(alpha, 0.0, C, out=alpha)

    score = -y_pm * grad
    free = (alpha > 1e-8 * C) & (alpha < C * (1 - 1e-8))
    if free.any():
        bias = float(score[free].mean())
    else:
        bias = float((score[i] + score[j]) / 2.0)
    return alpha, bias, converged


def fit_platt(decision: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Fit P(y=1|f) = 1 / (1 + exp(A f + B)) with Platt's smoothed targets."""
    n_pos = float((y == 1).sum())
    n_neg = float((y == 0).sum())
    target = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def objective(params):
        a, b = params
        z = a * decision + b
        # log(1 + exp(z)) computed stably.
        log1pexp = np.logaddexp(0.0, z)
        loss = np.sum(target * log1pexp + (1.0 - target) * (log1pexp - z))
        p = expit(-z)
        dz = target - p
        return loss, np.array([np.sum(dz * decision), np.sum(dz)])

    start = np.array([0.0, np.log((n_neg + 1.0) / (n_pos + 1.0))])
    result = minimize(objective, start, jac=True, method="L-BFGS-B")
    return float(result.x[0]), float(result.x[1])


class SVMClassifier(BaseClassifier):
    """Kernel SVM; posterior via a sigmoid fitted on out-of-fold decision values."""

    name = "svm"

    def __init__(
        self,
        kernel: str = "rbf",
        C: float = 1.0,
        degree: int = 3,
        coef0: float = 0.0,
        gamma: float = 1.0,
        tol: float = 1e-4,
        max_iter: int = 20_000,
        seed: Optional[int] = None,
    ):
        super().__init__(seed)
        if kernel not in KERNELS:
            raise ValueError(f"unknown kernel {kernel!r}")
        self.kernel = kernel
        self.C = float(C)
        self.degree = int(degree)
        self.coef0 = float(coef0)
        self.gamma = float(gamma)
        self.tol = tol
        self.max_iter = max_iter

    def _kernel(self, X, Z):
        return kernel_matrix(X, Z, self.kernel, self.degree, self.coef0, self.gamma)

    def _train(self, X, y):
        y_pm = np.where(y == 1, 1.0, -1.0)
        K = self._kernel(X, X)
        alpha, bias, converged = smo_solve(K, y_pm, self.C, self.tol, self.max_iter)
        support = alpha > 0
        return X[support], alpha[support] * y_pm[support], bias, converged, alpha

    def _decision(self, X, support_vectors, dual_coef, bias):
        if len(dual_coef) == 0:
            return np.full(X.shape[0], bias)
        return self._kernel(X, support_vectors) @ dual_coef + bias

    def _fit(self, X, y):
        self.support_vectors_, self.dual_coef_, self.intercept_, self.converged_, self.alpha_ = (
            self._train(X, y)
        )
        if not self.converged_:
            logger.debug(f"SMO hit max_iter={self.max_iter} before reaching tol={self.tol}")
        self.platt_a_, self.platt_b_ = fit_platt(self._out_of_fold_decision(X, y), y)

    def _out_of_fold_decision(self, X, y):
        """Decision values for every training row from models that did not see it."""
        if np.bincount(y).min() < CALIBRATION_FOLDS:
            return self.decision_function(X)
        folds = StratifiedKFold(n_splits=CALIBRATION_FOLDS, shuffle=True, random_state=self.seed)
        decision = np.zeros(len(y))
        for train_idx, held_idx in folds.split(X, y):
            if np.unique(y[train_idx]).size < 2:
                decision[held_idx] = self.decision_function(X[held_idx])
                continue
            sv, coef, bias, _, _ = self._train(X[train_idx], y[train_idx])
            decision[held_idx] = self._decision(X[held_idx], sv, coef, bias)
        return decision

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return self._decision(
            np.asarray(X, dtype=float), self.support_vectors_, self.dual_coef_, self.intercept_
        )

    def _predict_proba(self, X):
        return expit(-(self.platt_a_ * self.decision_function(X) + self.platt_b_))

    def _state(self):
        return {
            "kernel": self.kernel,
            "C": self.C,
            "n_support": int(len(self.dual_coef_)),
            "platt": [self.platt_a_, self.platt_b_],
        }

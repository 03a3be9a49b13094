"""Logistic regression fitted by accelerated proximal gradient (l1 / l2 / elastic net)."""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from .base import BaseClassifier

logger = logging.getLogger(__name__)

PENALTIES = ("l1", "l2", "elasticnet")
# Both solver tags run the same optimiser; they only differ in iteration budget.
SOLVER_BUDGETS = {"lbfgs": 500, "saga": 2000}


def l1_fraction(penalty: str, l1_ratio: float) -> float:
    """Share of the penalty that is l1 (0 for l2, 1 for l1)."""
    if penalty == "l1":
        return 1.0
    if penalty == "l2":
        return 0.0
    return float(min(max(l1_ratio, 0.0), 1.0))


def smooth_loss_and_grad(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, lam: float, r: float
) -> Tuple[float, np.ndarray, float]:
    """Mean log-loss plus the l2 share of the penalty, and its gradient.

    Objective: mean_i log(1 + exp(-s_i z_i)) + lam * (1 - r) / 2 * |w|^2 with
    z = Xw + b and s = 2y - 1. The intercept is not penalised.

    Returns:
        (loss, grad_w, grad_b)
    """
    z = X @ w + b
    s = 2.0 * y - 1.0
    loss = float(np.mean(np.logaddexp(0.0, -s * z)) + 0.5 * lam * (1.0 - r) * (w @ w))
    residual = expit(z) - y
    n = len(y)
    grad_w = X.T @ residual / n + lam * (1.0 - r) * w
    grad_b = float(residual.sum() / n)
    return loss, grad_w, grad_b


def objective(w, b, X, y, lam, r) -> float:
    loss, _, _ = smooth_loss_and_grad(w, b, X, y, lam, r)
    return loss + lam * r * float(np.abs(w).sum())


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class LogisticRegressionClassifier(BaseClassifier):
    """Penalised logistic regression.

    ``C`` is the inverse regularisation strength: the penalty weight on the
    mean log-loss is 1 / (C * n).
    """

    name = "logistic_regression"

    def __init__(
        self,
        C: float = 1.0,
        solver: str = "lbfgs",
        penalty: str = "l2",
        l1_ratio: float = 0.5,
        tol: float = 1e-6,
        seed: Optional[int] = None,
    ):
        super().__init__(seed)
        if penalty not in PENALTIES:
            raise ValueError(f"unknown penalty {penalty!r}")
        if solver not in SOLVER_BUDGETS:
            raise ValueError(f"unknown solver {solver!r}")
        if C <= 0:
            raise ValueError(f"C must be > 0, got {C}")
        self.C = float(C)
        self.solver = solver
        self.penalty = penalty
        self.l1_ratio = float(l1_ratio)
        self.tol = tol
        self.coef_ = np.zeros(0)
        self.intercept_ = 0.0
        self.n_iter_ = 0

    def _fit(self, X, y):
        n, p = X.shape
        yf = y.astype(float)
        lam = 1.0 / (self.C * n)
        r = l1_fraction(self.penalty, self.l1_ratio)

        # Lipschitz constant of the smooth part, intercept column included.
        spectral = np.linalg.norm(np.hstack([X, np.ones((n, 1))]), ord=2) ** 2
        step = 1.0 / (0.25 * spectral / n + lam * (1.0 - r))

        w = np.zeros(p)
        prior = yf.mean()
        b = float(np.log(prior / (1.0 - prior)))
        w_prev, b_prev = w.copy(), b
        best = (objective(w, b, X, yf, lam, r), w.copy(), b)
        momentum = 1.0
        self.converged_ = False
        for it in range(1, SOLVER_BUDGETS[self.solver] + 1):
            momentum_next = (1.0 + np.sqrt(1.0 + 4.0 * momentum**2)) / 2.0
            beta = (momentum - 1.0) / momentum_next
            v_w = w + beta * (w - w_prev)
            v_b = b + beta * (b - b_prev)
            _, g_w, g_b = smooth_loss_and_grad(v_w, v_b, X, yf, lam, r)
            w_prev, b_prev = w, b
            w = soft_threshold(v_w - step * g_w, step * lam * r)
            b = v_b - step * g_b
            momentum = momentum_next

            value = objective(w, b, X, yf, lam, r)
            if value < best[0]:
                best = (value, w.copy(), b)
            self.n_iter_ = it
            if max(np.max(np.abs(w - w_prev), initial=0.0), abs(b - b_prev)) < self.tol:
                self.converged_ = True
                break
        if not self.converged_:
            logger.debug(f"Logistic regression stopped after {self.n_iter_} iterations")
        _, self.coef_, self.intercept_ = best

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_

    def _predict_proba(self, X):
        return expit(self.decision_function(X))

    def _state(self):
        return {
            "penalty": self.penalty,
            "C": self.C,
            "solver": self.solver,
            "n_nonzero": int(np.count_nonzero(self.coef_)),
            "n_iter": self.n_iter_,
        }

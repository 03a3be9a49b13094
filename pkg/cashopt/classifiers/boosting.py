"""Second-order gradient boosting of regression trees on the logistic loss.

Split gain, leaf weights, gamma and min_child_weight follow the usual
xgboost formulation with L2 leaf penalty lambda = 1:

    leaf weight = -G / (H + lambda)
    gain = 1/2 [GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)] - gamma

A round whose tree would raise the full training loss is halved until it does
not (dropped after 20 halvings), so the training loss never increases.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import expit

from .base import BaseClassifier

logger = logging.getLogger(__name__)

LEAF_LAMBDA = 1.0
MAX_HALVINGS = 20


def logistic_loss(y: np.ndarray, margin: np.ndarray) -> float:
    """Mean log-loss of raw margins."""
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


@dataclass
class RegressionTree:
    """Flat array tree; ``feature == -1`` marks a leaf."""

    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    value: List[float] = field(default_factory=list)

    def add_leaf(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        return len(self.feature) - 1

    @property
    def n_leaves(self) -> int:
        return sum(1 for f in self.feature if f == -1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            split = feature[node] >= 0
            if not split.any():
                break
            idx = rows[split]
            goes_left = X[idx, feature[node[idx]]] <= threshold[node[idx]]
            node[idx] = np.where(goes_left, left[node[idx]], right[node[idx]])
        return np.asarray(self.value)[node]


def best_split(
    X: np.ndarray, g: np.ndarray, h: np.ndarray, gamma: float, min_child_weight: float
) -> Optional[Tuple[int, float, float]]:
    """Exact greedy split search; returns (feature, threshold, gain) or None."""
    G, H = g.sum(), h.sum()
    parent = G * G / (H + LEAF_LAMBDA)
    best: Optional[Tuple[int, float, float]] = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        GL = np.cumsum(g[order])[:-1]
        HL = np.cumsum(h[order])[:-1]
        GR, HR = G - GL, H - HL
        valid = (xs[:-1] < xs[1:]) & (HL >= min_child_weight) & (HR >= min_child_weight)
        if not valid.any():
            continue
        gain = 0.5 * (GL**2 / (HL + LEAF_LAMBDA) + GR**2 / (HR + LEAF_LAMBDA) - parent) - gamma
        gain = np.where(valid, gain, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > 0 and (best is None or gain[k] > best[2]):
            best = (f, float((xs[k] + xs[k + 1]) / 2.0), float(gain[k]))
    return best


def grow_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    max_depth: int,
    gamma: float,
    min_child_weight: float,
) -> RegressionTree:
    tree = RegressionTree()

    def _grow(rows: np.ndarray, depth: int) -> int:
        node = tree.add_leaf(-g[rows].sum() / (h[rows].sum() + LEAF_LAMBDA))
        if depth >= max_depth or len(rows) < 2:
            return node
        split = best_split(X[rows], g[rows], h[rows], gamma, min_child_weight)
        if split is None:
            return node
        feature, threshold, _ = split
        goes_left = X[rows, feature] <= threshold
        tree.feature[node] = feature
        tree.threshold[node] = threshold
        tree.left[node] = _grow(rows[goes_left], depth + 1)
        tree.right[node] = _grow(rows[~goes_left], depth + 1)
        return node

    _grow(np.arange(X.shape[0]), 0)
    return tree


class GradientBoostingClassifier(BaseClassifier):
    """xgboost-style boosting with per-round row subsampling."""

    name = "xgboost"

    def __init__(
        self,
        n_rounds: int = 100,
        max_depth: int = 6,
        learning_rate: float = 0.3,
        gamma: float = 0.0,
        min_child_weight: float = 1.0,
        subsample: float = 1.0,
        seed: Optional[int] = None,
    ):
        super().__init__(seed)
        self.n_rounds = int(n_rounds)
        self.max_depth = int(max_depth)
        self.learning_rate = float(learning_rate)
        self.gamma = float(gamma)
        self.min_child_weight = float(min_child_weight)
        self.subsample = float(subsample)
        self.trees_: List[RegressionTree] = []
        self.scales_: List[float] = []
        self.train_loss_: List[float] = []

    def _fit(self, X, y):
        n = len(y)
        yf = y.astype(float)
        prior = yf.mean()
        self.base_margin_ = float(np.log(prior / (1.0 - prior)))
        margin = np.full(n, self.base_margin_)
        loss = logistic_loss(yf, margin)
        self.train_loss_ = [loss]
        self.trees_, self.scales_ = [], []
        rng = np.random.default_rng(self.seed)
        n_sub = max(2, int(round(self.subsample * n)))
        for _ in range(self.n_rounds):
            rows = np.sort(rng.choice(n, size=min(n, n_sub), replace=False))
            p = expit(margin[rows])
            g, h = p - yf[rows], p * (1.0 - p)
            tree = grow_tree(X[rows], g, h, self.max_depth, self.gamma, self.min_child_weight)
            update = tree.predict(X)
            scale = self.learning_rate
            for _ in range(MAX_HALVINGS):
                candidate = logistic_loss(yf, margin + scale * update)
                if candidate <= loss:
                    break
                scale *= 0.5
            else:
                scale = 0.0
                candidate = loss
            margin = margin + scale * update
            loss = candidate
            self.trees_.append(tree)
            self.scales_.append(scale)
            self.train_loss_.append(loss)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        margin = np.full(X.shape[0], self.base_margin_)
        for tree, scale in zip(self.trees_, self.scales_):
            if scale:
                margin += scale * tree.predict(X)
        return margin

    def _predict_proba(self, X):
        return expit(self.decision_function(X))

    def _state(self):
        return {
            "n_rounds": len(self.trees_),
            "max_depth": self.max_depth,
            "n_leaves": int(sum(t.n_leaves for t in self.trees_)),
            "final_train_loss": self.train_loss_[-1] if self.train_loss_ else None,
        }

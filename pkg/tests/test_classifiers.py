"""Tests for the step-10 classifiers and their registry."""

import numpy as np
import pytest

from cashopt.classifiers import (
    CLASSIFIER_CHOICES,
    REGISTRY,
    ClassifierConfig,
    DimensionMismatchError,
    build_classifier,
)
from cashopt.classifiers.boosting import GradientBoostingClassifier
from cashopt.classifiers.discriminant import LDAClassifier, QDAClassifier
from cashopt.classifiers.logistic import LogisticRegressionClassifier, smooth_loss_and_grad
from cashopt.classifiers.naive_bayes import GaussianNBClassifier
from cashopt.classifiers.svm import SVMClassifier, kernel_matrix, smo_solve
from cashopt.metrics import auc
from cashopt.search_space import CLASSIFIERS

PARAMS = {
    "svm": {"kernel": "rbf", "C": 10.0, "degree": 3, "coef0": 0.0, "gamma": 0.1},
    "random_forest": {"n_estimators": 30, "min_samples_split": 2, "max_depth": 5},
    "logistic_regression": {"C": 0.5, "solver": "lbfgs", "penalty": "l2", "l1_ratio": 0.5},
    "lda": {"solver": "svd", "shrinkage": 0.1},
    "qda": {"reg_param": 0.1},
    "gaussian_nb": {"var_smoothing": 1e-9},
    "adaboost": {"n_estimators": 20, "learning_rate": 0.5},
    "xgboost": {
        "n_rounds": 20,
        "max_depth": 3,
        "learning_rate": 0.3,
        "gamma": 0.01,
        "min_child_weight": 1,
        "subsample": 0.8,
    },
}


@pytest.fixture
def separable():
    rng = np.random.default_rng(0)
    y = np.array([0, 1] * 30)
    X = rng.standard_normal((60, 3))
    X[:, 0] += 3.0 * y
    return X, y


def test_registry_covers_search_space():
    assert set(CLASSIFIER_CHOICES) == set(CLASSIFIERS)
    assert len(REGISTRY) == 8


def test_unknown_choice():
    with pytest.raises(KeyError, match="Classifier not found"):
        build_classifier(ClassifierConfig("perceptron"))


@pytest.mark.parametrize("choice", sorted(PARAMS))
def test_each_classifier_learns_signal(choice, separable):
    X, y = separable
    clf = build_classifier(ClassifierConfig(choice, PARAMS[choice], seed=1)).fit(X, y)
    proba = clf.predict_proba(X)
    assert proba.shape == (60,)
    assert np.all((proba >= 0.0) & (proba <= 1.0))
    assert auc(y, proba) > 0.9
    assert clf.describe()["kind"] == choice


@pytest.mark.parametrize("choice", ["random_forest", "adaboost", "xgboost", "svm"])
def test_same_seed_same_posteriors(choice, separable):
    X, y = separable
    a = build_classifier(ClassifierConfig(choice, PARAMS[choice], seed=7)).fit(X, y)
    b = build_classifier(ClassifierConfig(choice, PARAMS[choice], seed=7)).fit(X, y)
    assert np.array_equal(a.predict_proba(X), b.predict_proba(X))


class TestBaseContract:
    def test_rejects_nan(self, separable):
        X, y = separable
        X = X.copy()
        X[0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            LDAClassifier().fit(X, y)

    def test_rejects_single_class(self, separable):
        X, _ = separable
        with pytest.raises(ValueError, match="both classes"):
            LDAClassifier().fit(X, np.zeros(60, dtype=int))

    def test_dimension_mismatch(self, separable):
        X, y = separable
        clf = LDAClassifier().fit(X, y)
        with pytest.raises(DimensionMismatchError):
            clf.predict_proba(X[:, :2])

    def test_predict_before_fit(self, separable):
        with pytest.raises(RuntimeError):
            QDAClassifier().predict_proba(separable[0])

    def test_hard_prediction_threshold(self, separable):
        X, y = separable
        clf = LDAClassifier().fit(X, y)
        proba = clf.predict_proba(X)
        assert np.array_equal(clf.predict(X), (proba >= 0.5).astype(int))


class TestSVM:
    def test_smo_satisfies_equality_constraint(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]])
        y_pm = np.array([-1.0, -1.0, 1.0, 1.0])
        K = kernel_matrix(X, X, "linear", 3, 0.0, 1.0)
        alpha, bias, converged = smo_solve(K, y_pm, C=10.0)
        assert converged
        assert alpha @ y_pm == pytest.approx(0.0, abs=1e-8)
        assert np.all((alpha >= 0) & (alpha <= 10.0))
        decision = K @ (alpha * y_pm) + bias
        assert np.all(np.sign(decision) == y_pm)

    def test_poly_kernel_uses_unit_gamma(self):
        X = np.array([[1.0, 2.0]])
        K = kernel_matrix(X, X, "poly", 2, 1.0, 123.0)
        assert K[0, 0] == pytest.approx((5.0 + 1.0) ** 2)

    def test_unknown_kernel(self):
        with pytest.raises(ValueError):
            SVMClassifier(kernel="sigmoid")


class TestLogisticRegression:
    def test_gradient_matches_finite_differences(self, separable):
        X, y = separable
        y = y.astype(float)
        rng = np.random.default_rng(3)
        w, b = rng.standard_normal(3) * 0.1, 0.2
        _, grad_w, grad_b = smooth_loss_and_grad(w, b, X, y, lam=0.05, r=0.3)
        eps = 1e-6
        for k in range(3):
            step = np.zeros(3)
            step[k] = eps
            up = smooth_loss_and_grad(w + step, b, X, y, 0.05, 0.3)[0]
            down = smooth_loss_and_grad(w - step, b, X, y, 0.05, 0.3)[0]
            assert grad_w[k] == pytest.approx((up - down) / (2 * eps), abs=1e-5)
        up = smooth_loss_and_grad(w, b + eps, X, y, 0.05, 0.3)[0]
        down = smooth_loss_and_grad(w, b - eps, X, y, 0.05, 0.3)[0]
        assert grad_b == pytest.approx((up - down) / (2 * eps), abs=1e-5)

    def test_l1_zeroes_noise_coefficients(self, separable):
        X, y = separable
        clf = LogisticRegressionClassifier(C=0.1, penalty="l1").fit(X, y)
        assert abs(clf.coef_[0]) > 0
        assert np.count_nonzero(clf.coef_[1:]) < 2

    def test_invalid_settings(self):
        with pytest.raises(ValueError):
            LogisticRegressionClassifier(penalty="l0")
        with pytest.raises(ValueError):
            LogisticRegressionClassifier(solver="newton")


def test_boosting_training_loss_never_increases(separable):
    X, y = separable
    clf = GradientBoostingClassifier(n_rounds=15, max_depth=2, subsample=0.7, seed=0).fit(X, y)
    losses = np.array(clf.train_loss_)
    assert np.all(np.diff(losses) <= 1e-12)


def test_naive_bayes_degenerate_returns_prior():
    X = np.ones((6, 2))
    y = np.array([0, 1, 1, 1, 0, 1])
    clf = GaussianNBClassifier().fit(X, y)
    assert np.allclose(clf.predict_proba(X), 4 / 6)


def test_lda_shrinkage_is_clamped(separable):
    X, y = separable
    clf = LDAClassifier(shrinkage=1e5).fit(X, y)
    assert clf.describe()["shrinkage"] == 1.0


def test_qda_with_collinear_features(separable):
    X, y = separable
    X = np.column_stack([X, X[:, 0]])
    clf = QDAClassifier(reg_param=0.0).fit(X, y)
    assert np.isfinite(clf.predict_proba(X)).all()


def test_naive_bayes_matches_closed_form_bayes():
    rng = np.random.default_rng(4)
    x = np.r_[rng.normal(0.0, 1.0, 15), rng.normal(1.5, 2.0, 10)]
    y = np.r_[np.zeros(15, dtype=int), np.ones(10, dtype=int)]
    clf = GaussianNBClassifier(var_smoothing=1e-9).fit(x[:, None], y)

    eps = 1e-9 * x.var()
    grid = np.linspace(-3.0, 4.0, 15)
    log_joint = []
    for k in (0, 1):
        mu, var = x[y == k].mean(), x[y == k].var() + eps
        log_joint.append(
            np.log(np.mean(y == k)) - 0.5 * np.log(2 * np.pi * var) - (grid - mu) ** 2 / (2 * var)
        )
    expected = 1.0 / (1.0 + np.exp(log_joint[0] - log_joint[1]))
    assert clf.predict_proba(grid[:, None]) == pytest.approx(expected, abs=1e-6)


def test_smo_kkt_conditions():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((16, 2))
    y_pm = np.where(X[:, 0] + 0.5 * rng.standard_normal(16) > 0, 1.0, -1.0)
    C = 1.0
    K = kernel_matrix(X, X, "rbf", 3, 0.0, 0.5)
    alpha, bias, converged = smo_solve(K, y_pm, C=C, tol=1e-6)
    assert converged
    margin = y_pm * (K @ (alpha * y_pm) + bias)
    at_zero = alpha < 1e-8
    at_bound = alpha > C - 1e-8
    free = ~(at_zero | at_bound)
    assert np.all(margin[at_zero] >= 1.0 - 1e-3)
    assert np.all(margin[at_bound] <= 1.0 + 1e-3)
    assert np.allclose(margin[free], 1.0, atol=1e-3)

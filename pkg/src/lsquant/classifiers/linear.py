"""Linear classifiers: penalized logistic regression, hinge-loss SGD
with elastic net, and a primal linear SVM. Multiclass is one-vs-rest;
class scores are the raw decision margins."""
from __future__ import annotations

import time

import numpy as np

from ._kernels import logistic_prox_fit, sgd_hinge_fit
from .base import BaseClassifier, check_fit_inputs, check_predict_inputs


def _lipschitz_step(X: np.ndarray) -> float:
    """1 / L for the mean logistic loss over [X, 1]."""
    aug = np.column_stack([X, np.ones(X.shape[0])])
    gram = aug.T @ aug / X.shape[0]
    l_max = float(np.linalg.eigvalsh(gram)[-1]) / 4.0
    return 1.0 / max(l_max, 1e-12)


class _LinearMixin(BaseClassifier):
    def class_scores(self, X) -> np.ndarray:
        X = check_predict_inputs(X, self.coef_.shape[1])
        return X @ self.coef_.T + self.intercept_

    def to_state(self) -> dict:
        return {
            **self._hyper_state(),
            "classes": self.classes_.tolist(),
            "coef": self.coef_.tolist(),
            "intercept": self.intercept_.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict):
        state = dict(state)
        classes = state.pop("classes")
        coef = state.pop("coef")
        intercept = state.pop("intercept")
        model = cls(**state)
        model.classes_ = np.asarray(classes, dtype=np.int64)
        model.coef_ = np.asarray(coef, dtype=float)
        model.intercept_ = np.asarray(intercept, dtype=float)
        return model


class LogisticRegression(_LinearMixin):
    """L1- or L2-penalized logistic regression fit by proximal gradient
    descent (soft-thresholding or shrinkage) with momentum and restarts.
    The intercept is unpenalized; lam scales the penalty against the
    mean log loss."""

    algorithm = "logistic"

    def __init__(
        self,
        penalty: str = "l2",
        lam: float = 1e-3,
        tol: float = 1e-6,
        max_iter: int = 1000,
    ):
        if penalty not in ("l1", "l2"):
            raise ValueError("penalty must be 'l1' or 'l2'")
        if lam < 0:
            raise ValueError("lam must be non-negative")
        self.penalty = penalty
        self.lam = lam
        self.tol = tol
        self.max_iter = max_iter

    def _hyper_state(self) -> dict:
        return {
            "penalty": self.penalty,
            "lam": self.lam,
            "tol": self.tol,
            "max_iter": self.max_iter,
        }

    def fit(self, X, y):
        t0 = time.perf_counter()
        X, y = check_fit_inputs(X, y)
        self.classes_ = np.unique(y)
        step = _lipschitz_step(X)
        coef = np.empty((len(self.classes_), X.shape[1]))
        intercept = np.empty(len(self.classes_))
        iters = 0
        converged = True
        for idx, cls in enumerate(self.classes_):
            z = np.where(y == cls, 1.0, -1.0)
            w, b, it, conv = logistic_prox_fit(
                X, z, self.lam, self.penalty == "l1", step, self.max_iter, self.tol
            )
            coef[idx] = w
            intercept[idx] = b
            iters = max(iters, it)
            converged = converged and bool(conv)
        self.coef_ = coef
        self.intercept_ = intercept
        self._finish_report(X, y, iters, converged, time.perf_counter() - t0)
        return self


class SGDClassifier(_LinearMixin):
    """Hinge loss with an elastic-net penalty, per-sample updates.

    The learning rate decays as gamma0 / (1 + gamma0 * alpha * t) over
    the update counter t; each epoch visits the samples in a freshly
    shuffled order drawn from the seed, and the same visit order is
    reused for every one-vs-rest subproblem.
    """

    algorithm = "sgd"

    def __init__(
        self,
        alpha: float = 1e-4,
        l1_ratio: float = 0.15,
        epochs: int = 5,
        gamma0: float = 1.0,
        seed: int | None = None,
    ):
        if not 0.0 <= l1_ratio <= 1.0:
            raise ValueError("l1_ratio must lie in [0, 1]")
        if epochs <= 0 or alpha < 0 or gamma0 <= 0:
            raise ValueError("bad SGD hyperparameters")
        self.alpha = alpha
        self.l1_ratio = l1_ratio
        self.epochs = epochs
        self.gamma0 = gamma0
        self.seed = seed

    def _hyper_state(self) -> dict:
        return {
            "alpha": self.alpha,
            "l1_ratio": self.l1_ratio,
            "epochs": self.epochs,
            "gamma0": self.gamma0,
            "seed": self.seed,
        }

    def fit(self, X, y):
        t0 = time.perf_counter()
        X, y = check_fit_inputs(X, y)
        self.classes_ = np.unique(y)
        n = X.shape[0]
        rng = np.random.default_rng(self.seed)
        visit_order = np.concatenate(
            [rng.permutation(n) for _ in range(self.epochs)]
        ).astype(np.int64)
        coef = np.empty((len(self.classes_), X.shape[1]))
        intercept = np.empty(len(self.classes_))
        for idx, cls in enumerate(self.classes_):
            z = np.where(y == cls, 1.0, -1.0)
            w, b = sgd_hinge_fit(
                X, z, visit_order, self.alpha, self.l1_ratio, self.gamma0
            )
            coef[idx] = w
            intercept[idx] = b
        self.coef_ = coef
        self.intercept_ = intercept
        self._finish_report(X, y, self.epochs, True, time.perf_counter() - t0)
        return self


class LinearSVM(_LinearMixin):
    """Soft-margin linear SVM by batch subgradient descent on the primal
    0.5 ||w||^2 / C + mean hinge, step C / (t+1). The mean makes the
    objective invariant to duplicating the training set."""

    algorithm = "svm"

    def __init__(self, C: float = 1.0, max_iter: int = 1000, tol: float = 1e-6):
        if C <= 0:
            raise ValueError("C must be positive")
        self.C = C
        self.max_iter = max_iter
        self.tol = tol

    def _hyper_state(self) -> dict:
        return {"C": self.C, "max_iter": self.max_iter, "tol": self.tol}

    def _fit_binary(self, X, z) -> tuple[np.ndarray, float, int, bool]:
        n = X.shape[0]
        w = np.zeros(X.shape[1])
        b = 0.0
        for t in range(self.max_iter):
            margins = X @ w + b
            viol = z * margins < 1.0
            g_w = w / self.C
            g_b = 0.0
            if viol.any():
                g_w = g_w - (z[viol] @ X[viol]) / n
                g_b = -z[viol].sum() / n
            eta = self.C / (t + 1.0)
            step_w = eta * g_w
            step_b = eta * g_b
            w = w - step_w
            b = b - step_b
            if max(np.abs(step_w).max(initial=0.0), abs(step_b)) < self.tol:
                return w, b, t + 1, True
        return w, b, self.max_iter, False

    def fit(self, X, y):
        t0 = time.perf_counter()
        X, y = check_fit_inputs(X, y)
        self.classes_ = np.unique(y)
        coef = np.empty((len(self.classes_), X.shape[1]))
        intercept = np.empty(len(self.classes_))
        iters = 0
        converged = True
        for idx, cls in enumerate(self.classes_):
            z = np.where(y == cls, 1.0, -1.0)
            w, b, it, conv = self._fit_binary(X, z)
            coef[idx] = w
            intercept[idx] = b
            iters = max(iters, it)
            converged = converged and conv
        self.coef_ = coef
        self.intercept_ = intercept
        self._finish_report(X, y, iters, converged, time.perf_counter() - t0)
        return self

"""Naive Bayes classifiers."""
from __future__ import annotations

import time

import numpy as np

from .base import BaseClassifier, check_fit_inputs, check_predict_inputs

LOG_2PI = np.log(2.0 * np.pi)


class GaussianNB(BaseClassifier):
    """Gaussian naive Bayes with a variance floor.

    Per-class feature variances are floored at 1e-9 times the largest
    overall feature variance so degenerate features cannot produce
    infinite densities.
    """

    algorithm = "gaussian_nb"

    def __init__(self, var_smoothing: float = 1e-9):
        self.var_smoothing = var_smoothing

    def fit(self, X, y):
        t0 = time.perf_counter()
        X, y = check_fit_inputs(X, y)
        self.classes_, counts = np.unique(y, return_counts=True)
        self.priors_ = counts / len(y)
        floor = self.var_smoothing * float(np.max(X.var(axis=0), initial=0.0))
        if floor <= 0.0:
            floor = self.var_smoothing
        self.floor_ = floor
        self.theta_ = np.vstack([X[y == c].mean(axis=0) for c in self.classes_])
        self.var_ = np.vstack(
            [np.maximum(X[y == c].var(axis=0), floor) for c in self.classes_]
        )
        self.n_features_ = X.shape[1]
        self._finish_report(X, y, 1, True, time.perf_counter() - t0)
        return self

    def class_scores(self, X) -> np.ndarray:
        """Joint log density log P(class) + log P(x | class)."""
        X = check_predict_inputs(X, self.n_features_)
        out = np.empty((X.shape[0], len(self.classes_)))
        for idx in range(len(self.classes_)):
            var = self.var_[idx]
            diff = X - self.theta_[idx]
            ll = -0.5 * (LOG_2PI + np.log(var) + diff * diff / var).sum(axis=1)
            out[:, idx] = np.log(self.priors_[idx]) + ll
        return out

    def to_state(self) -> dict:
        return {
            "var_smoothing": self.var_smoothing,
            "classes": self.classes_.tolist(),
            "priors": self.priors_.tolist(),
            "theta": self.theta_.tolist(),
            "var": self.var_.tolist(),
            "floor": self.floor_,
            "n_features": self.n_features_,
        }

    @classmethod
    def from_state(cls, state: dict) -> "GaussianNB":
        model = cls(var_smoothing=state["var_smoothing"])
        model.classes_ = np.asarray(state["classes"], dtype=np.int64)
        model.priors_ = np.asarray(state["priors"], dtype=float)
        model.theta_ = np.asarray(state["theta"], dtype=float)
        model.var_ = np.asarray(state["var"], dtype=float)
        model.floor_ = state["floor"]
        model.n_features_ = state["n_features"]
        return model


class BernoulliNB(BaseClassifier):
    """Bernoulli naive Bayes over features binarized at a threshold,
    with add-one smoothing on the per-class activation rates."""

    algorithm = "bernoulli_nb"

    def __init__(self, binarize_at: float = 0.0):
        self.binarize_at = binarize_at

    def fit(self, X, y):
        t0 = time.perf_counter()
        X, y = check_fit_inputs(X, y)
        xb = X > self.binarize_at
        self.classes_, counts = np.unique(y, return_counts=True)
        self.priors_ = counts / len(y)
        rates = np.vstack(
            [
                (xb[y == c].sum(axis=0) + 1.0) / (cnt + 2.0)
                for c, cnt in zip(self.classes_, counts)
            ]
        )
        self.log_rate_ = np.log(rates)
        self.log_rate_c_ = np.log1p(-rates)
        self.n_features_ = X.shape[1]
        self._finish_report(X, y, 1, True, time.perf_counter() - t0)
        return self

    def class_scores(self, X) -> np.ndarray:
        X = check_predict_inputs(X, self.n_features_)
        xb = (X > self.binarize_at).astype(float)
        out = np.empty((X.shape[0], len(self.classes_)))
        for idx in range(len(self.classes_)):
            ll = xb @ self.log_rate_[idx] + (1.0 - xb) @ self.log_rate_c_[idx]
            out[:, idx] = np.log(self.priors_[idx]) + ll
        return out

    def to_state(self) -> dict:
        return {
            "binarize_at": self.binarize_at,
            "classes": self.classes_.tolist(),
            "priors": self.priors_.tolist(),
            "log_rate": self.log_rate_.tolist(),
            "log_rate_c": self.log_rate_c_.tolist(),
            "n_features": self.n_features_,
        }

    @classmethod
    def from_state(cls, state: dict) -> "BernoulliNB":
        model = cls(binarize_at=state["binarize_at"])
        model.classes_ = np.asarray(state["classes"], dtype=np.int64)
        model.priors_ = np.asarray(state["priors"], dtype=float)
        model.log_rate_ = np.asarray(state["log_rate"], dtype=float)
        model.log_rate_c_ = np.asarray(state["log_rate_c"], dtype=float)
        model.n_features_ = state["n_features"]
        return model

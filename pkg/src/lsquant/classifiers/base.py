"""Shared classifier contract.

Every classifier exposes fit(X, y) -> self, predict(X), class_scores(X)
(one native score column per class, argmax consistent with predict),
class_probabilities(X) and predict_score(X) (the winning class's score).
Fitted models carry classes_ and a fit_report_.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FitReport:
    train_accuracy: float
    n_iterations: int
    converged: bool
    wall_time_s: float


def check_fit_inputs(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    if y.ndim != 1 or len(y) != X.shape[0]:
        raise ValueError("y must be 1-D with one label per row of X")
    if X.shape[0] == 0:
        raise ValueError("cannot fit on zero samples")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    return X, y.astype(np.int64)


def check_predict_inputs(X, n_features: int) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    if X.shape[1] != n_features:
        raise ValueError(
            f"X has {X.shape[1]} features, model was fit on {n_features}"
        )
    return X


class BaseClassifier:
    """Mixin providing the derived prediction surface."""

    algorithm: str = ""
    classes_: np.ndarray

    def class_scores(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        scores = self.class_scores(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def class_probabilities(self, X) -> np.ndarray:
        scores = self.class_scores(X)
        shifted = scores - scores.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)

    def predict_score(self, X) -> np.ndarray:
        return self.class_scores(X).max(axis=1)

    def _finish_report(
        self, X, y, n_iterations: int, converged: bool, wall_time_s: float
    ) -> None:
        acc = float(np.mean(self.predict(X) == y)) if len(y) else 0.0
        self.fit_report_ = FitReport(
            train_accuracy=acc,
            n_iterations=n_iterations,
            converged=converged,
            wall_time_s=wall_time_s,
        )

"""Entropy decision tree and bootstrap random forest."""
from __future__ import annotations

import time

import numpy as np

from ._kernels import best_entropy_split
from .base import BaseClassifier, check_fit_inputs, check_predict_inputs

# Gains this small are treated as zero so float noise on a useless
# split cannot force an extra level.
ZERO_GAIN_TOL = 1e-12


class DecisionTree(BaseClassifier):
    """Greedy binary tree maximizing information gain.

    Candidate thresholds are the midpoints between consecutive distinct
    sorted values of each feature. Growth stops on depth, purity, too few
    samples for min_leaf children, or zero gain. A leaf predicts its
    majority class; ties go to the class with more mass in the whole
    training set, then to the lower class value.
    """

    algorithm = "decision_tree"

    def __init__(
        self,
        max_depth: int | None = 8,
        min_leaf: int = 5,
        max_features: int | None = None,
        rng: np.random.Generator | None = None,
    ):
        if max_depth is not None and max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if min_leaf < 1:
            raise ValueError("min_leaf must be at least 1")
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.rng = rng

    def fit(self, X, y):
        t0 = time.perf_counter()
        X, y = check_fit_inputs(X, y)
        self.classes_ = np.unique(y)
        codes = np.searchsorted(self.classes_, y)
        n_classes = len(self.classes_)
        self.total_counts_ = np.bincount(codes, minlength=n_classes).astype(float)
        self.n_features_ = X.shape[1]

        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        counts: list[np.ndarray] = []

        mf = self.max_features if self.max_features is not None else X.shape[1]
        mf = min(mf, X.shape[1])
        if mf < 1:
            raise ValueError("max_features must be at least 1")
        all_feats = np.arange(X.shape[1], dtype=np.int64)

        def grow(rows: np.ndarray, depth: int) -> int:
            node = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            node_counts = np.bincount(codes[rows], minlength=n_classes).astype(float)
            counts.append(node_counts)

            n_here = len(rows)
            pure = np.count_nonzero(node_counts) <= 1
            depth_stop = self.max_depth is not None and depth >= self.max_depth
            if pure or depth_stop or n_here < 2 * self.min_leaf:
                return node
            if mf < X.shape[1]:
                feats = np.sort(self.rng.choice(X.shape[1], mf, replace=False))
                feats = feats.astype(np.int64)
            else:
                feats = all_feats
            f, thr, gain = best_entropy_split(
                X[rows], codes[rows], feats, n_classes, self.min_leaf
            )
            if f < 0 or gain <= ZERO_GAIN_TOL:
                return node
            go_left = X[rows, f] <= thr
            feature[node] = int(f)
            threshold[node] = float(thr)
            left[node] = grow(rows[go_left], depth + 1)
            right[node] = grow(rows[~go_left], depth + 1)
            return node

        grow(np.arange(len(y)), 0)
        self.feature_ = np.asarray(feature, dtype=np.int64)
        self.threshold_ = np.asarray(threshold, dtype=float)
        self.left_ = np.asarray(left, dtype=np.int64)
        self.right_ = np.asarray(right, dtype=np.int64)
        self.counts_ = np.vstack(counts)
        self.leaf_class_ = self._decide_classes(self.counts_)
        self._finish_report(X, y, len(feature), True, time.perf_counter() - t0)
        return self

    def _decide_classes(self, counts: np.ndarray) -> np.ndarray:
        """Majority class per node; ties prefer more total training
        mass, then the lower class value."""
        class_idx = np.arange(len(self.classes_))
        out = np.empty(len(counts), dtype=np.int64)
        for i, node_counts in enumerate(counts):
            order = np.lexsort((class_idx, -self.total_counts_, -node_counts))
            out[i] = order[0]
        return out

    def _leaf_of(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            feats = self.feature_[node]
            active = feats >= 0
            if not active.any():
                return node
            rows = np.flatnonzero(active)
            vals = X[rows, feats[rows]]
            thr = self.threshold_[node[rows]]
            nxt = np.where(vals <= thr, self.left_[node[rows]], self.right_[node[rows]])
            node[rows] = nxt

    def predict(self, X) -> np.ndarray:
        X = check_predict_inputs(X, self.n_features_)
        return self.classes_[self.leaf_class_[self._leaf_of(X)]]

    def class_scores(self, X) -> np.ndarray:
        """Class frequency of the landing leaf."""
        X = check_predict_inputs(X, self.n_features_)
        c = self.counts_[self._leaf_of(X)]
        return c / c.sum(axis=1, keepdims=True)

    def class_probabilities(self, X) -> np.ndarray:
        return self.class_scores(X)

    def to_state(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "max_features": self.max_features,
            "classes": self.classes_.tolist(),
            "total_counts": self.total_counts_.tolist(),
            "n_features": self.n_features_,
            "feature": self.feature_.tolist(),
            "threshold": self.threshold_.tolist(),
            "left": self.left_.tolist(),
            "right": self.right_.tolist(),
            "counts": self.counts_.tolist(),
            "leaf_class": self.leaf_class_.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "DecisionTree":
        model = cls(
            max_depth=state["max_depth"],
            min_leaf=state["min_leaf"],
            max_features=state["max_features"],
        )
        model.classes_ = np.asarray(state["classes"], dtype=np.int64)
        model.total_counts_ = np.asarray(state["total_counts"], dtype=float)
        model.n_features_ = state["n_features"]
        model.feature_ = np.asarray(state["feature"], dtype=np.int64)
        model.threshold_ = np.asarray(state["threshold"], dtype=float)
        model.left_ = np.asarray(state["left"], dtype=np.int64)
        model.right_ = np.asarray(state["right"], dtype=np.int64)
        model.counts_ = np.asarray(state["counts"], dtype=float)
        model.leaf_class_ = np.asarray(state["leaf_class"], dtype=np.int64)
        return model


class RandomForest(BaseClassifier):
    """Majority vote over bootstrapped entropy trees.

    Each tree grows on a bootstrap resample (size n, with replacement)
    and draws a fresh random feature subset at every node, ceil(sqrt(d))
    features by default. Prediction ties go to the lower class value.
    Out-of-bag error is tracked over samples left out of at least one
    bootstrap; samples in every bag are excluded and counted.
    """

    algorithm = "random_forest"

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int | None = 8,
        min_leaf: int = 5,
        max_features: int | None = None,
        bootstrap: bool = True,
        seed: int | None = None,
    ):
        if n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X, y):
        t0 = time.perf_counter()
        X, y = check_fit_inputs(X, y)
        self.classes_ = np.unique(y)
        n, d = X.shape
        n_classes = len(self.classes_)
        mf = self.max_features
        if mf is None:
            mf = int(np.ceil(np.sqrt(d)))
        self.max_features_ = mf

        seed_seq = np.random.SeedSequence(self.seed)
        children = seed_seq.spawn(self.n_trees)
        self.trees_: list[DecisionTree] = []
        oob_votes = np.zeros((n, n_classes))
        for child in children:
            rng = np.random.default_rng(child)
            if self.bootstrap:
                idx = rng.integers(0, n, n)
            else:
                idx = np.arange(n)
            tree = DecisionTree(
                max_depth=self.max_depth,
                min_leaf=self.min_leaf,
                max_features=mf,
                rng=rng,
            ).fit(X[idx], y[idx])
            self.trees_.append(tree)
            if self.bootstrap:
                out_of_bag = np.ones(n, dtype=bool)
                out_of_bag[idx] = False
                if out_of_bag.any():
                    pred = tree.predict(X[out_of_bag])
                    cols = np.searchsorted(self.classes_, pred)
                    oob_votes[np.flatnonzero(out_of_bag), cols] += 1.0

        self.n_features_ = d
        if self.bootstrap:
            covered = oob_votes.sum(axis=1) > 0
            self.oob_uncovered_ = int(n - covered.sum())
            if covered.any():
                oob_pred = self.classes_[np.argmax(oob_votes[covered], axis=1)]
                self.oob_error_ = float(np.mean(oob_pred != y[covered]))
            else:
                self.oob_error_ = None
        else:
            self.oob_error_ = None
            self.oob_uncovered_ = 0
        self._finish_report(X, y, self.n_trees, True, time.perf_counter() - t0)
        return self

    def class_scores(self, X) -> np.ndarray:
        """Fraction of trees voting for each class."""
        X = check_predict_inputs(X, self.n_features_)
        votes = np.zeros((len(X), len(self.classes_)))
        for tree in self.trees_:
            pred = tree.predict(X)
            cols = np.searchsorted(self.classes_, pred)
            votes[np.arange(len(X)), cols] += 1.0
        return votes / self.n_trees

    def class_probabilities(self, X) -> np.ndarray:
        return self.class_scores(X)

    def to_state(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "classes": self.classes_.tolist(),
            "n_features": self.n_features_,
            "max_features_used": self.max_features_,
            "oob_error": self.oob_error_,
            "oob_uncovered": self.oob_uncovered_,
            "trees": [t.to_state() for t in self.trees_],
        }

    @classmethod
    def from_state(cls, state: dict) -> "RandomForest":
        model = cls(
            n_trees=state["n_trees"],
            max_depth=state["max_depth"],
            min_leaf=state["min_leaf"],
            max_features=state["max_features"],
            bootstrap=state["bootstrap"],
            seed=state["seed"],
        )
        model.classes_ = np.asarray(state["classes"], dtype=np.int64)
        model.n_features_ = state["n_features"]
        model.max_features_ = state["max_features_used"]
        model.oob_error_ = state["oob_error"]
        model.oob_uncovered_ = state["oob_uncovered"]
        model.trees_ = [DecisionTree.from_state(s) for s in state["trees"]]
        return model

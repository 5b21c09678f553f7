"""Tree-based methods: CART, random forest, and gradient-boosted trees.

One array-based tree builder serves all three: greedy binary splits on
midpoint thresholds, Gini impurity for classification and squared error for
regression, ties broken toward the lowest feature index then the lowest
threshold.
"""

from __future__ import annotations

import math

import numpy as np

from ..data import TaskType
from .base import Method, Prediction
from .classical import _softmax


def _split_gains(x_sorted, y_sorted, classification, n_classes):
    """Gain of every (position, feature) split of the sorted node data."""
    n, f = x_sorted.shape
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    if classification:
        # y_sorted differs per feature ordering; build per-feature cumulative
        # class counts from the per-feature sorted labels
        counts = np.zeros((n, f, n_classes))
        cols = np.arange(f)
        counts[np.arange(n)[:, None], cols, y_sorted.astype(np.int64)] = 1.0
        left = np.cumsum(counts, axis=0)[:-1]
        total = left[-1] + counts[-1]
        right = total - left
        child = (
            n_left - (left ** 2).sum(axis=2) / n_left
            + n_right - (right ** 2).sum(axis=2) / n_right
        )
        parent = n - float((total[0] ** 2).sum()) / n
    else:
        csum = np.cumsum(y_sorted, axis=0)[:-1]
        csum2 = np.cumsum(y_sorted ** 2, axis=0)[:-1]
        total = csum[-1] + y_sorted[-1]
        total2 = csum2[-1] + y_sorted[-1] ** 2
        child = (
            csum2 - csum ** 2 / n_left
            + (total2 - csum2) - (total - csum) ** 2 / n_right
        )
        parent = float(total2[0]) - float(total[0]) ** 2 / n
    return parent - child


class _Tree:
    """Flat-array decision tree; feature[i] == -1 marks a leaf."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []

    def _add_node(self, value) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def finalize(self):
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.value = np.stack(self.value)
        return self

    def predict_values(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(x.shape[0], dtype=np.int64)
        while True:
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            active = np.flatnonzero(internal)
            at = node[active]
            goes_left = x[active, self.feature[at]] < self.threshold[at]
            node[active] = np.where(goes_left, self.left[at], self.right[at])
        return self.value[node]


def _leaf_value(y, classification, n_classes):
    if classification:
        counts = np.bincount(y.astype(np.int64), minlength=n_classes)
        return counts / counts.sum()
    return np.array([y.mean()])


def _build_tree(
    x: np.ndarray,
    y: np.ndarray,
    *,
    classification: bool,
    n_classes: int,
    max_depth: int,
    min_leaf: int,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> _Tree:
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    if min_leaf < 1:
        raise ValueError(f"min_samples_leaf must be >= 1, got {min_leaf}")
    tree = _Tree()
    d = x.shape[1]

    def grow(rows: np.ndarray, depth: int) -> int:
        node = tree._add_node(_leaf_value(y[rows], classification, n_classes))
        n = len(rows)
        if depth >= max_depth or n < 2 * min_leaf or d == 0:
            return node
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = np.arange(d)
        xs = x[np.ix_(rows, feats)]
        order = np.argsort(xs, axis=0, kind="stable")
        x_sorted = np.take_along_axis(xs, order, axis=0)
        y_sorted = y[rows][order]
        gains = _split_gains(x_sorted, y_sorted, classification, n_classes)
        positions = np.arange(1, n)[:, None]
        valid = (
            (x_sorted[:-1] < x_sorted[1:])
            & (positions >= min_leaf)
            & (n - positions >= min_leaf)
        )
        gains = np.where(valid, gains, -np.inf)
        # feature-major argmax: ties resolve to the lowest feature index,
        # then the lowest threshold
        flat = np.ascontiguousarray(gains.T).ravel()
        best = int(np.argmax(flat))
        if flat[best] <= 1e-12:
            return node
        f_local, pos = divmod(best, n - 1)
        feature = int(feats[f_local])
        threshold = float(
            (x_sorted[pos, f_local] + x_sorted[pos + 1, f_local]) / 2.0
        )
        left_mask = x[rows, feature] < threshold
        if not left_mask.any() or left_mask.all():
            return node  # midpoint rounded onto a boundary value
        tree.feature[node] = feature
        tree.threshold[node] = threshold
        tree.left[node] = grow(rows[left_mask], depth + 1)
        tree.right[node] = grow(rows[~left_mask], depth + 1)
        return node

    grow(np.arange(x.shape[0]), 0)
    return tree.finalize()


class CARTMethod(Method):
    """Single greedy decision tree."""

    def _fit(self, x_train, y_train, x_val, y_val):
        self._tree = _build_tree(
            x_train,
            y_train.astype(np.float64) if self.is_regression else y_train,
            classification=not self.is_regression,
            n_classes=self.class_count,
            max_depth=int(self.config.model.get("max_depth", 16)),
            min_leaf=int(self.config.model.get("min_samples_leaf", 1)),
        )

    def _predict(self, x) -> Prediction:
        values = self._tree.predict_values(x)
        if self.is_regression:
            return Prediction.regression(values[:, 0])
        return self._classify(values)

    def _state(self):
        t = self._tree
        return (t.feature, t.threshold, t.left, t.right, t.value)

    def model_size(self) -> int:
        return self._tree.n_nodes


class RandomForestMethod(Method):
    """Bagged trees with per-split feature subsampling; vote-fraction probs."""

    def _fit(self, x_train, y_train, x_val, y_val):
        cfg = self.config.model
        n_trees = int(cfg.get("n_trees", 100))
        if n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {n_trees}")
        d = x_train.shape[1]
        max_features = cfg.get("max_features")
        if max_features is None:
            max_features = (
                max(1, math.ceil(d / 3.0))
                if self.is_regression
                else max(1, math.ceil(math.sqrt(d)))
            )
        bootstrap = bool(cfg.get("bootstrap", True))
        y = y_train.astype(np.float64) if self.is_regression else y_train
        n = len(y_train)
        self._trees = []
        for t in range(n_trees):
            rng = np.random.default_rng([self.config.seed, t])
            rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
            self._trees.append(
                _build_tree(
                    x_train[rows],
                    y[rows],
                    classification=not self.is_regression,
                    n_classes=self.class_count,
                    max_depth=int(cfg.get("max_depth", 16)),
                    min_leaf=int(cfg.get("min_samples_leaf", 1)),
                    max_features=int(max_features),
                    rng=rng,
                )
            )

    def _predict(self, x) -> Prediction:
        if self.is_regression:
            total = np.zeros(x.shape[0])
            for tree in self._trees:
                total += tree.predict_values(x)[:, 0]
            return Prediction.regression(total / len(self._trees))
        votes = np.zeros((x.shape[0], self.class_count))
        for tree in self._trees:
            winner = np.argmax(tree.predict_values(x), axis=1)
            votes[np.arange(x.shape[0]), winner] += 1.0
        return self._classify(votes / len(self._trees))

    def _state(self):
        return tuple(
            (t.feature, t.threshold, t.left, t.right, t.value) for t in self._trees
        )

    def model_size(self) -> int:
        return sum(tree.n_nodes for tree in self._trees)


class GBDTMethod(Method):
    """Stagewise regression trees on loss gradients with shrinkage.

    Regression boosts mean squared error from the training mean; classification
    boosts per-class softmax cross-entropy from the log class priors.
    """

    def _fit(self, x_train, y_train, x_val, y_val):
        cfg = self.config.model
        self._n_trees = int(cfg.get("n_trees", 100))
        self._lr = float(cfg.get("learning_rate", 0.1))
        max_depth = int(cfg.get("max_depth", 3))
        if self._n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self._n_trees}")
        min_leaf = int(cfg.get("min_samples_leaf", 1))

        def fit_stage_tree(residual):
            return _build_tree(
                x_train, residual,
                classification=False, n_classes=0,
                max_depth=max_depth, min_leaf=min_leaf,
            )

        if self.is_regression:
            self._init = np.array([float(y_train.mean())])
            scores = np.full(len(y_train), self._init[0])
            self._trees = []
            for _ in range(self._n_trees):
                tree = fit_stage_tree(y_train - scores)
                self._trees.append([tree])
                scores += self._lr * tree.predict_values(x_train)[:, 0]
        else:
            priors = np.bincount(y_train, minlength=self.class_count) / len(y_train)
            self._init = np.log(np.clip(priors, 1e-15, None))
            onehot = np.zeros((len(y_train), self.class_count))
            onehot[np.arange(len(y_train)), y_train] = 1.0
            scores = np.tile(self._init, (len(y_train), 1))
            self._trees = []
            for _ in range(self._n_trees):
                probs = _softmax(scores)
                stage = []
                for c in range(self.class_count):
                    tree = fit_stage_tree(onehot[:, c] - probs[:, c])
                    stage.append(tree)
                    scores[:, c] += self._lr * tree.predict_values(x_train)[:, 0]
                self._trees.append(stage)

    def _raw_scores(self, x) -> np.ndarray:
        width = 1 if self.is_regression else self.class_count
        scores = np.tile(self._init, (x.shape[0], 1))
        for stage in self._trees:
            for c in range(width):
                scores[:, c] += self._lr * stage[c].predict_values(x)[:, 0]
        return scores

    def _predict(self, x) -> Prediction:
        scores = self._raw_scores(x)
        if self.is_regression:
            return Prediction.regression(scores[:, 0])
        return self._classify(_softmax(scores))

    def _state(self):
        trees = tuple(
            tuple((t.feature, t.threshold, t.left, t.right, t.value) for t in stage)
            for stage in self._trees
        )
        return (self._init, self._lr, trees)

    def model_size(self) -> int:
        return sum(tree.n_nodes for stage in self._trees for tree in stage)

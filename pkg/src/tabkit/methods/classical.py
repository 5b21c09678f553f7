"""Classical methods: dummy, nearest-neighbor, centroid, Bayes, and linear models."""

from __future__ import annotations

import numpy as np

from ..data import TaskType
from ..errors import FitError
from .base import Method, Prediction

CLASSIFICATION_TASKS = (TaskType.BINCLASS, TaskType.MULTICLASS)

# full-batch gradient descent settings shared by the linear classifiers
_GD_LR = 0.1
_GD_MAX_ITER = 1000
_GD_GRAD_TOL = 1e-6


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class DummyMethod(Method):
    """Constant baseline: majority class with empirical frequencies, or the
    training-mean label."""

    def _fit(self, x_train, y_train, x_val, y_val):
        if self.is_regression:
            self._mean = float(y_train.mean())
        else:
            counts = np.bincount(y_train, minlength=self.class_count)
            self._probs = counts / counts.sum()

    def _predict(self, x) -> Prediction:
        n = x.shape[0]
        if self.is_regression:
            return Prediction.regression(np.full(n, self._mean))
        return self._classify(np.tile(self._probs, (n, 1)))

    def _state(self):
        return (self._mean,) if self.is_regression else (self._probs,)

    def model_size(self) -> int:
        return 1 if self.is_regression else self.class_count


class KNNMethod(Method):
    """k-nearest neighbors in the encoded feature space (euclidean)."""

    def _fit(self, x_train, y_train, x_val, y_val):
        k = int(self.config.model.get("n_neighbors", 5))
        if k < 1:
            raise ValueError(f"n_neighbors must be >= 1, got {k}")
        if k > len(x_train):
            raise ValueError(
                f"n_neighbors = {k} exceeds the {len(x_train)} training rows"
            )
        self._k = k
        self._x = x_train
        self._y = y_train

    def _neighbors(self, x) -> np.ndarray:
        # accumulate squared distances one feature at a time: exact arithmetic
        # (ties stay ties) without an (n_query, n_train, d) intermediate
        d2 = np.zeros((x.shape[0], self._x.shape[0]))
        for j in range(x.shape[1]):
            d2 += (x[:, j][:, None] - self._x[:, j][None, :]) ** 2
        order = np.argsort(d2, axis=1, kind="stable")
        return order[:, : self._k]

    def _predict(self, x) -> Prediction:
        idx = self._neighbors(x)
        if self.is_regression:
            return Prediction.regression(self._y[idx].mean(axis=1))
        votes = np.zeros((x.shape[0], self.class_count))
        for c in range(self.class_count):
            votes[:, c] = (self._y[idx] == c).sum(axis=1)
        return self._classify(votes / self._k)

    def _state(self):
        return (self._k, self._x, self._y)

    def model_size(self) -> int:
        return self._x.size


class NCMMethod(Method):
    """Nearest class mean; probabilities are a softmax over negated distances."""

    task_types = CLASSIFICATION_TASKS

    def _fit(self, x_train, y_train, x_val, y_val):
        centroids = np.zeros((self.class_count, x_train.shape[1]))
        for c in range(self.class_count):
            members = x_train[y_train == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
        self._centroids = centroids

    def _predict(self, x) -> Prediction:
        dist = np.sqrt(((x[:, None, :] - self._centroids[None]) ** 2).sum(axis=2))
        return self._classify(_softmax(-dist))

    def _state(self):
        return (self._centroids,)

    def model_size(self) -> int:
        return self._centroids.size


class NaiveBayesMethod(Method):
    """Gaussian naive Bayes with a variance floor, scored in the log domain."""

    task_types = CLASSIFICATION_TASKS
    VAR_FLOOR = 1e-9

    def _fit(self, x_train, y_train, x_val, y_val):
        n, d = x_train.shape
        self._means = np.zeros((self.class_count, d))
        self._vars = np.full((self.class_count, d), self.VAR_FLOOR)
        priors = np.zeros(self.class_count)
        for c in range(self.class_count):
            members = x_train[y_train == c]
            priors[c] = len(members) / n
            if len(members):
                self._means[c] = members.mean(axis=0)
                self._vars[c] = np.maximum(members.var(axis=0), self.VAR_FLOOR)
        self._log_priors = np.log(np.clip(priors, 1e-300, None))

    def _predict(self, x) -> Prediction:
        log_joint = np.empty((x.shape[0], self.class_count))
        for c in range(self.class_count):
            diff = x - self._means[c]
            log_likelihood = -0.5 * (
                np.log(2.0 * np.pi * self._vars[c]) + diff ** 2 / self._vars[c]
            ).sum(axis=1)
            log_joint[:, c] = self._log_priors[c] + log_likelihood
        return self._classify(_softmax(log_joint))

    def _state(self):
        return (self._means, self._vars, self._log_priors)

    def model_size(self) -> int:
        return self._means.size + self._vars.size + self._log_priors.size


class LinearRegressionMethod(Method):
    """Ridge regression via the normal equations; the bias is unpenalized."""

    task_types = (TaskType.REGRESSION,)
    L2 = 1e-6

    def _fit(self, x_train, y_train, x_val, y_val):
        n, d = x_train.shape
        design = np.hstack([x_train, np.ones((n, 1))])
        gram = design.T @ design
        penalty = np.full(d + 1, self.L2)
        penalty[-1] = 0.0
        gram += np.diag(penalty)
        try:
            beta = np.linalg.solve(gram, design.T @ y_train)
        except np.linalg.LinAlgError as exc:
            raise FitError(f"ridge system is singular: {exc}") from None
        self._weights = beta[:-1]
        self._bias = float(beta[-1])

    def _predict(self, x) -> Prediction:
        return Prediction.regression(x @ self._weights + self._bias)

    def _state(self):
        return (self._weights, self._bias)

    def model_size(self) -> int:
        return self._weights.size + 1


class _GradientDescentClassifier(Method):
    """Shared full-batch gradient descent loop over (weights, bias)."""

    task_types = CLASSIFICATION_TASKS
    DEFAULT_L2 = 1e-4

    def _fit(self, x_train, y_train, x_val, y_val):
        l2 = float(self.config.model.get("l2", self.DEFAULT_L2))
        if l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {l2}")
        d = x_train.shape[1]
        weights = np.zeros((d, self.class_count))
        bias = np.zeros(self.class_count)
        onehot = np.zeros((len(y_train), self.class_count))
        onehot[np.arange(len(y_train)), y_train] = 1.0
        # a fixed step diverges once the loss curvature exceeds its inverse,
        # which wide encodings can trigger; shrink to match a curvature bound
        curvature = self._curvature_bound(x_train, l2)
        step = min(_GD_LR, 1.0 / curvature) if curvature > 0 else _GD_LR
        for _ in range(_GD_MAX_ITER):
            grad_w, grad_b = self._gradients(x_train, onehot, weights, bias, l2)
            norm = np.sqrt((grad_w ** 2).sum() + (grad_b ** 2).sum())
            if norm < _GD_GRAD_TOL:
                break
            weights -= step * grad_w
            bias -= step * grad_b
        self._weights = weights
        self._bias = bias

    def _predict(self, x) -> Prediction:
        return self._classify(_softmax(x @ self._weights + self._bias))

    def _state(self):
        return (self._weights, self._bias)

    def model_size(self) -> int:
        return self._weights.size + self._bias.size


class LogisticRegressionMethod(_GradientDescentClassifier):
    """Multinomial logistic regression, cross-entropy with L2 on weights."""

    def _curvature_bound(self, x, l2):
        # softmax Hessian norm <= ||design||^2 / (2n); trace bounds the norm
        n = x.shape[0]
        return ((x * x).sum() + n) / (2.0 * n) + l2

    def _gradients(self, x, onehot, weights, bias, l2):
        n = x.shape[0]
        probs = _softmax(x @ weights + bias)
        residual = (probs - onehot) / n
        return x.T @ residual + l2 * weights, residual.sum(axis=0)


class LinearSVMMethod(_GradientDescentClassifier):
    """Linear one-vs-rest SVM with the squared hinge loss; probabilities are
    a softmax over the margins."""

    DEFAULT_L2 = 1e-3

    def _curvature_bound(self, x, l2):
        # squared hinge Hessian norm <= 2 ||design||^2 / n
        n = x.shape[0]
        return 2.0 * ((x * x).sum() + n) / n + 2.0 * l2

    def _gradients(self, x, onehot, weights, bias, l2):
        n = x.shape[0]
        signs = 2.0 * onehot - 1.0
        margins = x @ weights + bias
        slack = np.maximum(0.0, 1.0 - signs * margins)
        coeff = -2.0 * signs * slack / n
        return x.T @ coeff + 2.0 * l2 * weights, coeff.sum(axis=0)

    def _predict(self, x) -> Prediction:
        return self._classify(_softmax(x @ self._weights + self._bias))

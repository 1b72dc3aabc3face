"""Small from-scratch classifiers with the scikit-learn estimator interface.

Class labels are integers. Wherever a decision is tied, the smallest label
wins, which for variant labels means the variant earliest in the fixed order.
Every model can be dumped to and restored from plain JSON-compatible dicts.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y


def _first_argmax(scores) -> int:
    # np.argmax already returns the first maximal index
    return int(np.argmax(scores))


class _Base(ClassifierMixin, BaseEstimator):
    tag = ""
    _fitted_attrs: tuple[str, ...] = ()

    def _validate_fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        self.classes_ = np.unique(y)
        self.n_features_in_ = X.shape[1]
        return X, y

    def _validate_predict(self, X):
        check_is_fitted(self, "classes_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, model was fitted with {self.n_features_in_}"
            )
        return X

    def to_dict(self) -> dict:
        check_is_fitted(self, "classes_")
        state = {
            "algorithm": self.tag,
            "params": self.get_params(),
            "classes_": self.classes_.tolist(),
            "n_features_in_": int(self.n_features_in_),
        }
        for attr in self._fitted_attrs:
            value = getattr(self, attr)
            state[attr] = value.tolist() if isinstance(value, np.ndarray) else value
        return state

    @classmethod
    def from_dict(cls, state: dict):
        model = cls(**state["params"])
        model.classes_ = np.asarray(state["classes_"])
        model.n_features_in_ = state["n_features_in_"]
        for attr in cls._fitted_attrs:
            model._restore(attr, state[attr])
        return model

    def _restore(self, attr, value):
        setattr(self, attr, np.asarray(value, dtype=float) if isinstance(value, list) else value)


class MajorityClassClassifier(_Base):
    """Always predicts the most frequent training class."""

    tag = "MajorityClass"
    _fitted_attrs = ("majority_",)

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        counts = np.array([np.sum(y == c) for c in self.classes_])
        self.majority_ = int(self.classes_[_first_argmax(counts)])
        return self

    def predict(self, X):
        X = self._validate_predict(X)
        return np.full(X.shape[0], self.majority_, dtype=int)


class OneRuleClassifier(_Base):
    """Single-feature rule over equal-width bins, chosen by training error."""

    tag = "OneRule"
    _fitted_attrs = ("feature_", "edges_", "bin_classes_", "default_")

    def __init__(self, n_bins=10):
        self.n_bins = n_bins

    def _bin(self, column, lo, hi):
        if hi <= lo:
            return np.zeros(column.shape[0], dtype=int)
        idx = np.floor((column - lo) / (hi - lo) * self.n_bins).astype(int)
        return np.clip(idx, 0, self.n_bins - 1)

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        counts = np.array([np.sum(y == c) for c in self.classes_])
        self.default_ = int(self.classes_[_first_argmax(counts)])
        best = None
        for j in range(X.shape[1]):
            lo, hi = float(X[:, j].min()), float(X[:, j].max())
            bins = self._bin(X[:, j], lo, hi)
            rule = []
            errors = 0
            for b in range(self.n_bins):
                mask = bins == b
                if not mask.any():
                    rule.append(self.default_)
                    continue
                in_bin = np.array([np.sum(y[mask] == c) for c in self.classes_])
                k = _first_argmax(in_bin)
                rule.append(int(self.classes_[k]))
                errors += int(mask.sum() - in_bin[k])
            if best is None or errors < best[0]:
                best = (errors, j, [lo, hi], rule)
        _, self.feature_, self.edges_, self.bin_classes_ = best
        return self

    def predict(self, X):
        X = self._validate_predict(X)
        lo, hi = self.edges_
        bins = self._bin(X[:, self.feature_], lo, hi)
        return np.asarray(self.bin_classes_, dtype=int)[bins]

    def _restore(self, attr, value):
        setattr(self, attr, value)


class GaussianNaiveBayes(_Base):
    """Per-class independent Gaussians with a variance floor."""

    tag = "NaiveBayes"
    _fitted_attrs = ("theta_", "var_", "log_prior_")

    def __init__(self, var_floor=1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        self.theta_ = np.array([X[y == c].mean(axis=0) for c in self.classes_])
        self.var_ = np.array([X[y == c].var(axis=0) for c in self.classes_]) + self.var_floor
        self.log_prior_ = np.log(np.array([np.mean(y == c) for c in self.classes_]))
        return self

    def _joint_log_likelihood(self, X):
        out = []
        for k in range(len(self.classes_)):
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * self.var_[k]))
            ll = ll - 0.5 * np.sum((X - self.theta_[k]) ** 2 / self.var_[k], axis=1)
            out.append(self.log_prior_[k] + ll)
        return np.column_stack(out)

    def predict(self, X):
        X = self._validate_predict(X)
        jll = self._joint_log_likelihood(X)
        return self.classes_[np.argmax(jll, axis=1)].astype(int)


class KNearestNeighbours(_Base):
    """k-NN with Euclidean distance on min-max scaled features.

    Scaling is fitted on the training data and query values are clamped to
    the training range. Distance ties are resolved by training order; vote
    ties go to the smallest label.
    """

    tag = "KNearest"
    _fitted_attrs = ("X_", "y_", "min_", "scale_")

    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def _scale(self, X):
        X = np.clip(X, self.min_, self.min_ + self.scale_)
        span = np.where(self.scale_ > 0, self.scale_, 1.0)
        return (X - self.min_) / span

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        self.min_ = X.min(axis=0)
        self.scale_ = X.max(axis=0) - self.min_
        self.X_ = self._scale(X)
        self.y_ = y.astype(int)
        return self

    def predict(self, X):
        X = self._validate_predict(X)
        Q = self._scale(X)
        k = min(self.n_neighbors, self.X_.shape[0])
        out = np.empty(Q.shape[0], dtype=int)
        for i, q in enumerate(Q):
            d = np.sqrt(np.sum((self.X_ - q) ** 2, axis=1))
            nearest = np.argsort(d, kind="stable")[:k]
            votes = np.array([np.sum(self.y_[nearest] == c) for c in self.classes_])
            out[i] = self.classes_[_first_argmax(votes)]
        return out

    def _restore(self, attr, value):
        dtype = int if attr == "y_" else float
        setattr(self, attr, np.asarray(value, dtype=dtype))


def _entropy(counts):
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


class DecisionTree(_Base):
    """Binary tree grown by information gain on threshold splits.

    A node becomes a leaf when it is pure, when it holds fewer than
    ``2 * min_samples_leaf`` examples, or when no split yields positive gain
    with both children of at least ``min_samples_leaf`` examples.
    """

    tag = "DecisionTree"
    _fitted_attrs = ("tree_",)

    def __init__(self, min_samples_leaf=2, max_depth=None):
        self.min_samples_leaf = min_samples_leaf
        self.max_depth = max_depth

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        self.tree_ = self._grow(X, y, 0)
        return self

    def _counts(self, y):
        return np.array([np.sum(y == c) for c in self.classes_])

    def _grow(self, X, y, depth):
        counts = self._counts(y)
        leaf = {"leaf": int(self.classes_[_first_argmax(counts)])}
        if (
            np.count_nonzero(counts) <= 1
            or len(y) < 2 * self.min_samples_leaf
            or (self.max_depth is not None and depth >= self.max_depth)
        ):
            return leaf
        parent_h = _entropy(counts)
        best = None
        n = len(y)
        for j in range(X.shape[1]):
            order = np.argsort(X[:, j], kind="stable")
            xs, ys = X[order, j], y[order]
            left = np.zeros(len(self.classes_))
            right = counts.astype(float).copy()
            cls_index = {c: k for k, c in enumerate(self.classes_)}
            for i in range(n - 1):
                k = cls_index[ys[i]]
                left[k] += 1
                right[k] -= 1
                if xs[i] == xs[i + 1]:
                    continue
                n_left = i + 1
                if n_left < self.min_samples_leaf or n - n_left < self.min_samples_leaf:
                    continue
                h = (n_left * _entropy(left) + (n - n_left) * _entropy(right)) / n
                gain = parent_h - h
                if gain > 1e-12 and (best is None or gain > best[0]):
                    best = (gain, j, float((xs[i] + xs[i + 1]) / 2.0))
        if best is None:
            return leaf
        _, j, thr = best
        mask = X[:, j] <= thr
        return {
            "feature": int(j),
            "threshold": thr,
            "left": self._grow(X[mask], y[mask], depth + 1),
            "right": self._grow(X[~mask], y[~mask], depth + 1),
        }

    def _predict_one(self, x):
        node = self.tree_
        while "leaf" not in node:
            node = node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]
        return node["leaf"]

    def predict(self, X):
        X = self._validate_predict(X)
        return np.array([self._predict_one(x) for x in X], dtype=int)

    def _restore(self, attr, value):
        setattr(self, attr, value)


ALGORITHMS = {
    cls.tag: cls
    for cls in (
        MajorityClassClassifier,
        OneRuleClassifier,
        GaussianNaiveBayes,
        KNearestNeighbours,
        DecisionTree,
    )
}


def make_classifier(tag: str):
    try:
        return ALGORITHMS[tag]()
    except KeyError:
        raise ValueError(f"unknown algorithm {tag!r}") from None


def classifier_from_dict(state: dict):
    return ALGORITHMS[state["algorithm"]].from_dict(state)

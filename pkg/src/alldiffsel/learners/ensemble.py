"""Two-level majority-vote meta-classifier.

Level one decides between the naive decomposition and the GAC family; level
two picks one of the eight GAC variants. Each level holds one model per
(algorithm, cross-validation fold), each fitted on the other folds, and all
of them vote.
"""

from __future__ import annotations

import copy
from collections import Counter
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..features import FeatureSet, FeatureVector
from ..solver import ALL_VARIANTS, DEFAULT_VARIANT, NAIVE, VariantId
from .classifiers import ALGORITHMS, classifier_from_dict, make_classifier
from .data import Dataset, copies_for_cost, stratified_kfold

DEFAULT_ALGORITHMS = tuple(ALGORITHMS)

# level-one classes
NAIVE_CLASS, GAC_CLASS = 0, 1


def vote_family(votes: Sequence[int]) -> int:
    """Majority over naive/GAC votes; a tie goes to the GAC family."""
    c = Counter(int(v) for v in votes)
    return NAIVE_CLASS if c[NAIVE_CLASS] > c[GAC_CLASS] else GAC_CLASS


def vote_variant(votes: Sequence[int], default: VariantId = DEFAULT_VARIANT) -> int:
    """Majority over variant indices; ties prefer ``default``, then order."""
    c = Counter(int(v) for v in votes)
    if not c:
        return default.index
    top = max(c.values())
    tied = sorted(v for v, n in c.items() if n == top)
    return default.index if default.index in tied else tied[0]


class TwoLevelSelector(ClassifierMixin, BaseEstimator):
    """Pick an alldiff variant from instance features.

    ``fit`` takes the feature matrix, variant indices (``VariantId.index``)
    as labels and, optionally, per-example costs. With ``duplicate=True``
    each example is repeated ``1 + ceil(log2(cost))`` times (1 to 13) before
    training so expensive mistakes weigh more.
    """

    def __init__(
        self,
        algorithms=DEFAULT_ALGORITHMS,
        n_folds=3,
        random_state=0,
        duplicate=True,
        feature_set="full",
    ):
        self.algorithms = algorithms
        self.n_folds = n_folds
        self.random_state = random_state
        self.duplicate = duplicate
        self.feature_set = feature_set

    def _fit_level(self, X, y, level):
        folds = stratified_kfold(y, self.n_folds, self.random_state)
        models = []
        for alg in self.algorithms:
            for i in range(self.n_folds):
                train = np.concatenate([f for j, f in enumerate(folds) if j != i])
                model = make_classifier(alg).fit(X[train], y[train])
                models.append({"algorithm": alg, "fold": i, "level": level, "model": model})
        return models

    def fit(self, X, y, cost=None):
        X = check_array(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if len(y) != X.shape[0]:
            raise ValueError("X and y have different lengths")
        cost = np.zeros(len(y)) if cost is None else np.asarray(cost, dtype=float)
        names = FeatureSet(self.feature_set).names
        if X.shape[1] != len(names):
            raise ValueError(
                f"{self.feature_set} feature set has {len(names)} features, X has {X.shape[1]}"
            )
        if not (y == NAIVE.index).any() or not (y != NAIVE.index).any():
            raise ValueError("training data needs both naive- and GAC-labelled examples")

        if self.duplicate:
            reps = np.array([copies_for_cost(c) for c in cost], dtype=int)
            X, y = np.repeat(X, reps, axis=0), np.repeat(y, reps)
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.arange(len(ALL_VARIANTS))

        family = np.where(y == NAIVE.index, NAIVE_CLASS, GAC_CLASS)
        self.level1_ = self._fit_level(X, family, 1)

        gac = y != NAIVE.index
        self.level2_default_ = False
        if gac.sum() >= self.n_folds:
            self.level2_ = self._fit_level(X[gac], y[gac], 2)
        else:
            # too few GAC examples to split: always use the default variant
            self.level2_ = []
            self.level2_default_ = True
        return self

    # -- prediction --------------------------------------------------------

    def votes(self, X):
        """Per-model votes as ``(level1 [n_models, n], level2 [n_models, n])``."""
        check_is_fitted(self, "level1_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        v1 = np.array([m["model"].predict(X) for m in self.level1_])
        if self.level2_:
            v2 = np.array([m["model"].predict(X) for m in self.level2_])
        else:
            v2 = np.empty((0, X.shape[0]), dtype=int)
        return v1, v2

    def predict(self, X):
        v1, v2 = self.votes(X)
        out = np.empty(v1.shape[1], dtype=int)
        for i in range(v1.shape[1]):
            if vote_family(v1[:, i]) == NAIVE_CLASS:
                out[i] = NAIVE.index
            else:
                out[i] = vote_variant(v2[:, i])
        return out

    def select_variant(self, features: FeatureVector) -> VariantId:
        if features.feature_set is not FeatureSet(self.feature_set):
            raise ValueError(
                f"model uses {self.feature_set} features, got {features.feature_set.value}"
            )
        return ALL_VARIANTS[int(self.predict(features.to_array()[None, :])[0])]

    def restricted_to(self, algorithm: str) -> "TwoLevelSelector":
        """The sub-ensemble made only of ``algorithm``'s fold models."""
        check_is_fitted(self, "level1_")
        sub = copy.copy(self)
        sub.algorithms = (algorithm,)
        sub.level1_ = [m for m in self.level1_ if m["algorithm"] == algorithm]
        sub.level2_ = [m for m in self.level2_ if m["algorithm"] == algorithm]
        return sub

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        check_is_fitted(self, "level1_")

        def dump(models):
            return [
                {"algorithm": m["algorithm"], "fold": m["fold"], "state": m["model"].to_dict()}
                for m in models
            ]

        return {
            "params": {
                "algorithms": list(self.algorithms),
                "n_folds": self.n_folds,
                "random_state": self.random_state,
                "duplicate": self.duplicate,
                "feature_set": FeatureSet(self.feature_set).value,
            },
            "tie_break": "default-family-then-default-variant",
            "default_variant": DEFAULT_VARIANT.code,
            "n_features_in": int(self.n_features_in_),
            "level2_default": self.level2_default_,
            "level1": dump(self.level1_),
            "level2": dump(self.level2_),
        }

    @classmethod
    def from_dict(cls, state: dict) -> "TwoLevelSelector":
        params = dict(state["params"])
        params["algorithms"] = tuple(params["algorithms"])
        model = cls(**params)
        model.n_features_in_ = state["n_features_in"]
        model.classes_ = np.arange(len(ALL_VARIANTS))
        model.level2_default_ = state["level2_default"]

        def load(items, level):
            return [
                {
                    "algorithm": m["algorithm"],
                    "fold": m["fold"],
                    "level": level,
                    "model": classifier_from_dict(m["state"]),
                }
                for m in items
            ]

        model.level1_ = load(state["level1"], 1)
        model.level2_ = load(state["level2"], 2)
        return model


def train_ensemble(
    raw: Dataset,
    k: int = 3,
    seed: int = 0,
    feature_set: FeatureSet | str = FeatureSet.FULL,
    duplicate: bool = True,
    algorithms=DEFAULT_ALGORITHMS,
) -> TwoLevelSelector:
    """Fit a :class:`TwoLevelSelector` on a raw (not yet duplicated) dataset."""
    fs = FeatureSet(feature_set)
    for e in raw.examples:
        if e.features.feature_set is not fs:
            raise ValueError(f"{e.instance}: expected {fs.value} features")
    model = TwoLevelSelector(
        algorithms=tuple(algorithms),
        n_folds=k,
        random_state=seed,
        duplicate=duplicate,
        feature_set=fs.value,
    )
    return model.fit(raw.X, raw.y, raw.costs)

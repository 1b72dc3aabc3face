import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from alldiffsel.features import FeatureSet, FeatureVector
from alldiffsel.learners import (
    ALGORITHMS,
    Dataset,
    DecisionTree,
    KNearestNeighbours,
    LabeledExample,
    MajorityClassClassifier,
    OneRuleClassifier,
    TwoLevelSelector,
    classifier_from_dict,
    copies_for_cost,
    duplicate_by_cost,
    make_classifier,
    stratified_kfold,
    train_ensemble,
    vote_family,
    vote_variant,
)
from alldiffsel.solver import DEFAULT_VARIANT, GAC_VARIANTS, NAIVE


def fv(values, name="i", fs=FeatureSet.CHEAP):
    values = tuple(float(v) for v in values) + (0.0,) * (len(fs.names) - len(values))
    return FeatureVector(name, fs, 0, values)


def example(name, values, label, cost):
    return LabeledExample(name, fv(values, name), label, cost)


# -- duplication ------------------------------------------------------------------


@pytest.mark.parametrize("cost,copies", [(3600, 13), (1, 1), (2, 2), (0.25, 1), (3, 3), (1024, 11), (0, 1), (1e9, 13)])
def test_copies_for_cost(cost, copies):
    assert copies_for_cost(cost) == copies


@settings(max_examples=200)
@given(st.floats(0, 1e7), st.floats(0, 1e7))
def test_copies_monotone_in_cost(a, b):
    lo, hi = sorted((a, b))
    assert 1 <= copies_for_cost(lo) <= copies_for_cost(hi) <= 13


def test_duplicate_by_cost_keeps_distinct_examples():
    raw = Dataset((example("a", [1], NAIVE, 0.5), example("b", [2], GAC_VARIANTS[0], 3600)))
    dup = duplicate_by_cost(raw)
    assert dup.duplicated and len(dup) == 14
    assert {e.instance for e in dup.examples} == {"a", "b"}


def test_dataset_rejects_dont_know():
    with pytest.raises(ValueError):
        Dataset((LabeledExample("x", fv([1]), None, 0.0),))


# -- stratified folds ---------------------------------------------------------------


def test_perfect_stratification():
    labels = [0, 1, 2] * 3
    folds = stratified_kfold(labels, 3, seed=0)
    for f in folds:
        assert sorted(np.asarray(labels)[f]) == [0, 1, 2]


def test_single_class_remainder():
    folds = stratified_kfold([5] * 7, 3, seed=1)
    assert sorted(len(f) for f in folds) == [2, 2, 3]


def test_fold_determinism_and_errors():
    labels = [0, 0, 1, 1, 1, 2, 2]
    a = stratified_kfold(labels, 3, 42)
    b = stratified_kfold(labels, 3, 42)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    with pytest.raises(ValueError):
        stratified_kfold([0, 1], 3, 0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=3, max_size=300), st.integers(0, 2**32))
def test_stratification_property(labels, seed):
    folds = stratified_kfold(labels, 3, seed)
    flat = np.concatenate(folds)
    assert sorted(flat.tolist()) == list(range(len(labels)))
    y = np.asarray(labels)
    for c in set(labels):
        counts = [int(np.sum(y[f] == c)) for f in folds]
        assert max(counts) - min(counts) <= 1


# -- base classifiers ---------------------------------------------------------------

X3 = np.array([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]])


@pytest.mark.parametrize("tag", sorted(ALGORITHMS))
def test_single_class_training(tag):
    model = make_classifier(tag).fit(X3, [4, 4, 4])
    assert model.predict(np.array([[9.0, -3.0], [0.5, 0.5]])).tolist() == [4, 4]


def test_one_nearest_neighbour_identical_point():
    model = KNearestNeighbours(n_neighbors=1).fit(X3, [0, 1, 2])
    assert model.predict(X3[[1]]).tolist() == [1]


def test_majority_class():
    model = MajorityClassClassifier().fit(X3, [0, 0, 1])
    assert model.predict(np.array([[100.0, 100.0]])).tolist() == [0]


def test_majority_tie_goes_to_earliest_class():
    model = MajorityClassClassifier().fit(X3[:2], [3, 1])
    assert model.predict(X3[:1]).tolist() == [1]


def test_one_rule_picks_separating_feature():
    X = np.column_stack([np.arange(20.0) % 3, np.arange(20.0)])
    y = (np.arange(20) >= 10).astype(int)
    model = OneRuleClassifier().fit(X, y)
    assert model.feature_ == 1
    assert model.predict(np.array([[0.0, 2.0], [0.0, 18.0]])).tolist() == [0, 1]


def test_decision_tree_fits_threshold():
    X = np.arange(12.0).reshape(-1, 1)
    y = (X[:, 0] > 5.5).astype(int)
    model = DecisionTree().fit(X, y)
    assert model.predict(X).tolist() == y.tolist()
    assert model.tree_["threshold"] == 5.5


def test_naive_bayes_separates_gaussians():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0, 1, (50, 2)), rng.normal(6, 1, (50, 2))])
    y = np.repeat([0, 1], 50)
    model = make_classifier("NaiveBayes").fit(X, y)
    assert (model.predict(X) == y).mean() > 0.95


@pytest.mark.parametrize("tag", sorted(ALGORITHMS))
def test_dimension_mismatch(tag):
    model = make_classifier(tag).fit(X3, [0, 1, 1])
    with pytest.raises(ValueError):
        model.predict(np.zeros((1, 3)))


@pytest.mark.parametrize("tag", sorted(ALGORITHMS))
def test_serialization_reproduces_predictions(tag):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 4))
    y = (X[:, 0] + X[:, 1] > 0).astype(int) + 2 * (X[:, 2] > 1)
    model = make_classifier(tag).fit(X, y)
    restored = classifier_from_dict(json.loads(json.dumps(model.to_dict())))
    Q = rng.normal(size=(30, 4))
    assert restored.predict(Q).tolist() == model.predict(Q).tolist()


@pytest.mark.parametrize("tag", sorted(ALGORITHMS))
def test_estimator_api(tag):
    model = make_classifier(tag)
    assert clone(model).get_params() == model.get_params()
    model.fit(X3, [0, 1, 1])
    assert 0.0 <= model.score(X3, [0, 1, 1]) <= 1.0


# -- voting -----------------------------------------------------------------------


def test_vote_family():
    assert vote_family([0] * 15) == 0
    assert vote_family([1] * 8 + [0] * 7) == 1
    assert vote_family([0] * 8 + [1] * 7) == 0
    assert vote_family([0] * 7 + [1] * 7) == 1


def test_vote_variant():
    g = GAC_VARIANTS[3].index
    assert vote_variant([g] * 15) == g
    a, b = GAC_VARIANTS[4].index, GAC_VARIANTS[2].index
    assert vote_variant([a, a, b, b]) == b
    assert vote_variant([a, a, DEFAULT_VARIANT.index, DEFAULT_VARIANT.index]) == DEFAULT_VARIANT.index
    assert vote_variant([]) == DEFAULT_VARIANT.index


@settings(max_examples=100)
@given(st.lists(st.integers(1, 8), min_size=1, max_size=20), st.randoms())
def test_vote_permutation_invariance(votes, rnd):
    shuffled = list(votes)
    rnd.shuffle(shuffled)
    assert vote_variant(votes) == vote_variant(shuffled)
    assert vote_family([int(v > 4) for v in votes]) == vote_family([int(v > 4) for v in shuffled])


# -- ensemble ---------------------------------------------------------------------


def synthetic(n=60, seed=0):
    rng = np.random.default_rng(seed)
    examples = []
    g1, g2 = GAC_VARIANTS[1], GAC_VARIANTS[5]
    for i in range(n):
        kind = i % 3
        centre = (0.0, 5.0, 10.0)[kind]
        label = (NAIVE, g1, g2)[kind]
        values = rng.normal(centre, 0.5, size=3)
        examples.append(example(f"e{i}", values, label, float(rng.uniform(0.5, 50))))
    return Dataset(tuple(examples))


def test_ensemble_shape_and_accuracy():
    data = synthetic()
    model = train_ensemble(data, k=3, seed=1, feature_set="cheap")
    assert len(model.level1_) == len(model.level2_) == 5 * 3
    pred = model.predict(data.X)
    assert (pred == data.y).mean() > 0.9
    assert model.select_variant(data.examples[0].features) is NAIVE


def test_ensemble_unanimous_naive():
    data = synthetic()
    model = train_ensemble(data, k=3, seed=1, feature_set="cheap")
    # far on the naive side of every boundary
    assert model.select_variant(fv([-20, -20, -20])) is NAIVE


def test_ensemble_training_is_deterministic():
    data = synthetic(seed=4)
    a = train_ensemble(data, 3, 7, "cheap").to_dict()
    b = train_ensemble(data, 3, 7, "cheap").to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_ensemble_persistence():
    data = synthetic(seed=2)
    model = train_ensemble(data, 3, 0, "cheap")
    restored = TwoLevelSelector.from_dict(json.loads(json.dumps(model.to_dict())))
    rng = np.random.default_rng(9)
    Q = np.column_stack([rng.uniform(-2, 12, size=(50, 3)), np.zeros((50, 26))])
    assert restored.predict(Q).tolist() == model.predict(Q).tolist()


def test_ensemble_requires_both_families():
    data = Dataset(tuple(example(f"e{i}", [i], NAIVE, 1.0) for i in range(6)))
    with pytest.raises(ValueError):
        train_ensemble(data, 3, 0, "cheap")


def test_ensemble_feature_set_mismatch():
    data = synthetic()
    model = train_ensemble(data, 3, 0, "cheap")
    with pytest.raises(ValueError):
        model.select_variant(FeatureVector("x", FeatureSet.FULL, 0, (0.0,) * 37))


def test_level_two_defaults_when_too_few_gac_examples():
    ex = [example(f"n{i}", [0, i], NAIVE, 1.0) for i in range(6)]
    ex.append(example("g", [9, 9], GAC_VARIANTS[0], 1.0))
    model = train_ensemble(Dataset(tuple(ex)), 3, 0, "cheap", duplicate=False)
    assert model.level2_default_ and model.level2_ == []
    X = np.zeros((1, 29))
    assert model.predict(X)[0] in (NAIVE.index, DEFAULT_VARIANT.index)


def test_restricted_sub_ensemble():
    model = train_ensemble(synthetic(), 3, 0, "cheap")
    sub = model.restricted_to("DecisionTree")
    assert len(sub.level1_) == 3 and len(model.level1_) == 15
    assert sub.algorithms == ("DecisionTree",)


def test_ensemble_clone_and_params():
    model = TwoLevelSelector(n_folds=4, random_state=3, feature_set="cheap")
    assert clone(model).get_params()["n_folds"] == 4

from .classifiers import (
    ALGORITHMS,
    DecisionTree,
    GaussianNaiveBayes,
    KNearestNeighbours,
    MajorityClassClassifier,
    OneRuleClassifier,
    classifier_from_dict,
    make_classifier,
)
from .data import (
    MAX_COPIES,
    Dataset,
    LabeledExample,
    copies_for_cost,
    duplicate_by_cost,
    stratified_kfold,
)
from .ensemble import (
    DEFAULT_ALGORITHMS,
    TwoLevelSelector,
    train_ensemble,
    vote_family,
    vote_variant,
)

__all__ = [
    "ALGORITHMS",
    "DEFAULT_ALGORITHMS",
    "Dataset",
    "DecisionTree",
    "GaussianNaiveBayes",
    "KNearestNeighbours",
    "LabeledExample",
    "MAX_COPIES",
    "MajorityClassClassifier",
    "OneRuleClassifier",
    "TwoLevelSelector",
    "classifier_from_dict",
    "copies_for_cost",
    "duplicate_by_cost",
    "make_classifier",
    "stratified_kfold",
    "train_ensemble",
    "vote_family",
    "vote_variant",
]

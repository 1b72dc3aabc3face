from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..features import FeatureVector
from ..solver import VariantId

MAX_COPIES = 13


@dataclass(frozen=True)
class LabeledExample:
    instance: str
    features: FeatureVector
    label: VariantId
    cost: float


@dataclass(frozen=True)
class Dataset:
    examples: tuple[LabeledExample, ...]
    duplicated: bool = False
    max_copies: int = field(default=MAX_COPIES)

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        for e in self.examples:
            if e.label is None:
                raise ValueError(f"{e.instance}: don't-know examples cannot be trained on")

    def __len__(self):
        return len(self.examples)

    @property
    def X(self) -> np.ndarray:
        if not self.examples:
            return np.empty((0, 0))
        return np.vstack([e.features.to_array() for e in self.examples])

    @property
    def y(self) -> np.ndarray:
        return np.array([e.label.index for e in self.examples], dtype=int)

    @property
    def costs(self) -> np.ndarray:
        return np.array([e.cost for e in self.examples], dtype=float)


def copies_for_cost(cost: float, max_copies: int = MAX_COPIES) -> int:
    """``1 + ceil(log2(cost))`` clamped to ``[1, max_copies]``."""
    if cost <= 1.0:
        return 1
    return max(1, min(max_copies, 1 + math.ceil(math.log2(cost))))


def duplicate_by_cost(raw: Dataset) -> Dataset:
    """Repeat each example according to its cost, keeping the original order."""
    out = []
    for e in raw.examples:
        out.extend([e] * copies_for_cost(e.cost, raw.max_copies))
    return replace(raw, examples=tuple(out), duplicated=True)


def stratified_kfold(labels: Sequence[int], k: int, seed: int) -> list[np.ndarray]:
    """Split example indices into ``k`` folds with per-class counts within 1.

    Each class is shuffled with a seeded generator and dealt round-robin; the
    deal for a class starts where the previous class stopped so fold totals
    stay balanced too.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > len(labels):
        raise ValueError(f"cannot split {len(labels)} examples into {k} folds")
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    folds: list[list[int]] = [[] for _ in range(k)]
    start = 0
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(len(idx))]
        for j, i in enumerate(idx):
            folds[(start + j) % k].append(int(i))
        start = (start + len(idx)) % k
    return [np.array(sorted(f), dtype=int) for f in folds]

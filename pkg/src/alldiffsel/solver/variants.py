from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass


class SccPruning(str, enum.Enum):
    FULL = "full"
    PER_COMPONENT = "comp"


class Trigger(str, enum.Enum):
    ANY_DOMAIN_CHANGE = "any"
    ASSIGNMENT_ONLY = "assign"


@dataclass(frozen=True, order=False)
class VariantId:
    """One of the nine alldifferent implementations.

    ``VariantId.naive()`` is the pairwise decomposition; the eight GAC
    configurations differ only in how much work they do, never in what they
    prune.
    """

    naive: bool
    incremental_matching: bool = False
    scc_pruning: SccPruning = SccPruning.FULL
    trigger: Trigger = Trigger.ANY_DOMAIN_CHANGE

    @classmethod
    def make_naive(cls) -> "VariantId":
        return cls(naive=True)

    @classmethod
    def gac(cls, incremental_matching: bool, scc_pruning, trigger) -> "VariantId":
        return cls(False, incremental_matching, SccPruning(scc_pruning), Trigger(trigger))

    @property
    def code(self) -> str:
        if self.naive:
            return "naive"
        inc = "inc" if self.incremental_matching else "scratch"
        return f"gac-{inc}-{self.scc_pruning.value}-{self.trigger.value}"

    @classmethod
    def from_code(cls, code: str) -> "VariantId":
        try:
            return _BY_CODE[code]
        except KeyError:
            raise ValueError(f"unknown variant code {code!r}") from None

    @property
    def index(self) -> int:
        """Position in the fixed total order (naive first)."""
        return _INDEX[self]

    def __lt__(self, other: "VariantId") -> bool:
        return self.index < other.index

    def __str__(self) -> str:
        return self.code


NAIVE = VariantId.make_naive()

#: Naive first, then GAC knobs lexicographically (False < True, full < comp,
#: any < assign).
ALL_VARIANTS: tuple[VariantId, ...] = (NAIVE,) + tuple(
    VariantId.gac(inc, scc, trig)
    for inc, scc, trig in itertools.product(
        (False, True), tuple(SccPruning), tuple(Trigger)
    )
)
GAC_VARIANTS = ALL_VARIANTS[1:]

#: incremental matching, per-component SCCs, woken on every domain change
DEFAULT_VARIANT = VariantId.gac(True, SccPruning.PER_COMPONENT, Trigger.ANY_DOMAIN_CHANGE)

_INDEX = {v: i for i, v in enumerate(ALL_VARIANTS)}
_BY_CODE = {v.code: v for v in ALL_VARIANTS}

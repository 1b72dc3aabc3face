"""Misclassification penalties and comparison tables for variant selectors."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .features import FeatureVector
from .harness import RuntimeMatrix, effective_time, fastest_time, penalty
from .solver import ALL_VARIANTS, DEFAULT_VARIANT, VariantId

Selector = Callable[[FeatureVector], VariantId]

__all__ = [
    "PenaltyReport",
    "baselines",
    "constant_row",
    "evaluate",
    "format_table",
    "instance_csv",
    "penalty",
    "random_expectation_row",
    "report",
]


@dataclass
class PenaltyReport:
    """One row of the comparison table."""

    name: str
    instances: tuple[str, ...]
    penalties: tuple[float, ...]
    chosen: tuple[VariantId | None, ...] = ()
    speedups: tuple[float, ...] = ()
    feature_times: tuple[float | None, ...] = ()
    select_times: tuple[float | None, ...] = ()
    speedups_with_overhead: tuple[float | None, ...] = ()
    notes: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(self.penalties))


def _speedup(matrix: RuntimeMatrix, name: str, chosen: VariantId, overhead: float = 0.0):
    row = matrix.row(name)
    if fastest_time(row) is None:
        return 1.0
    default_t = effective_time(row[DEFAULT_VARIANT], matrix.time_limit)
    chosen_t = effective_time(row[chosen], matrix.time_limit) + overhead
    if chosen_t <= 0:
        return 1.0 if default_t <= 0 else float("inf")
    return default_t / chosen_t


def _row_from_choices(name, matrix, choices, feature_times=None, select_times=None):
    names = matrix.instances
    pens, speed, speed_oh = [], [], []
    for i, inst in enumerate(names):
        chosen = choices[i]
        pens.append(penalty(chosen, matrix.row(inst), matrix.time_limit))
        speed.append(_speedup(matrix, inst, chosen))
        if feature_times is not None and feature_times[i] is not None:
            oh = feature_times[i] + (select_times[i] or 0.0)
            speed_oh.append(_speedup(matrix, inst, chosen, oh))
        else:
            speed_oh.append(None)
    n = len(names)
    return PenaltyReport(
        name,
        tuple(names),
        tuple(pens),
        tuple(choices),
        tuple(speed),
        tuple(feature_times) if feature_times is not None else (None,) * n,
        tuple(select_times) if select_times is not None else (None,) * n,
        tuple(speed_oh),
    )


def evaluate(
    selector: Selector,
    features: Mapping[str, FeatureVector],
    matrix: RuntimeMatrix,
    name: str = "selector",
    select_times: Sequence[float | None] | None = None,
) -> PenaltyReport:
    """Total penalty of ``selector`` over the instances of ``matrix``.

    Feature extraction times are taken from the feature vectors; selection
    times are measured unless given.
    """
    import time

    choices, f_times, s_times = [], [], []
    for i, inst in enumerate(matrix.instances):
        fv = features[inst]
        t0 = time.perf_counter()
        choices.append(selector(fv))
        elapsed = time.perf_counter() - t0
        f_times.append(fv.extraction_time)
        s_times.append(select_times[i] if select_times is not None else elapsed)
    if all(t is None for t in f_times):
        f_times, s_times = None, None
    return _row_from_choices(name, matrix, choices, f_times, s_times)


def constant_row(matrix: RuntimeMatrix, variant: VariantId) -> PenaltyReport:
    return _row_from_choices(variant.code, matrix, [variant] * len(matrix.instances))


def _extreme_choice(matrix, inst, worst):
    row = matrix.row(inst)
    keyed = [(effective_time(row[v], matrix.time_limit), v.index, v) for v in ALL_VARIANTS]
    if worst:
        # latest-ordered variant on ties, so the choice is well-defined
        return max(keyed, key=lambda k: (k[0], k[1]))[2]
    return min(keyed, key=lambda k: (k[0], k[1]))[2]


def baselines(matrix: RuntimeMatrix, seed: int = 0) -> list[PenaltyReport]:
    """Oracle, anti-oracle, default-decision and random-decision rows.

    The random row draws one variant per instance with ``seed`` and also
    carries the exact expected penalty in ``notes["expected_total"]``.
    """
    oracle = _row_from_choices(
        "oracle", matrix, [_extreme_choice(matrix, n, False) for n in matrix.instances]
    )
    anti = _row_from_choices(
        "anti-oracle", matrix, [_extreme_choice(matrix, n, True) for n in matrix.instances]
    )
    default = _row_from_choices(
        "default decision", matrix, [DEFAULT_VARIANT] * len(matrix.instances)
    )
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    draws = [ALL_VARIANTS[int(i)] for i in rng.integers(0, len(ALL_VARIANTS), len(matrix.instances))]
    random_row = _row_from_choices("random decision", matrix, draws)
    expected = [
        float(np.mean([penalty(v, matrix.row(n), matrix.time_limit) for v in ALL_VARIANTS]))
        for n in matrix.instances
    ]
    random_row.notes["expected_penalties"] = tuple(expected)
    random_row.notes["expected_total"] = float(sum(expected))
    return [oracle, anti, default, random_row]


def random_expectation_row(matrix: RuntimeMatrix) -> PenaltyReport:
    """The expected penalty of a uniformly random choice, per instance."""
    expected = tuple(
        float(np.mean([penalty(v, matrix.row(n), matrix.time_limit) for v in ALL_VARIANTS]))
        for n in matrix.instances
    )
    return PenaltyReport("random (expected)", matrix.instances, expected)


# --------------------------------------------------------------------------
# output


def format_table(rows: Sequence[PenaltyReport], title: str | None = None) -> str:
    width = max([len("classifier")] + [len(r.name) for r in rows])
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'classifier':<{width}}  {'penalty [s]':>14}")
    lines.append("-" * (width + 16))
    for r in rows:
        lines.append(f"{r.name:<{width}}  {r.total:>14.6f}")
        if "expected_total" in r.notes:
            label = "  (expected)"
            lines.append(f"{label:<{width}}  {r.notes['expected_total']:>14.6f}")
    return "\n".join(lines) + "\n"


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


def instance_csv(row: PenaltyReport) -> str:
    """Per-instance data for the speedup plot, as CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        [
            "instance",
            "chosen",
            "penalty",
            "speedup",
            "speedup_with_overhead",
            "feature_time",
            "select_time",
        ]
    )
    n = len(row.instances)
    ft = row.feature_times or (None,) * n
    st = row.select_times or (None,) * n
    so = row.speedups_with_overhead or (None,) * n
    for i, inst in enumerate(row.instances):
        chosen = row.chosen[i].code if row.chosen and row.chosen[i] is not None else ""
        w.writerow(
            [inst, chosen, _fmt(row.penalties[i]), _fmt(row.speedups[i]), _fmt(so[i]), _fmt(ft[i]), _fmt(st[i])]
        )
    return buf.getvalue()


def report(rows: Sequence[PenaltyReport], focus: str | None = None, title: str | None = None):
    """Formatted table of all rows plus the per-instance CSV for one row.

    ``focus`` names the row whose per-instance data is exported; the last row
    is used when it is not given.
    """
    table = format_table(rows, title)
    target = rows[-1]
    if focus is not None:
        target = next(r for r in rows if r.name == focus)
    return table, instance_csv(target)

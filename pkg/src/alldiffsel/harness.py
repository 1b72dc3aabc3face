"""Benchmark every alldiff variant on a corpus and label the instances."""

from __future__ import annotations

import enum
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .csp import CspInstance
from .solver import (
    ALL_VARIANTS,
    NAIVE,
    RunRecord,
    SearchLimits,
    Status,
    VariantId,
    solve,
)

#: seconds charged per unit of deterministic work in ``CostMode.DETERMINISTIC``
OP_COST_SECONDS = 1e-6


class CostMode(str, enum.Enum):
    WALLCLOCK = "wallclock"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class RuntimeMatrix:
    """Aggregated run records for every (instance, variant) cell."""

    instances: tuple[str, ...]
    cells: Mapping[tuple[str, VariantId], RunRecord]
    time_limit: float
    runs_per_cell: int = 1
    cost_mode: CostMode = CostMode.WALLCLOCK
    variants: tuple[VariantId, ...] = ALL_VARIANTS

    def __post_init__(self):
        for name in self.instances:
            for v in self.variants:
                if (name, v) not in self.cells:
                    raise ValueError(f"missing cell ({name}, {v.code})")

    def row(self, instance: str) -> dict[VariantId, RunRecord]:
        return {v: self.cells[(instance, v)] for v in self.variants}

    def scaled(self, factor: float) -> "RuntimeMatrix":
        """Copy with every cpu_time and the time limit multiplied by ``factor``."""
        cells = {
            k: RunRecord(r.instance, r.variant, r.status, r.cpu_time * factor, r.nodes, r.op_count)
            for k, r in self.cells.items()
        }
        return RuntimeMatrix(
            self.instances,
            cells,
            self.time_limit * factor,
            self.runs_per_cell,
            self.cost_mode,
            self.variants,
        )

    def subset(self, names: Iterable[str]) -> "RuntimeMatrix":
        names = tuple(names)
        cells = {(n, v): self.cells[(n, v)] for n in names for v in self.variants}
        return RuntimeMatrix(
            names, cells, self.time_limit, self.runs_per_cell, self.cost_mode, self.variants
        )

    # -- serialization -----------------------------------------------------

    def to_records(self) -> list[dict]:
        return [
            {
                "instance": r.instance,
                "variant": v.code,
                "status": r.status.value,
                "cpu_time": r.cpu_time,
                "nodes": r.nodes,
                "op_count": r.op_count,
            }
            for name in self.instances
            for v in self.variants
            for r in (self.cells[(name, v)],)
        ]

    def metadata(self) -> dict:
        return {
            "time_limit": self.time_limit,
            "runs_per_cell": self.runs_per_cell,
            "cost_mode": self.cost_mode.value,
            "op_cost_seconds": OP_COST_SECONDS,
        }

    @classmethod
    def from_records(cls, records: Sequence[dict], metadata: dict) -> "RuntimeMatrix":
        cells = {}
        instances = []
        seen = set()
        for rec in records:
            v = VariantId.from_code(rec["variant"])
            name = rec["instance"]
            if name not in seen:
                seen.add(name)
                instances.append(name)
            cells[(name, v)] = RunRecord(
                name,
                v,
                Status(rec["status"]),
                float(rec["cpu_time"]),
                int(rec["nodes"]),
                int(rec["op_count"]),
            )
        return cls(
            tuple(instances),
            cells,
            float(metadata["time_limit"]),
            int(metadata["runs_per_cell"]),
            CostMode(metadata["cost_mode"]),
        )


def aggregate_runs(runs: Sequence[RunRecord]) -> RunRecord:
    """Component-wise median of repeated runs; status by majority.

    Status ties go to the first status among the runs.
    """
    if not runs:
        raise ValueError("no runs to aggregate")
    status = Counter(r.status for r in runs).most_common(1)[0][0]
    return RunRecord(
        runs[0].instance,
        runs[0].variant,
        status,
        float(statistics.median(r.cpu_time for r in runs)),
        int(statistics.median_low(sorted(r.nodes for r in runs))),
        int(statistics.median_low(sorted(r.op_count for r in runs))),
        runs[0].solution,
    )


def _run_cell(args):
    instance, variant, limits, runs, mode = args
    if mode is CostMode.DETERMINISTIC:
        budget = int(limits.time_limit / OP_COST_SECONDS)
        op_limit = budget if limits.op_limit is None else min(budget, limits.op_limit)
        # the wallclock limit stays as a safety net only
        det_limits = SearchLimits(float("inf"), limits.node_limit, op_limit)
        r = solve(instance, variant, det_limits)
        cpu = r.op_count * OP_COST_SECONDS
        if r.status is Status.TIMEOUT:
            cpu = max(cpu, limits.time_limit)
        return [RunRecord(r.instance, variant, r.status, cpu, r.nodes, r.op_count, r.solution)]
    return [solve(instance, variant, limits) for _ in range(runs)]


def benchmark(
    corpus: Sequence[CspInstance],
    limits: SearchLimits,
    runs_per_cell: int = 3,
    mode: CostMode | str = CostMode.WALLCLOCK,
    variants: Sequence[VariantId] = ALL_VARIANTS,
    jobs: int = 1,
) -> RuntimeMatrix:
    """Run every variant on every instance and aggregate repeated runs."""
    mode = CostMode(mode)
    if runs_per_cell < 1 or runs_per_cell % 2 == 0:
        raise ValueError("runs_per_cell must be a positive odd number")
    if mode is CostMode.DETERMINISTIC and runs_per_cell != 1:
        raise ValueError("deterministic mode uses exactly one run per cell")
    names = [inst.name for inst in corpus]
    if len(set(names)) != len(names):
        raise ValueError("instance names in a corpus must be unique")

    tasks = [(inst, v, limits, runs_per_cell, mode) for inst in corpus for v in variants]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_run_cell(t) for t in tasks]

    cells = {}
    for (inst, v, *_), runs in zip(tasks, results):
        cells[(inst.name, v)] = aggregate_runs(runs)
    return RuntimeMatrix(
        tuple(names), cells, limits.time_limit, runs_per_cell, mode, tuple(variants)
    )


# --------------------------------------------------------------------------
# labels and costs


@dataclass(frozen=True)
class Label:
    """The best variant for an instance, or ``None`` for "don't know"."""

    variant: VariantId | None

    @property
    def dont_know(self) -> bool:
        return self.variant is None

    @property
    def code(self) -> str:
        return "dont-know" if self.variant is None else self.variant.code

    @classmethod
    def from_code(cls, code: str) -> "Label":
        return cls(None if code == "dont-know" else VariantId.from_code(code))


@dataclass(frozen=True)
class CostedLabel:
    instance: str
    label: Label
    cost: float = field(default=0.0)


def effective_time(record: RunRecord, limit: float) -> float:
    return record.cpu_time if record.solved else limit


def fastest_time(cells: Mapping[VariantId, RunRecord]) -> float | None:
    solved = [r.cpu_time for r in cells.values() if r.solved]
    return min(solved) if solved else None


def penalty(chosen: VariantId, cells: Mapping[VariantId, RunRecord], limit: float) -> float:
    """Extra time paid for running ``chosen`` instead of the fastest variant.

    A chosen variant that timed out is charged the limit minus the fastest
    time. If nothing solved the instance the penalty is 0.
    """
    best = fastest_time(cells)
    if best is None:
        return 0.0
    return max(0.0, effective_time(cells[chosen], limit) - best)


def _nodes_per_second(record: RunRecord) -> float:
    if record.cpu_time > 0:
        return record.nodes / record.cpu_time
    return float("inf") if record.nodes > 0 else 0.0


def label_instance(
    cells: Mapping[VariantId, RunRecord], limit: float, instance: str | None = None
) -> CostedLabel:
    """Apply the labelling rule to one instance's nine aggregated cells.

    Naive wins only if it solved the instance strictly faster than every other
    solving variant. Otherwise the solving GAC variant with the highest node
    rate wins; exact ties go to the earlier variant. The cost is the largest
    penalty any variant would incur, capped at ``limit``.
    """
    missing = [v for v in ALL_VARIANTS if v not in cells]
    if missing:
        raise ValueError(f"missing cells for {[v.code for v in missing]}")
    name = instance or next(iter(cells.values())).instance

    solved = {v: r for v, r in cells.items() if r.solved}
    if not solved:
        return CostedLabel(name, Label(None), 0.0)

    naive = solved.get(NAIVE)
    others = [r.cpu_time for v, r in solved.items() if v != NAIVE]
    if naive is not None and all(naive.cpu_time < t for t in others):
        best = NAIVE
    else:
        gac = sorted(v for v in solved if v != NAIVE)
        if not gac:
            best = NAIVE
        else:
            # max() keeps the first of equal keys, i.e. the earliest variant
            best = max(gac, key=lambda v: _nodes_per_second(solved[v]))
    cost = max(penalty(v, cells, limit) for v in ALL_VARIANTS)
    return CostedLabel(name, Label(best), min(cost, limit))


def label_matrix(matrix: RuntimeMatrix) -> list[CostedLabel]:
    return [
        label_instance(matrix.row(name), matrix.time_limit, name) for name in matrix.instances
    ]

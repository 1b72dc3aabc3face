"""Depth-first backtracking search with a trailed domain store."""

from __future__ import annotations

import enum
import time
from collections import deque
from dataclasses import dataclass, field

from ..csp import ConstraintKind, CspInstance
from .propagators import (
    Inconsistent,
    MatchingState,
    OpCounter,
    propagate_diseq,
    propagate_gac_alldiff,
    propagate_naive_alldiff,
    propagate_table,
)
from .variants import Trigger, VariantId


class Status(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class SearchLimits:
    time_limit: float = 3600.0
    node_limit: int | None = None
    #: budget on the deterministic work counter; used by the harness to make
    #: timeouts reproducible
    op_limit: int | None = None

    def __post_init__(self):
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.op_limit is not None and self.op_limit <= 0:
            raise ValueError("op_limit must be positive")


@dataclass(frozen=True)
class RunRecord:
    instance: str
    variant: VariantId
    status: Status
    cpu_time: float
    nodes: int
    op_count: int
    solution: dict | None = field(default=None, compare=False)

    @property
    def solved(self) -> bool:
        return self.status is not Status.TIMEOUT


class _LimitReached(Exception):
    pass


class _Propagator:
    __slots__ = ("kind", "scope", "constraint", "variant", "state", "in_queue")

    def __init__(self, kind, scope, constraint, variant):
        self.kind = kind
        self.scope = scope
        self.constraint = constraint
        self.variant = variant
        self.state = MatchingState()
        self.in_queue = False

    def run(self, domains, counter):
        if self.kind == "gac":
            return propagate_gac_alldiff(
                domains, self.scope, self.variant, counter, self.state
            )
        if self.kind == "naive":
            return propagate_naive_alldiff(domains, self.scope, counter)
        if self.kind == "diseq":
            return propagate_diseq(domains, self.scope, counter)
        c = self.constraint
        return propagate_table(domains, self.scope, c.tuples, c.allowed, counter)


class Solver:
    """Backtracking solver bound to one instance and one alldiff variant.

    Search picks variables in declaration order and tries their remaining
    values in declaration order. Every value-assignment attempt is one node,
    counted before propagation. Propagation runs to fixpoint after every
    assignment and once at the root.
    """

    def __init__(self, instance: CspInstance, variant: VariantId):
        self.instance = instance
        self.variant = variant
        n = instance.n_variables
        self.props: list[_Propagator] = []
        # per variable: propagators woken on any change / on assignment /
        # deferred until the eager queue drains
        self.on_any = [[] for _ in range(n)]
        self.on_assign = [[] for _ in range(n)]
        self.on_any_deferred = [[] for _ in range(n)]

        for con in instance.constraints:
            scope = instance.scope_indices(con)
            if con.kind is ConstraintKind.ALLDIFF:
                if variant.naive:
                    p = _Propagator("naive", scope, con, variant)
                    self._watch(p, self.on_assign)
                else:
                    p = _Propagator("gac", scope, con, variant)
                    if variant.trigger is Trigger.ANY_DOMAIN_CHANGE:
                        self._watch(p, self.on_any)
                    else:
                        self._watch(p, self.on_assign)
                        self._watch(p, self.on_any_deferred)
            elif con.kind is ConstraintKind.DISEQ:
                p = _Propagator("diseq", scope, con, variant)
                self._watch(p, self.on_assign)
            else:
                p = _Propagator("table", scope, con, variant)
                self._watch(p, self.on_any)
            self.props.append(p)

    @staticmethod
    def _watch(p, table):
        for x in p.scope:
            table[x].append(p)

    # -- domain store ------------------------------------------------------

    def _remove(self, var, val):
        dom = self.domains[var]
        if val not in dom:
            return
        dom.remove(val)
        self.trail.append((var, val))
        if not dom:
            raise Inconsistent
        for p in self.on_any[var]:
            self._enqueue(p, self.queue)
        if len(dom) == 1:
            for p in self.on_assign[var]:
                self._enqueue(p, self.queue)
        else:
            for p in self.on_any_deferred[var]:
                self._enqueue(p, self.deferred)

    @staticmethod
    def _enqueue(p, queue):
        if not p.in_queue:
            p.in_queue = True
            queue.append(p)

    def _undo(self, mark):
        trail = self.trail
        domains = self.domains
        while len(trail) > mark:
            var, val = trail.pop()
            domains[var].add(val)

    def _fixpoint(self):
        try:
            while True:
                if self.queue:
                    p = self.queue.popleft()
                elif self.deferred:
                    p = self.deferred.popleft()
                else:
                    return True
                p.in_queue = False
                self._check_ops()
                for var, val in p.run(self.domains, self.counter):
                    self._remove(var, val)
        except Inconsistent:
            for q in self.queue:
                q.in_queue = False
            for q in self.deferred:
                q.in_queue = False
            self.queue.clear()
            self.deferred.clear()
            return False

    # -- limits ------------------------------------------------------------

    def _check_ops(self):
        if self.op_limit is not None and self.counter.count > self.op_limit:
            raise _LimitReached

    def _check_limits(self):
        if self.node_limit is not None and self.nodes > self.node_limit:
            raise _LimitReached
        self._check_ops()
        if time.process_time() - self._t0 > self.time_limit:
            raise _LimitReached

    # -- search ------------------------------------------------------------

    def _reset(self, limits):
        self.time_limit = limits.time_limit
        self.node_limit = limits.node_limit
        self.op_limit = limits.op_limit
        self.domains = [set(v.domain) for v in self.instance.variables]
        self.trail: list = []
        self.queue: deque = deque()
        self.deferred: deque = deque()
        self.counter = OpCounter()
        self.nodes = 0
        for p in self.props:
            p.in_queue = False
            p.state = MatchingState()
        self._t0 = time.process_time()
        for p in self.props:
            self._enqueue(p, self.queue)

    def propagate_root(self) -> list[set] | None:
        """Domains after root propagation, or None if it wipes one out."""
        self._reset(SearchLimits())
        if not self._fixpoint():
            return None
        return [set(d) for d in self.domains]

    def solve(self, limits: SearchLimits | None = None) -> RunRecord:
        self._reset(limits or SearchLimits())
        solution = None
        try:
            if self._fixpoint() and self._dfs(0):
                status = Status.SAT
                solution = {
                    v.name: next(iter(d))
                    for v, d in zip(self.instance.variables, self.domains)
                }
            else:
                status = Status.UNSAT
        except _LimitReached:
            status = Status.TIMEOUT
        elapsed = time.process_time() - self._t0
        if status is Status.TIMEOUT:
            elapsed = max(elapsed, self.time_limit)
        return RunRecord(
            self.instance.name,
            self.variant,
            status,
            elapsed,
            self.nodes,
            self.counter.count,
            solution,
        )

    def _dfs(self, depth):
        variables = self.instance.variables
        if depth == len(variables):
            return True
        domain = self.domains[depth]
        for val in variables[depth].domain:
            if val not in domain:
                continue
            self.nodes += 1
            self.counter.count += 1
            self._check_limits()
            mark = len(self.trail)
            try:
                for other in list(domain):
                    if other != val:
                        self._remove(depth, other)
                ok = self._fixpoint()
            except Inconsistent:
                ok = False
            if ok and self._dfs(depth + 1):
                return True
            self._undo(mark)
            # the queue may hold stale entries if _remove raised mid-loop
            for q in self.queue:
                q.in_queue = False
            self.queue.clear()
            for q in self.deferred:
                q.in_queue = False
            self.deferred.clear()
        return False


def solve(
    instance: CspInstance, variant: VariantId, limits: SearchLimits | None = None
) -> RunRecord:
    """Solve to the first solution, a proof of unsatisfiability, or a limit."""
    return Solver(instance, variant).solve(limits)

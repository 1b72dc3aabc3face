"""Propagators for alldifferent, disequality and table constraints.

Each function looks at the current domains (a sequence of sets indexed by
variable) and returns the list of ``(variable, value)`` removals it infers.
A domain wipe-out is reported by raising :class:`Inconsistent`. None of them
mutate the domains they are given.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .variants import SccPruning, VariantId


class Inconsistent(Exception):
    """Raised when propagation proves the current node has no solution."""


class OpCounter:
    """Deterministic work counter shared by all propagators of one run."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0


Delta = list  # list[tuple[int, int]]


def _check_wipeout(domains, removals):
    lost: dict[int, int] = {}
    for var, _ in removals:
        lost[var] = lost.get(var, 0) + 1
    for var, n in lost.items():
        if n >= len(domains[var]):
            raise Inconsistent


def propagate_naive_alldiff(
    domains: Sequence[set], scope: Sequence[int], counter: OpCounter | None = None
) -> Delta:
    """Pairwise disequality reasoning: assigned values leave every other domain."""
    counter = counter or OpCounter()
    removals = []
    seen: dict[int, int] = {}
    for x in scope:
        if len(domains[x]) != 1:
            continue
        (val,) = domains[x]
        if val in seen:
            raise Inconsistent
        seen[val] = x
        for y in scope:
            counter.count += 1
            if y != x and val in domains[y]:
                removals.append((y, val))
    # the same value may be removed twice if two assigned variables share
    # neighbours; dedupe while keeping order
    removals = list(dict.fromkeys(removals))
    _check_wipeout(domains, removals)
    return removals


def propagate_diseq(
    domains: Sequence[set], scope: Sequence[int], counter: OpCounter | None = None
) -> Delta:
    counter = counter or OpCounter()
    a, b = scope
    counter.count += 1
    if len(domains[a]) == 1:
        (val,) = domains[a]
        if val in domains[b]:
            if len(domains[b]) == 1:
                raise Inconsistent
            return [(b, val)]
    if len(domains[b]) == 1:
        (val,) = domains[b]
        if val in domains[a]:
            if len(domains[a]) == 1:
                raise Inconsistent
            return [(a, val)]
    return []


def propagate_table(
    domains: Sequence[set],
    scope: Sequence[int],
    tuples,
    allowed: bool,
    counter: OpCounter | None = None,
) -> Delta:
    """GAC for a table constraint by scanning tuples for supports."""
    counter = counter or OpCounter()
    arity = len(scope)
    doms = [domains[x] for x in scope]
    valid = []
    for t in tuples:
        counter.count += 1
        if all(t[i] in doms[i] for i in range(arity)):
            valid.append(t)

    removals = []
    if allowed:
        for i in range(arity):
            supported = {t[i] for t in valid}
            for val in doms[i]:
                counter.count += 1
                if val not in supported:
                    removals.append((scope[i], val))
    else:
        sizes = [len(d) for d in doms]
        for i in range(arity):
            others = 1
            for j in range(arity):
                if j != i:
                    others *= sizes[j]
            forbidden: dict[int, int] = {}
            for t in valid:
                forbidden[t[i]] = forbidden.get(t[i], 0) + 1
            for val in doms[i]:
                counter.count += 1
                if forbidden.get(val, 0) >= others:
                    removals.append((scope[i], val))
    _check_wipeout(domains, removals)
    return removals


# --------------------------------------------------------------------------
# matching-based GAC for alldifferent


@dataclass
class MatchingState:
    """Per-constraint memory kept between calls (the previous matching)."""

    var_to_val: dict = field(default_factory=dict)


def _augment(x, domains, var_to_val, val_to_var, counter, order):
    # iterative Kuhn augmenting-path search from free variable x
    visited = set()
    stack = [(x, iter(order(x)))]
    parent: dict = {}
    while stack:
        u, it = stack[-1]
        advanced = False
        for val in it:
            counter.count += 1
            if val in visited:
                continue
            visited.add(val)
            owner = val_to_var.get(val)
            parent[val] = u
            if owner is None:
                # flip the path back to x
                while True:
                    pu = parent[val]
                    prev = var_to_val.get(pu)
                    var_to_val[pu] = val
                    val_to_var[val] = pu
                    if pu == x:
                        return True
                    val = prev
            stack.append((owner, iter(order(owner))))
            advanced = True
            break
        if not advanced:
            stack.pop()
    return False


def maximum_matching(
    domains: Sequence[set],
    scope: Sequence[int],
    counter: OpCounter,
    hint: dict | None = None,
) -> dict:
    """Maximum variable-value matching, optionally repairing ``hint``.

    Returns ``{var: value}``; variables left unmatched are absent.
    """
    var_to_val: dict = {}
    val_to_var: dict = {}
    if hint:
        for x in scope:
            val = hint.get(x)
            counter.count += 1
            if val is not None and val in domains[x] and val not in val_to_var:
                var_to_val[x] = val
                val_to_var[val] = x

    def order(x):
        return sorted(domains[x])

    for x in scope:
        if x not in var_to_val:
            _augment(x, domains, var_to_val, val_to_var, counter, order)
    return var_to_val


def _tarjan(nodes, succ, counter):
    """Iterative Tarjan; returns {node: component id}."""
    index: dict = {}
    low: dict = {}
    comp: dict = {}
    on_stack = set()
    stack = []
    counter_idx = 0
    n_comp = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter_idx
        counter_idx += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            pushed = False
            for w in it:
                counter.count += 1
                if w not in index:
                    index[w] = low[w] = counter_idx
                    counter_idx += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    pushed = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if pushed:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return comp


def _value_components(domains, scope, counter):
    """Connected components of the variable-value graph, as variable lists."""
    val_owner: dict = {}
    parent = {x: x for x in scope}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for x in scope:
        for val in domains[x]:
            counter.count += 1
            y = val_owner.setdefault(val, x)
            if y != x:
                ra, rb = find(x), find(y)
                if ra != rb:
                    parent[ra] = rb
    groups: dict = {}
    for x in scope:
        groups.setdefault(find(x), []).append(x)
    return list(groups.values())


def propagate_gac_alldiff(
    domains: Sequence[set],
    scope: Sequence[int],
    variant: VariantId,
    counter: OpCounter | None = None,
    state: MatchingState | None = None,
) -> Delta:
    """Remove exactly the values that take part in no solution of alldiff.

    Builds a maximum matching of the variable-value graph, then keeps an edge
    if it is matched, lies inside a strongly connected component of the
    residual digraph, or sits on an alternating path from a free value.
    The knobs in ``variant`` change how the matching and SCCs are computed;
    the returned removals are the same for every knob setting.
    """
    counter = counter or OpCounter()
    hint = state.var_to_val if (state is not None and variant.incremental_matching) else None
    match = maximum_matching(domains, scope, counter, hint)
    if state is not None:
        state.var_to_val = dict(match)
    if len(match) < len(scope):
        raise Inconsistent

    val_to_var = {val: x for x, val in match.items()}

    # residual digraph: variable -> matched value, value -> other variables.
    # node encoding: variables as ("x", i), values as ("v", val)
    val_adj: dict = {}
    for x in scope:
        for val in domains[x]:
            if match[x] != val:
                val_adj.setdefault(val, []).append(x)

    def succ(node):
        kind, key = node
        if kind == "x":
            return (("v", match[key]),)
        return tuple(("x", y) for y in val_adj.get(key, ()))

    # values reachable from a free value along alternating paths
    reachable = set()
    frontier = [("v", val) for val in val_adj if val not in val_to_var]
    reachable.update(frontier)
    while frontier:
        node = frontier.pop()
        for nxt in succ(node):
            counter.count += 1
            if nxt not in reachable:
                reachable.add(nxt)
                frontier.append(nxt)

    if variant.scc_pruning is SccPruning.FULL:
        groups = [list(scope)]
    else:
        groups = _value_components(domains, scope, counter)

    removals = []
    for group in groups:
        if all(len(domains[x]) == 1 for x in group):
            continue
        nodes = [("x", x) for x in group]
        comp = _tarjan(nodes, succ, counter)
        for x in group:
            cx = comp[("x", x)]
            for val in sorted(domains[x]):
                counter.count += 1
                if val == match[x]:
                    continue
                vnode = ("v", val)
                if vnode in reachable or comp.get(vnode) == cx:
                    continue
                removals.append((x, val))
    return removals

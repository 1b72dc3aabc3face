"""Brute-force reference computations, kept independent of the package code."""

import itertools


def alldiff_supports(domains):
    """Values occurring in some all-different assignment, per position."""
    support = [set() for _ in domains]
    for combo in itertools.product(*[sorted(d) for d in domains]):
        if len(set(combo)) == len(combo):
            for i, v in enumerate(combo):
                support[i].add(v)
    return support


def count_solutions(instance, limit=None):
    names = [v.name for v in instance.variables]
    doms = [v.domain for v in instance.variables]
    count = 0
    for combo in itertools.product(*doms):
        assignment = dict(zip(names, combo))
        ok = all(
            con.is_satisfied([assignment[n] for n in con.scope]) for con in instance.constraints
        )
        if ok:
            count += 1
            if limit is not None and count >= limit:
                return count
    return count


def min_width_brute_force(n, adjacency):
    best = None
    for order in itertools.permutations(range(n)):
        pos = {v: i for i, v in enumerate(order)}
        w = max((sum(1 for u in adjacency[v] if pos[u] < pos[v]) for v in range(n)), default=0)
        best = w if best is None else min(best, w)
    return best or 0


def local_density_mean(n, edges):
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    total = 0.0
    for v in range(n):
        nb = sorted(adj[v])
        if len(nb) < 2:
            continue
        pairs = list(itertools.combinations(nb, 2))
        total += sum(1 for a, b in pairs if b in adj[a]) / len(pairs)
    return total / n


def min_width_subset_dp(n, adjacency):
    """Minimum ordering width, exact, by dynamic programming over prefixes.

    best[S] is the least width achievable when the vertices of S come first.
    Placing v last within S costs |N(v) & (S - v)|. Equivalent to trying every
    ordering but feasible up to ~16 vertices.
    """
    masks = [sum(1 << u for u in adjacency[v]) for v in range(n)]
    best = [0] * (1 << n)
    for s in range(1, 1 << n):
        options = []
        for v in range(n):
            if s >> v & 1:
                rest = s & ~(1 << v)
                options.append(max(best[rest], bin(masks[v] & rest).count("1")))
        best[s] = min(options)
    return best[(1 << n) - 1]

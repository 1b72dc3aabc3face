"""Instance attributes used to choose an alldifferent implementation.

Thirty-seven numbers describe each instance: primal-graph structure, domain
and arity statistics, constraint overlap, auxiliary-variable ratio, sampled
tightness, variable symmetry, and alldifferent slack. The cheap subset drops
every primal-graph attribute except edge density and has 29 entries.
"""

from __future__ import annotations

import enum
import itertools
import json
import time
from collections import Counter
from dataclasses import dataclass, field
from math import comb

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .csp import ConstraintKind, CspInstance

TIGHTNESS_SAMPLES = 1000

STAT_SUFFIXES = ("min", "q1", "median", "q3", "max", "mean")


def _stat_names(prefix):
    return tuple(f"{prefix}_{s}" for s in STAT_SUFFIXES)


FULL_FEATURES: tuple[str, ...] = (
    ("edge_density", "clustering_coefficient")
    + ("degree_min", "degree_max", "degree_mean", "degree_median", "degree_stddev")
    + ("width_of_ordering", "width_of_graph")
    + _stat_names("domain_size")
    + _stat_names("arity")
    + ("multiple_shared_variables", "norm_mean_constraints_per_variable", "aux_ratio")
    + _stat_names("tightness")
    + ("symmetric_variable_proportion",)
    + _stat_names("alldiff")
)

_EXPENSIVE = {
    "clustering_coefficient",
    "degree_min",
    "degree_max",
    "degree_mean",
    "degree_median",
    "degree_stddev",
    "width_of_ordering",
    "width_of_graph",
}

CHEAP_FEATURES: tuple[str, ...] = tuple(f for f in FULL_FEATURES if f not in _EXPENSIVE)


class FeatureSet(str, enum.Enum):
    FULL = "full"
    CHEAP = "cheap"

    @property
    def names(self) -> tuple[str, ...]:
        return FULL_FEATURES if self is FeatureSet.FULL else CHEAP_FEATURES


# --------------------------------------------------------------------------
# primal graph


@dataclass(frozen=True)
class PrimalGraph:
    n: int
    adjacency: tuple[frozenset[int], ...]

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self):
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    @classmethod
    def from_edges(cls, n, edges) -> "PrimalGraph":
        adj = [set() for _ in range(n)]
        for u, v in edges:
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        return cls(n, tuple(frozenset(a) for a in adj))


def build_primal_graph(instance: CspInstance) -> PrimalGraph:
    edges = []
    for con in instance.constraints:
        edges.extend(itertools.combinations(instance.scope_indices(con), 2))
    return PrimalGraph.from_edges(instance.n_variables, edges)


def edge_density(g: PrimalGraph) -> float:
    if g.n < 2:
        return 0.0
    return g.n_edges / (g.n * (g.n - 1) / 2)


def clustering_coefficient(g: PrimalGraph) -> float:
    if g.n == 0:
        return 0.0
    total = 0.0
    for v in range(g.n):
        nbrs = g.adjacency[v]
        k = len(nbrs)
        if k < 2:
            continue
        links = sum(1 for a in nbrs for b in g.adjacency[a] if b in nbrs) // 2
        total += links / (k * (k - 1) / 2)
    return total / g.n


def degree_features(g: PrimalGraph) -> dict[str, float]:
    if g.n == 0:
        return dict.fromkeys(("min", "max", "mean", "median", "stddev"), 0.0)
    deg = np.asarray(g.degrees(), dtype=float) / g.n
    return {
        "min": float(deg.min()),
        "max": float(deg.max()),
        "mean": float(deg.mean()),
        "median": float(np.median(deg)),
        # population std of raw degrees, divided by |V|
        "stddev": float(deg.std()),
    }


def ordering_width(g: PrimalGraph, order) -> int:
    position = {v: i for i, v in enumerate(order)}
    return max(
        (sum(1 for u in g.adjacency[v] if position[u] < position[v]) for v in order),
        default=0,
    )


def width_of_ordering(g: PrimalGraph, order=None) -> float:
    """Normalised width of ``order`` (declaration order by default)."""
    if g.n == 0:
        return 0.0
    order = range(g.n) if order is None else order
    return ordering_width(g, order) / g.n


def graph_width(g: PrimalGraph) -> int:
    """Minimum width over all orderings, by min-degree elimination."""
    degree = {v: len(g.adjacency[v]) for v in range(g.n)}
    alive = set(range(g.n))
    width = 0
    while alive:
        v = min(alive, key=lambda u: (degree[u], u))
        width = max(width, degree[v])
        alive.remove(v)
        for u in g.adjacency[v]:
            if u in alive:
                degree[u] -= 1
    return width


def width_of_graph(g: PrimalGraph) -> float:
    if g.n == 0:
        return 0.0
    return graph_width(g) / g.n


# --------------------------------------------------------------------------
# statistics


def scalar_stats(values) -> tuple[dict[str, float], bool]:
    """Min, quartiles (linear interpolation), max and mean.

    Returns the stats and a flag that is True when ``values`` was empty, in
    which case every stat is 0.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return dict.fromkeys(STAT_SUFFIXES, 0.0), True
    q = np.percentile(arr, [0, 25, 50, 75, 100], method="linear")
    stats = dict(zip(("min", "q1", "median", "q3", "max"), (float(x) for x in q)))
    stats["mean"] = float(arr.mean())
    return stats, False


def constraint_arity_stats(instance: CspInstance):
    n_cons = len(instance.constraints)
    stats, empty = scalar_stats(c.arity for c in instance.constraints)
    if not empty:
        stats = {k: v / n_cons for k, v in stats.items()}
    return stats, empty


def multiple_shared_variables(instance: CspInstance) -> float:
    scopes = [frozenset(c.scope) for c in instance.constraints]
    pairs = comb(len(scopes), 2)
    if pairs == 0:
        return 0.0
    shared = sum(1 for a, b in itertools.combinations(scopes, 2) if len(a & b) >= 2)
    return shared / pairs


def norm_mean_constraints_per_variable(instance: CspInstance) -> float:
    n_cons = len(instance.constraints)
    if n_cons == 0 or instance.n_variables == 0:
        return 0.0
    per_var = Counter(name for c in instance.constraints for name in c.scope)
    mean = sum(per_var[v.name] for v in instance.variables) / instance.n_variables
    return mean / n_cons


def aux_ratio(instance: CspInstance) -> float:
    n_aux = sum(1 for v in instance.variables if v.is_auxiliary)
    return n_aux / max(1, instance.n_variables - n_aux)


def constraint_tightness(instance, constraint, rng, samples=TIGHTNESS_SAMPLES) -> float:
    """Fraction of uniformly sampled domain tuples the constraint rejects."""
    doms = [
        np.asarray(instance.variables[i].domain)
        for i in instance.scope_indices(constraint)
    ]
    cols = [d[rng.integers(0, len(d), size=samples)] for d in doms]
    sample = np.column_stack(cols)
    if constraint.kind is ConstraintKind.DISEQ:
        ok = sample[:, 0] != sample[:, 1]
    elif constraint.kind is ConstraintKind.ALLDIFF:
        srt = np.sort(sample, axis=1)
        ok = np.all(srt[:, 1:] != srt[:, :-1], axis=1)
    else:
        ok = np.fromiter(
            (constraint.is_satisfied(tuple(int(x) for x in row)) for row in sample),
            dtype=bool,
            count=samples,
        )
    return float(1.0 - ok.mean())


def tightness_stats(instance: CspInstance, seed: int):
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    return scalar_stats(constraint_tightness(instance, c, rng) for c in instance.constraints)


def variable_partition(instance: CspInstance) -> list[list[int]]:
    """Colour refinement over variables until the partition is stable.

    Initial colours pair each domain with the multiset of constraint kinds the
    variable appears in. Each round a variable's colour is extended by the
    multiset of (kind, sorted colours of its co-scoped variables) over its
    constraints. Scopes are treated as unordered.
    """
    n = instance.n_variables
    scopes = [(c.kind.value, instance.scope_indices(c)) for c in instance.constraints]
    incident = [[] for _ in range(n)]
    for ci, (_, scope) in enumerate(scopes):
        for x in scope:
            incident[x].append(ci)

    def relabel(keys):
        table = {k: i for i, k in enumerate(sorted(set(keys)))}
        return [table[k] for k in keys]

    colour = relabel(
        [
            (
                tuple(sorted(instance.variables[x].domain)),
                tuple(sorted(scopes[ci][0] for ci in incident[x])),
            )
            for x in range(n)
        ]
    )
    while True:
        keys = []
        for x in range(n):
            sig = sorted(
                (
                    scopes[ci][0],
                    tuple(sorted(colour[y] for y in scopes[ci][1] if y != x)),
                )
                for ci in incident[x]
            )
            keys.append((colour[x], tuple(sig)))
        refined = relabel(keys)
        if len(set(refined)) == len(set(colour)):
            break
        colour = refined
    parts: dict[int, list[int]] = {}
    for x, c in enumerate(colour):
        parts.setdefault(c, []).append(x)
    return list(parts.values())


def symmetric_variable_proportion(instance: CspInstance) -> float:
    n = instance.n_variables
    if n < 2:
        return 0.0
    same = sum(comb(len(p), 2) for p in variable_partition(instance))
    return same / comb(n, 2)


def alldiff_stats(instance: CspInstance):
    ratios = []
    for con in instance.constraints:
        if con.kind is ConstraintKind.ALLDIFF:
            union = set()
            for i in instance.scope_indices(con):
                union.update(instance.variables[i].domain)
            ratios.append(len(union) / con.arity)
    return scalar_stats(ratios)


# --------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class FeatureVector:
    instance: str
    feature_set: FeatureSet
    seed: int
    values: tuple[float, ...]
    flags: tuple[str, ...] = ()
    extraction_time: float | None = field(default=None, compare=False)

    @property
    def names(self) -> tuple[str, ...]:
        return self.feature_set.names

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))

    def __getitem__(self, name: str) -> float:
        return self.values[self.names.index(name)]

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def to_record(self, include_time: bool = True) -> dict:
        record = {
            "instance": self.instance,
            "feature_set": self.feature_set.value,
            "seed": self.seed,
            "features": self.as_dict(),
            "flags": list(self.flags),
        }
        if include_time:
            record["extraction_time"] = self.extraction_time
        return record

    @classmethod
    def from_record(cls, record: dict) -> "FeatureVector":
        fs = FeatureSet(record["feature_set"])
        feats = record["features"]
        missing = [n for n in fs.names if n not in feats]
        if missing or len(feats) != len(fs.names):
            raise ValueError(f"feature record for {record.get('instance')!r} does not match the {fs.value} set")
        return cls(
            record["instance"],
            fs,
            int(record["seed"]),
            tuple(float(feats[n]) for n in fs.names),
            tuple(record.get("flags", ())),
            record.get("extraction_time"),
        )

    def to_json(self, include_time: bool = False) -> str:
        return json.dumps(self.to_record(include_time), sort_keys=True)

    def csv_row(self) -> list:
        return [self.instance] + [repr(v) for v in self.values]


def extract_features(
    instance: CspInstance, feature_set: FeatureSet | str = FeatureSet.FULL, seed: int = 0
) -> FeatureVector:
    feature_set = FeatureSet(feature_set)
    t0 = time.perf_counter()
    out: dict[str, float] = {}
    flags = []

    g = build_primal_graph(instance)
    out["edge_density"] = edge_density(g)
    if feature_set is FeatureSet.FULL:
        out["clustering_coefficient"] = clustering_coefficient(g)
        for k, v in degree_features(g).items():
            out[f"degree_{k}"] = v
        out["width_of_ordering"] = width_of_ordering(g)
        out["width_of_graph"] = width_of_graph(g)

    for prefix, (stats, empty) in (
        ("domain_size", scalar_stats(len(v.domain) for v in instance.variables)),
        ("arity", constraint_arity_stats(instance)),
    ):
        if empty:
            flags.append(f"no_{prefix}")
        out.update({f"{prefix}_{k}": v for k, v in stats.items()})

    if len(instance.constraints) < 2:
        flags.append("fewer_than_two_constraints")
    out["multiple_shared_variables"] = multiple_shared_variables(instance)
    out["norm_mean_constraints_per_variable"] = norm_mean_constraints_per_variable(instance)
    out["aux_ratio"] = aux_ratio(instance)

    stats, empty = tightness_stats(instance, seed)
    if empty:
        flags.append("no_constraints")
    out.update({f"tightness_{k}": v for k, v in stats.items()})

    if instance.n_variables < 2:
        flags.append("fewer_than_two_variables")
    out["symmetric_variable_proportion"] = symmetric_variable_proportion(instance)

    stats, empty = alldiff_stats(instance)
    if empty:
        flags.append("no_alldiff")
    out.update({f"alldiff_{k}": v for k, v in stats.items()})

    values = tuple(float(out[n]) for n in feature_set.names)
    return FeatureVector(
        instance.name,
        feature_set,
        int(seed),
        values,
        tuple(flags),
        time.perf_counter() - t0,
    )


class FeatureExtractor(BaseEstimator, TransformerMixin):
    """Turn a list of :class:`CspInstance` objects into a feature matrix.

    Stateless, so ``fit`` only validates the parameters; it exists for
    pipeline composition.
    """

    def __init__(self, feature_set="full", seed=0):
        self.feature_set = feature_set
        self.seed = seed

    def fit(self, X, y=None):
        self.feature_set_ = FeatureSet(self.feature_set)
        self.n_features_out_ = len(self.feature_set_.names)
        return self

    def extract(self, X) -> list[FeatureVector]:
        fs = FeatureSet(self.feature_set)
        return [extract_features(inst, fs, self.seed) for inst in X]

    def transform(self, X):
        vectors = self.extract(X)
        n = len(FeatureSet(self.feature_set).names)
        if not vectors:
            return np.empty((0, n))
        return np.vstack([v.to_array() for v in vectors])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(FeatureSet(self.feature_set).names, dtype=object)

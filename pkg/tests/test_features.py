import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alldiffsel.csp import Constraint, CspInstance, Variable, generate_instance
from alldiffsel.features import (
    CHEAP_FEATURES,
    FULL_FEATURES,
    FeatureExtractor,
    FeatureSet,
    PrimalGraph,
    aux_ratio,
    alldiff_stats,
    build_primal_graph,
    clustering_coefficient,
    constraint_tightness,
    degree_features,
    edge_density,
    extract_features,
    graph_width,
    multiple_shared_variables,
    norm_mean_constraints_per_variable,
    scalar_stats,
    symmetric_variable_proportion,
    tightness_stats,
    width_of_graph,
    width_of_ordering,
)
from oracles import local_density_mean, min_width_brute_force


def inst(domains, constraints, aux=()):
    variables = [Variable(n, d, n in aux) for n, d in domains.items()]
    return CspInstance("t", variables, constraints)


def complete(n):
    return PrimalGraph.from_edges(n, itertools.combinations(range(n), 2))


STAR = PrimalGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
PATH = PrimalGraph.from_edges(3, [(0, 1), (1, 2)])
K4_MINUS = PrimalGraph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
C5 = PrimalGraph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])


# -- primal graph ---------------------------------------------------------------


def test_primal_graph_from_alldiff_is_clique():
    g = build_primal_graph(inst({"a": (1,), "b": (1,), "c": (1,)}, [Constraint("alldiff", ("a", "b", "c"))]))
    assert g.edges() == [(0, 1), (0, 2), (1, 2)]


def test_primal_graph_isolated_and_path():
    assert build_primal_graph(inst({"a": (1,), "b": (2,)}, [])).n_edges == 0
    g = build_primal_graph(
        inst(
            {"a": (1, 2), "b": (1, 2), "c": (1, 2)},
            [Constraint("diseq", ("a", "b")), Constraint("diseq", ("b", "c"))],
        )
    )
    assert g.edges() == [(0, 1), (1, 2)]


def test_edge_density():
    assert edge_density(complete(3)) == 1.0
    assert edge_density(PrimalGraph.from_edges(3, [])) == 0.0
    assert edge_density(PATH) == pytest.approx(2 / 3)
    assert edge_density(PrimalGraph.from_edges(1, [])) == 0.0


def test_clustering_coefficient():
    assert clustering_coefficient(complete(3)) == 1.0
    assert clustering_coefficient(STAR) == 0.0
    expected = local_density_mean(4, K4_MINUS.edges())
    assert expected == pytest.approx(5 / 6)
    assert clustering_coefficient(K4_MINUS) == pytest.approx(expected)


def test_degree_features():
    k3 = degree_features(complete(3))
    assert k3["min"] == k3["max"] == k3["mean"] == k3["median"] == pytest.approx(2 / 3)
    assert k3["stddev"] == 0.0
    star = degree_features(STAR)
    assert star["max"] == 3 / 4 and star["min"] == 1 / 4
    assert degree_features(PATH)["mean"] == pytest.approx(4 / 9)


def test_width_of_ordering():
    centre_last = PrimalGraph.from_edges(4, [(3, 0), (3, 1), (3, 2)])
    assert width_of_ordering(centre_last) == 3 / 4
    assert width_of_ordering(STAR) == 1 / 4
    assert width_of_ordering(PrimalGraph.from_edges(4, [])) == 0.0


def test_width_of_graph_examples():
    for n in range(1, 7):
        assert width_of_graph(complete(n)) == pytest.approx((n - 1) / n)
    assert width_of_graph(STAR) == 1 / 4
    assert min_width_brute_force(5, C5.adjacency) == 2
    assert width_of_graph(C5) == 2 / 5


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))))))
def test_width_of_graph_matches_brute_force(graph):
    n, edges = graph
    g = PrimalGraph.from_edges(n, edges)
    assert graph_width(g) == min_width_brute_force(n, g.adjacency)


def test_scalar_stats():
    five, empty = scalar_stats([5])
    assert set(five.values()) == {5.0} and not empty
    s, _ = scalar_stats([1, 2, 3, 4])
    assert s["median"] == 2.5 and s["mean"] == 2.5
    assert s["q1"] == 1.75 and s["q3"] == 3.25
    zeros, flagged = scalar_stats([])
    assert flagged and set(zeros.values()) == {0.0}


def test_multiple_shared_variables():
    d = {k: (1, 2) for k in "abcd"}
    assert multiple_shared_variables(inst(d, [Constraint("alldiff", ("a", "b", "c")), Constraint("table", ("a", "b"))])) == 1.0
    assert multiple_shared_variables(inst(d, [Constraint("diseq", ("a", "b")), Constraint("diseq", ("c", "d"))])) == 0.0
    three = inst(
        d,
        [Constraint("alldiff", ("a", "b", "c")), Constraint("diseq", ("b", "c")), Constraint("diseq", ("a", "d"))],
    )
    assert multiple_shared_variables(three) == pytest.approx(1 / 3)


def test_constraints_per_variable():
    d = {k: (1, 2) for k in "abc"}
    i = inst(d, [Constraint("diseq", ("a", "b")), Constraint("diseq", ("b", "c"))])
    # counts 1, 2, 1 -> mean 4/3, over 2 constraints
    assert norm_mean_constraints_per_variable(i) == pytest.approx(2 / 3)


def test_aux_ratio():
    d = {f"v{i}": (1,) for i in range(6)}
    assert aux_ratio(inst({f"v{i}": (1,) for i in range(5)}, [])) == 0.0
    assert aux_ratio(inst(d, [], aux={"v0", "v1"})) == 0.5
    assert aux_ratio(inst({"a": (1,), "b": (1,), "c": (1,)}, [], aux={"a", "b", "c"})) == 3.0


def test_tightness_examples():
    d = {"a": (1, 2), "b": (1, 2)}
    rng = np.random.default_rng(0)
    est = constraint_tightness(inst(d, []), Constraint("diseq", ("a", "b")), rng)
    assert 0.45 <= est <= 0.55
    i = inst(d, [])
    assert constraint_tightness(i, Constraint("table", ("a", "b"), (), True), rng) == 1.0
    assert constraint_tightness(i, Constraint("table", ("a", "b"), (), False), rng) == 0.0


def test_tightness_alldiff_vectorised_path_matches_definition():
    d = {"a": (1, 2, 3), "b": (1, 2, 3), "c": (1, 2, 3)}
    # exact tightness 1 - 6/27
    exact = 1 - 6 / 27
    sd = math.sqrt(exact * (1 - exact) / 1000)
    est = constraint_tightness(inst(d, []), Constraint("alldiff", ("a", "b", "c")), np.random.default_rng(4))
    assert abs(est - exact) <= 3 * sd


def test_tightness_stats_deterministic():
    i = generate_instance("RandomTable", 10, 3)
    assert tightness_stats(i, 11) == tightness_stats(i, 11)


def _product_table(x, y, z):
    small = (1, 2, 3)
    tuples = tuple((a, b, a * b) for a in small for b in small)
    return Constraint("table", (x, y, z), tuples, True)


def test_symmetric_variables_product_example():
    small, prods = (1, 2, 3), (1, 2, 3, 4, 6, 9)
    d = {"x1": small, "x2": small, "x3": prods, "x4": small, "x5": small, "x6": prods}
    i = inst(d, [_product_table("x1", "x2", "x3"), _product_table("x4", "x5", "x6")])
    assert symmetric_variable_proportion(i) == pytest.approx(7 / 15)


def test_symmetric_variables_extremes():
    d = {k: (1, 2, 3) for k in "abcd"}
    assert symmetric_variable_proportion(inst(d, [Constraint("alldiff", tuple("abcd"))])) == 1.0
    assert symmetric_variable_proportion(inst({"a": (1,), "b": (2,)}, [])) == 0.0
    assert symmetric_variable_proportion(inst({"a": (1,)}, [])) == 0.0


def test_alldiff_stats():
    pig = generate_instance("PigeonHole", 3, 0)
    assert alldiff_stats(pig)[0]["mean"] == pytest.approx(3 / 4)
    assert alldiff_stats(inst({"a": (1,), "b": (2,)}, [Constraint("alldiff", ("a", "b"))]))[0]["max"] == 1.0
    wide = inst({"a": tuple(range(1, 11)), "b": tuple(range(1, 11))}, [Constraint("alldiff", ("a", "b"))])
    assert alldiff_stats(wide)[0]["min"] == 5.0
    stats, flagged = alldiff_stats(inst({"a": (1,)}, []))
    assert flagged and set(stats.values()) == {0.0}


# -- assembly -------------------------------------------------------------------


def test_feature_counts_and_cheap_subset():
    assert len(FULL_FEATURES) == 37 and len(set(FULL_FEATURES)) == 37
    assert len(CHEAP_FEATURES) == 29
    assert set(CHEAP_FEATURES) <= set(FULL_FEATURES)
    assert "edge_density" in CHEAP_FEATURES
    assert "width_of_graph" not in CHEAP_FEATURES


@pytest.mark.parametrize("family,size", [("PigeonHole", 5), ("LatinSquare", 4), ("GraphColouring", 12), ("RandomBinaryDiseq", 15), ("RandomTable", 9)])
def test_full_and_cheap_agree(family, size):
    i = generate_instance(family, size, 2)
    full = extract_features(i, "full", 9)
    cheap = extract_features(i, "cheap", 9)
    assert len(full.values) == 37 and len(cheap.values) == 29
    for name in CHEAP_FEATURES:
        assert cheap[name] == full[name]
    assert all(np.isfinite(full.values))
    for name in ("edge_density", "clustering_coefficient", "multiple_shared_variables", "symmetric_variable_proportion"):
        assert 0.0 <= full[name] <= 1.0


def test_extraction_is_deterministic_bytes():
    i = generate_instance("RandomTable", 12, 8)
    assert extract_features(i, "full", 5).to_json() == extract_features(i, "full", 5).to_json()
    assert extract_features(i, "full", 5).seed == 5


def test_degenerate_instance_flags():
    fv = extract_features(inst({"a": (1,)}, []), "full", 0)
    assert {"no_constraints", "no_alldiff", "fewer_than_two_variables"} <= set(fv.flags)
    assert all(v == 0.0 for v in fv.values[:9])


def test_record_round_trip():
    fv = extract_features(generate_instance("GraphColouring", 10, 1), "cheap", 3)
    from alldiffsel.features import FeatureVector

    again = FeatureVector.from_record(fv.to_record())
    assert again == fv


def test_kn_normalisations_scale():
    for n in range(2, 8):
        g = complete(n)
        assert edge_density(g) == 1.0
        assert clustering_coefficient(g) == (1.0 if n >= 3 else 0.0)
        assert width_of_graph(g) == pytest.approx((n - 1) / n)


def test_transformer_interface():
    corpus = [generate_instance("PigeonHole", n, 0) for n in (3, 4, 5)]
    ext = FeatureExtractor(feature_set="cheap", seed=1)
    X = ext.fit_transform(corpus)
    assert X.shape == (3, 29)
    assert list(ext.get_feature_names_out()) == list(CHEAP_FEATURES)
    assert ext.get_params() == {"feature_set": "cheap", "seed": 1}
    from sklearn.base import clone

    assert np.array_equal(clone(ext).fit_transform(corpus), X)


def test_tightness_converges_for_exact_constraints():
    # disallowed table with exactly half of a 4x4 space
    d = {"a": (1, 2, 3, 4), "b": (1, 2, 3, 4)}
    tuples = tuple((a, b) for a in range(1, 5) for b in range(1, 5) if (a + b) % 2)
    con = Constraint("table", ("a", "b"), tuples, False)
    i = inst(d, [con])
    t = 0.5
    bound = 3 * math.sqrt(t * (1 - t) / 1000)
    ok = sum(abs(constraint_tightness(i, con, np.random.default_rng(s)) - t) <= bound for s in range(100))
    assert ok >= 99

"""
Tests for rank distances, the stability/locality/monotonicity checks
and precision/recall scoring
"""

import itertools

import numpy as np
import pytest
from pydantic import ValidationError

from wildquery.modules.analysis import (
    GraphFamilySpec,
    all_bipartite_graphs,
    converged_pt_hits,
    kendall_tau,
    load_truth,
    locality_check,
    manhattan,
    monotonicity_check,
    pattern_subset_experiment,
    precision_at_recall,
    precision_recall,
    random_graph,
    restrict_patterns,
    stability_experiment,
    two_community_graph,
    two_community_sizes,
)
from wildquery.modules.errors import (
    CorpusIOError,
    DimensionMismatchError,
    DimensionTooSmallError,
    EdgeNotInGraphError,
    EmptyTruthError,
    InsufficientEdgesError,
)
from wildquery.modules.rank import BipartiteGraph, npages, npatterns, pt_hits


def brute_kendall(a, b):
    n = len(a)
    disagree = 0
    for i, j in itertools.combinations(range(n), 2):
        if (a[i] - a[j]) * (b[i] - b[j]) < 0:
            disagree += 1
    return disagree / (n * (n - 1) / 2)


# ============================================================================
# DISTANCES
# ============================================================================

def test_distances_match_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(2, 65))
        # small integer range so ties are common
        a = rng.integers(0, 6, size=n).astype(float)
        b = rng.integers(0, 6, size=n).astype(float)
        assert kendall_tau(a, b) == pytest.approx(brute_kendall(a, b), abs=1e-12)
        assert manhattan(a, b) == pytest.approx(np.abs(a - b).sum() / n, abs=1e-12)


def test_kendall_tau_ignores_monotone_rescaling():
    rng = np.random.default_rng(12)
    for _ in range(200):
        n = int(rng.integers(2, 40))
        a = rng.integers(0, 6, size=n).astype(float)
        b = rng.integers(0, 6, size=n).astype(float)
        base = kendall_tau(a, b)
        assert kendall_tau(3 * a + 1, b) == base
        assert kendall_tau(a, np.exp(b)) == base
        assert kendall_tau(np.exp(a), 3 * b + 1) == base


def test_manhattan_triangle_inequality():
    rng = np.random.default_rng(13)
    for _ in range(500):
        n = int(rng.integers(1, 30))
        a, b, c = (rng.normal(size=n) for _ in range(3))
        assert manhattan(a, c) <= manhattan(a, b) + manhattan(b, c) + 1e-12


def test_kendall_tau_extremes():
    x = np.arange(10, dtype=float)
    assert kendall_tau(x, x) == 0.0
    assert kendall_tau(x, x[::-1]) == 1.0
    assert kendall_tau(x, np.zeros(10)) == 0.0


def test_distances_accept_rank_vectors():
    g = BipartiteGraph.from_matrix([[3, 1, 0], [0, 1, 0]])
    assert kendall_tau(npatterns(g), npages(g)) == pytest.approx(1 / 3)
    assert manhattan(npatterns(g), npages(g)) == pytest.approx(2 / 3)


def test_distance_errors():
    with pytest.raises(DimensionMismatchError):
        kendall_tau([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatchError):
        manhattan([1.0], [1.0, 2.0])
    with pytest.raises(DimensionTooSmallError):
        kendall_tau([1.0], [2.0])
    with pytest.raises(DimensionTooSmallError):
        manhattan([], [])


# ============================================================================
# GRAPH FAMILIES
# ============================================================================

def test_random_graph_is_seeded():
    a = random_graph(6, 20, 0.3, weight_max=3, seed=5)
    b = random_graph(6, 20, 0.3, weight_max=3, seed=5)
    assert a.edges == b.edges
    assert a.max_weight <= 3


def test_two_community_sizes():
    assert two_community_sizes(5, 20) == (3, 7, 2, 10)
    a, N, b, M = two_community_sizes(12, 100)
    assert b == a - 1 and b * M == a * N - 1


def test_two_community_graph_blocks():
    g = two_community_graph(5, 20)
    assert g.edge_count == 3 * 7 + 2 * 10
    assert npatterns(g).scores[17:].tolist() == [0.0, 0.0, 0.0]


def test_two_community_bridges():
    g = two_community_graph(5, 22, bridge_edges=2, seed=1)
    a, N, b, M = two_community_sizes(5, 22, 2)
    for t in (N + M, N + M + 1):
        assert len(g.tuple_patterns(t)) == 2


@pytest.mark.parametrize("fields", [
    {"family": "two-community", "m": 2, "n": 50},
    {"family": "two-community", "m": 5, "n": 5},
    {"family": "random", "m": 3, "n": 10, "edge_probability": 0.0},
    {"family": "random", "m": 0, "n": 10},
    {"family": "lattice", "m": 3, "n": 10},
])
def test_graph_family_spec_validation(fields):
    with pytest.raises(ValidationError):
        GraphFamilySpec(**fields)


def test_all_bipartite_graphs_count():
    assert sum(1 for _ in all_bipartite_graphs(2, 2)) == 16
    assert sum(1 for _ in all_bipartite_graphs(1, 2, weights=(1, 2))) == 9


def test_restrict_patterns_keeps_node_sets():
    g = BipartiteGraph.from_matrix([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    sub = restrict_patterns(g, [1])
    assert (sub.m, sub.n) == (3, 3)
    assert sub.edge_list() == [(1, 1), (1, 2)]


# ============================================================================
# STABILITY
# ============================================================================

def _specs(ns, seed=3):
    return [GraphFamilySpec(family="random", m=12, n=n, edge_probability=0.25, weight_max=3, seed=seed)
            for n in ns]


@pytest.mark.parametrize("scorer", [npatterns, npages])
@pytest.mark.parametrize("k", [1, 5])
def test_stability_bounds_small(scorer, k):
    report = stability_experiment(scorer, _specs([50]), k, samples=50)
    assert report.passed, report.violations()
    assert {row.metric for row in report.rows} == {"kendall_tau", "manhattan"}
    assert all(row.bound is not None for row in report.rows)


@pytest.mark.slow
@pytest.mark.parametrize("scorer", [npatterns, npages])
@pytest.mark.parametrize("k", [1, 5])
def test_stability_bounds_hold_across_sizes(scorer, k):
    report = stability_experiment(scorer, _specs([50, 100, 500, 1000]), k)
    assert report.passed, report.violations()
    assert [row.n for row in report.rows] == [50, 50, 100, 100, 500, 500, 1000, 1000]


def test_stability_npages_bound_scales_with_weight():
    report = stability_experiment(npages, _specs([50]), 1, samples=20)
    manhattan_row = next(row for row in report.rows if row.metric == "manhattan")
    assert manhattan_row.bound == pytest.approx(3 / 50)


def test_stability_k_zero_is_zero():
    report = stability_experiment(npages, _specs([50]), 0)
    assert all(row.observed_max == 0.0 for row in report.rows)
    assert all(row.samples == 1 for row in report.rows)


def test_stability_unbounded_scorer_has_no_verdict():
    report = stability_experiment(lambda g: pt_hits(g)[0], _specs([50]), 1, samples=10, name="pt-hits")
    assert all(row.bound is None and row.passed is None for row in report.rows)
    assert report.passed


def test_pt_hits_instability_grows_with_n():
    specs = [GraphFamilySpec(family="two-community", m=5, n=n) for n in (20, 50, 100, 200)]
    report = stability_experiment(converged_pt_hits, specs, 1, samples=40, name="pt-hits")
    observed = [row.observed_max for row in report.rows if row.metric == "kendall_tau"]
    assert len(observed) == 4
    assert min(observed) > 0.3
    assert all(later >= earlier - 1e-9 for earlier, later in zip(observed, observed[1:]))


def test_stability_needs_enough_edges():
    spec = GraphFamilySpec(family="random", m=1, n=1, edge_probability=1.0)
    with pytest.raises(InsufficientEdgesError):
        stability_experiment(npatterns, [spec], 1)


def test_small_graphs_are_enumerated():
    spec = GraphFamilySpec(family="random", m=2, n=3, edge_probability=1.0)
    report = stability_experiment(npatterns, [spec], 2, samples=1000)
    assert report.rows[0].samples == 15


# ============================================================================
# LOCALITY
# ============================================================================

def _locality_violations(scorer, graphs):
    found = []
    for g in graphs:
        for e in g.edge_list():
            found.extend(locality_check(scorer, g, e))
    return found


@pytest.mark.parametrize("scorer", [npatterns, npages])
@pytest.mark.parametrize("m, n", [(1, 4), (2, 3), (3, 3)])
def test_heuristics_are_local(scorer, m, n):
    assert _locality_violations(scorer, all_bipartite_graphs(m, n)) == []


@pytest.mark.parametrize("m, n", [(2, 2), (2, 3)])
def test_npages_is_local_with_weights(m, n):
    assert _locality_violations(npages, all_bipartite_graphs(m, n, weights=(1, 2))) == []


@pytest.mark.slow
@pytest.mark.parametrize("scorer", [npatterns, npages])
def test_heuristics_are_local_largest_grid(scorer):
    assert _locality_violations(scorer, all_bipartite_graphs(3, 4)) == []


def test_pt_hits_is_not_local():
    g = two_community_graph(5, 20)
    violations = locality_check(converged_pt_hits, g, (0, 0))
    assert violations
    # block-A tuple 1 falls below block-B tuple 7
    assert (1, 7) in violations


def test_locality_rejects_missing_edge():
    g = BipartiteGraph.from_matrix([[1, 0]])
    with pytest.raises(EdgeNotInGraphError):
        locality_check(npatterns, g, (0, 1))


# ============================================================================
# MONOTONICITY
# ============================================================================

@pytest.mark.parametrize("scorer", [npatterns, npages, lambda g: pt_hits(g, tol=1e-12, max_iter=5000)[0]])
def test_rankers_are_monotone(scorer):
    for seed in range(100):
        g = random_graph(5, 12, 0.4, weight_max=3, seed=seed)
        if g.edge_count == 0:
            continue
        assert monotonicity_check(scorer, g) == []


def _monotonicity_violations(scorer, m, n):
    found = []
    for g in all_bipartite_graphs(m, n, weights=(1, 2)):
        if g.edge_count:
            found.extend(monotonicity_check(scorer, g))
    return found


@pytest.mark.parametrize("scorer", [npatterns, npages, converged_pt_hits])
@pytest.mark.parametrize("m, n", [(1, 3), (3, 1), (2, 2), (2, 3), (3, 2)])
def test_rankers_are_monotone_on_every_small_graph(scorer, m, n):
    assert _monotonicity_violations(scorer, m, n) == []


@pytest.mark.slow
@pytest.mark.parametrize("scorer", [npatterns, npages, converged_pt_hits])
def test_rankers_are_monotone_on_every_3x3_graph(scorer):
    assert _monotonicity_violations(scorer, 3, 3) == []


def test_monotonicity_catches_inverted_scorer():
    def inverted(g):
        scores = npages(g).scores
        return scores.max() - scores

    found = 0
    for seed in range(100):
        found += len(monotonicity_check(inverted, random_graph(5, 12, 0.4, weight_max=3, seed=seed)))
    assert found > 0


def test_monotonicity_reports_pair():
    g = BipartiteGraph.from_matrix([[1, 1], [0, 1]])
    assert monotonicity_check(lambda g: np.array([2.0, 1.0]), g) == [(0, 1, 2.0, 1.0)]


# ============================================================================
# PRECISION / RECALL
# ============================================================================

@pytest.fixture
def truth_file(tmp_path):
    path = tmp_path / "states.truth"
    path.write_text("# two states\nNew York|NY\n\nTexas\n", encoding="utf-8")
    return path


def test_load_truth(truth_file):
    assert load_truth(truth_file) == [frozenset({("new york",), ("ny",)}), frozenset({("texas",)})]


def test_load_truth_pairs(tmp_path):
    path = tmp_path / "acq.truth"
    path.write_text("Google\tYouTube|You Tube\n", encoding="utf-8")
    assert load_truth(path) == [frozenset({("google", "youtube"), ("google", "you tube")})]


def test_load_truth_errors(tmp_path):
    with pytest.raises(CorpusIOError):
        load_truth(tmp_path / "missing.truth")
    empty = tmp_path / "empty.truth"
    empty.write_text("# nothing\n\n", encoding="utf-8")
    with pytest.raises(EmptyTruthError):
        load_truth(empty)


def test_precision_recall_with_alternates(truth_file):
    truth = load_truth(truth_file)
    ranked = [(("NY",), 0.9), (("Ohio",), 0.5), (("new york",), 0.4), (("Texas",), 0.1)]
    points = precision_recall(ranked, truth)
    assert points == [(0.5, 1.0), (0.5, 0.5), (0.5, pytest.approx(2 / 3)), (1.0, 0.75)]
    assert precision_at_recall(points, 1.0) == 0.75
    assert precision_at_recall(points[:2], 1.0) == 0.0


def test_precision_recall_plain_keys(truth_file):
    points = precision_recall(["texas", "ohio"], load_truth(truth_file))
    assert points == [(0.5, 1.0), (0.5, 0.5)]


def test_precision_recall_needs_truth():
    with pytest.raises(EmptyTruthError):
        precision_recall(["texas"], [])


def test_pattern_subset_experiment():
    tuples = [("texas",), ("ohio",), ("maine",), ("toronto",)]
    edges = {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 2): 1, (2, 1): 1, (2, 3): 1, (3, 2): 1}
    g = BipartiteGraph(range(4), tuples, edges)
    truth = [frozenset({("texas",)}), frozenset({("ohio",)}), frozenset({("maine",)})]
    results = pattern_subset_experiment(g, truth, sizes=(2, 4, 9), repetitions=5, seed=1)
    assert set(results) == {2, 4}
    for rows in results.values():
        assert rows[0][0] == 1
        assert all(0.0 <= precision <= 1.0 for _, precision in rows)
    # with every pattern, texas leads and the trap comes last
    assert results[4][0] == (1, 1.0)
    assert results[4][-1] == (4, 0.75)

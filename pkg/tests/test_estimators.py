"""Edge-score model and point-estimator tests against enumeration oracles."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    mc_expectation_and_variance,
    is_expectation,
    random_fixture,
    score_lookup,
    single_bin_graph,
    subset_f,
    subset_g,
    true_edges,
)
from tpcf.binning import build_pair_graph, make_log_bins, true_edge_count
from tpcf.catalog import ClassifierSimConfig, simulate_classifier
from tpcf.estimators import (
    EdgeScoreModel,
    UniformScoreModel,
    classifier_baseline,
    edge_score,
    empty_state,
    incremental_update,
    is_estimate,
    mc_estimate,
    subset_state_from_vertices,
)
from tpcf.synthetic import make_clustered_catalog


def test_edge_score_trivial():
    assert edge_score(0.5, 0.5) == 0.25
    eps = 1e-4
    assert abs(edge_score(1 - eps, 1 - eps) - (1 - eps) ** 2) < 1e-15


def test_model_totals_and_vertex_sums():
    rng = np.random.default_rng(0)
    graph, labels, probs = random_fixture(rng, 12)
    model = EdgeScoreModel(graph, probs)
    scores = score_lookup(graph, probs)
    assert abs(model.total(0) - sum(scores.values())) <= 1e-9 * model.total(0)
    t = model.vertex_sums(0)
    for v in range(12):
        expected = sum(g for (a, c), g in scores.items() if v in (a, c))
        assert abs(t[v] - expected) <= 1e-9 * max(expected, 1e-30)
    assert abs(t.sum() - 2 * model.total(0)) <= 1e-9 * 2 * model.total(0)


def test_model_rejects_unclamped_probs():
    graph = single_bin_graph(3, [(0, 1)])
    with pytest.raises(ValueError):
        EdgeScoreModel(graph, [0.0, 0.5, 0.5])
    with pytest.raises(ValueError):
        EdgeScoreModel(graph, [0.5, 0.5])


def test_score_matrix_and_pair_score():
    rng = np.random.default_rng(1)
    graph, _, probs = random_fixture(rng, 8)
    model = EdgeScoreModel(graph, probs)
    scores = score_lookup(graph, probs)
    W = model.score_matrix(0)
    assert (W == W.T).all()
    for u in range(8):
        for v in range(u + 1, 8):
            assert W[u, v] == scores.get((u, v), 0.0)
    assert model.pair_score(0, 3, 3) == 0.0


def test_predicted_total_tracks_true_edges_under_beta_sim():
    # a numeric-integration oracle for the expected total predicted count:
    # E[g] per edge is E[clamped p | label] products, so sum expectations
    # over edges by label pattern
    cat = make_clustered_catalog(659, 260, seed=11)
    bins = make_log_bins(0.01, 1.45, 13)
    graph = build_pair_graph(cat, bins)
    grid = np.linspace(0, 1, 20001)[1:-1]

    trapz = getattr(np, "trapezoid", np.trapz)

    def mean_clamped(a, b):
        from scipy import stats

        pdf = stats.beta.pdf(grid, a, b)
        clamped = np.clip(grid, 1e-4, 1 - 1e-4)
        return float(trapz(clamped * pdf, grid) / trapz(pdf, grid))

    m_pos = mean_clamped(3, 1)
    m_neg = mean_clamped(1, 3)
    mean_p = np.where(cat.label == 1, m_pos, m_neg)
    expected = 0.0
    for b in range(bins.num_bins):
        u, v = graph.edges(b)
        expected += float((mean_p[u] * mean_p[v]).sum())

    totals = []
    for seed in range(20):
        sim = simulate_classifier(cat, ClassifierSimConfig(seed=seed))
        model = EdgeScoreModel(graph, sim.prob)
        totals.append(sum(model.total(b) for b in range(bins.num_bins)))
    assert abs(np.mean(totals) - expected) / expected < 0.02


def test_incremental_matches_recomputation():
    rng = np.random.default_rng(2)
    cat = make_clustered_catalog(50, 20, seed=3)
    sim = simulate_classifier(cat, ClassifierSimConfig(seed=4))
    graph = build_pair_graph(sim, make_log_bins(0.02, 1.4, 3))
    model = EdgeScoreModel(graph, sim.prob)
    for b in range(3):
        state = empty_state(b, 50)
        order = rng.permutation(50)
        for v in order:
            state = incremental_update(state, int(v), sim.label, graph, model)
        # from-scratch double loop
        members = list(state.members)
        scores = score_lookup(graph, sim.prob, b)
        tedges = true_edges(graph, sim.label, b)
        f = subset_f(members, tedges)
        g = subset_g(members, scores)
        assert state.f_k == f
        assert abs(state.g_k - g) <= 1e-9 * max(g, 1e-30)
        assert state.k == 50


def test_incremental_update_trivial_cases():
    graph = single_bin_graph(4, [(0, 1), (1, 2)])
    labels = np.array([1, 1, 1, 0])
    model = EdgeScoreModel(graph, [0.5, 0.5, 0.5, 0.5])
    state = subset_state_from_vertices(0, [0, 1], labels, graph, model)
    assert state.f_k == 1
    # vertex 3 is isolated from members in the bin
    s2 = incremental_update(state, 3, labels, graph, model)
    assert (s2.f_k, s2.g_k) == (state.f_k, state.g_k)
    # vertex 2 adds one true member edge
    s3 = incremental_update(state, 2, labels, graph, model)
    assert s3.f_k == 2
    with pytest.raises(ValueError):
        incremental_update(state, 0, labels, graph, model)
    with pytest.raises(ValueError):
        incremental_update(state, 3, np.array([1, 1, 1, -1]), graph, model)


def test_mc_estimate_formula():
    graph = single_bin_graph(4, [(0, 1)])
    labels = np.array([1, 1, 0, 0])
    model = UniformScoreModel(4, 1)
    state = subset_state_from_vertices(0, [0, 1], labels, graph, model)
    assert mc_estimate(state, 4) == 6.0
    with pytest.raises(ValueError):
        mc_estimate(empty_state(0, 4), 4)


def test_mc_unbiased_by_enumeration():
    rng = np.random.default_rng(5)
    for n in (6, 8, 10):
        graph, labels, _ = random_fixture(rng, n)
        tedges = true_edges(graph, labels)
        f_total = len(tedges)
        for k in range(2, n + 1):
            mean, _ = mc_expectation_and_variance(n, k, tedges)
            assert abs(mean - f_total) <= 1e-9 * max(f_total, 1)


def test_mean_relationship():
    # (k(k-1)/2) * mean over pairs of f(u,v) equals mean over subsets of f(S_k)
    rng = np.random.default_rng(6)
    for n in (7, 10):
        graph, labels, _ = random_fixture(rng, n)
        tedges = true_edges(graph, labels)
        pair_mean = len(tedges) / math.comb(n, 2)
        for k in (2, 4, n):
            subset_mean = np.mean([
                subset_f(S, tedges)
                for S in itertools.combinations(range(n), k)])
            assert abs(k * (k - 1) / 2 * pair_mean - subset_mean) < 1e-9


def test_is_unbiased_by_enumeration():
    rng = np.random.default_rng(7)
    for n in (6, 8):
        graph, labels, probs = random_fixture(rng, n)
        tedges = true_edges(graph, labels)
        scores = score_lookup(graph, probs)
        for k in (2, 4, n):
            total = is_expectation(n, k, tedges, scores)
            assert abs(total - len(tedges)) <= 1e-9 * len(tedges)


def test_is_estimate_zero_variance_proposal():
    # scores exactly proportional to f: every subset containing a true edge
    # estimates f(S) exactly
    graph = single_bin_graph(6, [(0, 1), (2, 3), (1, 4)])
    labels = np.ones(6, dtype=np.int64)

    class FMatchedModel(UniformScoreModel):
        def __init__(self, graph):
            super().__init__(graph.n, 1)
            self._graph = graph

        def total(self, b):
            return float(len(self._graph.edges(b)[0]))

        def g_increment(self, b, v, member_mask, member_neighbors):
            return float(len(member_neighbors))

    model = FMatchedModel(graph)
    tedges = true_edges(graph, labels)
    for S in itertools.combinations(range(6), 4):
        state = subset_state_from_vertices(0, S, labels, graph, model)
        if state.g_k > 0:
            assert is_estimate(state, model.total(0)) == len(tedges)


def test_is_estimate_errors_and_zero():
    graph = single_bin_graph(4, [(0, 1)])
    labels = np.array([0, 1, 1, 0])
    model = EdgeScoreModel(graph, [0.5, 0.5, 0.5, 0.5])
    state = subset_state_from_vertices(0, [0, 1], labels, graph, model)
    assert is_estimate(state, model.total(0)) == 0.0
    bad = subset_state_from_vertices(0, [2, 3], labels, graph, model)
    with pytest.raises(ValueError):
        is_estimate(bad, model.total(0))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.05, 1.0))
def test_is_estimate_scale_invariant(seed, c):
    rng = np.random.default_rng(seed)
    graph, labels, probs = random_fixture(rng, 7)
    m1 = EdgeScoreModel(graph, probs)
    m2 = EdgeScoreModel(graph, np.clip(probs * c, 1e-4, 1 - 1e-4))
    if not np.allclose(m2.probs, probs * c):
        return  # clamping bent the scaling; property does not apply
    S = rng.permutation(7)[:4]
    s1 = subset_state_from_vertices(0, S, labels, graph, m1)
    s2 = subset_state_from_vertices(0, S, labels, graph, m2)
    assert abs(m2.total(0) - c * c * m1.total(0)) <= 1e-9 * m2.total(0)
    if s1.g_k > 0:
        a = is_estimate(s1, m1.total(0))
        b = is_estimate(s2, m2.total(0))
        assert abs(a - b) <= 1e-9 * max(abs(a), 1e-30)


def test_classifier_baseline():
    graph = single_bin_graph(5, [(0, 1), (1, 2), (3, 4)])
    model = EdgeScoreModel(graph, np.full(5, 1 - 1e-4))
    assert abs(classifier_baseline(model, 0) - 3) < 1e-3
    low = EdgeScoreModel(graph, np.full(5, 1e-4))
    assert abs(classifier_baseline(low, 0) - 3e-8) < 1e-9


def test_uniform_model_pair_pair_sums():
    n = 7
    model = UniformScoreModel(n, 1, c=0.5)
    sq, share, disj = model.g_pair_pair_sums(0)
    # brute force over ordered pairs of complete-graph edges
    pairs = list(itertools.combinations(range(n), 2))
    b_sq = sum(0.25 for _ in pairs)
    b_share = sum(0.25 for p1 in pairs for p2 in pairs
                  if p1 != p2 and len(set(p1) & set(p2)) == 1)
    b_disj = sum(0.25 for p1 in pairs for p2 in pairs
                 if not set(p1) & set(p2))
    assert abs(sq - b_sq) < 1e-9
    assert abs(share - b_share) < 1e-9
    assert abs(disj - b_disj) < 1e-9


def test_edge_model_pair_pair_sums():
    rng = np.random.default_rng(8)
    graph, _, probs = random_fixture(rng, 9)
    model = EdgeScoreModel(graph, probs)
    scores = score_lookup(graph, probs)
    pairs = list(scores)
    sq, share, disj = model.g_pair_pair_sums(0)
    b_sq = sum(g * g for g in scores.values())
    b_share = sum(scores[p1] * scores[p2] for p1 in pairs for p2 in pairs
                  if p1 != p2 and len(set(p1) & set(p2)) == 1)
    b_disj = sum(scores[p1] * scores[p2] for p1 in pairs for p2 in pairs
                 if not set(p1) & set(p2))
    assert abs(sq - b_sq) <= 1e-9 * b_sq
    assert abs(share - b_share) <= 1e-9 * max(b_share, 1e-30)
    assert abs(disj - b_disj) <= 1e-9 * max(b_disj, 1e-30)

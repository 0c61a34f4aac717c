"""Sampler-law and session state-machine tests."""

import itertools
import json

import numpy as np
import pytest
from scipy import stats

from oracles import q_distribution, random_fixture, score_lookup, single_bin_graph, true_edges
from tpcf.binning import build_pair_graph, make_log_bins, true_edge_count
from tpcf.catalog import ClassifierSimConfig, simulate_classifier
from tpcf.estimators import EdgeScoreModel, UniformScoreModel, mc_estimate
from tpcf.sampler import (
    Session,
    SessionComplete,
    initial_pair_distribution,
    sample_initial_pair,
    sample_subset,
)
from tpcf.synthetic import make_clustered_catalog


def test_initial_pair_distribution_normalized():
    rng = np.random.default_rng(0)
    graph, _, probs = random_fixture(rng, 10)
    model = EdgeScoreModel(graph, probs)
    dist = initial_pair_distribution(model, graph, 0)
    assert abs(dist.probabilities.sum() - 1.0) < 1e-12
    assert (dist.probabilities > 0).all()


def test_initial_pair_single_edge():
    graph = single_bin_graph(4, [(1, 3)])
    model = EdgeScoreModel(graph, np.full(4, 0.5))
    dist = initial_pair_distribution(model, graph, 0)
    gen = np.random.default_rng(1)
    for _ in range(10):
        assert sample_initial_pair(dist, gen) == (1, 3)


def test_initial_pair_two_edge_frequencies():
    graph = single_bin_graph(4, [(0, 1), (2, 3)])

    class TwoScores(EdgeScoreModel):
        def edge_scores(self, b):
            return np.array([0.75, 0.25])

    model = TwoScores(graph, np.full(4, 0.5))
    dist = initial_pair_distribution(model, graph, 0)
    gen = np.random.default_rng(2)
    hits = sum(sample_initial_pair(dist, gen) == (0, 1) for _ in range(10 ** 5))
    assert abs(hits / 10 ** 5 - 0.75) < 0.005


def test_initial_pair_chi_square():
    rng = np.random.default_rng(3)
    graph = single_bin_graph(6, [(0, 1), (0, 2), (1, 3), (2, 4), (3, 5)])
    probs = rng.uniform(0.1, 0.9, 6)
    model = EdgeScoreModel(graph, probs)
    dist = initial_pair_distribution(model, graph, 0)
    gen = np.random.default_rng(4)
    edges = list(zip(*graph.edges(0)))
    index = {tuple(int(x) for x in e): i for i, e in enumerate(edges)}
    counts = np.zeros(len(edges))
    draws = 10 ** 5
    for _ in range(draws):
        counts[index[sample_initial_pair(dist, gen)]] += 1
    chi2 = ((counts - draws * dist.probabilities) ** 2
            / (draws * dist.probabilities)).sum()
    assert stats.chi2.sf(chi2, len(edges) - 1) > 0.001


def test_sample_subset_law_matches_enumerated_q():
    # hand-built 5-vertex fixture: empirical k=3 subset frequencies against
    # the enumerated proposal distribution, total-variation distance < 0.01
    rng = np.random.default_rng(5)
    graph = single_bin_graph(5, [(0, 1), (1, 2), (2, 3), (0, 4)])
    probs = np.array([0.9, 0.3, 0.7, 0.5, 0.2])
    labels = np.ones(5, dtype=np.int64)
    model = EdgeScoreModel(graph, probs)
    q = q_distribution(5, 3, score_lookup(graph, probs))
    counts = {S: 0 for S in q}
    draws = 2 * 10 ** 5
    for _ in range(draws):
        state = sample_subset(0, 3, graph, model, rng, labels)
        counts[tuple(int(v) for v in state.members)] += 1
    tv = 0.5 * sum(abs(counts[S] / draws - q[S]) for S in q)
    assert tv < 0.01


def test_sample_subset_uniform_scores_is_uniform():
    rng = np.random.default_rng(6)
    n, k = 6, 3
    graph = single_bin_graph(n, [])
    model = UniformScoreModel(n, 1)
    labels = np.ones(n, dtype=np.int64)
    subsets = list(itertools.combinations(range(n), k))
    counts = {S: 0 for S in subsets}
    draws = 2 * 10 ** 5
    for _ in range(draws):
        state = sample_subset(0, k, graph, model, rng, labels)
        counts[tuple(int(v) for v in state.members)] += 1
    tv = 0.5 * sum(abs(c / draws - 1 / len(subsets)) for c in counts.values())
    assert tv < 0.01


def test_sample_subset_k_range():
    graph = single_bin_graph(5, [(0, 1)])
    model = EdgeScoreModel(graph, np.full(5, 0.5))
    labels = np.ones(5, dtype=np.int64)
    gen = np.random.default_rng(7)
    state = sample_subset(0, 5, graph, model, gen, labels)
    assert state.k == 5
    with pytest.raises(ValueError):
        sample_subset(0, 1, graph, model, gen, labels)
    with pytest.raises(ValueError):
        sample_subset(0, 6, graph, model, gen, labels)


@pytest.fixture(scope="module")
def small_catalog():
    cat = make_clustered_catalog(40, 18, seed=8)
    sim = simulate_classifier(cat, ClassifierSimConfig(seed=9))
    graph = build_pair_graph(sim, make_log_bins(0.03, 1.4, 3))
    model = EdgeScoreModel(graph, sim.prob)
    return sim, graph, model


def test_session_bookkeeping(small_catalog):
    sim, graph, model = small_catalog
    session = Session(graph, model, label_source=sim.label, seed=10)
    assert session.labels_used <= 2 * len(session.active_bins)
    assert session.labels_used >= 2
    for b in session.active_bins:
        assert session.states[b].k == 2
        assert len(session.estimates[b]) == 1
    session.step()
    for b in session.active_bins:
        state = session.states[b]
        assert state.member_mask.sum() == state.k
        # members are labeled
        assert (session.labels[state.members] != -1).all()


def test_session_terminal_identity(small_catalog):
    sim, graph, model = small_catalog
    session = Session(graph, model, label_source=sim.label, seed=11)
    session.run(1.0)
    assert session.complete
    assert session.labels_used == 40
    for b in session.active_bins:
        truth = true_edge_count(graph, sim.label, b)
        assert session.latest(b)[2] == truth
        assert session.states[b].k == 40
    with pytest.raises(SessionComplete):
        session.step()


def test_session_member_count_rule(small_catalog):
    # |members| = 2 + number of uniform draws not discarded for that bin
    sim, graph, model = small_catalog
    session = Session(graph, model, label_source=sim.label, seed=12)
    for _ in range(15):
        session.step()
    for b in session.active_bins:
        init = set(session.initial_pairs[b])
        discarded = sum(1 for v in session.uniform_draws if v in init)
        assert session.states[b].k == 2 + len(session.uniform_draws) - discarded


def test_session_determinism(small_catalog):
    sim, graph, model = small_catalog
    a = Session(graph, model, label_source=sim.label, seed=13)
    b = Session(graph, model, label_source=sim.label, seed=13)
    a.run(1.0)
    b.run(1.0)
    assert a.initial_pairs == b.initial_pairs
    assert a.uniform_draws == b.uniform_draws
    assert a.estimates == b.estimates
    assert a.events == b.events


def test_session_label_once(small_catalog):
    sim, graph, model = small_catalog
    session = Session(graph, model, label_source=sim.label, seed=14)
    session.run(1.0)
    labeled = [e["vertex"] for e in session.events if e["event"] == "label"]
    assert len(labeled) == len(set(labeled)) == 40


def test_session_estimates_append_only_and_nested(small_catalog):
    sim, graph, model = small_catalog
    session = Session(graph, model, label_source=sim.label, seed=15)
    prev_members = {b: session.states[b].member_set()
                    for b in session.active_bins}
    prev_lens = {b: len(session.estimates[b]) for b in session.active_bins}
    for _ in range(20):
        session.step()
        for b in session.active_bins:
            members = session.states[b].member_set()
            assert prev_members[b] <= members
            assert len(session.estimates[b]) >= prev_lens[b]
            prev_members[b] = members
            prev_lens[b] = len(session.estimates[b])


def test_session_interactive_parity(small_catalog):
    sim, graph, model = small_catalog
    ref = Session(graph, model, label_source=sim.label, seed=16)
    ref.run(1.0)
    session = Session(graph, model, seed=16)
    while session.pending is not None:
        v = session.pending
        session.provide_label(v, int(sim.label[v]))
    assert session.complete
    assert session.estimates == ref.estimates
    assert session.events == ref.events


def test_session_interactive_validation(small_catalog):
    sim, graph, model = small_catalog
    session = Session(graph, model, seed=17)
    v = session.pending
    with pytest.raises(ValueError):
        session.provide_label((v + 1) % 40, 1)
    with pytest.raises(ValueError):
        session.provide_label(v, 2)
    session.provide_label(v, 1)
    with pytest.raises(RuntimeError):
        session.step()


def test_session_mc_baseline_bit_identical(small_catalog):
    # constant scores through the shared code path reproduce the dedicated
    # MC formula bit for bit
    sim, graph, model = small_catalog
    um = UniformScoreModel(graph.n, graph.num_bins)
    session = Session(graph, um, label_source=sim.label, seed=18)
    session.run(1.0)
    for b in session.active_bins:
        state = session.states[b]
        assert session.latest(b)[2] == float(state.f_k)
    # replay at intermediate size: estimates along the stream equal
    # mc_estimate of the reconstructed states
    session2 = Session(graph, um, label_source=sim.label, seed=19)
    for _ in range(10):
        stepped = session2.step()
        for b, est in stepped.items():
            assert est == mc_estimate(session2.states[b], graph.n)


def test_session_skips_empty_bins():
    cat = make_clustered_catalog(30, 12, seed=20)
    sim = simulate_classifier(cat, ClassifierSimConfig(seed=21))
    # last bin lies beyond the field diagonal: no edges
    from tpcf.binning import BinConfig

    graph = build_pair_graph(sim, BinConfig([0.05, 1.45, 50.0, 60.0]))
    model = EdgeScoreModel(graph, sim.prob)
    with pytest.warns(UserWarning, match="no candidate edges"):
        session = Session(graph, model, label_source=sim.label, seed=22)
    assert session.active_bins == [0]
    empty = build_pair_graph(sim, BinConfig([50.0, 60.0]))
    with pytest.raises(ValueError):
        with pytest.warns(UserWarning):
            Session(empty, EdgeScoreModel(empty, sim.prob),
                    label_source=sim.label, seed=23)


def test_event_log_round_trip(tmp_path, small_catalog):
    sim, graph, model = small_catalog
    session = Session(graph, model, label_source=sim.label, seed=24)
    session.run(0.5)
    path = tmp_path / "events.jsonl"
    session.write_event_log(path)
    events = [json.loads(line) for line in path.read_text().splitlines()]
    assert events == json.loads(json.dumps(session.events))
    steps = [e for e in events if e["event"] == "step"]
    assert steps[0]["step"] == 1
    assert all("bins" in e for e in steps)

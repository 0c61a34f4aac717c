"""Independent brute-force oracles used by the test suite.

Everything here is written the slow, obviously-correct way — explicit
enumeration of subsets and pair configurations — so the fast implementations
in the package can be checked against code that shares none of their logic.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from tpcf.binning import BinConfig, BinnedPairGraph


def single_bin_graph(n: int, edge_list) -> BinnedPairGraph:
    """A one-bin graph over n vertices with an explicit edge list (u < v)."""
    pairs = sorted(set((min(u, v), max(u, v)) for u, v in edge_list))
    u = np.array([p[0] for p in pairs], dtype=np.int64)
    v = np.array([p[1] for p in pairs], dtype=np.int64)
    return BinnedPairGraph(n, [(u, v)], BinConfig([1.0, 2.0]))


def random_fixture(rng: np.random.Generator, n: int, edge_prob: float = 0.6):
    """Random single-bin fixture: (graph, labels, probs) with >= 1 true edge."""
    while True:
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)
                 if rng.random() < edge_prob]
        labels = (rng.random(n) < 0.6).astype(np.int64)
        if any(labels[u] == 1 and labels[v] == 1 for u, v in edges):
            break
    probs = rng.uniform(0.05, 0.95, size=n)
    return single_bin_graph(n, edges), labels, probs


def true_edges(graph: BinnedPairGraph, labels, b: int = 0) -> set[tuple[int, int]]:
    u, v = graph.edges(b)
    labels = np.asarray(labels)
    return {(int(a), int(c)) for a, c in zip(u, v)
            if labels[a] == 1 and labels[c] == 1}


def score_lookup(graph: BinnedPairGraph, probs, b: int = 0) -> dict:
    """g(u, v) on candidate edges (zero elsewhere, via dict .get default)."""
    u, v = graph.edges(b)
    probs = np.asarray(probs)
    return {(int(a), int(c)): float(probs[a] * probs[c]) for a, c in zip(u, v)}


def subset_f(subset, tedges) -> int:
    s = set(subset)
    return sum(1 for u, v in tedges if u in s and v in s)


def subset_g(subset, scores) -> float:
    s = set(subset)
    return sum(g for (u, v), g in scores.items() if u in s and v in s)


def q_distribution(n: int, k: int, scores) -> dict[tuple, float]:
    """Proposal mass of every k-subset: g(S_k) / (C(n-2, k-2) * G)."""
    G = sum(scores.values())
    norm = math.comb(n - 2, k - 2) * G
    return {S: subset_g(S, scores) / norm
            for S in itertools.combinations(range(n), k)}


def exact_pair_moments(n: int, tedges) -> tuple[float, float, float]:
    """Population E_ident/E_share/E_disj by counting true-edge configurations."""
    m = len(tedges)
    deg = np.zeros(n, dtype=np.int64)
    for u, v in tedges:
        deg[u] += 1
        deg[v] += 1
    share = int((deg * (deg - 1)).sum())
    disj = m * m - m - share
    return (
        m / math.comb(n, 2),
        share / (n * (n - 1) * (n - 2)),
        disj / (n * (n - 1) * (n - 2) * (n - 3) / 4),
    )


def all_pairs(n: int):
    return list(itertools.combinations(range(n), 2))


def exact_triplet_moments(n: int, tedges, scores) -> np.ndarray:
    """Population D_t for t = 2..6 by enumerating ordered triplets of pairs."""
    pairs = all_pairs(n)
    f = {p: 1.0 if p in tedges else 0.0 for p in pairs}
    g = {p: scores.get(p, 0.0) for p in pairs}
    sums = np.zeros(7)
    counts = np.zeros(7, dtype=np.int64)
    for p1 in pairs:
        for p2 in pairs:
            ff = f[p1] * f[p2]
            base = set(p1) | set(p2)
            for p3 in pairs:
                t = len(base | set(p3))
                sums[t] += ff * g[p3]
                counts[t] += 1
    return sums[2:7] / counts[2:7]


def brute_triplet_multiplicities(n: int) -> np.ndarray:
    """Counts of ordered triplets of pairs by union size t = 2..6."""
    pairs = all_pairs(n)
    counts = np.zeros(7, dtype=np.int64)
    for p1 in pairs:
        for p2 in pairs:
            base = set(p1) | set(p2)
            for p3 in pairs:
                counts[len(base | set(p3))] += 1
    return counts[2:7]


def mc_expectation_and_variance(n: int, k: int, tedges) -> tuple[float, float]:
    """Mean and variance of the subset MC estimator over all C(n,k) subsets."""
    scale = n * (n - 1) / (k * (k - 1))
    ests = [scale * subset_f(S, tedges)
            for S in itertools.combinations(range(n), k)]
    ests = np.array(ests)
    return float(ests.mean()), float(ests.var())


def is_expectation(n: int, k: int, tedges, scores) -> float:
    """Sum over subsets of q(S_k) * G f(S_k) / g(S_k) (0 q-mass terms skipped)."""
    G = sum(scores.values())
    total = 0.0
    for S, q in q_distribution(n, k, scores).items():
        if q > 0:
            total += q * G * subset_f(S, tedges) / subset_g(S, scores)
    return total


def is_exact_variance(n: int, k: int, tedges, scores) -> float:
    """Exact Var_q of the IS estimator by full enumeration."""
    G = sum(scores.values())
    mean = sq = 0.0
    for S, q in q_distribution(n, k, scores).items():
        if q > 0:
            est = G * subset_f(S, tedges) / subset_g(S, scores)
            mean += q * est
            sq += q * est * est
    return sq - mean * mean


def inclusion_by_enumeration(n: int, k: int, R, scores) -> float:
    """Sum of q(S_k) over subsets containing every vertex of R."""
    R = set(R)
    return sum(q for S, q in q_distribution(n, k, scores).items()
               if R <= set(S))


def exact_g_moments(n: int, k: int, scores) -> tuple[float, float]:
    """Mean and variance of g(S_k) over uniform k-subsets by enumeration."""
    vals = np.array([subset_g(S, scores)
                     for S in itertools.combinations(range(n), k)])
    return float(vals.mean()), float(vals.var())

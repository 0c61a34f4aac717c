"""Point estimators and edge-score models.

An edge score g(u, v) = prob(u) * prob(v) is attached to every candidate
edge of a bin; the per-bin total G and per-vertex score sums are precomputed
once so the sampler and the variance kernels can query them cheaply.  A
constant-score model over the complete graph turns the same machinery into
the plain subset Monte Carlo estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tpcf.binning import BinnedPairGraph


def edge_score(prob_u: float, prob_v: float) -> float:
    """Predicted score of an unordered pair: the product of the endpoint probs."""
    return prob_u * prob_v


class EdgeScoreModel:
    """Classifier-derived scores on the candidate edges of each bin."""

    def __init__(self, graph: BinnedPairGraph, probs):
        self.graph = graph
        self.probs = np.asarray(probs, dtype=np.float64)
        if len(self.probs) != graph.n:
            raise ValueError("prob vector length does not match vertex count")
        if ((self.probs <= 0) | (self.probs >= 1)).any():
            raise ValueError("probs must be clamped inside (0, 1)")
        self.n = graph.n
        self._scores: list[np.ndarray] = []
        self._totals: list[float] = []
        self._vertex_sums: list[np.ndarray] = []
        self._matrices: list[np.ndarray | None] = [None] * graph.num_bins
        self._pair_pair: list[tuple[float, float, float] | None] = [None] * graph.num_bins
        for b in range(graph.num_bins):
            u, v = graph.edges(b)
            s = self.probs[u] * self.probs[v]
            self._scores.append(s)
            self._totals.append(float(s.sum()))
            t = (np.bincount(u, weights=s, minlength=self.n)
                 + np.bincount(v, weights=s, minlength=self.n))
            self._vertex_sums.append(t)

    @property
    def num_bins(self) -> int:
        return self.graph.num_bins

    def edge_scores(self, b: int) -> np.ndarray:
        """Scores aligned with the bin's edge list."""
        return self._scores[b]

    def total(self, b: int) -> float:
        """G_b: sum of scores over the bin's candidate edges."""
        return self._totals[b]

    def vertex_sums(self, b: int) -> np.ndarray:
        """Per-vertex sums of incident edge scores in bin b."""
        return self._vertex_sums[b]

    def score_matrix(self, b: int) -> np.ndarray:
        """Dense symmetric n x n score matrix of bin b (zero off the bin's edges)."""
        w = self._matrices[b]
        if w is None:
            u, v = self.graph.edges(b)
            w = np.zeros((self.n, self.n))
            w[u, v] = self._scores[b]
            w[v, u] = self._scores[b]
            self._matrices[b] = w
        return w

    def pair_score(self, b: int, u: int, v: int) -> float:
        """g(u, v) in bin b; zero when {u, v} is not a candidate edge."""
        return float(self.score_matrix(b)[u, v])

    def g_increment(self, b: int, v: int, member_mask, member_neighbors) -> float:
        """Added predicted score when v joins a member set (scan of new edges only)."""
        if len(member_neighbors) == 0:
            return 0.0
        return float(self.probs[v] * self.probs[member_neighbors].sum())

    def g_pair_pair_sums(self, b: int) -> tuple[float, float, float]:
        """Sums of g*g over ordered pairs of bin edges, split by shared vertices.

        Returns (identical, one shared vertex, disjoint); used for the exact
        Var[g(S_k)] reduction.
        """
        cached = self._pair_pair[b]
        if cached is None:
            u, v = self.graph.edges(b)
            s = self._scores[b]
            sq = float((s * s).sum())
            q = (np.bincount(u, weights=s * s, minlength=self.n)
                 + np.bincount(v, weights=s * s, minlength=self.n))
            t = self._vertex_sums[b]
            share = float((t * t - q).sum())
            g = self._totals[b]
            cached = (sq, share, g * g - sq - share)
            self._pair_pair[b] = cached
        return cached


class UniformScoreModel:
    """Constant score on every pair of the complete graph.

    Makes the subset proposal uniform, the initial pair a uniform random
    pair, and the importance-sampling estimate identical to the subset Monte
    Carlo estimator n(n-1)/(k(k-1)) * f(S_k).
    """

    def __init__(self, n: int, num_bins: int, c: float = 1.0):
        if c <= 0:
            raise ValueError("constant score must be positive")
        self.n = n
        self.num_bins = num_bins
        self.c = c
        self._matrix: np.ndarray | None = None

    def total(self, b: int) -> float:
        return self.c * self.n * (self.n - 1) / 2.0

    def vertex_sums(self, b: int) -> np.ndarray:
        return np.full(self.n, self.c * (self.n - 1))

    def score_matrix(self, b: int) -> np.ndarray:
        if self._matrix is None:
            w = np.full((self.n, self.n), self.c)
            np.fill_diagonal(w, 0.0)
            self._matrix = w
        return self._matrix

    def pair_score(self, b: int, u: int, v: int) -> float:
        return 0.0 if u == v else self.c

    def g_increment(self, b: int, v: int, member_mask, member_neighbors) -> float:
        return self.c * float(np.count_nonzero(member_mask))

    def g_pair_pair_sums(self, b: int) -> tuple[float, float, float]:
        n, c2 = self.n, self.c * self.c
        sq = c2 * n * (n - 1) / 2.0
        share = c2 * n * (n - 1) * (n - 2)
        disj = c2 * n * (n - 1) * (n - 2) * (n - 3) / 4.0
        return sq, share, disj


@dataclass
class SubsetState:
    """A growing vertex subset of one bin with its true and predicted counts."""

    bin: int
    member_mask: np.ndarray
    k: int
    f_k: int
    g_k: float

    @property
    def members(self) -> np.ndarray:
        return np.nonzero(self.member_mask)[0]

    def member_set(self) -> set[int]:
        return set(int(i) for i in self.members)


def empty_state(b: int, n: int) -> SubsetState:
    return SubsetState(bin=b, member_mask=np.zeros(n, dtype=bool), k=0, f_k=0, g_k=0.0)


def incremental_update(state: SubsetState, v: int, labels, graph: BinnedPairGraph,
                       model) -> SubsetState:
    """Add vertex v to the subset, updating f_k and g_k from v's new edges only."""
    if state.member_mask[v]:
        raise ValueError(f"vertex {v} is already a member")
    labels = np.asarray(labels)
    if labels[v] not in (0, 1):
        raise ValueError(f"vertex {v} has no label")
    nbrs = graph.neighbors(state.bin, v)
    member_nbrs = nbrs[state.member_mask[nbrs]]
    f_inc = 0
    if labels[v] == 1 and len(member_nbrs) > 0:
        f_inc = int((labels[member_nbrs] == 1).sum())
    g_inc = model.g_increment(state.bin, v, state.member_mask, member_nbrs)
    mask = state.member_mask.copy()
    mask[v] = True
    return SubsetState(bin=state.bin, member_mask=mask, k=state.k + 1,
                       f_k=state.f_k + f_inc, g_k=state.g_k + g_inc)


def subset_state_from_vertices(b: int, vertices, labels, graph: BinnedPairGraph,
                               model) -> SubsetState:
    """Build a SubsetState by inserting the given vertices one at a time."""
    state = empty_state(b, graph.n)
    for v in vertices:
        state = incremental_update(state, int(v), labels, graph, model)
    return state


def mc_estimate(state: SubsetState, n: int) -> float:
    """Subset Monte Carlo estimate n(n-1)/(k(k-1)) * f(S_k).

    Evaluated as (n-choose-2 * f) / k-choose-2 — the exact expression the
    constant-score model produces through :func:`is_estimate` — so the two
    code paths agree bit for bit.
    """
    if state.k < 2:
        raise ValueError("Monte Carlo estimate needs a subset of size >= 2")
    total = n * (n - 1) / 2.0
    return total * state.f_k / (state.k * (state.k - 1) / 2.0)


def is_estimate(state: SubsetState, G_b: float) -> float:
    """Importance sampling estimate G * f(S_k) / g(S_k)."""
    if state.g_k <= 0:
        raise ValueError("subset has zero predicted score; not drawn from the proposal")
    return G_b * state.f_k / state.g_k


def classifier_baseline(model, b: int) -> float:
    """Label-free baseline: the bin's total predicted count G_b."""
    return model.total(b)

"""Variance estimation for the subset estimators.

The Monte Carlo subset estimator has an exact variance that is linear in
three pairwise moments (mean of f*f over pair-of-pair configurations
sharing 2, 1, or 0 vertices).  For the importance-sampling estimator the
variance of a ratio is approximated to second order (delta method) and the
required moments are estimated by Horvitz-Thompson reweighting with the
subset inclusion probabilities of the score-weighted proposal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from tpcf.binning import BinnedPairGraph
from tpcf.estimators import SubsetState


@dataclass(frozen=True)
class PairMoments:
    """Means of f(u,v)f(w,z) over configurations with 2, 1, or 0 shared vertices.

    Unavailable moments (subset too small to exhibit the configuration) are
    NaN.
    """

    e_ident: float
    e_share: float
    e_disj: float

    @property
    def complete(self) -> bool:
        return not (math.isnan(self.e_ident) or math.isnan(self.e_share)
                    or math.isnan(self.e_disj))


@dataclass(frozen=True)
class TripletMoments:
    """Means of f*f*g over triplets of pairs, keyed by union size t in 2..6."""

    d: np.ndarray  # d[t] for t = 2..6 stored at indices 0..4

    def value(self, t: int) -> float:
        if not 2 <= t <= 6:
            raise ValueError(f"union size {t} outside 2..6")
        return float(self.d[t - 2])

    @property
    def complete(self) -> bool:
        return not np.isnan(self.d).any()


@dataclass(frozen=True)
class VarianceReport:
    """Variance estimate and confidence interval for one bin."""

    bin: int
    estimator: str  # "MC" | "IS"
    estimate: float
    v_hat: float
    ci_low: float
    ci_high: float
    clamped: bool


# -- combinatorial ratios ---------------------------------------------------
#
# All binomial coefficients enter only as ratios against C(n-2, k-2) or
# C(n, k); those ratios telescope to short products of (k-j)/(n-j) factors,
# which stay exact in floating point and never overflow.

def _falling_ratio(n: int, k: int, j_start: int, j_end: int) -> float:
    """Product of (k-j)/(n-j) for j in [j_start, j_end]; 0 once k-j hits 0."""
    r = 1.0
    for j in range(j_start, j_end + 1):
        if k - j <= 0:
            return 0.0
        r *= (k - j) / (n - j)
    return r


def _pi_ratios(n: int, k: int, t: int) -> tuple[float, float, float]:
    """C(n-t,k-t), C(n-t-1,k-t-1), C(n-t-2,k-t-2), each over C(n-2,k-2)."""
    return (
        _falling_ratio(n, k, 2, t - 1),
        _falling_ratio(n, k, 2, t),
        _falling_ratio(n, k, 2, t + 1),
    )


def _uniform_inclusion(n: int, k: int, t: int) -> float:
    """C(n-t, k-t) / C(n, k): chance a fixed t-set lies in a uniform k-subset."""
    return _falling_ratio(n, k, 0, t - 1)


# -- exact MC variance ------------------------------------------------------

def mc_variance_exact(E: PairMoments, n: int, k: int) -> float:
    """Exact variance of the subset Monte Carlo estimator from pair moments."""
    if k < 2:
        raise ValueError("subset Monte Carlo needs k >= 2")
    if not E.complete:
        raise ValueError("all three pair moments are required")
    e1, e2, e3 = E.e_ident, E.e_share, E.e_disj
    return (n * (n - 1) * (n - k) / (2 * k * (k - 1))
            * (2 * (e2 - e3) * k * n + (e1 - 4 * e2 + 3 * e3) * (n + k - 1)))


# -- true edges inside a subset --------------------------------------------

def _true_subset_edges(state: SubsetState, labels, graph: BinnedPairGraph):
    labels = np.asarray(labels)
    u, v = graph.edges(state.bin)
    mask = state.member_mask
    sel = mask[u] & mask[v] & (labels[u] == 1) & (labels[v] == 1)
    return u[sel], v[sel]


def _true_edge_degrees(eu, ev, n: int) -> np.ndarray:
    d = np.zeros(n, dtype=np.int64)
    np.add.at(d, eu, 1)
    np.add.at(d, ev, 1)
    return d


def estimate_pair_moments_mc(state: SubsetState, labels,
                             graph: BinnedPairGraph) -> PairMoments:
    """Sample-mean moment estimates from a uniformly sampled subset."""
    k = state.k
    if k < 2:
        raise ValueError("need k >= 2")
    eu, ev = _true_subset_edges(state, labels, graph)
    m = len(eu)
    d = _true_edge_degrees(eu, ev, graph.n)
    share = float((d * (d - 1)).sum())
    disj = m * m - m - share
    e_ident = m / (k * (k - 1) / 2)
    e_share = share / (k * (k - 1) * (k - 2)) if k >= 3 else math.nan
    e_disj = disj / (k * (k - 1) * (k - 2) * (k - 3) / 4) if k >= 4 else math.nan
    return PairMoments(e_ident, e_share, e_disj)


# -- inclusion probabilities under the weighted proposal -------------------

def inclusion_probability(R, b: int, model, n: int, k: int) -> float:
    """Probability that every vertex of R lands in a proposal-sampled k-subset.

    Uses the precomputed bin total and per-vertex score sums, splitting the
    score mass into pairs inside R, pairs crossing R's boundary, and pairs
    outside R.
    """
    R = sorted(set(int(r) for r in R))
    t = len(R)
    if not 2 <= t <= 4:
        raise ValueError("R must contain 2 to 4 distinct vertices")
    if k < t:
        return 0.0
    W = model.score_matrix(b)
    T = model.vertex_sums(b)
    G = model.total(b)
    g_in = 0.0
    for i in range(t):
        for j in range(i + 1, t):
            g_in += float(W[R[i], R[j]])
    sum_t = float(T[R].sum())
    r_in, r_cross, r_out = _pi_ratios(n, k, t)
    return (r_in * g_in + r_cross * (sum_t - 2 * g_in)
            + r_out * (G - sum_t + g_in)) / G


def triplet_multiplicity(n: int, t: int) -> int:
    """Number of ordered triplets of unordered pairs whose union has t vertices."""
    if not 2 <= t <= 6:
        raise ValueError("union size must be in 2..6")
    if n < t:
        raise ValueError(f"need n >= {t}")
    per_set = sum((-1) ** i * math.comb(t, i) * math.comb(t - i, 2) ** 3
                  for i in range(t - 1))
    return math.comb(n, t) * per_set


# -- Horvitz-Thompson moment estimates -------------------------------------

_HT_BLOCK = 2048


def horvitz_thompson_moments(state: SubsetState, labels, graph: BinnedPairGraph,
                             model) -> tuple[PairMoments, TripletMoments]:
    """Reweighted pair and triplet moment estimates from one proposal subset.

    Iterates the O(E^2) pair-of-true-edge configurations; the inner sums
    over the score pair use the precomputed totals, so each configuration
    costs O(1).
    """
    b, k, n = state.bin, state.k, graph.n
    if k < 2:
        raise ValueError("need k >= 2")
    W = model.score_matrix(b)
    T = model.vertex_sums(b)
    G = model.total(b)
    ratios = {t: _pi_ratios(n, k, t) for t in (2, 3, 4)}

    def pi(t, sum_t, g_in):
        r_in, r_cross, r_out = ratios[t]
        return (r_in * g_in + r_cross * (sum_t - 2 * g_in)
                + r_out * (G - sum_t + g_in)) / G

    eu, ev = _true_subset_edges(state, labels, graph)
    m = len(eu)
    e_sums = {2: 0.0, 3: 0.0, 4: 0.0}
    d_sums = np.zeros(7)

    if m > 0:
        ge = W[eu, ev]
        te = T[eu] + T[ev]
        inv = 1.0 / pi(2, te, ge)
        e_sums[2] = float(inv.sum())
        d_sums[2] += float((ge * inv).sum())
        d_sums[3] += float(((te - 2 * ge) * inv).sum())
        d_sums[4] += float(((G - te + ge) * inv).sum())

    if m > 0 and k >= 3:
        # configurations sharing one vertex: for each vertex, ordered pairs of
        # distinct incident true edges
        src = np.concatenate([eu, ev])
        dst = np.concatenate([ev, eu])
        order = np.argsort(src, kind="stable")
        src, dst = src[order], dst[order]
        starts = np.searchsorted(src, np.arange(n))
        ends = np.searchsorted(src, np.arange(n) + 1)
        for v in np.unique(src):
            nb = dst[starts[v]:ends[v]]
            deg = len(nb)
            if deg < 2:
                continue
            ii, jj = np.meshgrid(np.arange(deg), np.arange(deg), indexing="ij")
            off = ii != jj
            a, c = nb[ii[off]], nb[jj[off]]
            sum_t3 = T[a] + T[v] + T[c]
            g_in3 = W[a, v] + W[v, c] + W[a, c]
            inv = 1.0 / pi(3, sum_t3, g_in3)
            e_sums[3] += float(inv.sum())
            d_sums[3] += float((g_in3 * inv).sum())
            d_sums[4] += float(((sum_t3 - 2 * g_in3) * inv).sum())
            d_sums[5] += float(((G - sum_t3 + g_in3) * inv).sum())

    if m > 1 and k >= 4:
        ge = W[eu, ev]
        te = T[eu] + T[ev]
        for i0 in range(0, m, _HT_BLOCK):
            sl = slice(i0, min(i0 + _HT_BLOCK, m))
            sum_t4 = te[sl][:, None] + te[None, :]
            g_in4 = (ge[sl][:, None] + ge[None, :]
                     + W[np.ix_(eu[sl], eu)] + W[np.ix_(eu[sl], ev)]
                     + W[np.ix_(ev[sl], eu)] + W[np.ix_(ev[sl], ev)])
            disjoint = ~((eu[sl][:, None] == eu[None, :])
                         | (eu[sl][:, None] == ev[None, :])
                         | (ev[sl][:, None] == eu[None, :])
                         | (ev[sl][:, None] == ev[None, :]))
            with np.errstate(divide="ignore"):
                inv = np.where(disjoint, 1.0 / pi(4, sum_t4, g_in4), 0.0)
            e_sums[4] += float(inv.sum())
            d_sums[4] += float((g_in4 * inv).sum())
            d_sums[5] += float(((sum_t4 - 2 * g_in4) * inv).sum())
            d_sums[6] += float(((G - sum_t4 + g_in4) * inv).sum())

    n2 = n * (n - 1) / 2
    n3 = n * (n - 1) * (n - 2)
    n4 = n * (n - 1) * (n - 2) * (n - 3) / 4
    pair = PairMoments(
        e_ident=e_sums[2] / n2,
        e_share=e_sums[3] / n3 if k >= 3 else math.nan,
        e_disj=e_sums[4] / n4 if k >= 4 else math.nan,
    )
    d_vals = np.full(5, math.nan)
    d_vals[0] = d_sums[2] / triplet_multiplicity(n, 2)
    if k >= 3:
        d_vals[1] = d_sums[3] / triplet_multiplicity(n, 3)
    if k >= 4:
        for t in (4, 5, 6):
            d_vals[t - 2] = d_sums[t] / triplet_multiplicity(n, t)
    return pair, TripletMoments(d=d_vals)


def estimate_pair_moments_is(state: SubsetState, labels, graph: BinnedPairGraph,
                             model) -> PairMoments:
    """Horvitz-Thompson pair moments from a proposal-sampled subset."""
    pair, _ = horvitz_thompson_moments(state, labels, graph, model)
    return pair


def estimate_triplet_moments_is(state: SubsetState, labels, graph: BinnedPairGraph,
                                model) -> TripletMoments:
    """Horvitz-Thompson triplet moments from a proposal-sampled subset."""
    _, trip = horvitz_thompson_moments(state, labels, graph, model)
    return trip


# -- delta-method IS variance ----------------------------------------------

def exact_g_subset_moments(model, b: int, n: int, k: int) -> tuple[float, float]:
    """Exact mean and variance of the predicted count g(S_k) under uniform subsets."""
    G = model.total(b)
    c1 = _uniform_inclusion(n, k, 2)
    c2 = _uniform_inclusion(n, k, 3)
    c3 = _uniform_inclusion(n, k, 4)
    sq, share, disj = model.g_pair_pair_sums(b)
    mean = c1 * G
    second = c1 * sq + c2 * share + c3 * disj
    return mean, max(second - mean * mean, 0.0)


def expected_f_squared(E: PairMoments, k: int) -> float:
    return (k * (k - 1) / 2 * E.e_ident
            + k * (k - 1) * (k - 2) * E.e_share
            + k * (k - 1) * (k - 2) * (k - 3) / 4 * E.e_disj)


def expected_f_mean_squared(E: PairMoments, n: int, k: int) -> float:
    return (k * k * (k - 1) * (k - 1) / (n * (n - 1))
            * (E.e_ident / 2 + (n - 2) * E.e_share
               + (n - 2) * (n - 3) / 4 * E.e_disj))


def expected_f_squared_g(D: TripletMoments, k: int) -> float:
    d2, d3, d4, d5, d6 = (D.value(t) for t in range(2, 7))
    return (k * (k - 1)
            * (0.5 * d2 + (k - 2) * (4 * d3 + (k - 3)
               * (19 / 4 * d4 + (k - 4) * (1.5 * d5 + (k - 5) / 8 * d6)))))


def is_variance_delta(E: PairMoments, D: TripletMoments, model, b: int,
                      n: int, k: int) -> tuple[float, bool]:
    """Delta-method variance of the importance-sampling estimator.

    Returns (variance, clamped); negative second-order approximations are
    clamped to zero and flagged.
    """
    if not (E.complete and D.complete):
        raise ValueError("moment estimates incomplete (subset too small)")
    e_g, var_g = exact_g_subset_moments(model, b, n, k)
    if e_g <= 0:
        raise ValueError("expected predicted count must be positive")
    ef2 = expected_f_squared(E, k)
    ef_sq = expected_f_mean_squared(E, n, k)
    ef2g = expected_f_squared_g(D, k)
    ratio = 2 * ef2 / e_g - ef2g / e_g ** 2 + ef2 * var_g / e_g ** 3
    scale = n * (n - 1) / (k * (k - 1))
    var = model.total(b) * scale * ratio - scale * scale * ef_sq
    if var < 0:
        return 0.0, True
    return var, False


def confidence_interval(estimate: float, v_hat: float,
                        level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation interval, lower end clamped at 0 (counts)."""
    if v_hat < 0:
        raise ValueError("variance must be nonnegative")
    z = stats.norm.ppf(0.5 + level / 2)
    half = z * math.sqrt(v_hat)
    return max(0.0, estimate - half), estimate + half

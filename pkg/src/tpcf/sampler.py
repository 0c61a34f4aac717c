"""Weighted-pair subset sampling and the multi-bin active labeling session.

A subset is drawn by sampling one vertex pair with probability proportional
to its predicted score, then filling the rest uniformly without replacement
(Midzuno-Sen style); the resulting subset probability is proportional to the
subset's predicted true-edge count.  A Session grows one subset per distance
bin simultaneously, requesting each vertex label at most once.
"""

from __future__ import annotations

import json
import math
import warnings

import numpy as np

from tpcf.binning import BinnedPairGraph
from tpcf.estimators import (
    SubsetState,
    incremental_update,
    is_estimate,
    subset_state_from_vertices,
)


class SessionComplete(Exception):
    """Raised when stepping a session whose vertex pool is exhausted."""


class InitialPairDistribution:
    """Distribution over vertex pairs with mass proportional to edge score."""

    def __init__(self, b: int, pair_u: np.ndarray, pair_v: np.ndarray,
                 weights: np.ndarray):
        if len(pair_u) == 0:
            raise ValueError(f"bin {b} has no candidate edges")
        if (weights <= 0).any():
            raise ValueError("all pair weights must be positive")
        self.bin = b
        self.pair_u = pair_u
        self.pair_v = pair_v
        total = weights.sum()
        self.probabilities = weights / total
        self._cum = np.cumsum(self.probabilities)

    def sample(self, gen: np.random.Generator) -> tuple[int, int]:
        idx = int(np.searchsorted(self._cum, gen.random(), side="right"))
        idx = min(idx, len(self.pair_u) - 1)
        u, v = int(self.pair_u[idx]), int(self.pair_v[idx])
        return (u, v) if u < v else (v, u)


class _UniformPairDistribution(InitialPairDistribution):
    """Uniform over all unordered vertex pairs (constant-score models)."""

    def __init__(self, b: int, n: int):
        self.bin = b
        self.n = n

    def sample(self, gen: np.random.Generator) -> tuple[int, int]:
        u = int(gen.integers(self.n))
        v = int(gen.integers(self.n - 1))
        if v >= u:
            v += 1
        return (u, v) if u < v else (v, u)


def initial_pair_distribution(model, graph: BinnedPairGraph, b: int) -> InitialPairDistribution:
    """Build the first-pair distribution q0 of bin b for the given score model."""
    if hasattr(model, "edge_scores"):
        u, v = graph.edges(b)
        return InitialPairDistribution(b, u, v, model.edge_scores(b))
    return _UniformPairDistribution(b, graph.n)


def sample_initial_pair(dist: InitialPairDistribution,
                        gen: np.random.Generator) -> tuple[int, int]:
    """Draw one unordered pair with probability g(u, v) / G."""
    return dist.sample(gen)


def sample_subset(b: int, k: int, graph: BinnedPairGraph, model,
                  gen: np.random.Generator, labels) -> SubsetState:
    """Draw a k-subset from the score-weighted proposal and score it.

    First pair from q0, remaining k-2 vertices uniform without replacement;
    the subset law is proportional to the subset's predicted count.
    """
    n = graph.n
    if not 2 <= k <= n:
        raise ValueError(f"k={k} out of range [2, {n}]")
    dist = initial_pair_distribution(model, graph, b)
    u, v = dist.sample(gen)
    rest = np.delete(np.arange(n), [u, v])
    extra = gen.choice(rest, size=k - 2, replace=False)
    return subset_state_from_vertices(b, [u, v, *extra], labels, graph, model)


class Session:
    """Multi-bin active sampling session.

    One initial pair per bin, then a single global uniform stream without
    replacement; a drawn vertex already inside a bin's subset is discarded
    for that bin only and reused by the others.  Labels are requested at
    most once per vertex.  With ``label_source`` set (an array of ground
    truth labels) the session is self-driving via :meth:`step`; without it,
    labels arrive through :meth:`provide_label` one pending vertex at a
    time.
    """

    def __init__(self, graph: BinnedPairGraph, model, label_source=None,
                 seed: int | None = None, rng: np.random.Generator | None = None):
        self.graph = graph
        self.model = model
        self.n = graph.n
        if rng is None:
            rng = np.random.default_rng(np.random.SeedSequence(seed))
        self._gen = rng
        self._source = None if label_source is None else np.asarray(label_source)

        counts = graph.per_bin_edge_count
        self.active_bins = [b for b in range(graph.num_bins) if counts[b] > 0]
        skipped = [b for b in range(graph.num_bins) if counts[b] == 0]
        if skipped:
            warnings.warn(f"bins {skipped} have no candidate edges; excluded from session")
        if not self.active_bins:
            raise ValueError("every bin is empty; nothing to estimate")

        self.initial_pairs: dict[int, tuple[int, int]] = {}
        for b in self.active_bins:
            dist = initial_pair_distribution(model, graph, b)
            self.initial_pairs[b] = dist.sample(self._gen)
        self._perm = self._gen.permutation(self.n)

        self.labels = np.full(self.n, -1, dtype=np.int64)
        self.labels_used = 0
        self.states: dict[int, SubsetState] = {}
        self.estimates: dict[int, list[tuple[int, int, float]]] = {
            b: [] for b in self.active_bins
        }
        self.uniform_draws: list[int] = []
        self.events: list[dict] = []
        self._step_no = 0

        # initial-pair vertices, bins in index order, deduplicated
        self._init_queue: list[int] = []
        seen: set[int] = set()
        for b in self.active_bins:
            for v in self.initial_pairs[b]:
                if v not in seen:
                    seen.add(v)
                    self._init_queue.append(v)
        self._init_ptr = 0
        self._draw_ptr = 0
        self._phase = "init"
        self.pending: int | None = None

        if self._source is not None:
            while self._init_ptr < len(self._init_queue):
                v = self._init_queue[self._init_ptr]
                self._accept_label(v, int(self._source[v]))
                self._init_ptr += 1
            self._phase = "uniform"
        else:
            self.pending = self._init_queue[0]

    # -- bookkeeping -------------------------------------------------------

    @property
    def complete(self) -> bool:
        return self._phase == "uniform" and self._draw_ptr >= self.n

    @property
    def status(self) -> str:
        return "complete" if self.complete else "awaiting-label"

    def latest(self, b: int) -> tuple[int, int, float]:
        """(labels_used, k, estimate) most recently appended for bin b."""
        return self.estimates[b][-1]

    def _accept_label(self, v: int, y: int) -> None:
        if y not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {y}")
        if self.labels[v] != -1:
            raise ValueError(f"vertex {v} was already labeled")
        self.labels[v] = y
        self.labels_used += 1
        self.events.append({"event": "label", "vertex": int(v), "label": int(y),
                            "labels_used": self.labels_used})
        if self._phase == "init":
            for b in self.active_bins:
                u, w = self.initial_pairs[b]
                if b not in self.states and self.labels[u] != -1 and self.labels[w] != -1:
                    self._emit_initial(b)

    def _emit_initial(self, b: int) -> None:
        u, w = self.initial_pairs[b]
        state = subset_state_from_vertices(b, [u, w], self.labels, self.graph, self.model)
        self.states[b] = state
        est = is_estimate(state, self.model.total(b))
        self.estimates[b].append((self.labels_used, state.k, est))

    def _apply_uniform(self, v: int) -> dict[int, float]:
        self._step_no += 1
        self.uniform_draws.append(int(v))
        per_bin = {}
        for b in self.active_bins:
            state = self.states[b]
            if state.member_mask[v]:
                continue  # discarded for this bin: v was its initial-pair vertex
            state = incremental_update(state, v, self.labels, self.graph, self.model)
            self.states[b] = state
            if state.k == self.n:
                # the subset is all of S, so g(S_k)/G is identically 1 and the
                # estimate is f(S) itself; evaluate the identity directly so
                # the terminal value is exact rather than rounded
                est = float(state.f_k)
            else:
                est = is_estimate(state, self.model.total(b))
            self.estimates[b].append((self.labels_used, state.k, est))
            per_bin[b] = {"k": state.k, "f_k": state.f_k, "g_k": state.g_k,
                          "estimate": est}
        self.events.append({"event": "step", "step": self._step_no, "vertex": int(v),
                            "label": int(self.labels[v]), "bins": per_bin})
        return {b: info["estimate"] for b, info in per_bin.items()}

    # -- simulated-annotator driving ---------------------------------------

    def step(self) -> dict[int, float]:
        """Draw one vertex from the uniform stream and update every bin.

        Requires a label source.  Returns the per-bin estimates appended by
        this step; raises SessionComplete when the pool is exhausted.
        """
        if self._source is None:
            raise RuntimeError("step() needs a label source; use provide_label()")
        if self._draw_ptr >= self.n:
            raise SessionComplete
        v = int(self._perm[self._draw_ptr])
        self._draw_ptr += 1
        if self.labels[v] == -1:
            self._accept_label(v, int(self._source[v]))
        return self._apply_uniform(v)

    def run(self, stop_frac: float = 1.0) -> None:
        """Step until the labeled fraction reaches stop_frac (or exhaustion)."""
        target = math.ceil(stop_frac * self.n)
        # at full labeling, keep draining the stream past the last new label:
        # the tail draws are already-labeled initial-pair vertices that still
        # have to join the other bins' subsets
        while not self.complete and (self.labels_used < target
                                     or target >= self.n):
            try:
                self.step()
            except SessionComplete:
                break

    # -- interactive driving ----------------------------------------------

    def provide_label(self, v: int, y: int) -> None:
        """Apply a human label for the pending vertex and advance the session."""
        if self.pending is None:
            raise RuntimeError("session is not awaiting a label")
        if v != self.pending:
            raise ValueError(f"vertex {v} is not the pending vertex {self.pending}")
        self._accept_label(v, y)
        self.pending = None
        if self._phase == "init":
            self._init_ptr += 1
            if self._init_ptr < len(self._init_queue):
                self.pending = self._init_queue[self._init_ptr]
                return
            self._phase = "uniform"
        else:
            v_drawn = int(self._perm[self._draw_ptr])
            self._draw_ptr += 1
            self._apply_uniform(v_drawn)
        self._drain_uniform()

    def _drain_uniform(self) -> None:
        while self._draw_ptr < self.n:
            v = int(self._perm[self._draw_ptr])
            if self.labels[v] == -1:
                self.pending = v
                return
            self._draw_ptr += 1
            self._apply_uniform(v)
        self.pending = None

    # -- export ------------------------------------------------------------

    def write_event_log(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for event in self.events:
                fh.write(json.dumps(event) + "\n")

"""Logarithmic separation bins, per-bin candidate edge lists, and DD/RR counts.

Each source is a vertex; a candidate edge joins two vertices whose planar
separation falls inside a bin.  Bins are half-open [lo, hi) so every pair
lands in at most one bin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tpcf.catalog import Catalog

# Pairwise distances are computed in row blocks of this many points to keep
# the O(n^2) construction within a bounded memory footprint.
_BLOCK = 512


@dataclass(frozen=True)
class BinConfig:
    """Strictly increasing separation bin edges; bin b covers [edges[b], edges[b+1])."""

    edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=np.float64))
        if self.edges.ndim != 1 or len(self.edges) < 2:
            raise ValueError("need at least two bin edges")
        if (self.edges <= 0).any() or (np.diff(self.edges) <= 0).any():
            raise ValueError("bin edges must be positive and strictly increasing")

    @property
    def num_bins(self) -> int:
        return len(self.edges) - 1

    def bounds(self, b: int) -> tuple[float, float]:
        return float(self.edges[b]), float(self.edges[b + 1])


def make_log_bins(theta_min: float, theta_max: float, num_bins: int) -> BinConfig:
    """Logarithmically spaced bins from theta_min to theta_max."""
    if not (0 < theta_min < theta_max):
        raise ValueError("need 0 < theta_min < theta_max")
    if num_bins < 1:
        raise ValueError("need at least one bin")
    edges = theta_min * (theta_max / theta_min) ** (np.arange(num_bins + 1) / num_bins)
    return BinConfig(edges)


def load_bin_config(path) -> BinConfig:
    """Read a bin config from JSON or TOML: explicit edges, or theta range + count."""
    path = Path(path)
    if path.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # python < 3.11
            import tomli as tomllib

        data = tomllib.loads(path.read_text())
    else:
        data = json.loads(path.read_text())
    if "edges" in data:
        return BinConfig(np.asarray(data["edges"], dtype=np.float64))
    return make_log_bins(data["theta_min"], data["theta_max"], data["num_bins"])


def save_bin_config(bins: BinConfig, path) -> None:
    Path(path).write_text(json.dumps({"edges": bins.edges.tolist()}, indent=2) + "\n")


class BinnedPairGraph:
    """Per-bin candidate edge lists over n vertices, with adjacency indexes.

    Edge lists are stored explicitly (u < v); the sampler and the variance
    kernels iterate them repeatedly, so recomputing distances would dominate.
    """

    def __init__(self, n: int, per_bin_edges: list[tuple[np.ndarray, np.ndarray]],
                 bins: BinConfig):
        self.n = n
        self.bins = bins
        self.per_bin_edges = [
            (np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64))
            for u, v in per_bin_edges
        ]
        self._adjacency: list[tuple[np.ndarray, np.ndarray] | None] = [None] * self.num_bins

    @property
    def num_bins(self) -> int:
        return len(self.per_bin_edges)

    @property
    def per_bin_edge_count(self) -> np.ndarray:
        return np.array([len(u) for u, _ in self.per_bin_edges], dtype=np.int64)

    def edges(self, b: int) -> tuple[np.ndarray, np.ndarray]:
        return self.per_bin_edges[b]

    def adjacency(self, b: int) -> tuple[np.ndarray, np.ndarray]:
        """CSR-style (indptr, neighbors) over the undirected edges of bin b."""
        cached = self._adjacency[b]
        if cached is None:
            u, v = self.per_bin_edges[b]
            src = np.concatenate([u, v])
            dst = np.concatenate([v, u])
            order = np.argsort(src, kind="stable")
            src, dst = src[order], dst[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            cached = (indptr, dst)
            self._adjacency[b] = cached
        return cached

    def neighbors(self, b: int, v: int) -> np.ndarray:
        indptr, dst = self.adjacency(b)
        return dst[indptr[v]:indptr[v + 1]]


def build_pair_graph(catalog: Catalog, bins: BinConfig) -> BinnedPairGraph:
    """Exhaustive per-bin edge lists; pairs outside [edges[0], edges[-1]) are dropped."""
    n = len(catalog)
    if n < 2:
        raise ValueError("need at least 2 points to form pairs")
    x, y = catalog.x, catalog.y
    edges = bins.edges
    num_bins = bins.num_bins
    per_bin_u: list[list[np.ndarray]] = [[] for _ in range(num_bins)]
    per_bin_v: list[list[np.ndarray]] = [[] for _ in range(num_bins)]
    for i0 in range(0, n, _BLOCK):
        i1 = min(i0 + _BLOCK, n)
        dx = x[i0:i1, None] - x[None, :]
        dy = y[i0:i1, None] - y[None, :]
        d = np.hypot(dx, dy)
        rows, cols = np.nonzero(np.arange(n)[None, :] > np.arange(i0, i1)[:, None])
        dist = d[rows, cols]
        b = np.searchsorted(edges, dist, side="right") - 1
        ok = (b >= 0) & (b < num_bins) & (dist >= edges[0])
        rows, cols, b = rows[ok] + i0, cols[ok], b[ok]
        for bb in range(num_bins):
            sel = b == bb
            if sel.any():
                per_bin_u[bb].append(rows[sel])
                per_bin_v[bb].append(cols[sel])
    per_bin = []
    empty = np.empty(0, dtype=np.int64)
    for bb in range(num_bins):
        if per_bin_u[bb]:
            per_bin.append((np.concatenate(per_bin_u[bb]), np.concatenate(per_bin_v[bb])))
        else:
            per_bin.append((empty, empty))
    return BinnedPairGraph(n, per_bin, bins)


def true_edge_count(graph: BinnedPairGraph, labels, b: int) -> int:
    """Number of bin-b edges whose endpoints are both labeled targets: f(S)."""
    labels = np.asarray(labels)
    if ((labels != 0) & (labels != 1)).any():
        raise ValueError("true_edge_count needs a complete 0/1 label vector")
    u, v = graph.edges(b)
    return int(((labels[u] == 1) & (labels[v] == 1)).sum())


@dataclass(frozen=True)
class PairCounts:
    """Normalized DD/RR pair counts and the resulting correlation omega.

    omega[b] is NaN where rr[b] == 0 (undefined, not an error).
    """

    dd: np.ndarray
    rr: np.ndarray
    omega: np.ndarray = field(init=False)

    def __post_init__(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            omega = np.where(self.rr > 0, self.dd / self.rr - 1.0, np.nan)
        object.__setattr__(self, "omega", omega)


def pair_counts_and_omega(data_counts, n_d: int, random_graph: BinnedPairGraph,
                          n_r: int) -> PairCounts:
    """Normalized DD and RR counts plus omega = DD/RR - 1 per bin."""
    data_counts = np.asarray(data_counts, dtype=np.float64)
    if n_d < 1 or n_r < 2:
        raise ValueError("need n_d >= 1 and n_r >= 2")
    if len(data_counts) != random_graph.num_bins:
        raise ValueError("data counts and random graph disagree on bin count")
    dd = data_counts / (n_d * n_d)
    rr = random_graph.per_bin_edge_count.astype(np.float64) / (n_r * n_r)
    return PairCounts(dd=dd, rr=rr)

"""Synthetic catalogs for experiments and tests.

Desk-scale stand-ins for the survey catalogs: clustered targets (Gaussian
blobs) over a uniform background, or a fully uniform field.
"""

from __future__ import annotations

import numpy as np

from tpcf.catalog import Catalog, FieldBounds, clamp_probs

UNIT_SQUARE = FieldBounds(0.0, 1.0, 0.0, 1.0)


def make_clustered_catalog(n: int, n_targets: int, seed: int,
                           n_clusters: int = 8, cluster_std: float = 0.04) -> Catalog:
    """Targets in Gaussian blobs on the unit square, uniform background.

    All points carry ground-truth labels; probs are a flat placeholder until
    a classifier (real or simulated) supplies them.
    """
    if not 0 < n_targets < n:
        raise ValueError("need 0 < n_targets < n")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    centers = rng.uniform(0.15, 0.85, size=(n_clusters, 2))
    assign = rng.integers(n_clusters, size=n_targets)
    tx = np.clip(centers[assign, 0] + rng.normal(0, cluster_std, n_targets), 0, 1)
    ty = np.clip(centers[assign, 1] + rng.normal(0, cluster_std, n_targets), 0, 1)
    n_bg = n - n_targets
    bx = rng.uniform(0, 1, n_bg)
    by = rng.uniform(0, 1, n_bg)
    x = np.concatenate([tx, bx])
    y = np.concatenate([ty, by])
    label = np.concatenate([np.ones(n_targets, dtype=np.int64),
                            np.zeros(n_bg, dtype=np.int64)])
    order = rng.permutation(n)
    return Catalog(x[order], y[order], label[order],
                   clamp_probs(np.full(n, 0.5)), UNIT_SQUARE)


def make_uniform_catalog(n: int, seed: int) -> Catalog:
    """Uniform field with every point a target (flat correlation function)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return Catalog(rng.uniform(0, 1, n), rng.uniform(0, 1, n),
                   np.ones(n, dtype=np.int64), clamp_probs(np.ones(n)), UNIT_SQUARE)

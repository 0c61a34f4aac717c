"""Batch trial runner, baselines, and evaluation metrics.

Each trial draws fresh simulated classifier probabilities, runs one active
labeling session per estimator against a simulated annotator, and records
estimates (and optionally variance/CIs) at configured labeled fractions.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from tpcf.binning import BinConfig, BinnedPairGraph, PairCounts, build_pair_graph, true_edge_count
from tpcf.catalog import Catalog, ClassifierSimConfig, generate_random_catalog, simulate_classifier
from tpcf.estimators import EdgeScoreModel, UniformScoreModel, classifier_baseline
from tpcf.sampler import Session, SessionComplete
from tpcf.variance import (
    confidence_interval,
    estimate_pair_moments_mc,
    horvitz_thompson_moments,
    is_variance_delta,
    mc_variance_exact,
)

MC = "mc"
IS = "is"
CLASSIFIER = "classifier"

_REPORT_COLUMNS = [
    "trial", "bin", "estimator", "stop_frac", "labels_used", "k",
    "estimate", "truth", "frac_error", "v_hat", "ci_low", "ci_high",
    "covered", "radius_rel", "clamped",
]


@dataclass(frozen=True)
class TrialConfig:
    """Configuration for a batch of simulated-annotator trials."""

    catalog: Catalog
    bins: BinConfig
    classifier: ClassifierSimConfig | None = None  # None: use catalog file probs
    estimators: tuple[str, ...] = (MC, IS, CLASSIFIER)
    stop_fracs: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8, 1.0)
    variance_stop_fracs: tuple[float, ...] = ()
    trials: int = 200
    base_seed: int = 0
    ci_level: float = 0.95

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        for f in (*self.stop_fracs, *self.variance_stop_fracs):
            if not 0 < f <= 1:
                raise ValueError("stop fractions must lie in (0, 1]")
        unknown = set(self.estimators) - {MC, IS, CLASSIFIER}
        if unknown:
            raise ValueError(f"unknown estimators: {unknown}")


def _derived_seed(*key) -> np.random.SeedSequence:
    return np.random.SeedSequence(tuple(int(k) for k in key))


def fractional_error(estimate: float, truth: float) -> float:
    """|estimate - truth| / truth; NaN when the truth is zero (undefined)."""
    if truth <= 0:
        return math.nan
    return abs(estimate - truth) / truth


def _variance_row(session: Session, b: int, estimator: str, graph: BinnedPairGraph,
                  model, level: float):
    state = session.states[b]
    n, k = graph.n, state.k
    try:
        if estimator == MC:
            moments = estimate_pair_moments_mc(state, session.labels, graph)
            if not moments.complete:
                return None
            v = mc_variance_exact(moments, n, k)
            clamped = v < 0
            v = max(v, 0.0)
        else:
            pair, trip = horvitz_thompson_moments(state, session.labels, graph, model)
            if not (pair.complete and trip.complete):
                return None
            v, clamped = is_variance_delta(pair, trip, model, b, n, k)
    except ValueError:
        return None
    est = session.latest(b)[2]
    lo, hi = confidence_interval(est, v, level)
    return v, lo, hi, clamped


def run_trials(cfg: TrialConfig) -> pd.DataFrame:
    """Run the configured trials and return the tidy per-record report frame."""
    catalog = cfg.catalog
    if not catalog.has_labels:
        raise ValueError("trial running needs a fully labeled catalog")
    graph = build_pair_graph(catalog, cfg.bins)
    n = graph.n
    labels = catalog.label
    counts = graph.per_bin_edge_count
    active = [b for b in range(graph.num_bins) if counts[b] > 0]
    truth = {b: true_edge_count(graph, labels, b) for b in active}
    fracs = sorted(set(cfg.stop_fracs) | set(cfg.variance_stop_fracs))
    var_fracs = set(cfg.variance_stop_fracs)

    rows: list[dict] = []
    for trial in range(cfg.trials):
        if cfg.classifier is not None:
            sim = dataclasses.replace(
                cfg.classifier,
                seed=int(_derived_seed(cfg.base_seed, trial, 0).generate_state(1)[0]),
            )
            probs = simulate_classifier(catalog, sim).prob
        else:
            probs = catalog.prob
        score_model = EdgeScoreModel(graph, probs) if (
            IS in cfg.estimators or CLASSIFIER in cfg.estimators) else None

        if CLASSIFIER in cfg.estimators:
            for b in active:
                est = classifier_baseline(score_model, b)
                rows.append({
                    "trial": trial, "bin": b, "estimator": CLASSIFIER,
                    "stop_frac": math.nan, "labels_used": 0, "k": 0,
                    "estimate": est, "truth": truth[b],
                    "frac_error": fractional_error(est, truth[b]),
                    "v_hat": math.nan, "ci_low": math.nan, "ci_high": math.nan,
                    "covered": math.nan, "radius_rel": math.nan, "clamped": math.nan,
                })

        for est_idx, estimator in enumerate(e for e in cfg.estimators
                                            if e in (MC, IS)):
            model = score_model if estimator == IS else UniformScoreModel(
                n, graph.num_bins)
            rng = np.random.default_rng(
                _derived_seed(cfg.base_seed, trial, 1 + est_idx))
            session = Session(graph, model, label_source=labels, rng=rng)
            for frac in fracs:
                target = math.ceil(frac * n)
                # at full labeling, drain the remaining already-labeled draws
                # so every bin's subset reaches the whole vertex set
                while not session.complete and (session.labels_used < target
                                                or target >= n):
                    try:
                        session.step()
                    except SessionComplete:
                        break
                for b in session.active_bins:
                    _, k, est = session.latest(b)
                    row = {
                        "trial": trial, "bin": b, "estimator": estimator,
                        "stop_frac": frac, "labels_used": session.labels_used,
                        "k": k, "estimate": est, "truth": truth[b],
                        "frac_error": fractional_error(est, truth[b]),
                        "v_hat": math.nan, "ci_low": math.nan,
                        "ci_high": math.nan, "covered": math.nan,
                        "radius_rel": math.nan, "clamped": math.nan,
                    }
                    if frac in var_fracs:
                        result = _variance_row(session, b, estimator, graph,
                                               model, cfg.ci_level)
                        if result is not None:
                            v, lo, hi, clamped = result
                            row.update({
                                "v_hat": v, "ci_low": lo, "ci_high": hi,
                                "covered": bool(lo <= truth[b] <= hi),
                                "radius_rel": ((hi - lo) / 2 / truth[b]
                                               if truth[b] > 0 else math.nan),
                                "clamped": bool(clamped),
                            })
                    rows.append(row)
    return pd.DataFrame(rows, columns=_REPORT_COLUMNS)


def mean_fractional_error(report: pd.DataFrame, estimator: str,
                          stop_frac: float | None = None) -> float:
    """Fractional error averaged over trials, then over bins."""
    df = report[report["estimator"] == estimator]
    if stop_frac is not None:
        df = df[np.isclose(df["stop_frac"], stop_frac)]
    per_bin = df.groupby("bin")["frac_error"].mean()
    return float(per_bin.mean())


def coverage_and_radius(report: pd.DataFrame, b: int,
                        stop_frac: float, estimator: str = IS) -> tuple[float, float]:
    """Fraction of trials whose CI covers the truth, and mean relative radius."""
    df = report[(report["bin"] == b) & (report["estimator"] == estimator)
                & np.isclose(report["stop_frac"], stop_frac)
                & report["covered"].notna()]
    if len(df) == 0:
        raise ValueError("no recorded CIs for that bin/stop fraction")
    return float(df["covered"].mean()), float(df["radius_rel"].mean())


def estimate_target_count(session: Session) -> float:
    """Estimated number of targets from the uniform-phase label sample.

    Uniform-phase draws are an unbiased uniform sample of the vertex set;
    initial-pair vertices are excluded because their selection is
    score-biased.
    """
    draws = session.uniform_draws
    if not draws:
        raise ValueError("no uniform-phase draws yet")
    labs = session.labels[np.asarray(draws)]
    if (labs == -1).any():
        raise ValueError("uniform draws include unlabeled vertices")
    return session.n * float((labs == 1).mean())


def omega_from_session(session: Session, rr_graph: BinnedPairGraph,
                       n_r: int) -> PairCounts:
    """End-to-end correlation estimate from a running session's pair counts."""
    n_d = estimate_target_count(session)
    if n_d <= 0:
        raise ValueError("estimated target count is zero; omega undefined")
    dd = np.zeros(rr_graph.num_bins)
    for b in session.active_bins:
        dd[b] = session.latest(b)[2]
    rr = rr_graph.per_bin_edge_count.astype(np.float64) / (n_r * n_r)
    return PairCounts(dd=dd / (n_d * n_d), rr=rr)


def omega_with_rr_spread(data_counts, n_d: int, catalog_bounds, bins: BinConfig,
                         n_r: int, seeds) -> tuple[np.ndarray, np.ndarray]:
    """omega per bin averaged over RR replicates, with the replicate spread.

    The spread across independent uniform random catalogs stands in for the
    RR sampling noise when checking flatness of a uniform field.
    """
    omegas = []
    for seed in seeds:
        rr_cat = generate_random_catalog(catalog_bounds, n_r, seed)
        rr_graph = build_pair_graph(rr_cat, bins)
        pc = PairCounts(
            dd=np.asarray(data_counts, dtype=np.float64) / (n_d * n_d),
            rr=rr_graph.per_bin_edge_count.astype(np.float64) / (n_r * n_r),
        )
        omegas.append(pc.omega)
    omegas = np.array(omegas)
    return omegas.mean(axis=0), omegas.std(axis=0, ddof=1)

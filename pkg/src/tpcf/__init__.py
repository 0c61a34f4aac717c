"""Active estimation of two-point correlation pair counts.

A catalog of detected sources, a classifier probability per source, and a
stream of human (or simulated) labels are combined into unbiased per-bin
pair-count estimates with variance estimates and confidence intervals that
update after every label.
"""

from tpcf.catalog import (
    Catalog,
    ClassifierSimConfig,
    FieldBounds,
    SourcePoint,
    generate_random_catalog,
    load_catalog,
    save_catalog,
    simulate_classifier,
)
from tpcf.binning import (
    BinConfig,
    BinnedPairGraph,
    PairCounts,
    build_pair_graph,
    load_bin_config,
    make_log_bins,
    pair_counts_and_omega,
    true_edge_count,
)
from tpcf.estimators import (
    EdgeScoreModel,
    SubsetState,
    UniformScoreModel,
    classifier_baseline,
    edge_score,
    incremental_update,
    is_estimate,
    mc_estimate,
)
from tpcf.sampler import (
    InitialPairDistribution,
    Session,
    sample_initial_pair,
    sample_subset,
)
from tpcf.variance import (
    PairMoments,
    TripletMoments,
    VarianceReport,
    confidence_interval,
    estimate_pair_moments_is,
    estimate_pair_moments_mc,
    estimate_triplet_moments_is,
    inclusion_probability,
    is_variance_delta,
    mc_variance_exact,
    triplet_multiplicity,
)
from tpcf.experiments import (
    TrialConfig,
    coverage_and_radius,
    estimate_target_count,
    fractional_error,
    run_trials,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

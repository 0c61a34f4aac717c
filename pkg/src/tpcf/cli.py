"""Command line interface.

Subcommands cover the full workflow: catalog validation and simulation,
bin construction, exhaustive pair counting, active estimation sessions,
batch trial reports with figures, and the annotation HTTP service.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import click
import numpy as np

from tpcf.binning import (
    build_pair_graph,
    load_bin_config,
    make_log_bins,
    pair_counts_and_omega,
    save_bin_config,
    true_edge_count,
)
from tpcf.catalog import (
    CatalogFormatError,
    ClassifierSimConfig,
    FieldBounds,
    generate_random_catalog,
    load_catalog,
    save_catalog,
    simulate_classifier,
)
from tpcf.estimators import EdgeScoreModel, UniformScoreModel
from tpcf.experiments import IS, MC, TrialConfig, _variance_row, run_trials
from tpcf.sampler import Session

REPORT_HEADER = ["bin", "labels_used", "estimator", "estimate",
                 "v_hat", "ci_low", "ci_high", "clamped"]


@click.group()
def main():
    """Active pair-count estimation for two-point correlation functions."""


# -- catalog ---------------------------------------------------------------

@main.group()
def catalog():
    """Catalog file operations."""


@catalog.command()
@click.argument("path", type=click.Path(exists=True))
def validate(path):
    """Check a catalog CSV and print a summary."""
    try:
        cat = load_catalog(path)
    except CatalogFormatError as exc:
        raise click.ClickException(str(exc))
    labeled = int((cat.label != -1).sum())
    click.echo(f"{path}: {cat.n} points, {labeled} labeled "
               f"({cat.target_count} targets), bounds "
               f"[{cat.field_bounds.x_min}, {cat.field_bounds.x_max}] x "
               f"[{cat.field_bounds.y_min}, {cat.field_bounds.y_max}]")


@catalog.command("simulate-classifier")
@click.argument("path", type=click.Path(exists=True))
@click.option("--alpha-pos", default=3.0, show_default=True)
@click.option("--beta-pos", default=1.0, show_default=True)
@click.option("--alpha-neg", default=1.0, show_default=True)
@click.option("--beta-neg", default=3.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def simulate_classifier_cmd(path, alpha_pos, beta_pos, alpha_neg, beta_neg,
                            seed, out):
    """Replace probs with beta-simulated classifier scores."""
    cat = load_catalog(path, require_labels=True)
    cfg = ClassifierSimConfig(alpha_pos, beta_pos, alpha_neg, beta_neg, seed)
    save_catalog(simulate_classifier(cat, cfg), out)
    click.echo(f"wrote {out}")


@catalog.command("random")
@click.option("--n", type=int, required=True)
@click.option("--bounds", default="0,1,0,1", show_default=True,
              help="x_min,x_max,y_min,y_max")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def random_cmd(n, bounds, seed, out):
    """Generate a uniform random catalog on a rectangle."""
    try:
        parts = [float(p) for p in bounds.split(",")]
        if len(parts) != 4:
            raise ValueError
        fb = FieldBounds(*parts)
    except ValueError:
        raise click.ClickException(f"bad bounds {bounds!r}; "
                                   "expected x_min,x_max,y_min,y_max")
    save_catalog(generate_random_catalog(fb, n, seed), out)
    click.echo(f"wrote {out}")


# -- bins ------------------------------------------------------------------

@main.group()
def bins():
    """Separation bin configuration."""


@bins.command()
@click.option("--theta-min", type=float, required=True)
@click.option("--theta-max", type=float, required=True)
@click.option("--num-bins", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
def make(theta_min, theta_max, num_bins, out):
    """Write a logarithmic bin config as JSON."""
    save_bin_config(make_log_bins(theta_min, theta_max, num_bins), out)
    click.echo(f"wrote {out}")


# -- pair counting ---------------------------------------------------------

@main.command()
@click.option("--catalog", "catalog_path", type=click.Path(exists=True),
              required=True)
@click.option("--bins", "bins_path", type=click.Path(exists=True), required=True)
@click.option("--random-n", type=int, default=None,
              help="random catalog size (default: catalog size)")
@click.option("--seed", default=0, show_default=True,
              help="random catalog seed")
@click.option("--out", type=click.Path(), default=None,
              help="output CSV (default: stdout)")
def paircount(catalog_path, bins_path, random_n, seed, out):
    """Exhaustive DD/RR pair counts and omega per bin."""
    cat = load_catalog(catalog_path, require_labels=True)
    cfg = load_bin_config(bins_path)
    graph = build_pair_graph(cat, cfg)
    n_d = cat.target_count
    if n_d < 1:
        raise click.ClickException("catalog contains no targets")
    dd_counts = [true_edge_count(graph, cat.label, b)
                 for b in range(cfg.num_bins)]
    n_r = random_n if random_n is not None else cat.n
    rr_cat = generate_random_catalog(cat.field_bounds, n_r, seed)
    rr_graph = build_pair_graph(rr_cat, cfg)
    pc = pair_counts_and_omega(dd_counts, n_d, rr_graph, n_r)

    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(["bin", "edge_lo", "edge_hi", "dd", "rr", "omega"])
        for b in range(cfg.num_bins):
            lo, hi = cfg.bounds(b)
            writer.writerow([b, repr(lo), repr(hi), repr(float(pc.dd[b])),
                             repr(float(pc.rr[b])), repr(float(pc.omega[b]))])
    finally:
        if out:
            fh.close()
            click.echo(f"wrote {out}")


# -- active estimation -----------------------------------------------------

@main.command()
@click.option("--catalog", "catalog_path", type=click.Path(exists=True),
              required=True)
@click.option("--bins", "bins_path", type=click.Path(exists=True), required=True)
@click.option("--stop-frac", type=float, default=1.0, show_default=True,
              help="labeled fraction of vertices at which to stop")
@click.option("--seed", default=0, show_default=True)
@click.option("--estimator", "estimators", multiple=True,
              type=click.Choice([MC, IS]), default=(IS,), show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
def estimate(catalog_path, bins_path, stop_frac, seed, estimators, out_dir):
    """Run a simulated-annotator session; write event logs and a variance report."""
    if not 0 < stop_frac <= 1:
        raise click.ClickException("stop-frac must lie in (0, 1]")
    cat = load_catalog(catalog_path, require_labels=True)
    cfg = load_bin_config(bins_path)
    graph = build_pair_graph(cat, cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for estimator in estimators:
        model = (EdgeScoreModel(graph, cat.prob) if estimator == IS
                 else UniformScoreModel(graph.n, graph.num_bins))
        session = Session(graph, model, label_source=cat.label, seed=seed)
        session.run(stop_frac)
        log_path = out / f"events_{estimator}.jsonl"
        session.write_event_log(log_path)
        click.echo(f"wrote {log_path}")
        for b in session.active_bins:
            _, _, est = session.latest(b)
            result = _variance_row(session, b, estimator, graph, model, 0.95)
            v, lo, hi, clamped = result if result is not None else (
                float("nan"),) * 3 + (False,)
            rows.append([b, session.labels_used, estimator, repr(float(est)),
                         repr(float(v)), repr(float(lo)), repr(float(hi)),
                         int(clamped)])

    report_path = out / "report.csv"
    with open(report_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_HEADER)
        writer.writerows(rows)
    click.echo(f"wrote {report_path}")


@main.command()
@click.option("--catalog", "catalog_path", type=click.Path(exists=True),
              required=True)
@click.option("--bins", "bins_path", type=click.Path(exists=True), required=True)
@click.option("--trials", default=200, show_default=True)
@click.option("--stop-frac", "stop_fracs", multiple=True, type=float,
              default=(0.2, 0.4, 0.6, 0.8, 1.0), show_default=True)
@click.option("--variance-stop-frac", "variance_stop_fracs", multiple=True,
              type=float, default=(), help="fractions at which to record CIs")
@click.option("--simulate-classifier/--file-probs", "simulate", default=True,
              show_default=True,
              help="draw fresh beta classifier probs per trial")
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
def trials(catalog_path, bins_path, trials, stop_fracs, variance_stop_fracs,
           simulate, seed, out_dir):
    """Batch simulated-annotator trials; write the report CSV plus figures."""
    from tpcf.reports import render_report

    cat = load_catalog(catalog_path, require_labels=True)
    cfg = load_bin_config(bins_path)
    trial_cfg = TrialConfig(
        catalog=cat, bins=cfg,
        classifier=ClassifierSimConfig() if simulate else None,
        stop_fracs=tuple(stop_fracs),
        variance_stop_fracs=tuple(variance_stop_fracs),
        trials=trials, base_seed=seed,
    )
    report = run_trials(trial_cfg)
    for path in render_report(report, out_dir):
        click.echo(f"wrote {path}")


# -- service ---------------------------------------------------------------

@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--catalog-dir", type=click.Path(exists=True), required=True)
def serve(port, host, catalog_dir):
    """Serve the annotation HTTP API over the catalogs in a directory."""
    import uvicorn

    from tpcf.service import create_app

    uvicorn.run(create_app(catalog_dir), host=host, port=port)


if __name__ == "__main__":
    main()

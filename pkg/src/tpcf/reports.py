"""Figure rendering for trial reports.

Turns the tidy trial report frame into the standard set of diagnostic
figures (error vs. labeled fraction, per-bin errors, coverage/radius,
per-bin counts with intervals).  Kept out of the estimation modules so the
numerics never import matplotlib; the CLI report path writes these PNGs
next to the delimited output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from tpcf.experiments import CLASSIFIER, IS, MC  # noqa: E402

_LABELS = {MC: "subset MC", IS: "weighted (IS)", CLASSIFIER: "classifier total"}
_COLORS = {MC: "tab:orange", IS: "tab:blue", CLASSIFIER: "tab:gray"}


def _mean_error_curve(report: pd.DataFrame, estimator: str) -> pd.Series:
    df = report[report["estimator"] == estimator]
    per = df.groupby(["stop_frac", "bin"])["frac_error"].mean()
    return per.groupby("stop_frac").mean()


def plot_error_vs_labels(report: pd.DataFrame, path) -> None:
    """Mean fractional error (over trials, then bins) against labeled fraction."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for est in (MC, IS):
        if (report["estimator"] == est).any():
            curve = _mean_error_curve(report, est)
            ax.plot(curve.index, curve.values, "o-", color=_COLORS[est],
                    label=_LABELS[est])
    cls = report[report["estimator"] == CLASSIFIER]
    if len(cls):
        level = cls.groupby("bin")["frac_error"].mean().mean()
        ax.axhline(level, color=_COLORS[CLASSIFIER], ls="--",
                   label=_LABELS[CLASSIFIER])
    ax.set_xlabel("labeled fraction")
    ax.set_ylabel("mean fractional error")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_per_bin_errors(report: pd.DataFrame, stop_frac: float, path) -> None:
    """Per-bin mean fractional error at one labeled fraction."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for est in (MC, IS):
        df = report[(report["estimator"] == est)
                    & np.isclose(report["stop_frac"], stop_frac)]
        if len(df):
            per_bin = df.groupby("bin")["frac_error"].mean()
            ax.plot(per_bin.index, per_bin.values, "o-", color=_COLORS[est],
                    label=_LABELS[est])
    cls = report[report["estimator"] == CLASSIFIER]
    if len(cls):
        per_bin = cls.groupby("bin")["frac_error"].mean()
        ax.plot(per_bin.index, per_bin.values, "--", color=_COLORS[CLASSIFIER],
                label=_LABELS[CLASSIFIER])
    ax.set_xlabel("bin index")
    ax.set_ylabel(f"mean fractional error at {stop_frac:.0%} labeled")
    if any(line.get_ydata().max() > 0 for line in ax.get_lines()
           if len(line.get_ydata())):
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_coverage(report: pd.DataFrame, stop_frac: float, path,
                  level: float = 0.95) -> None:
    """CI coverage and mean relative radius per bin at one labeled fraction."""
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4))
    for est in (MC, IS):
        df = report[(report["estimator"] == est)
                    & np.isclose(report["stop_frac"], stop_frac)
                    & report["covered"].notna()]
        if not len(df):
            continue
        cov = df.groupby("bin")["covered"].mean()
        rad = df.groupby("bin")["radius_rel"].mean()
        ax0.plot(cov.index, cov.values, "o-", color=_COLORS[est], label=_LABELS[est])
        ax1.plot(rad.index, rad.values, "o-", color=_COLORS[est], label=_LABELS[est])
    ax0.axhline(level, color="k", ls=":", lw=1)
    ax0.set_xlabel("bin index")
    ax0.set_ylabel("coverage")
    ax0.set_ylim(0, 1.05)
    ax0.legend()
    ax1.set_xlabel("bin index")
    ax1.set_ylabel("mean CI radius / truth")
    ax1.set_yscale("log")
    fig.suptitle(f"interval diagnostics at {stop_frac:.0%} labeled")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_counts_with_intervals(report: pd.DataFrame, stop_frac: float, path,
                               estimator: str = IS, trial: int = 0) -> None:
    """One trial's per-bin estimates with intervals against the ground truth."""
    df = report[(report["estimator"] == estimator) & (report["trial"] == trial)
                & np.isclose(report["stop_frac"], stop_frac)]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(df["bin"], df["truth"], "k.-", label="ground truth")
    has_ci = df["ci_low"].notna()
    ax.errorbar(df["bin"], df["estimate"],
                yerr=np.where(has_ci, (df["ci_high"] - df["ci_low"]) / 2, 0.0),
                fmt="o", color=_COLORS[estimator], capsize=3,
                label=_LABELS[estimator])
    ax.set_xlabel("bin index")
    ax.set_ylabel("true-edge count")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(report: pd.DataFrame, out_dir) -> list[Path]:
    """Write the report CSV and the figure set into out_dir; return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = out_dir / "trials.csv"
    report.to_csv(csv_path, index=False)
    written.append(csv_path)

    path = out_dir / "error_vs_labels.png"
    plot_error_vs_labels(report, path)
    written.append(path)

    fracs = sorted(report["stop_frac"].dropna().unique())
    if fracs:
        mid = fracs[len(fracs) // 2]
        path = out_dir / "per_bin_errors.png"
        plot_per_bin_errors(report, mid, path)
        written.append(path)

    var_fracs = sorted(report.loc[report["covered"].notna(), "stop_frac"].unique())
    if var_fracs:
        path = out_dir / "coverage.png"
        plot_coverage(report, var_fracs[-1], path)
        written.append(path)
        path = out_dir / "counts_with_intervals.png"
        plot_counts_with_intervals(report, var_fracs[-1], path)
        written.append(path)
    return written

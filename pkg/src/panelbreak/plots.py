"""Figure rendering for the CLI report paths.

Everything draws to files through the Agg backend; no interactive
windows are opened.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIG_KW = {"dpi": 130, "bbox_inches": "tight"}


def _thin_ticks(ax, labels, max_ticks=8):
    n = len(labels)
    if n == 0:
        return
    stride = max(1, n // max_ticks)
    pos = np.arange(0, n, stride)
    ax.set_xticks(pos)
    ax.set_xticklabels([labels[i] for i in pos], rotation=30, ha="right", fontsize=8)


def plot_profile(fit, path, time_labels=None):
    """Criterion profile over the candidate grid with the minimizer marked."""
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.plot(fit.profile_k, fit.profile_value, lw=1.2, color="#2c5f8a")
    ax.axvline(fit.k_hat, color="#c0392b", ls="--", lw=1.0,
               label=f"break at k={fit.k_hat} (tau={fit.tau_hat:.3f})")
    ax.set_xlabel("candidate break index")
    ax.set_ylabel("criterion")
    ax.legend(frameon=False, fontsize=8)
    fig.savefig(path, **FIG_KW)
    plt.close(fig)


def plot_h_histogram(result, path):
    """Surrogate break-offset distribution with the interval band shaded."""
    fig, ax = plt.subplots(figsize=(7, 3.2))
    h = np.asarray(result.h_samples)
    span = max(int(h.max() - h.min()), 1)
    bins = min(80, span + 1)
    ax.hist(h, bins=bins, color="#4879a8", edgecolor="white", lw=0.3)
    ax.axvspan(result.q_lo, result.q_hi, color="#e8b44c", alpha=0.25,
               label=f"{int(result.level * 100)}% offset range [{result.q_lo}, {result.q_hi}]")
    ax.axvline(0, color="#444444", lw=0.8)
    ax.set_xlabel("surrogate break offset h")
    ax.set_ylabel("count")
    ax.legend(frameon=False, fontsize=8)
    fig.savefig(path, **FIG_KW)
    plt.close(fig)


def plot_pipeline(returns, report, path, max_series=6):
    """Return paths with candidate breaks and per-partition interval bands."""
    fig, ax = plt.subplots(figsize=(9, 3.6))
    X = returns.values
    labels = returns.labels_or_default()
    shown = min(max_series, X.shape[1])
    for j in range(shown):
        ax.plot(np.arange(X.shape[0]), X[:, j], lw=0.4, alpha=0.5)
    for c in report.candidates:
        ax.axvline(c["index"], color="#c0392b", lw=1.0, ls="--")
    for item in report.intervals:
        lo, hi = item["ci_index"]
        ax.axvspan(lo, hi, color="#e8b44c", alpha=0.25)
    _thin_ticks(ax, labels)
    ax.set_ylabel("log return")
    ax.set_title("rolling break candidates (dashed) and interval bands (shaded)", fontsize=9)
    fig.savefig(path, **FIG_KW)
    plt.close(fig)


def plot_report(df, path):
    """Replicate summary: tau_hat scatter per group with group means."""
    fig, ax = plt.subplots(figsize=(7, 3.2))
    groups = list(df.groupby("group"))
    for gi, (name, sub) in enumerate(groups):
        x = np.full(len(sub), gi, dtype=float)
        x += (np.arange(len(sub)) - len(sub) / 2) * 0.002
        ax.plot(x, sub["tau_hat"], ".", ms=4, alpha=0.6)
        ax.plot([gi - 0.2, gi + 0.2], [sub["tau_hat"].mean()] * 2, color="#c0392b", lw=1.5)
    ax.set_xticks(range(len(groups)))
    ax.set_xticklabels([str(g) for g, _ in groups], fontsize=8)
    ax.set_ylabel("tau_hat")
    ax.set_xlabel("replicate group")
    fig.savefig(path, **FIG_KW)
    plt.close(fig)

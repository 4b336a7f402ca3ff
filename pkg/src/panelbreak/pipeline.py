"""Rolling-window break screening and per-partition intervals for price panels.

The flow mirrors a financial application: ingest a wide price CSV,
convert to log returns, slide a fixed-length window through the sample
re-running the break scan, keep break dates that repeat across windows,
cut the sample at midpoints between those candidates, and re-estimate
each partition's break with an adaptive confidence interval.
"""
from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .adaptive import AdaptiveConfig, adaptive_ci
from .errors import ConfigError, DataError
from .panel import PanelData, detect_change_point

MIN_PARTITION = 20


@dataclass
class RollingConfig:
    """Window geometry plus the settings forwarded to the adaptive interval."""

    window_len: int = 104
    step: int = 13
    min_repeats: int = 2
    trim: float = 0.05
    level: float = 0.95
    ci_reps: int = 1000
    fuzz: int = 0
    threads: int = 1
    seed: int | None = None
    adaptive: AdaptiveConfig = field(default_factory=AdaptiveConfig)

    def __post_init__(self):
        if self.window_len < 20:
            raise ConfigError("window_len must be at least 20")
        if self.step < 1:
            raise ConfigError("step must be >= 1")
        if self.min_repeats < 1:
            raise ConfigError("min_repeats must be >= 1")
        if self.fuzz < 0:
            raise ConfigError("fuzz must be >= 0")


@dataclass
class PipelineReport:
    """Candidates, partitions, and per-partition interval summaries."""

    candidates: list  # [{"index", "date", "count"}]
    partitions: list  # [(start, stop)] half-open row ranges
    intervals: list   # per-partition dicts
    segment_means: list  # per-partition (mu1, mu2) pairs as lists

    def to_json(self, indent=None):
        return json.dumps(
            {
                "candidates": self.candidates,
                "partitions": [list(pr) for pr in self.partitions],
                "intervals": self.intervals,
                "segment_means": self.segment_means,
            },
            indent=indent,
        )


def load_prices(source, min_coverage=0.9) -> PanelData:
    """Read a wide price CSV, dropping sparse series and filling single gaps.

    Series whose non-missing fraction falls below min_coverage are
    dropped.  Remaining isolated single-row gaps are forward-filled; a
    gap of two or more rows (or a missing first row) is an error.
    """
    try:
        df = pd.read_csv(source, dtype={0: str})
    except Exception as exc:
        raise DataError(f"could not parse price CSV: {exc}") from None
    if df.shape[1] < 2:
        raise DataError("price CSV needs a date column plus at least one series")
    labels = df.iloc[:, 0].astype(str).tolist()
    data = df.iloc[:, 1:].apply(pd.to_numeric, errors="coerce")
    coverage = data.notna().mean(axis=0)
    keep = coverage[coverage >= min_coverage].index
    if len(keep) == 0:
        raise DataError("no series meets the coverage requirement")
    data = data[keep]
    for col in data.columns:
        x = data[col]
        if x.isna().iloc[0]:
            raise DataError(f"series {col!r} starts with a missing value")
        na = x.isna()
        run = na & na.shift(1, fill_value=False)
        if run.any():
            where = labels[int(np.flatnonzero(run.to_numpy())[0])]
            raise DataError(f"series {col!r} has a gap longer than one row near {where!r}")
        data[col] = x.ffill()
    return PanelData(
        data.to_numpy(dtype=float),
        time_labels=labels,
        series_labels=[str(c) for c in keep],
    )


def log_returns(prices: PanelData) -> PanelData:
    """Row-over-row log returns; n-1 rows, first label dropped."""
    P = prices.values
    bad = np.argwhere(P <= 0)
    if bad.size:
        t, i = bad[0]
        lab = prices.labels_or_default()[t]
        ser = prices.series_or_default()[i]
        raise DataError(f"nonpositive price at date {lab!r}, series {ser!r}")
    values = np.log(P[1:] / P[:-1])
    labels = prices.time_labels[1:] if prices.time_labels else None
    return PanelData(values, time_labels=labels, series_labels=prices.series_labels)


def rolling_detect(returns: PanelData, config: RollingConfig):
    """Break candidates that repeat across rolling windows.

    Windows start at 0, step, 2*step, ... and must fit entirely inside
    the sample (a final partial window is discarded).  Each window's
    minimizer maps to the global index of the last row before the break;
    indices repeating at least min_repeats times (exact equality, or
    within `fuzz` rows merged to the first index seen) are returned
    sorted, as dicts with index, date, and count.
    """
    n = returns.n
    if n < config.window_len:
        raise ConfigError(f"series length {n} is below window_len {config.window_len}")
    starts = range(0, n - config.window_len + 1, config.step)
    counts = {}
    for s in starts:
        window = returns.slice_rows(s, s + config.window_len)
        fit = detect_change_point(window, config.trim)
        global_idx = s + fit.k_hat - 1
        counts[global_idx] = counts.get(global_idx, 0) + 1
    if config.fuzz > 0:
        merged = {}
        for idx in sorted(counts):
            for ref in merged:
                if abs(idx - ref) <= config.fuzz:
                    merged[ref] += counts[idx]
                    break
            else:
                merged[idx] = counts[idx]
        counts = merged
    labels = returns.labels_or_default()
    return [
        {"index": int(i), "date": labels[i], "count": int(c)}
        for i, c in sorted(counts.items())
        if c >= config.min_repeats
    ]


def partition_bounds(candidate_indices, n):
    """Half-open row ranges split at midpoints between consecutive candidates."""
    cand = sorted(int(c) for c in candidate_indices)
    bounds = [0]
    for a, b in zip(cand, cand[1:]):
        bounds.append((a + b) // 2 + 1)
    bounds.append(n)
    return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]


def partition_and_ci(returns: PanelData, candidates, config: RollingConfig) -> PipelineReport:
    """Re-estimate each partition's break with an adaptive interval.

    Partitions shorter than 20 rows are skipped with a warning.  The
    adaptive bandwidth is recomputed from each partition's own length.
    Partitions are processed concurrently on config.threads workers with
    per-partition seeds, so thread count never changes the report.
    """
    cand_list = list(candidates)
    idxs = [c["index"] if isinstance(c, dict) else int(c) for c in cand_list]
    parts = partition_bounds(idxs, returns.n)
    labels = returns.labels_or_default()

    def run_one(item):
        pi, (start, stop) = item
        if stop - start < MIN_PARTITION:
            warnings.warn(
                f"partition {pi} ({start}:{stop}) shorter than {MIN_PARTITION} rows, skipped",
                stacklevel=2,
            )
            return pi, None, None
        sub = returns.slice_rows(start, stop)
        fit = detect_change_point(sub, config.trim)
        acfg = AdaptiveConfig(
            trim=config.trim,
            alpha=config.adaptive.alpha,
            bandwidth=config.adaptive.bandwidth,
            max_lag=config.adaptive.max_lag,
            method=config.adaptive.method,
            psd_floor=config.adaptive.psd_floor,
            threads=1,
            base_seed=(config.seed or 0) * 100003 + pi,
        )
        res = adaptive_ci(sub, fit, config.level, config.ci_reps, acfg)
        global_break = start + fit.k_hat - 1
        lo = start + res.ci_index[0] - 1
        hi = start + res.ci_index[1] - 1
        last = returns.n - 1
        interval = {
            "partition": [int(start), int(stop)],
            "break_index": int(global_break),
            "break_date": labels[min(max(global_break, 0), last)],
            "tau_hat_local": fit.tau_hat,
            "level": config.level,
            "ci_index": [int(lo), int(hi)],
            "ci_dates": [
                labels[min(max(lo, 0), last)],
                labels[min(max(hi, 0), last)],
            ],
            "ci_fraction_local": list(res.ci_fraction),
        }
        means = [fit.mu1_hat.tolist(), fit.mu2_hat.tolist()]
        return pi, interval, means

    items = list(enumerate(parts))
    threads = max(1, int(config.threads))
    if threads == 1:
        results = [run_one(it) for it in items]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_one, items))
    results.sort(key=lambda r: r[0])
    intervals = [r[1] for r in results if r[1] is not None]
    seg_means = [r[2] for r in results if r[2] is not None]
    norm_candidates = []
    for c in cand_list:
        if isinstance(c, dict):
            norm_candidates.append(
                {"index": int(c["index"]), "date": c.get("date", labels[int(c["index"])]),
                 "count": int(c.get("count", 0))}
            )
        else:
            norm_candidates.append({"index": int(c), "date": labels[int(c)], "count": 0})
    return PipelineReport(
        candidates=norm_candidates,
        partitions=parts,
        intervals=intervals,
        segment_means=seg_means,
    )


def run_pipeline(prices: PanelData, config: RollingConfig) -> PipelineReport:
    """Full flow: returns, rolling candidates, partitions, intervals."""
    returns = log_returns(prices)
    candidates = rolling_detect(returns, config)
    return partition_and_ci(returns, candidates, config)

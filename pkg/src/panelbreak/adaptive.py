"""Adaptive (data-driven) confidence intervals for the break location.

The procedure re-runs the least-squares scan on surrogate panels built
from the fitted model: surrogate noise with the banded estimated
autocovariance structure is added to the fitted two-segment mean path,
and the scan is evaluated with the plug-in segment means held fixed.
Each surrogate draw yields a break-offset h; empirical quantiles of h
translate into an interval around tau_hat.
"""
from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .autocov import AutocovSet, autocov_sequence
from .errors import ConfigError
from .panel import ChangePointFit, PanelData, candidate_range
from .surrogate import SurrogateSpec, make_sampler

DEFAULT_REPLICATES = 1000


@dataclass
class AdaptiveConfig:
    """Knobs for the adaptive interval. Defaults follow the package-wide rules."""

    trim: float = 0.05
    alpha: float = 1.0
    bandwidth: int | None = None
    max_lag: int | None = None
    method: str = "auto"
    psd_floor: float = 0.0
    threads: int = 1
    base_seed: int | None = None


@dataclass
class IntervalResult:
    """Empirical break-offset quantiles and the induced interval."""

    level: float
    h_samples: np.ndarray
    q_lo: int
    q_hi: int
    ci_fraction: tuple
    ci_index: tuple
    replicates: int
    tau_hat: float
    n: int
    ci_dates: tuple | None = None

    def h_histogram(self):
        vals, counts = np.unique(self.h_samples, return_counts=True)
        return [[int(v), int(c)] for v, c in zip(vals, counts)]

    def to_json(self, indent=None):
        payload = {
            "tau_hat": self.tau_hat,
            "level": self.level,
            "R": int(self.replicates),
            "n": int(self.n),
            "q_lo": int(self.q_lo),
            "q_hi": int(self.q_hi),
            "ci_fraction": list(self.ci_fraction),
            "ci_index": [int(v) for v in self.ci_index],
            "h_histogram": self.h_histogram(),
        }
        if self.ci_dates is not None:
            payload["ci_dates"] = list(self.ci_dates)
        return json.dumps(payload, indent=indent)


def _offset_from_noise(noise, k_hat, mu1, mu2, k_lo, k_hi):
    """Break offset minimizing the fixed-mean criterion on one surrogate panel.

    The surrogate observation is b_t + noise_t with b_t the fitted
    two-segment mean path; the criterion at split s keeps mu1/mu2 fixed,
    so only two running sums are needed.  Exact criterion ties resolve
    to the smallest |h|, negative h first.
    """
    n = noise.shape[0]
    b = np.where(np.arange(n)[:, None] < k_hat, mu1, mu2)
    X = b + noise
    a1 = ((X - mu1) ** 2).sum(axis=1)
    a2 = ((X - mu2) ** 2).sum(axis=1)
    c1 = np.cumsum(a1)
    c2 = np.cumsum(a2)
    ks = np.arange(k_lo, k_hi + 1)
    crit = c1[ks - 1] + (c2[-1] - c2[ks - 1])
    best = crit.min()
    ties = np.flatnonzero(crit == best)
    hs = ks[ties] - k_hat
    order = np.lexsort((hs > 0, np.abs(hs)))
    return int(hs[order[0]])


def adaptive_h_draw(fit: ChangePointFit, autocovs: AutocovSet,
                    spec: SurrogateSpec | None = None, trim=0.05,
                    rng_seed=None, sampler=None):
    """One surrogate draw of the break offset h.

    Builds the surrogate sampler from `spec` (or a default spec over the
    fit's sample length) unless a prebuilt `sampler` is passed; repeated
    callers should prebuild to amortize the factorization.
    """
    if sampler is None:
        if spec is None:
            spec = SurrogateSpec(autocovs, fit.n)
        sampler = make_sampler(spec)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    noise = sampler.draw(rng)
    k_lo, k_hi = candidate_range(fit.n, trim)
    return _offset_from_noise(noise, fit.k_hat, fit.mu1_hat, fit.mu2_hat, k_lo, k_hi)


def nearest_rank(sorted_values, q):
    """Nearest-rank quantile: the ceil(q*R)-th smallest value."""
    R = len(sorted_values)
    rank = int(np.ceil(q * R))
    rank = min(max(rank, 1), R)
    return sorted_values[rank - 1]


def interval_from_h(h_samples, level, tau_hat, n, time_labels=None):
    """Quantiles of the offset sample, mapped to fraction/index/date intervals."""
    h_sorted = np.sort(np.asarray(h_samples))
    q_lo = int(nearest_rank(h_sorted, (1.0 - level) / 2.0))
    q_hi = int(nearest_rank(h_sorted, (1.0 + level) / 2.0))
    lo_frac = min(max(tau_hat + q_lo / n, 0.0), 1.0)
    hi_frac = min(max(tau_hat + q_hi / n, 0.0), 1.0)
    k_hat = int(round(tau_hat * n))
    lo_idx = k_hat + q_lo
    hi_idx = k_hat + q_hi
    dates = None
    if time_labels is not None:
        last = len(time_labels) - 1
        dates = (
            time_labels[min(max(lo_idx - 1, 0), last)],
            time_labels[min(max(hi_idx - 1, 0), last)],
        )
    return h_sorted, q_lo, q_hi, (lo_frac, hi_frac), (lo_idx, hi_idx), dates


def adaptive_ci(panel: PanelData, fit: ChangePointFit, level=0.95,
                R=DEFAULT_REPLICATES, config: AdaptiveConfig | None = None) -> IntervalResult:
    """Adaptive confidence interval for the break fraction.

    Runs R independent surrogate draws (replicate i uses seed
    base_seed XOR i, so any execution order gives the same sample set),
    takes nearest-rank quantiles of the offsets, and clamps the interval
    to [0, 1].  Replicates run on `config.threads` worker threads.
    """
    config = config or AdaptiveConfig()
    if R < 2:
        raise ConfigError("need at least 2 replicates")
    if R < 100:
        warnings.warn(f"R={R} replicates is small; quantiles will be noisy", stacklevel=2)
    if not 0.0 < level < 1.0:
        raise ConfigError("level must be in (0, 1)")
    autocovs = autocov_sequence(panel, fit, config.max_lag, config.bandwidth, config.alpha)
    spec = SurrogateSpec(autocovs, panel.n, config.method, config.psd_floor)
    sampler = make_sampler(spec)
    k_lo, k_hi = candidate_range(fit.n, config.trim)
    base = config.base_seed
    if base is None:
        base = int(np.random.default_rng().integers(0, 2 ** 62))

    def one(i):
        rng = np.random.default_rng(base ^ i)
        noise = sampler.draw(rng)
        return _offset_from_noise(noise, fit.k_hat, fit.mu1_hat, fit.mu2_hat, k_lo, k_hi)

    threads = max(1, int(config.threads))
    if threads == 1:
        hs = [one(i) for i in range(R)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hs = list(pool.map(one, range(R)))
    h_sorted, q_lo, q_hi, frac, idx, dates = interval_from_h(
        hs, level, fit.tau_hat, panel.n, panel.time_labels
    )
    return IntervalResult(
        level=level, h_samples=h_sorted, q_lo=q_lo, q_hi=q_hi,
        ci_fraction=frac, ci_index=idx, replicates=R,
        tau_hat=fit.tau_hat, n=panel.n, ci_dates=dates,
    )

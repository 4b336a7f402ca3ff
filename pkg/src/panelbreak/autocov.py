"""Break-adjusted sample autocovariances and banding.

The estimators center each observation at the fitted segment mean (the
left-segment mean before the estimated break, the right-segment mean
after) and use the full-sample divisor n at every lag.  Cross-sectional
regularization is entrywise banding: entries more than l positions off
the diagonal are zeroed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ConfigError
from .panel import ChangePointFit, PanelData

DEFAULT_DECAY_RATE = 1.0


def band(M, l):
    """Keep entries with |i-j| <= l, zero the rest."""
    if l < 0:
        raise ConfigError("band width must be >= 0")
    M = np.asarray(M, dtype=float)
    idx = np.arange(M.shape[0])
    mask = np.abs(idx[:, None] - idx[None, :]) <= l
    return np.where(mask, M, 0.0)


def default_bandwidth(n, p, alpha=DEFAULT_DECAY_RATE):
    """Bandwidth ceil((n / log p)^(1 / (2*(alpha+1)))), clamped to [1, p-1].

    alpha is the assumed polynomial decay rate of cross-sectional
    dependence; larger alpha means faster decay and a narrower band.
    """
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    if n < 2 or p < 2:
        raise ConfigError("default_bandwidth needs n >= 2 and p >= 2")
    raw = (n / np.log(p)) ** (1.0 / (2.0 * (alpha + 1.0)))
    return int(np.clip(np.ceil(raw), 1, p - 1))


def default_max_lag(n):
    """Number of lags kept in the autocovariance sequence."""
    return min(n - 1, int(np.ceil(10.0 * n ** (1.0 / 3.0))))


def _centered(panel: PanelData, fit: ChangePointFit):
    n = panel.n
    b_hat = np.where(np.arange(n)[:, None] < fit.k_hat, fit.mu1_hat, fit.mu2_hat)
    return panel.values - b_hat


def sample_autocov(panel: PanelData, fit: ChangePointFit, u):
    """Sample autocovariance at lag u, centered at the fitted segment means.

    Gamma_hat_u[i, j] = (1/n) sum_{t=1..n-u} ztilde_{t,i} ztilde_{t+u,j}
    with ztilde the segment-mean-centered panel.  The divisor is n at
    every lag, which keeps the lag-indexed sequence positive-definite
    friendly.
    """
    u = int(u)
    n = panel.n
    if not 0 <= u <= n - 1:
        raise ConfigError(f"lag {u} out of range [0, {n - 1}]")
    Z = _centered(panel, fit)
    return (Z[: n - u].T @ Z[u:]) / n


@dataclass
class AutocovSet:
    """Banded autocovariance sequence: gammas[u] is B_l(Gamma_hat_u)."""

    gammas: np.ndarray  # (L+1, p, p)
    bandwidth: int
    max_lag: int
    n_used: int

    def __post_init__(self):
        self.gammas = np.asarray(self.gammas, dtype=float)
        if self.gammas.ndim != 3 or self.gammas.shape[1] != self.gammas.shape[2]:
            raise ConfigError("gammas must be a (L+1, p, p) array")
        if self.gammas.shape[0] != self.max_lag + 1:
            raise ConfigError("gammas length must equal max_lag + 1")

    @property
    def p(self):
        return self.gammas.shape[1]

    def save(self, path):
        np.savez(
            path,
            gammas=self.gammas,
            bandwidth=self.bandwidth,
            max_lag=self.max_lag,
            n_used=self.n_used,
        )

    @classmethod
    def load(cls, path):
        with np.load(path) as z:
            return cls(
                gammas=z["gammas"],
                bandwidth=int(z["bandwidth"]),
                max_lag=int(z["max_lag"]),
                n_used=int(z["n_used"]),
            )

    def to_csv(self, target):
        """Long-format dump: one row per (lag, i, j, value)."""
        L1, p, _ = self.gammas.shape
        lag, i, j = np.meshgrid(np.arange(L1), np.arange(p), np.arange(p), indexing="ij")
        df = pd.DataFrame(
            {
                "lag": lag.ravel(),
                "i": i.ravel(),
                "j": j.ravel(),
                "value": self.gammas.ravel(),
            }
        )
        df.to_csv(target, index=False, lineterminator="\n")


def autocov_sequence(panel: PanelData, fit: ChangePointFit, max_lag=None,
                     bandwidth=None, alpha=DEFAULT_DECAY_RATE) -> AutocovSet:
    """Banded sample autocovariances for lags 0..max_lag.

    max_lag defaults to min(n-1, ceil(10 n^(1/3))); bandwidth defaults to
    default_bandwidth(n, p, alpha).  Lags beyond max_lag are treated as
    zero downstream.
    """
    n, p = panel.n, panel.p
    if max_lag is None:
        max_lag = default_max_lag(n)
    max_lag = int(max_lag)
    if max_lag > n - 1:
        raise ConfigError(f"max_lag {max_lag} exceeds n-1 = {n - 1}")
    if bandwidth is None:
        bandwidth = default_bandwidth(n, p, alpha) if p >= 2 else 0
    bandwidth = int(bandwidth)
    Z = _centered(panel, fit)
    idx = np.arange(p)
    mask = (np.abs(idx[:, None] - idx[None, :]) <= bandwidth).astype(float)
    gammas = np.empty((max_lag + 1, p, p))
    for u in range(max_lag + 1):
        gammas[u] = (Z[: n - u].T @ Z[u:]) / n * mask
    return AutocovSet(gammas=gammas, bandwidth=bandwidth, max_lag=max_lag, n_used=n)

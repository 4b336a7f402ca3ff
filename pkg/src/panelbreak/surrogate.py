"""Gaussian surrogate panels matching a banded autocovariance sequence.

Two sampling routes realize a mean-zero stationary Gaussian panel whose
autocovariances equal the banded estimates at lags 0..L:

* exact-cholesky: factor the full (n*p) x (n*p) block-Toeplitz
  covariance once and multiply standard normal vectors through it.
  Exact, but quadratic memory; only sensible for n*p up to a few
  thousand.
* circulant-embedding: embed the block-Toeplitz sequence in a
  block-circulant one of power-of-two length, factor each p x p
  frequency block, and synthesize draws with FFTs.  Linear memory,
  near-linear time, exact in expectation at lags 0..L up to the PSD
  projection of indefinite frequency blocks.

The "auto" method picks exact-cholesky when n*p <= 4096 and the
embedding otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autocov import AutocovSet
from .errors import ConfigError, NumericError

EXACT_LIMIT = 4096
METHODS = ("exact-cholesky", "circulant-embedding", "auto")


@dataclass
class SurrogateSpec:
    """What to sample: autocovariance targets, panel length, and method."""

    autocovs: AutocovSet
    n: int
    method: str = "auto"
    psd_floor: float = 0.0
    max_bytes: int = 1 << 30

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.psd_floor < 0:
            raise ConfigError("psd_floor must be >= 0")
        if self.n < 1:
            raise ConfigError("n must be positive")

    def resolved_method(self):
        if self.method != "auto":
            return self.method
        if self.n * self.autocovs.p <= EXACT_LIMIT:
            return "exact-cholesky"
        return "circulant-embedding"


def build_block_toeplitz(spec: SurrogateSpec):
    """Dense (n*p) x (n*p) covariance with block (i, j) = Gamma_hat_{i-j}.

    Blocks above the diagonal hold Gamma_hat_{j-i} transposed; blocks with
    |i-j| beyond the stored max lag are zero.  The coordinate order is
    time-major: entry (t*p + a, s*p + b) covaries series a at time t with
    series b at time s.
    """
    acv = spec.autocovs
    n, p, L = spec.n, acv.p, acv.max_lag
    need = 8 * (n * p) ** 2
    if need > spec.max_bytes:
        raise ConfigError(
            f"block-Toeplitz of size {n * p} x {n * p} needs {need} bytes, "
            f"over the {spec.max_bytes} byte guard"
        )
    sigma = np.zeros((n * p, n * p))
    for t in range(n):
        for s in range(t, min(n, t + L + 1)):
            block = acv.gammas[s - t]
            sigma[t * p:(t + 1) * p, s * p:(s + 1) * p] = block
            if s != t:
                sigma[s * p:(s + 1) * p, t * p:(t + 1) * p] = block.T
    return sigma


def psd_project(M, floor=0.0):
    """Clamp the eigenvalues of a symmetric matrix at `floor`.

    Returns the input object unchanged when it is already positive
    semidefinite with the required margin, so callers can rely on
    no-copy behavior in the common case.
    """
    M = np.asarray(M, dtype=float)
    scale = np.abs(M).max() if M.size else 0.0
    if not np.allclose(M, M.T, rtol=0, atol=1e-8 * max(scale, 1.0)):
        raise ConfigError("psd_project requires a symmetric matrix")
    if floor == 0.0:
        # cheap sufficient check: a successful Cholesky proves PSD
        try:
            np.linalg.cholesky(M)
            return M
        except np.linalg.LinAlgError:
            pass
    w, V = np.linalg.eigh((M + M.T) / 2.0)
    if w.min() >= floor:
        return M
    w = np.maximum(w, floor)
    out = (V * w) @ V.T
    return (out + out.T) / 2.0


def _factor_psd(sigma, label):
    """Lower-triangular-ish factor C with C C^T = sigma, for PSD sigma.

    Cholesky when sigma is definite; an eigenvalue factor when it is
    merely semidefinite (for instance an all-zero covariance).
    """
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh((sigma + sigma.T) / 2.0)
        if w.min() < -1e-8 * max(abs(w).max(), 1.0):
            raise NumericError(
                f"{label}: covariance not PSD after projection "
                f"(min eigenvalue {w.min():.3e})"
            ) from None
        return V * np.sqrt(np.clip(w, 0.0, None))


class ExactSampler:
    """Draws through a cached factor of the projected block-Toeplitz matrix."""

    def __init__(self, spec: SurrogateSpec):
        self.n, self.p = spec.n, spec.autocovs.p
        sigma = psd_project(build_block_toeplitz(spec), spec.psd_floor)
        self._C = _factor_psd(sigma, "exact surrogate")

    def draw(self, rng):
        z = rng.standard_normal(self.n * self.p)
        return (self._C @ z).reshape(self.n, self.p)


class CirculantSampler:
    """Draws through cached per-frequency factors of the circulant embedding."""

    def __init__(self, spec: SurrogateSpec):
        acv = spec.autocovs
        n, p, L = spec.n, acv.p, acv.max_lag
        m = 1
        while m < max(2 * n, 2 * (L + 1)):
            m *= 2
        # blocks[u] holds Cov(X_t, X_{t-u}); with numpy's negative-sign
        # forward FFT this orientation makes the synthesized field satisfy
        # Cov(X_t, X_{t+u}) = gammas[u], matching the exact route.
        blocks = np.zeros((m, p, p))
        blocks[0] = acv.gammas[0]
        for u in range(1, L + 1):
            blocks[u] = acv.gammas[u].T
            blocks[m - u] = acv.gammas[u]
        freq = np.fft.fft(blocks, axis=0)
        # each frequency block is Hermitian because the block sequence
        # satisfies c_{m-u} = c_u^T; symmetrize away roundoff before
        # the eigendecomposition
        freq = 0.5 * (freq + np.conj(np.transpose(freq, (0, 2, 1))))
        w, V = np.linalg.eigh(freq)
        w = np.clip(w, spec.psd_floor, None)
        self._G = V * np.sqrt(w)[:, None, :]
        self.m, self.n, self.p = m, n, p

    def draw(self, rng):
        m, p = self.m, self.p
        z = rng.standard_normal((2, m, p))
        W = (z[0] + 1j * z[1]) / np.sqrt(2.0)
        Y = np.einsum("mij,mj->mi", self._G, W)
        x = np.fft.ifft(Y, axis=0) * np.sqrt(m)
        # real and imaginary parts are independent draws with half the
        # target covariance each; rescale the real part
        return np.sqrt(2.0) * x[: self.n].real


def make_sampler(spec: SurrogateSpec):
    """Factor once, draw many times: returns an object with .draw(rng)."""
    if spec.resolved_method() == "exact-cholesky":
        return ExactSampler(spec)
    return CirculantSampler(spec)


def sample_exact(spec: SurrogateSpec, rng_seed=None):
    """One exact-route draw: an (n, p) mean-zero Gaussian panel array."""
    forced = SurrogateSpec(spec.autocovs, spec.n, "exact-cholesky",
                           spec.psd_floor, spec.max_bytes)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return ExactSampler(forced).draw(rng)


def sample_circulant(spec: SurrogateSpec, rng_seed=None):
    """One embedding-route draw: an (n, p) mean-zero Gaussian panel array."""
    forced = SurrogateSpec(spec.autocovs, spec.n, "circulant-embedding",
                           spec.psd_floor, spec.max_bytes)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return CirculantSampler(forced).draw(rng)

"""Samplers for the limiting break-offset distributions, plus model diagnostics.

Two sampling regimes cover the vanishing-shift asymptotics:

* regime b (shift -> 0, local scale diverges): the rescaled offset
  maximizes -0.5|h| + B*_h where B* is a mean-zero Gaussian process
  whose covariance aggregates the model autocovariances over signed
  index windows.  Sampled on a finite grid via one Cholesky factor of
  the grid Gram matrix.
* regime c (shift -> 0 at the integer-local scale): the offset is an
  integer maximizing a two-sided random walk with triangular drift,
  built from a Gaussian component W* and a quadratic functional A* of
  finitely many non-negligible series.

The diagnostics block computes the dependence norms (sums of spectral /
column-sum norms of the moving-average coefficients) and the
signal-to-noise functionals used to classify a configuration.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError
from .models import MaModel
from .surrogate import psd_project

POWER_TOL = 1e-8


def power_iter_norm(A, tol=POWER_TOL, max_iter=10000):
    """Spectral norm of A by power iteration on A^T A."""
    A = np.asarray(A, dtype=float)
    if not np.any(A):
        return 0.0
    M = A.T @ A
    p = M.shape[0]
    v = np.ones(p) + 1e-3 * np.arange(p)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    for _ in range(max_iter):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam = float(v @ M @ v)
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            return float(np.sqrt(lam))
        lam_prev = lam
    return float(np.sqrt(lam_prev))


def model_gamma_p(model: MaModel):
    """Sum of spectral norms of the coefficient matrices (cached on the model)."""
    if "_gamma_p" not in model.extras:
        model.extras["_gamma_p"] = float(
            sum(power_iter_norm(A) for A in model.coefficients)
        )
    return model.extras["_gamma_p"]


@dataclass
class MaModelDiagnostics:
    gamma_p: float
    beta_p: float
    gamma_tilde_p: float
    F1n: float
    F2n: float
    s: float


def model_diagnostics(model: MaModel, mu1, mu2, n) -> MaModelDiagnostics:
    """Dependence norms and signal functionals for a model + mean configuration.

    gamma_p sums spectral norms of the coefficients, beta_p sums their
    maximum column absolute sums, gamma_tilde_p is the diagonal-case
    variant (max over series of the summed absolute diagonal entries).
    F1n and F2n are the aggregate-signal functionals; F2n uses the p^3
    denominator for the "2b" family whose dependence norm grows with p.
    s = gamma_p^-2 * ||mu1 - mu2||^2 is the signal-to-noise summary.
    """
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    d = mu1 - mu2
    p = model.p
    A = model.coefficients
    gamma_p = model_gamma_p(model)
    beta_p = float(sum(np.abs(Aj).sum(axis=0).max() for Aj in A))
    diags = np.abs(np.diagonal(A, axis1=1, axis2=2))
    gamma_tilde_p = float(diags.sum(axis=0).max())
    F1n = float(np.sqrt(n) / (p * np.log(n)) * np.abs(d).sum())
    denom = p ** 3 if (model.kind == "ma_poly" and model.variant == "b") else p
    F2n = float(n / denom * (d ** 2).sum())
    s = float((d ** 2).sum() / gamma_p ** 2) if gamma_p > 0 else np.inf
    return MaModelDiagnostics(gamma_p, beta_p, gamma_tilde_p, F1n, F2n, s)


def scalar_autocovs(model: MaModel, d, rel_tol=1e-15):
    """r(u) = d' Gamma_u d for u = 0..U, truncated where negligible."""
    d = np.asarray(d, dtype=float)
    c = np.einsum("jab,a->jb", model.coefficients, d)
    J = c.shape[0] - 1
    r = np.empty(J + 1)
    for u in range(J + 1):
        r[u] = float(np.einsum("jb,jb->", c[: J + 1 - u], c[u:]))
    floor = rel_tol * max(abs(r[0]), 1e-300)
    nz = np.flatnonzero(np.abs(r) > floor)
    U = int(nz.max()) if nz.size else 0
    return r[: U + 1]


def _window(m):
    """Signed index window for a window count m: {1..m} or {m+1..0}."""
    return (min(m, 0) + 1, max(m, 0))


def sigma_cov(model: MaModel, mu_diff, h1, h2):
    """Limit covariance of the regime-b process between offsets h1 and h2.

    Equals gamma_p^-4 * sum over (t1, t2) in the two signed windows of
    d' Gamma_{t2-t1} d, with window counts floor(nu * h_i) at the local
    scale nu = gamma_p^2 / ||d||^2.  Zero whenever either window is
    empty (h of either sign rounding to a zero count).
    """
    d = np.asarray(mu_diff, dtype=float)
    gp = model_gamma_p(model)
    delta_sq = float((d ** 2).sum())
    if delta_sq == 0.0:
        return 0.0
    nu = gp ** 2 / delta_sq
    m1 = int(np.floor(nu * h1))
    m2 = int(np.floor(nu * h2))
    lo1, hi1 = _window(m1)
    lo2, hi2 = _window(m2)
    if lo1 > hi1 or lo2 > hi2:
        return 0.0
    r = scalar_autocovs(model, d)
    U = len(r) - 1
    total = 0.0
    # t2 - t1 = u contributes r(u) once per aligned index pair
    for u in range(max(lo2 - hi1, -U), min(hi2 - lo1, U) + 1):
        lo = max(lo1, lo2 - u)
        hi = min(hi1, hi2 - u)
        if hi >= lo:
            total += r[abs(u)] * (hi - lo + 1)
    return total / gp ** 4


def make_regime_b_cov(model: MaModel, mu_diff):
    """Vectorized regime-b covariance function for a model + shift vector.

    Uses partial-sum variances of the scalar projected noise: with
    V(m) = Var(sum of m consecutive values), nested same-sign windows
    have covariance (V(a1)+V(a2)-V(|a1-a2|))/2 and adjacent
    opposite-sign windows (V(a1+a2)-V(a1)-V(a2))/2.  Agrees with
    sigma_cov exactly; suitable for building large grid Gram matrices.
    """
    d = np.asarray(mu_diff, dtype=float)
    gp = model_gamma_p(model)
    delta_sq = float((d ** 2).sum())
    if delta_sq == 0.0:
        raise ConfigError("mu_diff must be nonzero")
    nu = gp ** 2 / delta_sq
    r = scalar_autocovs(model, d)
    U = len(r) - 1
    cache = {"V": np.zeros(1)}

    def ensure(mmax):
        V = cache["V"]
        if len(V) > mmax:
            return V
        old = len(V)
        V = np.concatenate([V, np.empty(mmax + 1 - old)])
        for m in range(old, mmax + 1):
            # V(m) - V(m-1) = sum of r(u) over |u| <= m-1
            top = min(m - 1, U)
            inc = r[0] + 2.0 * r[1: top + 1].sum() if m >= 1 else 0.0
            V[m] = V[m - 1] + inc
        cache["V"] = V
        return V

    def cov(h1, h2):
        h1 = np.asarray(h1, dtype=float)
        h2 = np.asarray(h2, dtype=float)
        m1 = np.floor(nu * h1).astype(np.int64)
        m2 = np.floor(nu * h2).astype(np.int64)
        a1 = np.abs(m1)
        a2 = np.abs(m2)
        V = ensure(int(max(np.max(a1 + a2, initial=0), 1)))
        same = (np.sign(m1) == np.sign(m2)) & (m1 != 0) & (m2 != 0)
        opp = (np.sign(m1) != np.sign(m2)) & (m1 != 0) & (m2 != 0)
        out = np.zeros(np.broadcast(m1, m2).shape)
        a1b, a2b = np.broadcast_arrays(a1, a2)
        if np.any(same):
            i1, i2 = a1b[same], a2b[same]
            out[same] = 0.5 * (V[i1] + V[i2] - V[np.abs(i1 - i2)])
        if np.any(opp):
            i1, i2 = a1b[opp], a2b[opp]
            out[opp] = 0.5 * (V[i1 + i2] - V[i1] - V[i2])
        return out / gp ** 4

    return cov


def brownian_cov(sigma_sq):
    """Covariance of a two-sided Brownian motion with variance rate sigma_sq."""

    def cov(h1, h2):
        h1 = np.asarray(h1, dtype=float)
        h2 = np.asarray(h2, dtype=float)
        same = np.sign(h1) == np.sign(h2)
        return np.where(same, sigma_sq * np.minimum(np.abs(h1), np.abs(h2)), 0.0)

    return cov


@dataclass
class RegimeBSpec:
    """Grid and covariance for the continuous-offset limit sampler."""

    cov_fn: object
    delta: float = 0.01
    half_width: float = 50.0

    def grid(self):
        if self.delta <= 0 or self.half_width <= 0:
            raise ConfigError("delta and half_width must be positive")
        K = int(round(self.half_width / self.delta))
        return self.delta * np.arange(-K, K + 1)


def _eval_cov_grid(cov_fn, grid, row_chunk=2048):
    G = len(grid)
    gram = np.empty((G, G))
    try:
        for i0 in range(0, G, row_chunk):
            i1 = min(G, i0 + row_chunk)
            gram[i0:i1] = cov_fn(grid[i0:i1, None], grid[None, :])
    except (TypeError, ValueError):
        f = np.vectorize(lambda a, b: float(cov_fn(a, b)))
        for i0 in range(0, G, row_chunk):
            i1 = min(G, i0 + row_chunk)
            gram[i0:i1] = f(grid[i0:i1, None], grid[None, :])
    return (gram + gram.T) / 2.0


def _factor_gram(gram):
    """Cholesky with a jitter retry, then a full eigenvalue projection."""
    try:
        return np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        pass
    eps = 1e-12 * max(float(np.max(np.diag(gram))), 1.0)
    try:
        return np.linalg.cholesky(gram + eps * np.eye(gram.shape[0]))
    except np.linalg.LinAlgError:
        pass
    projected = psd_project(gram, 0.0)
    try:
        return np.linalg.cholesky(projected + eps * np.eye(gram.shape[0]))
    except np.linalg.LinAlgError as exc:
        w = np.linalg.eigvalsh(gram)
        raise NumericError(
            f"grid Gram matrix not PSD beyond repair (min eigenvalue {w.min():.3e})"
        ) from exc


def _tie_argmax(values, offsets):
    """Argmax column per row with ties resolved to smallest |offset|, negative first.

    `values` is (reps, G) and is consumed in tie-preference order, so the
    first maximum along the reordered axis is the wanted offset.
    """
    perm = np.lexsort((offsets > 0, np.abs(offsets)))
    idx = np.argmax(values[:, perm], axis=1)
    return offsets[perm[idx]]


def sample_regime_b(spec: RegimeBSpec, reps, rng=None, chunk=1024):
    """Sample argmax_h(-0.5|h| + B*_h) over the spec grid.

    Output is in drift units; divide by n * gamma_p^-2 * ||mu1 - mu2||^2
    (see `to_tau_units`) to convert to break-fraction units.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    grid = spec.grid()
    gram = _eval_cov_grid(spec.cov_fn, grid)
    if np.any(gram):
        C = _factor_gram(gram)
    else:
        C = None  # degenerate: pure drift
    drift = -0.5 * np.abs(grid)
    out = np.empty(int(reps))
    done = 0
    while done < reps:
        b = min(chunk, int(reps) - done)
        if C is None:
            vals = np.broadcast_to(drift, (b, len(grid))).copy()
        else:
            vals = rng.standard_normal((b, len(grid))) @ C.T + drift
        out[done:done + b] = _tie_argmax(vals, grid)
        done += b
    return out


def to_tau_units(h_values, n, gamma_p, delta_sq):
    """Convert drift-unit offsets to break-fraction units."""
    return np.asarray(h_values, dtype=float) / (n * delta_sq / gamma_p ** 2)


@dataclass
class RegimeCSpec:
    """Integer-offset limit: drift constant, Gaussian kernels, local series.

    w_cov(t1, t2) is the covariance of the walk component W*;
    cross_cov(k, t1, t2) = Cov(X*_k(t1), W*(t2)); x_cov(k1, k2, t1, t2)
    covers the local series.  k0 lists the non-negligible series, with
    per-series limit means mu1_star / mu2_star; the mean path of X*_k
    is mu1_star[k] for t <= 0 and mu2_star[k] after.
    """

    c1: float
    w_cov: object
    cross_cov: object = None
    x_cov: object = None
    k0: list = field(default_factory=list)
    mu1_star: np.ndarray = None
    mu2_star: np.ndarray = None
    tau_star: float = 0.5
    horizon: int = 200

    def __post_init__(self):
        if self.c1 < 0:
            raise ConfigError("c1 must be >= 0")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.k0:
            if self.x_cov is None or self.mu1_star is None or self.mu2_star is None:
                raise ConfigError("k0 requires x_cov, mu1_star, and mu2_star")
            self.mu1_star = np.asarray(self.mu1_star, dtype=float)
            self.mu2_star = np.asarray(self.mu2_star, dtype=float)
            if len(self.mu1_star) != len(self.k0) or len(self.mu2_star) != len(self.k0):
                raise ConfigError("mu*_star lengths must match k0")


def _kernel_matrix(fn, t, extra=None):
    t = np.asarray(t, dtype=float)
    try:
        if extra is None:
            M = fn(t[:, None], t[None, :])
        else:
            M = fn(*extra, t[:, None], t[None, :])
        return np.asarray(M, dtype=float)
    except (TypeError, ValueError):
        if extra is None:
            f = np.vectorize(lambda a, b: float(fn(a, b)))
        else:
            f = np.vectorize(lambda a, b: float(fn(*extra, a, b)))
        return f(t[:, None], t[None, :])


_GUARD_PROBE_SEED = 140279


def sample_regime_c(spec: RegimeCSpec, reps, rng=None, chunk=2048):
    """Sample the integer argmax of -0.5*c1*|h| + sum_{t in [0^h]} (W*_t + A*_t).

    The sum runs over t between 0 and h inclusive.  Ties resolve to the
    smallest |h|, negative first.  Raises ConfigError when the drift
    does not dominate the process scale at the horizon (the argmax would
    then be censored by the grid).
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    H = int(spec.horizon)
    t = np.arange(-H, H + 1)
    T = len(t)
    q = len(spec.k0)
    WW = _kernel_matrix(spec.w_cov, t)
    dim = T * (1 + q)
    cov = np.zeros((dim, dim))
    cov[:T, :T] = WW
    for a, k in enumerate(spec.k0):
        base = T * (1 + a)
        cov[base:base + T, base:base + T] = _kernel_matrix(spec.x_cov, t, extra=(k, k))
        if spec.cross_cov is not None:
            CX = _kernel_matrix(spec.cross_cov, t, extra=(k,))
            cov[base:base + T, :T] = CX
            cov[:T, base:base + T] = CX.T
        for b_, k2 in enumerate(spec.k0[:a]):
            other = T * (1 + b_)
            XX = _kernel_matrix(spec.x_cov, t, extra=(k, k2))
            cov[base:base + T, other:other + T] = XX
            cov[other:other + T, base:base + T] = XX.T
    C = _factor_gram(cov)

    means = None
    if q:
        means = np.where(t[None, :] <= 0, spec.mu1_star[:, None], spec.mu2_star[:, None])

    def summed_path(y):
        """Cumulative sums of y (reps, T) from t=0 outward, t=0 included everywhere."""
        vals = np.empty_like(y)
        vals[:, H:] = np.cumsum(y[:, H:], axis=1)
        vals[:, :H + 1] = np.cumsum(y[:, H::-1], axis=1)[:, ::-1]
        return vals

    def draws_to_vals(Z):
        paths = Z @ C.T
        W = paths[:, :T]
        y = W
        if q:
            X = paths[:, T:].reshape(-1, q, T) + means[None, :, :]
            A = 0.5 * (
                ((X - spec.mu2_star[None, :, None]) ** 2)
                - ((X - spec.mu1_star[None, :, None]) ** 2)
            ).sum(axis=1)
            y = W + A
        return summed_path(y) - 0.5 * spec.c1 * np.abs(t)[None, :]

    # horizon guard: the drift at +-H must dominate the process spread there
    var_w = float(WW[H:, H:].sum())
    var_a = 0.0
    if q:
        probe = np.random.default_rng(_GUARD_PROBE_SEED).standard_normal((128, dim))
        vals = draws_to_vals(probe) + 0.5 * spec.c1 * np.abs(t)[None, :]
        var_a = max(float(vals[:, -1].var()) - 0.0, 0.0)
        spread = np.sqrt(max(var_a, var_w))
    else:
        spread = np.sqrt(var_w)
    if spec.c1 * H <= 10.0 * spread:
        raise ConfigError(
            f"horizon guard violated: c1*H = {spec.c1 * H:.3g} must exceed "
            f"10 * process spread at H = {10.0 * spread:.3g}; increase horizon or c1"
        )

    out = np.empty(int(reps), dtype=int)
    done = 0
    while done < reps:
        b = min(chunk, int(reps) - done)
        vals = draws_to_vals(rng.standard_normal((b, dim)))
        out[done:done + b] = _tie_argmax(vals, t).astype(int)
        done += b
    return out

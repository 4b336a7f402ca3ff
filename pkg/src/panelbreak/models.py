"""Synthetic panel generators: moving-average error models plus mean presets.

Two stock error models are provided.  Model "arma11" is a multivariate
ARMA(1,1), eps_t = B1 eps_{t-1} + eta_t + B2 eta_{t-1} with banded-decay
coefficient matrices.  Model "ma_poly" is a long moving average
eps_t = sum_{j=0..J} a_j B3 eta_{t-j} with polynomially decaying weights
a_j = (j+1)^-2 (the j=0 term of a 1/j^2 recipe is ill-defined, so the
shifted form is used; see README).  Innovations are standard normal or a
centered heavy-tailed inverse-Beta law.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError
from .panel import PanelData

MA_POLY_ORDER = 1000


def decay_matrix(rho, p, scale=1.0):
    """Entrywise scale * rho^|i-j|, the cross-sectional decay template."""
    idx = np.arange(p)
    return scale * rho ** np.abs(idx[:, None] - idx[None, :])


@dataclass(eq=False)
class MeanConfig:
    """Piecewise-constant mean path: mu1 before the break at round(n*tau), mu2 after."""

    mu1: np.ndarray
    mu2: np.ndarray
    tau: float = 0.5

    def __post_init__(self):
        self.mu1 = np.atleast_1d(np.asarray(self.mu1, dtype=float))
        self.mu2 = np.atleast_1d(np.asarray(self.mu2, dtype=float))
        if self.mu1.shape != self.mu2.shape:
            raise ConfigError("mu1 and mu2 must have the same length")
        if not 0 < self.tau < 1:
            raise ConfigError("tau must be in (0, 1)")

    def apply(self, noise):
        n = noise.shape[0]
        k0 = int(round(n * self.tau))
        out = noise.copy()
        out[:k0] += self.mu1
        out[k0:] += self.mu2
        return out


def mean_config_presets(table_id, n, p, model="1") -> MeanConfig:
    """Named break-size presets used throughout the simulation studies.

    T1: mu2_k = 1/k (decaying, low aggregate signal).
    T2/T3: mu2_k = p / n^(1/4) (strong, dimension-scaled).
    T6/T8: mu2_k = n^(-3/8), times p for model "2b".
    T7/T9: mu2_k = n^(-1/4), times p for model "2b".
    mu1 = 0 and tau = 0.5 in all presets.
    """
    table_id = str(table_id).upper()
    k = np.arange(1, p + 1, dtype=float)
    scale_p = p if str(model) == "2b" else 1.0
    if table_id == "T1":
        mu2 = 1.0 / k
    elif table_id in ("T2", "T3"):
        mu2 = np.full(p, p / n ** 0.25)
    elif table_id in ("T6", "T8"):
        mu2 = np.full(p, scale_p * n ** -0.375)
    elif table_id in ("T7", "T9"):
        mu2 = np.full(p, scale_p * n ** -0.25)
    else:
        raise ConfigError(f"unknown mean preset {table_id!r}")
    return MeanConfig(mu1=np.zeros(p), mu2=mu2)


def draw_innovation(law, shape, seed=None):
    """I.i.d. innovation draws.

    "gaussian" is N(0,1).  "centered_inv_beta" is 1/X - 4/3 with
    X ~ Beta(4,1); E[1/X] = 4/3 so the law is centered, with variance
    E[X^-2] - (4/3)^2 = 2 - 16/9 = 2/9.  No re-standardization is
    applied.  "zero" is a degenerate hook for noiseless test paths.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if law == "gaussian":
        return rng.standard_normal(shape)
    if law == "centered_inv_beta":
        return 1.0 / rng.beta(4.0, 1.0, shape) - 4.0 / 3.0
    if law == "zero":
        return np.zeros(shape)
    raise ConfigError(f"unknown innovation law {law!r}")


@dataclass(eq=False)
class MaModel:
    """A (truncated) moving-average error model eps_t = sum_j A_j eta_{t-j}.

    coeff_fn maps the lag j to the p x p coefficient matrix A_j; lags
    beyond `truncation` are treated as zero.  `variant` tags the stock
    families ("a"/"b" for ma_poly) where downstream scaling differs.
    """

    kind: str
    p: int
    coeff_fn: object
    truncation: int
    innovation: str = "gaussian"
    variant: str | None = None
    extras: dict = field(default_factory=dict)

    @cached_property
    def coefficients(self):
        """Stacked (J+1, p, p) array of coefficient matrices."""
        return np.stack([np.asarray(self.coeff_fn(j), dtype=float) for j in range(self.truncation + 1)])

    def gamma(self, u):
        """Analytic autocovariance at lag u >= 0: Gamma_u[i,j] = E[eps_{t,i} eps_{t+u,j}]."""
        u = int(abs(u))
        A = self.coefficients
        if u > self.truncation:
            return np.zeros((self.p, self.p))
        if u == 0:
            return np.einsum("jab,jcb->ac", A, A)
        return np.einsum("jab,jcb->ac", A[:-u], A[u:])


def arma11_model(p, b1_scale=0.25, b1_decay=0.3, b2_decay=0.5, truncation=80) -> MaModel:
    """The stock ARMA(1,1) error model with banded-decay coefficients.

    B1 = b1_scale * (b1_decay^|i-j|), B2 = (b2_decay^|i-j|).  The AR part
    must be causal: spectral norm of B1 below 1 (checked here).  The
    moving-average representation has A_0 = I and
    A_j = B1^(j-1) (B1 + B2) for j >= 1.
    """
    B1 = decay_matrix(b1_decay, p, b1_scale)
    B2 = decay_matrix(b2_decay, p)
    if np.linalg.norm(B1, 2) >= 1.0:
        raise ConfigError("ARMA(1,1) coefficient B1 has spectral norm >= 1 (non-causal)")
    B1B2 = B1 + B2
    powers = {0: np.eye(p)}

    def coeff(j):
        if j == 0:
            return np.eye(p)
        jj = j - 1
        if jj not in powers:
            prev = max(k for k in powers if k <= jj)
            M = powers[prev]
            for _ in range(jj - prev):
                M = M @ B1
            powers[jj] = M
        return powers[jj] @ B1B2

    return MaModel(
        kind="arma11", p=p, coeff_fn=coeff, truncation=truncation,
        extras={"B1": B1, "B2": B2},
    )


def ma_poly_model(p, variant, order=MA_POLY_ORDER) -> MaModel:
    """Long moving average with a_j = (j+1)^-2 and a common mixing matrix.

    variant "a": B3 = (0.5^|i-j|); variant "b": B3 = 0.5 I + 0.5 J
    (J the all-ones matrix), whose spectral norm grows linearly in p.
    """
    if variant not in ("a", "b"):
        raise ConfigError(f"ma_poly variant must be 'a' or 'b', got {variant!r}")
    if variant == "a":
        B3 = decay_matrix(0.5, p)
    else:
        B3 = 0.5 * np.eye(p) + 0.5 * np.ones((p, p))
    a = poly_weights(order)

    def coeff(j):
        return a[j] * B3

    return MaModel(
        kind="ma_poly", p=p, coeff_fn=coeff, truncation=order, variant=variant,
        extras={"B3": B3, "weights": a},
    )


def iid_model(p) -> MaModel:
    """Degenerate white-noise model: A_0 = I, nothing else."""
    return MaModel(kind="custom", p=p, coeff_fn=lambda j: np.eye(p), truncation=0)


def custom_model(coeffs) -> MaModel:
    """Model from an explicit list of coefficient matrices [A_0, A_1, ...]."""
    coeffs = [np.asarray(A, dtype=float) for A in coeffs]
    p = coeffs[0].shape[0]
    return MaModel(
        kind="custom", p=p, coeff_fn=lambda j: coeffs[j], truncation=len(coeffs) - 1,
    )


def poly_weights(order=MA_POLY_ORDER):
    return (np.arange(order + 1) + 1.0) ** -2.0


def gen_arma11(n, p, mean: MeanConfig | None = None, innovation="gaussian",
               seed=None, burn=200) -> PanelData:
    """Simulate the ARMA(1,1) panel; burn-in is discarded before the mean shift."""
    if burn < 200:
        raise ConfigError("burn-in must be at least 200")
    model = arma11_model(p)
    B1, B2 = model.extras["B1"], model.extras["B2"]
    N = n + burn
    eta = draw_innovation(innovation, (N + 1, p), seed)
    eps = np.empty((N, p))
    prev = np.zeros(p)
    for t in range(N):
        prev = prev @ B1.T + eta[t + 1] + eta[t] @ B2.T
        eps[t] = prev
    noise = eps[burn:]
    values = mean.apply(noise) if mean is not None else noise
    return PanelData(values)


def gen_ma_poly(n, p, variant, mean: MeanConfig | None = None, innovation="gaussian",
                seed=None, order=MA_POLY_ORDER) -> PanelData:
    """Simulate the long-MA panel; the eta history (order steps back) is pre-drawn.

    The time-axis convolution with the scalar weights runs through an FFT,
    which is exact up to roundoff and much faster than the naive sum.
    """
    model = ma_poly_model(p, variant, order)
    B3 = model.extras["B3"]
    a = model.extras["weights"]
    eta = draw_innovation(innovation, (n + order, p), seed)
    mixed = eta @ B3.T
    m = 1
    while m < n + 2 * order + 1:
        m *= 2
    fa = np.fft.rfft(a, m)
    fv = np.fft.rfft(mixed, m, axis=0)
    conv = np.fft.irfft(fv * fa[:, None], m, axis=0)
    noise = conv[order:order + n]
    values = mean.apply(noise) if mean is not None else noise
    return PanelData(values)


def generate(model_name, n, p, mean=None, innovation="gaussian", seed=None) -> PanelData:
    """Dispatch on the stock model names "1", "2a", "2b"."""
    name = str(model_name)
    if name == "1":
        return gen_arma11(n, p, mean, innovation, seed)
    if name in ("2a", "2b"):
        return gen_ma_poly(n, p, name[-1], mean, innovation, seed)
    raise ConfigError(f"unknown model {model_name!r}")

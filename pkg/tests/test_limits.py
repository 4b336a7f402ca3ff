"""Limit-process covariances and samplers for the two dependence regimes."""

import numpy as np
import pytest
from scipy.stats import ks_2samp

from panelbreak import (
    ConfigError,
    RegimeBSpec,
    RegimeCSpec,
    arma11_model,
    brownian_cov,
    iid_model,
    ma_poly_model,
    make_regime_b_cov,
    model_diagnostics,
    model_gamma_p,
    poly_weights,
    power_iter_norm,
    sample_regime_b,
    sample_regime_c,
    scalar_autocovs,
    sigma_cov,
    to_tau_units,
)


def test_power_iteration_matches_dense_norm():
    rng = np.random.default_rng(17)
    for _ in range(5):
        A = rng.standard_normal((6, 6))
        assert power_iter_norm(A) == pytest.approx(np.linalg.norm(A, 2), abs=1e-6)
        S = (A + A.T) / 2
        assert power_iter_norm(S) == pytest.approx(np.linalg.norm(S, 2), abs=1e-6)
    assert power_iter_norm(np.zeros((3, 3))) == 0.0


def test_model_gamma_p_closed_forms():
    assert model_gamma_p(iid_model(4)) == pytest.approx(1.0)
    # scalar ARMA(1,1): 1 + sum_j 0.25^(j-1) * 1.25 = 1 + 5/3
    assert model_gamma_p(arma11_model(1)) == pytest.approx(8.0 / 3.0, abs=1e-10)
    # long-MA variant b: coefficient j is a_j * B3 with ||B3||_2 = 3 at p = 5
    m = ma_poly_model(5, "b", order=50)
    assert model_gamma_p(m) == pytest.approx(3.0 * poly_weights(50).sum(), rel=1e-8)


def test_model_diagnostics_signal_functionals():
    m = arma11_model(2)
    diag = model_diagnostics(m, mu1=[1.0, 0.0], mu2=[0.0, 1.0], n=100)
    assert diag.F1n == pytest.approx(10.0 / (2 * np.log(100)) * 2.0)
    assert diag.F2n == pytest.approx(100.0 / 2.0 * 2.0)
    assert diag.s == pytest.approx(2.0 / model_gamma_p(m) ** 2)

    mb = ma_poly_model(3, "b", order=20)
    diag_b = model_diagnostics(mb, mu1=np.zeros(3), mu2=np.ones(3), n=64)
    assert diag_b.F2n == pytest.approx(64.0 / 27.0 * 3.0)


def test_model_diagnostics_diagonal_norm():
    m = iid_model(3)
    diag = model_diagnostics(m, [0, 0, 0], [1, 1, 1], n=10)
    assert diag.gamma_tilde_p == pytest.approx(1.0)
    assert diag.beta_p == pytest.approx(1.0)


def test_scalar_autocovs_match_model_gamma():
    m = arma11_model(3)
    d = np.array([0.5, -1.0, 2.0])
    r = scalar_autocovs(m, d)
    for u in range(min(len(r), 6)):
        assert r[u] == pytest.approx(float(d @ m.gamma(u) @ d), abs=1e-10)


def test_sigma_cov_zero_offset_and_empty_window():
    m = iid_model(3)
    d = np.ones(3)
    assert sigma_cov(m, d, 0.0, 5.0) == 0.0
    assert sigma_cov(m, d, 5.0, 0.0) == 0.0
    # nu = 1/3, so |h| < 3 rounds to an empty window
    assert sigma_cov(m, d, 2.0, 9.0) == 0.0


def test_sigma_cov_iid_oracle():
    # nu = 1/3: h = 9 and 15 give window counts 3 and 5; the projected
    # noise has variance r0 = 3, so the same-sign covariance is 3 * 3.
    m = iid_model(3)
    d = np.ones(3)
    assert sigma_cov(m, d, 9.0, 15.0) == pytest.approx(9.0)
    assert sigma_cov(m, d, -9.0, -15.0) == pytest.approx(9.0)
    # disjoint opposite-sign windows of independent terms do not covary
    assert sigma_cov(m, d, -9.0, 15.0) == 0.0


def _brute_sigma_cov(model, d, h1, h2):
    """Literal double sum over the two signed index windows."""
    d = np.asarray(d, dtype=float)
    gp = model_gamma_p(model)
    nu = gp**2 / float(d @ d)
    r = scalar_autocovs(model, d)

    def window(h):
        m = int(np.floor(nu * h))
        return range(min(m, 0) + 1, max(m, 0) + 1)

    total = 0.0
    for t1 in window(h1):
        for t2 in window(h2):
            u = abs(t2 - t1)
            if u < len(r):
                total += r[u]
    return total / gp**4


def test_sigma_cov_matches_brute_force_double_sum():
    m = arma11_model(3)
    d = np.array([0.5, -1.0, 2.0])
    pairs = [(3.0, 7.0), (7.0, 3.0), (-4.0, -9.0), (-6.0, 8.0), (5.5, 5.5),
             (2.7, -3.3), (0.4, 6.0)]
    for h1, h2 in pairs:
        assert sigma_cov(m, d, h1, h2) == pytest.approx(
            _brute_sigma_cov(m, d, h1, h2), abs=1e-12
        )


def test_vectorized_regime_b_cov_agrees_with_pointwise():
    m = arma11_model(3)
    d = np.array([0.5, -1.0, 2.0])
    cov = make_regime_b_cov(m, d)
    hs = np.array([-9.0, -4.5, -0.3, 0.0, 0.4, 2.7, 5.5, 8.0])
    gram = cov(hs[:, None], hs[None, :])
    for i, h1 in enumerate(hs):
        for j, h2 in enumerate(hs):
            assert gram[i, j] == pytest.approx(sigma_cov(m, d, h1, h2), abs=1e-12)


def test_regime_b_cov_rejects_zero_shift():
    with pytest.raises(ConfigError):
        make_regime_b_cov(iid_model(2), np.zeros(2))


def test_brownian_cov_oracle():
    cov = brownian_cov(2.0)
    assert cov(3.0, 5.0) == pytest.approx(6.0)
    assert cov(-3.0, -5.0) == pytest.approx(6.0)
    assert cov(-3.0, 5.0) == 0.0
    got = cov(np.array([1.0, -2.0]), np.array([4.0, -1.0]))
    assert np.allclose(got, [2.0, 2.0])


def test_regime_b_degenerate_cov_gives_point_mass():
    spec = RegimeBSpec(cov_fn=lambda a, b: np.zeros(np.broadcast(a, b).shape),
                       delta=0.5, half_width=5.0)
    out = sample_regime_b(spec, 50, rng=0)
    assert np.all(out == 0.0)


def test_regime_b_brownian_argmax_is_symmetric():
    # argmax of -|h|/2 + B(h) has a symmetric law; the sample median
    # should sit within a couple of grid steps of zero.
    spec = RegimeBSpec(cov_fn=brownian_cov(1.0), delta=0.05, half_width=20.0)
    out = sample_regime_b(spec, 10_000, rng=123)
    assert abs(np.median(out)) <= 2 * spec.delta
    assert np.abs(out).max() <= spec.half_width


def test_regime_b_grid_validation():
    spec = RegimeBSpec(cov_fn=brownian_cov(1.0), delta=0.0, half_width=5.0)
    with pytest.raises(ConfigError):
        spec.grid()


def test_to_tau_units_oracle():
    got = to_tau_units([4.0, -8.0], n=100, gamma_p=2.0, delta_sq=0.5)
    assert np.allclose(got, [0.32, -0.64])


def _iid_kernel(scale=1.0):
    return lambda t1, t2: scale * (np.asarray(t1) == np.asarray(t2))


def _hand_rolled_regime_c(c1, sw2, mu1s, mu2s, H, reps, seed):
    """Independent reimplementation with explicit slice sums per offset.

    mu1s/mu2s of length zero means no local series term.  The local
    series and the walk are iid over time and independent of each other.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(-H, H + 1)
    q = len(mu1s)
    means = np.where(t[None, :] <= 0, mu1s[:, None], mu2s[:, None]) if q else None
    out = np.empty(reps, dtype=int)
    for i in range(reps):
        y = rng.standard_normal(2 * H + 1) * np.sqrt(sw2)
        if q:
            X = rng.standard_normal((q, 2 * H + 1)) + means
            A = 0.5 * ((X - mu2s[:, None]) ** 2 - (X - mu1s[:, None]) ** 2).sum(axis=0)
            y = y + A
        best = None
        for j, h in enumerate(t):
            lo, hi = (j, H) if h <= 0 else (H, j)
            val = y[lo : hi + 1].sum() - 0.5 * c1 * abs(h)
            key = (val, -abs(h), 1 if h < 0 else 0)
            if best is None or key > best[0]:
                best = (key, h)
        out[i] = best[1]
    return out


def test_regime_c_horizon_guard_raises():
    spec = RegimeCSpec(c1=0.1, w_cov=_iid_kernel(1.0), horizon=20)
    with pytest.raises(ConfigError):
        sample_regime_c(spec, 10, rng=0)


def test_regime_c_huge_drift_pins_argmax_at_zero():
    spec = RegimeCSpec(c1=1000.0, w_cov=_iid_kernel(0.01), horizon=4)
    out = sample_regime_c(spec, 500, rng=1)
    assert np.all(out == 0)


def test_regime_c_walk_only_matches_hand_rolled():
    H = 128
    spec = RegimeCSpec(c1=1.0, w_cov=_iid_kernel(1.0), horizon=H)
    a = sample_regime_c(spec, 4000, rng=271)
    b = _hand_rolled_regime_c(1.0, 1.0, np.array([]), np.array([]), H, 4000, 828)
    stat = ks_2samp(a, b).statistic
    crit = 1.628 * np.sqrt((len(a) + len(b)) / (len(a) * len(b)))
    assert stat < crit


def test_regime_c_with_local_series_matches_hand_rolled():
    H = 128
    spec = RegimeCSpec(
        c1=1.0,
        w_cov=_iid_kernel(0.5),
        x_cov=lambda k1, k2, t1, t2: 1.0 * (np.asarray(t1) == np.asarray(t2)),
        k0=[1],
        mu1_star=[0.0],
        mu2_star=[0.6],
        horizon=H,
    )
    a = sample_regime_c(spec, 4000, rng=314)
    b = _hand_rolled_regime_c(
        1.0, 0.5, np.array([0.0]), np.array([0.6]), H, 4000, 2718
    )
    stat = ks_2samp(a, b).statistic
    crit = 1.628 * np.sqrt((len(a) + len(b)) / (len(a) * len(b)))
    assert stat < crit


def test_regime_c_spec_validation():
    with pytest.raises(ConfigError):
        RegimeCSpec(c1=-1.0, w_cov=_iid_kernel())
    with pytest.raises(ConfigError):
        RegimeCSpec(c1=1.0, w_cov=_iid_kernel(), horizon=0)
    with pytest.raises(ConfigError):
        RegimeCSpec(c1=1.0, w_cov=_iid_kernel(), k0=[1])
    with pytest.raises(ConfigError):
        RegimeCSpec(
            c1=1.0,
            w_cov=_iid_kernel(),
            x_cov=lambda k1, k2, t1, t2: 0.0,
            k0=[1, 2],
            mu1_star=[0.0],
            mu2_star=[0.0, 0.1],
        )

"""panelbreak: least-squares break-point estimation for high-dimensional panels.

Detects a single common mean change across a large panel, quantifies its
uncertainty with dependence-aware surrogate resampling, samples the
limiting offset distributions, and screens long samples with a rolling
window pipeline.
"""
from .adaptive import (
    AdaptiveConfig,
    IntervalResult,
    adaptive_ci,
    adaptive_h_draw,
    interval_from_h,
    nearest_rank,
)
from .autocov import (
    AutocovSet,
    autocov_sequence,
    band,
    default_bandwidth,
    default_max_lag,
    sample_autocov,
)
from .errors import ConfigError, DataError, NumericError
from .limits import (
    MaModelDiagnostics,
    RegimeBSpec,
    RegimeCSpec,
    brownian_cov,
    make_regime_b_cov,
    model_diagnostics,
    model_gamma_p,
    power_iter_norm,
    sample_regime_b,
    sample_regime_c,
    scalar_autocovs,
    sigma_cov,
    to_tau_units,
)
from .models import (
    MaModel,
    MeanConfig,
    arma11_model,
    custom_model,
    decay_matrix,
    draw_innovation,
    gen_arma11,
    gen_ma_poly,
    generate,
    iid_model,
    ma_poly_model,
    mean_config_presets,
    poly_weights,
)
from .panel import (
    ChangePointFit,
    PanelData,
    candidate_range,
    criterion_profile,
    detect_change_point,
    lsq_criterion,
    segment_means,
    shift_invariance_check,
)
from .pipeline import (
    PipelineReport,
    RollingConfig,
    load_prices,
    log_returns,
    partition_and_ci,
    partition_bounds,
    rolling_detect,
    run_pipeline,
)
from .surrogate import (
    CirculantSampler,
    ExactSampler,
    SurrogateSpec,
    build_block_toeplitz,
    make_sampler,
    psd_project,
    sample_circulant,
    sample_exact,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

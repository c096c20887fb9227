"""Spatial k-variations and Hurst estimation for the fractional stochastic wave equation."""

from .covariance import WaveModel, cholesky_factor, cov, cov_matrix, pi_alpha, rho_alpha
from .errors import (
    AllMomentsVanish,
    DegenerateFilter,
    DegenerateRatio,
    DegenerateVariance,
    DivergentSeries,
    FilterTooLong,
    FracwaveError,
    NotAFilter,
    NotMonotone,
    NotPSD,
    NumericalError,
    OutOfRegime,
    QuadratureNotConverged,
    TooLarge,
    ValidationError,
)
from .estimators import EstimateResult, asymptotic_se, estimate_bar, estimate_hat, estimate_tilde
from .experiments import ExperimentConfig, ExperimentReport, clt_diagnostic, noncentral_diagnostic, run_mc
from .filters import Filter, c1_c2, kappa_asymptotic, parse_filter, phi_alpha, phi_ratio, thin, validate_filter
from .limits import (
    LimitConstants,
    c_qq,
    cumulant_finite_N,
    cumulant_limit,
    exact_variance_chaos,
    k0_constant,
    sigma2q,
    sigma_total,
    theta_matrix,
    vN_noncentral_check,
)
from .sampler import FieldSlice, sample_batch, sample_slice
from .variations import (
    VariationResult,
    filtered_increments,
    gaussian_abs_moment,
    hermite,
    hermite_coeff,
    v_stat,
)

__version__ = "0.1.0"

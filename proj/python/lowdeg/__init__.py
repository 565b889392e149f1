"""Low-degree likelihood ratio analysis for spiked Wigner and tensor models."""

from ._lowdeg import (
    CapExceeded,
    InvalidArgument,
    Unsupported,
    degree_schedule,
    gaussian_heuristic,
    hermite_coeffs,
    hermite_eval,
    hermite_eval_normalized,
    ldlr_lb_from_poly_test,
    ldlr_norm_sq,
    lr_norm_sq,
    oracle_suite_passes,
    paley_zygmund_bound,
    pca_test,
    pca_threshold,
    sample_null,
    sample_planted,
    scan,
    subgaussian_moment_bound,
    symmetrize,
    tensor_threshold_bounds,
    trace_statistic,
)

__version__ = "0.3.0"

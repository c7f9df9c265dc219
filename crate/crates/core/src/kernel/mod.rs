//! Bergman kernels of the disc, half-plane and annulus, quotient-kernel and Green
//! series over subgroups, and consistency checks.

pub mod checks;
pub mod closed;
pub mod series;

pub use checks::{
    bergman_metric_fd, mixed_wirtinger_fd, polar_integral, reproducing_check, schiffer_check,
    schiffer_residual, series_evaluator, PolarGrid, QuadratureDomain,
};
pub use closed::{
    annulus_covering_map, annulus_kernel_oracle, annulus_modulus, annulus_monomial_norm_sq,
    annulus_pullback_oracle, disc_kernel, halfplane_kernel, hyp_norm_diag, radius_disc_kernel,
};
pub use series::{
    green_series, green_term_constant, kernel_term_constant, quotient_kernel_series, ClosurePolicy,
    GreenValue, KernelValue, QuotientSeries, SeriesOptions, TailModel, Truncation,
};

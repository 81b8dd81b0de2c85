//! Closed-form quantities: covariance builders, divergences, and the
//! thresholds that certify covertness or detectability.

pub mod bounds;
pub mod covariance;
pub mod divergence;
pub mod matrix;
pub mod qfunc;

pub use bounds::{
    covert_gain_bound_gain_change, covert_gain_bound_reset, detection_gain_threshold,
    half_delta_quantile, k0_control_energy, k0_residual_energy, magnitude_false_alarm,
    magnitude_min_threshold, n0_magnitude, reset_lrt_false_alarm, reset_lrt_miss,
    reset_lrt_threshold, LogBase, ResidualWindow,
};
pub use covariance::{
    origin_reset_covariance, reset_covariance, steady_covariance, steady_precision,
    transient_covariance,
};
pub use divergence::{
    bound_report, kl_gain_change, kl_gaussian, kl_gaussian_zero_mean, kl_reset,
    steady_det_closed_form, trace_ratio_closed_form, BoundReport,
};
pub use matrix::{CovMatrix, Provenance};
pub use qfunc::{normal_pdf, q_function, q_inverse};

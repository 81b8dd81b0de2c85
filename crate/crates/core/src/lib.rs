//! Simulation, detection and closed-form covertness bounds for scalar
//! AR(1) plants driven by a hidden controller.
//!
//! The plant evolves as `X_k = a X_{k-1} + Z_k - U_k` with `U_k = f(X_{k-1})`.
//! [`ar1`] simulates it, [`controllers`] provides the control laws,
//! [`analytics`] the covariance structures, divergences and thresholds,
//! [`detectors`] the tests an observer can run, and [`montecarlo`]
//! estimates their error rates.

// `!(x >= lo)` is how parameter checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod ar1;
pub mod controllers;
pub mod detectors;
pub mod error;
pub mod montecarlo;
pub mod noise;
pub mod rng;

pub use ar1::{simulate, Ar1Params, InitPolicy, Trajectory};
pub use controllers::{ControlLaw, ControllerSpec};
pub use detectors::{DetectorVerdict, Hypothesis, MagnitudeConfig};
pub use error::{Error, Result};
pub use montecarlo::{
    estimate_error_rates, DetectorSpec, ErrorRates, Execution, LrtModel, ResetSchedule, Scenario,
};
pub use noise::NoiseModel;

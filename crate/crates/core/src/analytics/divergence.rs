//! Kullback-Leibler divergences between Gaussian vectors and the
//! Pinsker-type bound on the optimal error sum.

use nalgebra::DVector;
use serde::Serialize;

use super::matrix::{log_det_from_cholesky, CovMatrix};
use crate::error::{domain, Error, Result};

/// `D(N(μ0, S0) || N(μ1, S1))`.
pub fn kl_gaussian(
    mu0: &DVector<f64>,
    s0: &CovMatrix,
    mu1: &DVector<f64>,
    s1: &CovMatrix,
) -> Result<f64> {
    let n = s0.dim();
    if s1.dim() != n || mu0.len() != n || mu1.len() != n {
        return Err(domain(format!(
            "dimension mismatch: S0 {n}, S1 {}, mu0 {}, mu1 {}",
            s1.dim(),
            mu0.len(),
            mu1.len()
        )));
    }
    if mu0 == mu1 && s0.matrix() == s1.matrix() {
        return Ok(0.0);
    }
    let chol1 = s1.cholesky()?;
    let chol0 = s0.cholesky().map_err(|e| match e {
        Error::Numeric { condition, .. } => Error::Numeric {
            message: "S0 is singular; the divergence is infinite".into(),
            condition,
        },
        other => other,
    })?;
    let trace = chol1.solve(s0.matrix()).trace();
    let diff = mu1 - mu0;
    let mahalanobis = diff.dot(&chol1.solve(&diff));
    let log_ratio = log_det_from_cholesky(&chol1) - log_det_from_cholesky(&chol0);
    let kl = 0.5 * (trace + mahalanobis - n as f64 + log_ratio);
    // Rounding can push an exact zero slightly negative.
    Ok(if kl < 0.0 && kl > -1e-10 { 0.0 } else { kl })
}

/// Zero-mean convenience wrapper.
pub fn kl_gaussian_zero_mean(s0: &CovMatrix, s1: &CovMatrix) -> Result<f64> {
    let z0 = DVector::zeros(s0.dim());
    let z1 = DVector::zeros(s1.dim());
    kl_gaussian(&z0, s0, &z1, s1)
}

fn ensure_stable(name: &str, g: f64) -> Result<()> {
    if g.is_finite() && g.abs() < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must satisfy |{name}| < 1, got {g}")))
    }
}

/// `tr(Σ_b⁻¹ Σ_a)` for stationary covariances of gains `a` and `b`.
pub fn trace_ratio_closed_form(a: f64, b: f64, n: usize) -> Result<f64> {
    ensure_stable("a", a)?;
    ensure_stable("b", b)?;
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let n = n as f64;
    Ok(((n - 2.0) * b * b - 2.0 * (n - 1.0) * a * b + n) / (1.0 - a * a))
}

/// `|Σ| = σ^{2n} / (1 - a²)` for the stationary covariance.
pub fn steady_det_closed_form(a: f64, sigma: f64, n: usize) -> Result<f64> {
    ensure_stable("a", a)?;
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    Ok(sigma.powi(2 * n as i32) / (1.0 - a * a))
}

/// Divergence between stationary windows of gains `a` (true) and `b`
/// (alternative).
pub fn kl_gain_change(a: f64, b: f64, n: usize) -> Result<f64> {
    ensure_stable("a", a)?;
    ensure_stable("b", b)?;
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let d = b - a;
    let nf = n as f64;
    Ok(0.5 * ((d * d * nf - 2.0 * b * d) / (1.0 - a * a) + ((1.0 - a * a) / (1.0 - b * b)).ln()))
}

/// Divergence of a stationary window from its single-reset counterpart,
/// `½ ln(1 / (1 - a²))`, independent of the window and the reset time.
pub fn kl_reset(a: f64) -> Result<f64> {
    ensure_stable("a", a)?;
    Ok(0.5 * (1.0 / (1.0 - a * a)).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub kl: f64,
    /// `min(1, sqrt(kl / 2))`.
    pub tv_upper: f64,
    /// `1 - tv_upper`: lower bound on `α + β` of any test.
    pub error_sum_lower: f64,
}

pub fn bound_report(kl: f64) -> Result<BoundReport> {
    if !(kl >= 0.0) {
        return Err(domain(format!("divergence must be non-negative, got {kl}")));
    }
    let tv_upper = (kl / 2.0).sqrt().min(1.0);
    Ok(BoundReport {
        kl,
        tv_upper,
        error_sum_lower: 1.0 - tv_upper,
    })
}

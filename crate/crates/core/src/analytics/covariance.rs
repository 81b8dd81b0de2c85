//! Closed-form covariance and precision matrices of Gaussian AR(1) vectors.

use nalgebra::DMatrix;

use super::matrix::{CovMatrix, Provenance};
use crate::error::{domain, ensure_positive, Result};

fn ensure_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(domain("dimension n must be at least 1"))
    } else {
        Ok(())
    }
}

fn ensure_stable(a: f64) -> Result<()> {
    if a.is_finite() && a.abs() < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("requires |a| < 1, got {a}")))
    }
}

/// Covariance of `(X_1..X_n)` for a plant started at the origin:
/// `σ²/(1-a²) (a^{|i-j|} - a^{i+j})` with 1-based indices.
pub fn transient_covariance(a: f64, sigma: f64, n: usize) -> Result<CovMatrix> {
    ensure_dim(n)?;
    ensure_positive("sigma", sigma)?;
    if !a.is_finite() || a.abs() == 1.0 {
        return Err(domain(format!("transient covariance is singular at |a| = 1, got {a}")));
    }
    let scale = sigma * sigma / (1.0 - a * a);
    let m = DMatrix::from_fn(n, n, |i, j| {
        let (i, j) = (i as i32 + 1, j as i32 + 1);
        scale * (a.powi((i - j).abs()) - a.powi(i + j))
    });
    Ok(CovMatrix::from_builder(m, Provenance::Transient))
}

/// Stationary covariance `σ²/(1-a²) a^{|i-j|}` (symmetric Toeplitz).
pub fn steady_covariance(a: f64, sigma: f64, n: usize) -> Result<CovMatrix> {
    ensure_dim(n)?;
    ensure_positive("sigma", sigma)?;
    ensure_stable(a)?;
    Ok(CovMatrix::from_builder(
        steady_block(a, sigma, n),
        Provenance::Steady,
    ))
}

fn steady_block(a: f64, sigma: f64, n: usize) -> DMatrix<f64> {
    let scale = sigma * sigma / (1.0 - a * a);
    DMatrix::from_fn(n, n, |i, j| scale * a.powi((i as i32 - j as i32).abs()))
}

/// Tridiagonal inverse of [`steady_covariance`].
pub fn steady_precision(a: f64, sigma: f64, n: usize) -> Result<CovMatrix> {
    ensure_dim(n)?;
    ensure_positive("sigma", sigma)?;
    ensure_stable(a)?;
    let s2 = sigma * sigma;
    let mut m = DMatrix::zeros(n, n);
    if n == 1 {
        m[(0, 0)] = (1.0 - a * a) / s2;
    } else {
        for i in 0..n {
            let interior = i > 0 && i < n - 1;
            m[(i, i)] = if interior { (1.0 + a * a) / s2 } else { 1.0 / s2 };
            if i + 1 < n {
                m[(i, i + 1)] = -a / s2;
                m[(i + 1, i)] = -a / s2;
            }
        }
    }
    Ok(CovMatrix::from_builder(m, Provenance::Precision))
}

fn ensure_split(n: usize, tau: usize) -> Result<()> {
    if n < 2 || tau == 0 || tau >= n {
        Err(domain(format!("reset time tau = {tau} must lie in 1..={}", n.saturating_sub(1))))
    } else {
        Ok(())
    }
}

/// Block-diagonal `diag(Σ_τ, Σ_{n-τ})` of two stationary covariances: the
/// law used for the covertness divergence of a single reset.
pub fn reset_covariance(a: f64, sigma: f64, n: usize, tau: usize) -> Result<CovMatrix> {
    ensure_positive("sigma", sigma)?;
    ensure_stable(a)?;
    ensure_split(n, tau)?;
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (tau, tau))
        .copy_from(&steady_block(a, sigma, tau));
    m.view_mut((tau, tau), (n - tau, n - tau))
        .copy_from(&steady_block(a, sigma, n - tau));
    Ok(CovMatrix::from_builder(m, Provenance::ResetBlock { tau }))
}

/// Law of a stationary plant reset to the origin right after `tau`
/// (`X_{tau+1} = Z_{tau+1}`): a stationary block followed by a transient
/// block.
pub fn origin_reset_covariance(a: f64, sigma: f64, n: usize, tau: usize) -> Result<CovMatrix> {
    ensure_positive("sigma", sigma)?;
    ensure_stable(a)?;
    ensure_split(n, tau)?;
    let tail = transient_covariance(a, sigma, n - tau)?;
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (tau, tau))
        .copy_from(&steady_block(a, sigma, tau));
    m.view_mut((tau, tau), (n - tau, n - tau))
        .copy_from(tail.matrix());
    Ok(CovMatrix::from_builder(m, Provenance::OriginReset { tau }))
}

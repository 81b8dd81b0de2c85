//! The observer's decision procedures. Each returns the statistic it
//! computed, the threshold it compared against and the resulting verdict.

use nalgebra::{Cholesky, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::analytics::bounds::{magnitude_min_threshold, reset_lrt_threshold};
use crate::analytics::matrix::{log_det_from_cholesky, CovMatrix};
use crate::error::{config, domain, ensure_positive, ensure_probability, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// H0: no controller acts on the plant.
    Uncontrolled,
    /// H1: a controller is present.
    Controlled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorVerdict {
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Hypothesis,
}

/// Parameters of the magnitude test on an unstable plant. `c` bounds the
/// `gamma`-th absolute moment of the stabilised state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeConfig {
    pub m: f64,
    pub gamma: f64,
    pub c: f64,
    pub delta: f64,
}

impl MagnitudeConfig {
    pub fn new(m: f64, gamma: f64, c: f64, delta: f64) -> Result<Self> {
        let cfg = Self { m, gamma, c, delta };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration at the smallest admissible threshold `(2c/δ)^{1/γ}`.
    pub fn minimal(gamma: f64, c: f64, delta: f64) -> Result<Self> {
        let m = magnitude_min_threshold(gamma, c, delta)?;
        Self::new(m, gamma, c, delta)
    }

    pub fn validate(&self) -> Result<()> {
        let min = magnitude_min_threshold(self.gamma, self.c, self.delta)
            .map_err(|e| config(e.to_string()))?;
        // Allow for the rounding of `minimal` itself.
        if !(self.m >= min * (1.0 - 1e-12)) {
            return Err(config(format!(
                "magnitude threshold M = {} is below (2c/δ)^(1/γ) = {min}",
                self.m
            )));
        }
        Ok(())
    }
}

/// Declares the plant controlled when `|x| <= M`.
pub fn magnitude_detector(x_n0: f64, cfg: &MagnitudeConfig) -> Result<DetectorVerdict> {
    cfg.validate()?;
    let statistic = x_n0.abs();
    Ok(DetectorVerdict {
        statistic,
        threshold: cfg.m,
        decision: if statistic <= cfg.m {
            Hypothesis::Controlled
        } else {
            Hypothesis::Uncontrolled
        },
    })
}

fn energy_verdict(energy: f64, threshold: f64) -> DetectorVerdict {
    DetectorVerdict {
        statistic: energy,
        threshold,
        decision: if energy >= threshold {
            Hypothesis::Controlled
        } else {
            Hypothesis::Uncontrolled
        },
    }
}

fn mean_square(values: impl Iterator<Item = f64>, k: usize) -> f64 {
    values.map(|v| v * v).sum::<f64>() / k as f64
}

/// Energy test on channel observations `W_k = U_k + V_k`.
pub fn control_energy_detector(
    observations: &[f64],
    sigma_v: f64,
    delta: f64,
) -> Result<DetectorVerdict> {
    if observations.is_empty() {
        return Err(domain("observation window is empty"));
    }
    ensure_positive("sigma_v", sigma_v)?;
    ensure_probability("delta", delta)?;
    let k = observations.len();
    let s2 = sigma_v * sigma_v;
    let threshold = s2 + 2.0 * s2 / (delta * k as f64).sqrt();
    Ok(energy_verdict(
        mean_square(observations.iter().copied(), k),
        threshold,
    ))
}

/// Energy test on the residuals `y_n = x_n - a x_{n-1}` of `K + 1`
/// consecutive states.
pub fn residual_energy_detector(
    states: &[f64],
    a: f64,
    sigma2: f64,
    m4: f64,
    delta: f64,
) -> Result<DetectorVerdict> {
    if states.len() < 2 {
        return Err(domain("residual test needs at least two states"));
    }
    ensure_positive("sigma2", sigma2)?;
    ensure_probability("delta", delta)?;
    if !(m4 >= sigma2 * sigma2) {
        return Err(domain(format!(
            "fourth moment {m4} below the squared variance {}",
            sigma2 * sigma2
        )));
    }
    let k = states.len() - 1;
    let threshold = sigma2 + ((m4 - sigma2 * sigma2) / (k as f64 * delta / 2.0)).sqrt();
    let residuals = states.windows(2).map(|w| w[1] - a * w[0]);
    Ok(energy_verdict(mean_square(residuals, k), threshold))
}

/// Declares a reset when the post-reset sample is small: `x² <= t`.
pub fn reset_lrt_detector(x_tau_plus_1: f64, a: f64, sigma: f64, delta: f64) -> Result<DetectorVerdict> {
    let threshold = reset_lrt_threshold(a, sigma, delta)?;
    let statistic = x_tau_plus_1 * x_tau_plus_1;
    Ok(DetectorVerdict {
        statistic,
        threshold,
        decision: if statistic <= threshold {
            Hypothesis::Controlled
        } else {
            Hypothesis::Uncontrolled
        },
    })
}

/// Zero-mean Gaussian likelihood-ratio test with both factorizations done
/// once, for repeated use over many samples.
#[derive(Debug, Clone)]
pub struct GaussianLrt {
    chol0: Cholesky<f64, Dyn>,
    chol1: Cholesky<f64, Dyn>,
    half_log_det_ratio: f64,
    identical: bool,
}

impl GaussianLrt {
    pub fn new(s0: &CovMatrix, s1: &CovMatrix) -> Result<Self> {
        if s0.dim() != s1.dim() {
            return Err(domain(format!(
                "covariance dimensions differ: {} vs {}",
                s0.dim(),
                s1.dim()
            )));
        }
        let chol0 = s0.cholesky()?;
        let chol1 = s1.cholesky()?;
        let half_log_det_ratio =
            0.5 * (log_det_from_cholesky(&chol0) - log_det_from_cholesky(&chol1));
        Ok(Self {
            chol0,
            chol1,
            half_log_det_ratio,
            identical: s0.matrix() == s1.matrix(),
        })
    }

    pub fn dim(&self) -> usize {
        self.chol0.l_dirty().nrows()
    }

    /// `ln f1(x) - ln f0(x)`.
    pub fn log_ratio(&self, sample: &[f64]) -> Result<f64> {
        if sample.len() != self.dim() {
            return Err(domain(format!(
                "sample has {} entries, covariance has dimension {}",
                sample.len(),
                self.dim()
            )));
        }
        if self.identical {
            return Ok(0.0);
        }
        let x = DVector::from_column_slice(sample);
        let q0 = x.dot(&self.chol0.solve(&x));
        let q1 = x.dot(&self.chol1.solve(&x));
        Ok(0.5 * (q0 - q1) + self.half_log_det_ratio)
    }

    pub fn decide(&self, sample: &[f64]) -> Result<DetectorVerdict> {
        let statistic = self.log_ratio(sample)?;
        Ok(DetectorVerdict {
            statistic,
            threshold: 0.0,
            decision: if statistic >= 0.0 {
                Hypothesis::Controlled
            } else {
                Hypothesis::Uncontrolled
            },
        })
    }
}

/// One-shot form of [`GaussianLrt`].
pub fn gaussian_lrt_detector(sample: &[f64], s0: &CovMatrix, s1: &CovMatrix) -> Result<DetectorVerdict> {
    GaussianLrt::new(s0, s1)?.decide(sample)
}

//! Thresholds, window lengths and gain limits guaranteeing covertness or
//! detection, together with the exact error probabilities of the simple
//! detectors they are derived from.

use serde::{Deserialize, Serialize};

use super::qfunc::{q_function, q_inverse};
use crate::error::{domain, ensure_positive, ensure_probability, Result};

/// Base of the exponential in the reset covertness bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

/// Largest `|b|` a gain-change controller may target while keeping the
/// divergence bound below `ε`: `sqrt(1 - (1 - a²) e^{-4ε²})`.
pub fn covert_gain_bound_gain_change(a: f64, eps: f64) -> Result<f64> {
    if !(a.abs() < 1.0) {
        return Err(domain(format!("requires |a| < 1, got {a}")));
    }
    ensure_positive("eps", eps)?;
    Ok((1.0 - (1.0 - a * a) * (-4.0 * eps * eps).exp()).sqrt())
}

/// Largest `|a|` for which one reset keeps `ε`-covertness.
pub fn covert_gain_bound_reset(eps: f64, base: LogBase) -> Result<f64> {
    ensure_positive("eps", eps)?;
    let decay = match base {
        LogBase::Natural => (-4.0 * eps * eps).exp(),
        LogBase::Two => 2f64.powf(-4.0 * eps * eps),
    };
    Ok((1.0 - decay).sqrt())
}

/// `Q⁻¹((1 - δ/2) / 2)`, the quantile shared by the magnitude and reset tests.
pub fn half_delta_quantile(delta: f64) -> Result<f64> {
    ensure_probability("delta", delta)?;
    q_inverse((1.0 - delta / 2.0) / 2.0)
}

/// Smallest `|a|` above which the reset likelihood-ratio test reaches
/// `α + β <= δ`.
pub fn detection_gain_threshold(delta: f64) -> Result<f64> {
    let q = half_delta_quantile(delta)?;
    Ok((1.0 - q * q / (2.0 * (2.0 / delta).ln())).sqrt())
}

/// Window length beyond which energy detection of the one-bit control
/// signal through an AWGN channel reaches `α + β <= δ`.
pub fn k0_control_energy(snr: f64, delta: f64) -> Result<f64> {
    ensure_positive("snr", snr)?;
    ensure_probability("delta", delta)?;
    Ok(4.0 / (delta * snr * snr) * (1.0 + (1.0 + 2.0 * snr).sqrt()).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualWindow {
    /// Minimal window length.
    pub k0: f64,
    /// Simpler, looser window `K̃0 >= K0`.
    pub k0_compact: f64,
}

/// Window length for residual-energy detection of the one-bit controller
/// from clean state observations.
pub fn k0_residual_energy(energy: f64, sigma2: f64, m4: f64, delta: f64) -> Result<ResidualWindow> {
    ensure_positive("control energy", energy)?;
    ensure_positive("sigma2", sigma2)?;
    ensure_probability("delta", delta)?;
    if !(m4 >= sigma2 * sigma2) {
        return Err(domain(format!(
            "fourth moment {m4} below the squared variance {}",
            sigma2 * sigma2
        )));
    }
    let half = delta / 2.0;
    let excess = m4 - sigma2 * sigma2;
    let h1_spread = excess + 4.0 * energy * sigma2;
    let k0 = ((h1_spread / half).sqrt() + (excess / half).sqrt()).powi(2) / (energy * energy);
    let k0_compact = 4.0 / (energy * energy) * h1_spread / half;
    Ok(ResidualWindow { k0, k0_compact })
}

/// Observation time after which the magnitude test reaches `α <= δ/2`
/// for an unstable plant with Gaussian noise.
pub fn n0_magnitude(a: f64, sigma: f64, m: f64, delta: f64) -> Result<f64> {
    if !(a.abs() > 1.0) || !a.is_finite() {
        return Err(domain(format!("magnitude test requires |a| > 1, got {a}")));
    }
    ensure_positive("sigma", sigma)?;
    ensure_positive("M", m)?;
    let q = half_delta_quantile(delta)?;
    Ok((m * (a * a - 1.0).sqrt() / (sigma * q)).ln() / a.abs().ln())
}

/// Smallest `M` compatible with a `γ`-moment bound `c`: `(2c/δ)^{1/γ}`.
pub fn magnitude_min_threshold(gamma: f64, c: f64, delta: f64) -> Result<f64> {
    ensure_positive("gamma", gamma)?;
    ensure_positive("c", c)?;
    ensure_probability("delta", delta)?;
    Ok((2.0 * c / delta).powf(1.0 / gamma))
}

/// Exact false-alarm probability of the magnitude test at time `n` for an
/// uncontrolled Gaussian plant started at the origin.
pub fn magnitude_false_alarm(a: f64, sigma: f64, m: f64, n: usize) -> f64 {
    let spread = (a.powi(2 * n as i32) - 1.0).sqrt();
    1.0 - 2.0 * q_function(m * (a * a - 1.0).sqrt() / (sigma * spread))
}

/// Threshold `t` of the reset test, set so that `α = δ/2`.
pub fn reset_lrt_threshold(a: f64, sigma: f64, delta: f64) -> Result<f64> {
    if !(a.abs() < 1.0) {
        return Err(domain(format!("reset test requires |a| < 1, got {a}")));
    }
    ensure_positive("sigma", sigma)?;
    let q = half_delta_quantile(delta)?;
    Ok(sigma * sigma / (1.0 - a * a) * q * q)
}

/// `P(X² <= t)` under the stationary law.
pub fn reset_lrt_false_alarm(t: f64, a: f64, sigma: f64) -> f64 {
    1.0 - 2.0 * q_function((t * (1.0 - a * a)).sqrt() / sigma)
}

/// `P(X² > t)` under the reset law `N(0, σ²)`.
pub fn reset_lrt_miss(t: f64, sigma: f64) -> f64 {
    2.0 * q_function(t.sqrt() / sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_change_bound() {
        let v = covert_gain_bound_gain_change(0.3, 0.2).unwrap();
        let expected = (1.0 - 0.91 * (-0.16f64).exp()).sqrt();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.4739).abs() < 1e-4);
        assert!((covert_gain_bound_gain_change(0.3, 50.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(covert_gain_bound_gain_change(0.0, 0.9).unwrap() < 1.0);
        assert!(covert_gain_bound_gain_change(1.0, 0.2).is_err());
    }

    #[test]
    fn reset_bound() {
        let two = covert_gain_bound_reset(0.5, LogBase::Two).unwrap();
        assert!((two - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((two - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let nat = covert_gain_bound_reset(0.5, LogBase::Natural).unwrap();
        assert!((nat - (1.0 - (-1.0f64).exp()).sqrt()).abs() < 1e-15);
        assert!((nat - 0.79506).abs() < 1e-5);
        for base in [LogBase::Natural, LogBase::Two] {
            assert!(covert_gain_bound_reset(1e-9, base).unwrap() < 1e-8);
        }
        assert!(covert_gain_bound_reset(0.0, LogBase::Two).is_err());
    }

    #[test]
    fn detection_threshold_half() {
        let q = q_inverse(0.375).unwrap();
        assert!((q - 0.3186).abs() < 1e-4);
        let v = detection_gain_threshold(0.5).unwrap();
        assert!((v - 0.9816).abs() < 1e-4, "{v}");
        let mut prev = 1.0;
        for i in 1..10 {
            let v = detection_gain_threshold(i as f64 / 10.0).unwrap();
            assert!((0.0..1.0).contains(&v));
            assert!(v < prev);
            prev = v;
        }
        assert!(detection_gain_threshold(1.0).is_err());
    }

    #[test]
    fn control_energy_window() {
        let k = k0_control_energy(1.0, 0.1).unwrap();
        assert!((k - 40.0 * (1.0 + 3f64.sqrt()).powi(2)).abs() < 1e-10);
        assert!((k - 298.56).abs() < 0.01);
        for snr in [0.1, 1.0, 7.0] {
            let a = k0_control_energy(snr, 0.05).unwrap();
            let b = k0_control_energy(snr, 0.1).unwrap();
            assert!((a - 2.0 * b).abs() < 1e-9 * a);
        }
        // K0 ~ 8 / (δ SNR) for large SNR.
        let snr = 1e3;
        let ratio = k0_control_energy(snr, 0.1).unwrap() / (8.0 / (0.1 * snr));
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn residual_window_uniform_noise() {
        let w = k0_residual_energy(1.0, 1.0 / 3.0, 0.2, 0.1).unwrap();
        let first = ((0.2 - 1.0 / 9.0 + 4.0 / 3.0) / 0.05f64).sqrt();
        let second = ((0.2 - 1.0 / 9.0) / 0.05f64).sqrt();
        assert!((w.k0 - (first + second).powi(2)).abs() < 1e-10);
        assert!((w.k0 - 44.44).abs() < 0.01);
        assert!(w.k0 <= w.k0_compact);
        assert!(k0_residual_energy(1.0, 1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn residual_window_degenerate_noise() {
        // m4 = σ⁴: the second radical vanishes.
        let (e, s2, d) = (0.5, 0.8, 0.2);
        let w = k0_residual_energy(e, s2, s2 * s2, d).unwrap();
        assert!((w.k0 - 4.0 * e * s2 / (d / 2.0) / (e * e)).abs() < 1e-12);
    }

    #[test]
    fn magnitude_time() {
        let q = q_inverse(0.475).unwrap();
        assert!((q - 0.0627).abs() < 1e-4);
        let n0 = n0_magnitude(2.0, 1.0, 10.0, 0.1).unwrap();
        assert!((n0 - 8.11).abs() < 0.01, "{n0}");
        assert!(n0_magnitude(2.0, 1.0, 20.0, 0.1).unwrap() > n0);
        assert!(n0_magnitude(4.0, 1.0, 10.0, 0.1).unwrap() < n0);
        assert!(n0_magnitude(1.0, 1.0, 10.0, 0.1).is_err());
        assert!(n0_magnitude(0.5, 1.0, 10.0, 0.1).is_err());
    }

    #[test]
    fn magnitude_false_alarm_meets_target_at_n0() {
        for (a, m) in [(1.5, 5.0), (2.0, 10.0), (3.0, 4.0)] {
            let n0 = n0_magnitude(a, 1.0, m, 0.1).unwrap().ceil() as usize;
            assert!(magnitude_false_alarm(a, 1.0, m, n0) <= 0.05);
        }
    }

    #[test]
    fn reset_threshold_sets_false_alarm() {
        let t = reset_lrt_threshold(0.99, 1.0, 0.5).unwrap();
        assert!((reset_lrt_false_alarm(t, 0.99, 1.0) - 0.25).abs() < 1e-12);
        assert!(reset_lrt_miss(t, 1.0) < 0.25);
    }
}

//! Disturbance laws for the plant noise `Z_n`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analytics::qfunc::{normal_pdf, q_function};
use crate::error::{ensure_positive, Result};

/// Law of the i.i.d. plant disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// `N(0, std²)`.
    Gaussian { std: f64 },
    /// Uniform on `[-bound, bound]`.
    UniformBounded { bound: f64 },
    /// `N(0, std²)` conditioned on `|Z| <= bound`, drawn by rejection.
    TruncatedGaussian { std: f64, bound: f64 },
    /// Point mass at zero. Used for deterministic replays.
    Zero,
}

impl NoiseModel {
    /// Truncated Gaussian with the default bound of four standard deviations.
    pub fn truncated(std: f64) -> Self {
        NoiseModel::TruncatedGaussian {
            std,
            bound: 4.0 * std,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Gaussian { std } => ensure_positive("noise std", std),
            NoiseModel::UniformBounded { bound } => ensure_positive("noise bound", bound),
            NoiseModel::TruncatedGaussian { std, bound } => {
                ensure_positive("noise std", std)?;
                ensure_positive("noise bound", bound)
            }
            NoiseModel::Zero => Ok(()),
        }
    }

    /// `B` such that `|Z| <= B` almost surely, if one exists.
    pub fn support_bound(&self) -> Option<f64> {
        match *self {
            NoiseModel::Gaussian { .. } => None,
            NoiseModel::UniformBounded { bound } => Some(bound),
            NoiseModel::TruncatedGaussian { bound, .. } => Some(bound),
            NoiseModel::Zero => Some(0.0),
        }
    }

    /// `E[Z²]`.
    pub fn variance(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { std } => std * std,
            NoiseModel::UniformBounded { bound } => bound * bound / 3.0,
            NoiseModel::TruncatedGaussian { std, bound } => {
                let (m2, _) = truncated_standard_moments(bound / std);
                std * std * m2
            }
            NoiseModel::Zero => 0.0,
        }
    }

    /// `E[Z⁴]`.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { std } => 3.0 * std.powi(4),
            NoiseModel::UniformBounded { bound } => bound.powi(4) / 5.0,
            NoiseModel::TruncatedGaussian { std, bound } => {
                let (_, m4) = truncated_standard_moments(bound / std);
                std.powi(4) * m4
            }
            NoiseModel::Zero => 0.0,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, NoiseModel::Gaussian { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Gaussian { std } => std * rng.sample::<f64, _>(StandardNormal),
            NoiseModel::UniformBounded { bound } => bound * (2.0 * rng.random::<f64>() - 1.0),
            NoiseModel::TruncatedGaussian { std, bound } => loop {
                let z = std * rng.sample::<f64, _>(StandardNormal);
                if z.abs() <= bound {
                    break z;
                }
            },
            NoiseModel::Zero => 0.0,
        }
    }
}

/// Second and fourth moments of a standard normal truncated to `[-beta, beta]`.
fn truncated_standard_moments(beta: f64) -> (f64, f64) {
    let mass = 1.0 - 2.0 * q_function(beta);
    let edge = 2.0 * normal_pdf(beta);
    let m2 = (mass - beta * edge) / mass;
    let m4 = (3.0 * mass - 3.0 * beta * edge - beta.powi(3) * edge) / mass;
    (m2, m4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    // Composite Simpson on the truncated density; independent of the
    // integration-by-parts moment formulas.
    fn quadrature_moment(std: f64, bound: f64, power: i32) -> f64 {
        let steps = 20_000;
        let h = 2.0 * bound / steps as f64;
        let density = |x: f64| (-0.5 * (x / std).powi(2)).exp();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=steps {
            let x = -bound + i as f64 * h;
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            num += w * x.powi(power) * density(x);
            den += w * density(x);
        }
        num / den
    }

    #[test]
    fn truncated_moments_match_quadrature() {
        for (std, bound) in [(1.0, 4.0), (1.0, 1.0), (0.5, 0.7), (2.0, 3.0)] {
            let noise = NoiseModel::TruncatedGaussian { std, bound };
            let m2 = quadrature_moment(std, bound, 2);
            let m4 = quadrature_moment(std, bound, 4);
            assert!((noise.variance() - m2).abs() < 1e-10 * m2.max(1.0));
            assert!((noise.fourth_moment() - m4).abs() < 1e-10 * m4.max(1.0));
        }
    }

    #[test]
    fn closed_form_moments() {
        let u = NoiseModel::UniformBounded { bound: 1.0 };
        assert!((u.variance() - 1.0 / 3.0).abs() < 1e-15);
        assert!((u.fourth_moment() - 0.2).abs() < 1e-15);
        let g = NoiseModel::Gaussian { std: 2.0 };
        assert_eq!(g.variance(), 4.0);
        assert_eq!(g.fourth_moment(), 48.0);
        // Jensen: m4 >= sigma^4 for every law.
        for n in [u, g, NoiseModel::truncated(1.3), NoiseModel::Zero] {
            assert!(n.fourth_moment() >= n.variance().powi(2) - 1e-15);
        }
    }

    #[test]
    fn bounded_laws_respect_support() {
        let mut rng = rng_from_seed(11);
        for noise in [
            NoiseModel::UniformBounded { bound: 0.3 },
            NoiseModel::TruncatedGaussian { std: 1.0, bound: 0.5 },
        ] {
            let b = noise.support_bound().unwrap();
            for _ in 0..10_000 {
                assert!(noise.sample(&mut rng).abs() <= b);
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(NoiseModel::Gaussian { std: 0.0 }.validate().is_err());
        assert!(NoiseModel::UniformBounded { bound: -1.0 }.validate().is_err());
        assert!(NoiseModel::TruncatedGaussian {
            std: 1.0,
            bound: f64::NAN
        }
        .validate()
        .is_err());
        assert!(NoiseModel::Zero.validate().is_ok());
    }
}

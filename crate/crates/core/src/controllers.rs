//! Alice's control laws and the energy accounting of the one-bit controller.
//!
//! All laws are state-feedback: the control `U_k` applied at step `k` depends
//! only on the previous state `X_{k-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, ensure_finite, ensure_positive, Result};
use crate::noise::NoiseModel;

/// Declarative description of a controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControllerSpec {
    None,
    /// Sign-only controller with a deterministic magnitude series `C_n`.
    OneBit { c1: f64, bound: f64, gain: f64 },
    /// Resets the plant to the origin once `|X_{n-1}| >= d`.
    Threshold { d: f64, gain: f64 },
    /// Turns a gain-`gain` plant into a gain-`target` plant.
    GainChange {
        gain: f64,
        target: f64,
        /// Skip the admissibility checks so converse experiments can
        /// explore arbitrary `(gain, target)` pairs.
        #[serde(default)]
        relaxed: bool,
    },
}

impl ControllerSpec {
    /// One-bit controller started at the fixed point of its magnitude series.
    pub fn one_bit_at_fixed_point(bound: f64, gain: f64) -> Self {
        ControllerSpec::OneBit {
            c1: one_bit_fixed_point(gain, bound),
            bound,
            gain,
        }
    }

    /// Gain the controller was designed for, if any.
    pub fn design_gain(&self) -> Option<f64> {
        match *self {
            ControllerSpec::None => None,
            ControllerSpec::OneBit { gain, .. }
            | ControllerSpec::Threshold { gain, .. }
            | ControllerSpec::GainChange { gain, .. } => Some(gain),
        }
    }

    /// Gain of the closed loop for linear laws (`target` for gain change).
    pub fn closed_loop_gain(&self, plant_gain: f64) -> f64 {
        match *self {
            ControllerSpec::GainChange { target, .. } => target,
            _ => plant_gain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ControllerSpec::None => Ok(()),
            ControllerSpec::OneBit { c1, bound, gain } => {
                ensure_positive("one-bit bound", bound)?;
                ensure_one_bit_gain(gain)?;
                let fixed = one_bit_fixed_point(gain, bound);
                if !(c1.is_finite() && c1 >= fixed) {
                    return Err(config(format!(
                        "one-bit C1 = {c1} must be at least B/(1 - a/2) = {fixed}"
                    )));
                }
                Ok(())
            }
            ControllerSpec::Threshold { d, gain } => {
                ensure_positive("threshold D", d)?;
                ensure_finite("controller gain", gain)
            }
            ControllerSpec::GainChange {
                gain,
                target,
                relaxed,
            } => {
                ensure_finite("controller gain", gain)?;
                ensure_finite("target gain", target)?;
                if relaxed {
                    return Ok(());
                }
                let admissible = 0.0 < gain.abs()
                    && gain.abs() < target.abs()
                    && target.abs() < 1.0
                    && gain.signum() == target.signum();
                if admissible {
                    Ok(())
                } else {
                    Err(config(format!(
                        "gain change requires 0 < |a| < |b| < 1 with equal signs, got a = {gain}, b = {target}"
                    )))
                }
            }
        }
    }

    /// Checks the controller against the plant it is attached to.
    pub fn validate_against(&self, plant_gain: f64, noise: &NoiseModel) -> Result<()> {
        self.validate()?;
        if let Some(g) = self.design_gain() {
            if g != plant_gain {
                return Err(config(format!(
                    "controller designed for gain {g} attached to a plant with gain {plant_gain}"
                )));
            }
        }
        if let ControllerSpec::OneBit { bound, .. } = *self {
            match noise.support_bound() {
                None => {
                    return Err(config(
                        "one-bit controller requires bounded-support noise".to_string(),
                    ))
                }
                Some(b) if b > bound => {
                    return Err(config(format!(
                        "noise support bound {b} exceeds the one-bit design bound {bound}"
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Builds the stateful law used by the simulator. Call `validate` first.
    pub fn law(&self) -> Box<dyn ControlLaw + Send> {
        match *self {
            ControllerSpec::None => Box::new(NoControl),
            ControllerSpec::OneBit { c1, bound, gain } => Box::new(OneBitLaw::new(c1, bound, gain)),
            ControllerSpec::Threshold { d, gain } => Box::new(ThresholdLaw { d, gain }),
            ControllerSpec::GainChange { gain, target, .. } => {
                Box::new(GainChangeLaw { gain, target })
            }
        }
    }
}

/// A control law driven step by step by the simulator.
pub trait ControlLaw {
    /// Control `U_k` for step `k >= 1`, given the previous state `X_{k-1}`.
    fn control(&mut self, k: usize, x_prev: f64) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoControl;

impl ControlLaw for NoControl {
    fn control(&mut self, _k: usize, _x_prev: f64) -> f64 {
        0.0
    }
}

/// Running state of the one-bit controller. `c` holds `C_{k-1}` when step
/// `k` is about to be taken.
#[derive(Debug, Clone)]
pub struct OneBitLaw {
    c: f64,
    bound: f64,
    gain: f64,
}

impl OneBitLaw {
    pub fn new(c1: f64, bound: f64, gain: f64) -> Self {
        Self { c: c1, bound, gain }
    }
}

impl ControlLaw for OneBitLaw {
    fn control(&mut self, k: usize, x_prev: f64) -> f64 {
        // No control at the first step; X_0 is the reference start.
        if k <= 1 {
            return 0.0;
        }
        let u = self.gain / 2.0 * self.c * sign(x_prev);
        self.c = self.gain / 2.0 * self.c + self.bound;
        u
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdLaw {
    pub d: f64,
    pub gain: f64,
}

impl ControlLaw for ThresholdLaw {
    fn control(&mut self, _k: usize, x_prev: f64) -> f64 {
        threshold_control(x_prev, self.d, self.gain)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GainChangeLaw {
    pub gain: f64,
    pub target: f64,
}

impl ControlLaw for GainChangeLaw {
    fn control(&mut self, _k: usize, x_prev: f64) -> f64 {
        (self.gain - self.target) * x_prev
    }
}

/// Single reset applied right after `tau`: `U_{tau+1} = a X_tau`, so that
/// `X_{tau+1} = Z_{tau+1}`. Every other control is zero.
#[derive(Debug, Clone, Copy)]
pub struct ForcedReset {
    pub tau: usize,
    pub gain: f64,
}

impl ControlLaw for ForcedReset {
    fn control(&mut self, k: usize, x_prev: f64) -> f64 {
        if k == self.tau + 1 {
            self.gain * x_prev
        } else {
            0.0
        }
    }
}

/// `sgn` with the convention `sgn(0) = +1`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn ensure_one_bit_gain(a: f64) -> Result<()> {
    if a > 0.0 && a < 2.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "one-bit controller is defined for 0 < a < 2, got {a}"
        )))
    }
}

/// Fixed point `B / (1 - a/2)` of the one-bit magnitude series.
pub fn one_bit_fixed_point(a: f64, bound: f64) -> f64 {
    bound / (1.0 - a / 2.0)
}

/// `C_n = (a/2) C_{n-1} + B`.
pub fn c_next(c_prev: f64, a: f64, bound: f64) -> Result<f64> {
    ensure_one_bit_gain(a)?;
    Ok(a / 2.0 * c_prev + bound)
}

/// Closed form of the magnitude series after `n - 1` updates from `C_1`.
pub fn c_closed_form(c1: f64, a: f64, bound: f64, n: usize) -> Result<f64> {
    ensure_one_bit_gain(a)?;
    if n == 0 {
        return Err(domain("series index n starts at 1"));
    }
    let fixed = one_bit_fixed_point(a, bound);
    if !(c1 >= fixed) {
        return Err(domain(format!("C1 = {c1} is below the fixed point {fixed}")));
    }
    Ok(fixed + (a / 2.0).powi((n - 1) as i32) * (c1 - fixed))
}

/// `U_n = (a/2) C_{n-1} sgn(X_{n-1})`.
pub fn one_bit_control(x_prev: f64, c_prev: f64, a: f64) -> Result<f64> {
    ensure_one_bit_gain(a)?;
    Ok(a / 2.0 * c_prev * sign(x_prev))
}

/// Lower and upper bounds on the time-averaged one-bit control energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn one_bit_energy_bounds(c1: f64, a: f64, bound: f64) -> Result<EnergyBounds> {
    ControllerSpec::OneBit { c1, bound, gain: a }.validate()?;
    Ok(EnergyBounds {
        lower: one_bit_energy(a, bound),
        upper: (a * c1 / 2.0).powi(2),
    })
}

/// Steady-state energy `E_U = (aB / (2 - a))²` of the one-bit controller.
pub fn one_bit_energy(a: f64, bound: f64) -> f64 {
    (a * bound / (2.0 - a)).powi(2)
}

/// `a x` when `|x| >= D`, else 0.
pub fn threshold_control(x_prev: f64, d: f64, a: f64) -> f64 {
    if x_prev.abs() >= d {
        a * x_prev
    } else {
        0.0
    }
}

/// `(a - b) x`, turning a gain-`a` plant into a gain-`b` plant.
pub fn gain_change_control(x_prev: f64, a: f64, b: f64) -> f64 {
    (a - b) * x_prev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_next_examples() {
        let fixed = one_bit_fixed_point(0.7, 1.3);
        assert!((c_next(fixed, 0.7, 1.3).unwrap() - fixed).abs() < 1e-15);
        assert_eq!(c_next(2.0, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(c_next(4.0, 1.0, 1.0).unwrap(), 3.0);
        assert!(matches!(c_next(1.0, 2.0, 1.0), Err(crate::Error::Domain(_))));
        assert!(c_next(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn c_closed_form_examples() {
        let fixed = one_bit_fixed_point(1.2, 0.5);
        for n in [1, 2, 10, 50] {
            assert!((c_closed_form(fixed, 1.2, 0.5, n).unwrap() - fixed).abs() < 1e-15);
        }
        assert_eq!(c_closed_form(3.7, 1.0, 1.0, 1).unwrap(), 3.7);
        // Two iterations by hand: 4 -> 3 -> 2.5.
        let iterated = c_next(c_next(4.0, 1.0, 1.0).unwrap(), 1.0, 1.0).unwrap();
        assert_eq!(iterated, 2.5);
        assert!((c_closed_form(4.0, 1.0, 1.0, 3).unwrap() - 2.5).abs() < 1e-15);
        assert!(c_closed_form(1.0, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn one_bit_control_examples() {
        assert_eq!(one_bit_control(0.3, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(one_bit_control(-0.3, 2.0, 1.0).unwrap(), -1.0);
        assert_eq!(one_bit_control(0.0, 2.0, 1.5).unwrap(), 1.5);
        assert!(one_bit_control(0.0, 2.0, -0.5).is_err());
    }

    #[test]
    fn energy_bound_examples() {
        let b = one_bit_energy_bounds(2.0, 1.0, 1.0).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let b = one_bit_energy_bounds(4.0, 1.0, 1.0).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 4.0));
        assert!(one_bit_energy_bounds(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_control(0.99, 1.0, 0.5), 0.0);
        assert_eq!(threshold_control(1.0, 1.0, 0.5), 0.5);
        assert_eq!(threshold_control(-1.0, 1.0, 0.5), -0.5);
    }

    #[test]
    fn gain_change_examples() {
        assert_eq!(gain_change_control(2.0, 0.4, 0.4), 0.0);
        assert!((gain_change_control(2.0, 0.3, 0.5) + 0.4).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(ControllerSpec::one_bit_at_fixed_point(1.0, 1.0).validate().is_ok());
        assert!(ControllerSpec::OneBit { c1: 1.9, bound: 1.0, gain: 1.0 }
            .validate()
            .is_err());
        assert!(ControllerSpec::OneBit { c1: 10.0, bound: 1.0, gain: 2.5 }
            .validate()
            .is_err());
        assert!(ControllerSpec::Threshold { d: 0.0, gain: 0.5 }.validate().is_err());
        let gc = |gain, target| ControllerSpec::GainChange { gain, target, relaxed: false };
        assert!(gc(0.3, 0.5).validate().is_ok());
        assert!(gc(-0.3, -0.5).validate().is_ok());
        assert!(gc(0.5, 0.3).validate().is_err());
        assert!(gc(0.3, -0.5).validate().is_err());
        assert!(gc(0.0, 0.5).validate().is_err());
        assert!(gc(0.3, 1.0).validate().is_err());
        let relaxed = ControllerSpec::GainChange { gain: 1.5, target: 0.5, relaxed: true };
        assert!(relaxed.validate().is_ok());
    }

    #[test]
    fn one_bit_needs_bounded_noise() {
        let ctl = ControllerSpec::one_bit_at_fixed_point(1.0, 1.0);
        let err = ctl.validate_against(1.0, &NoiseModel::Gaussian { std: 1.0 });
        assert!(matches!(err, Err(crate::Error::Config(_))));
        assert!(ctl
            .validate_against(1.0, &NoiseModel::UniformBounded { bound: 1.0 })
            .is_ok());
        assert!(ctl
            .validate_against(1.0, &NoiseModel::UniformBounded { bound: 1.5 })
            .is_err());
        assert!(ctl
            .validate_against(0.9, &NoiseModel::UniformBounded { bound: 1.0 })
            .is_err());
    }

    #[test]
    fn one_bit_law_skips_first_step() {
        let mut law = OneBitLaw::new(4.0, 1.0, 1.0);
        assert_eq!(law.control(1, 5.0), 0.0);
        // Step 2 uses C_1 = 4, step 3 uses C_2 = 3.
        assert_eq!(law.control(2, 5.0), 2.0);
        assert_eq!(law.control(3, -5.0), -1.5);
    }
}

//! The controlled AR(1) plant `X_k = a X_{k-1} + Z_k - U_k`.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::controllers::{ControlLaw, ControllerSpec};
use crate::error::{config, domain, ensure_finite, Result};
use crate::noise::NoiseModel;
use crate::rng::{rng_from_seed, StreamRng};

/// How `X_0` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitPolicy {
    /// `X_0 = 0`, optionally after running the uncontrolled plant for
    /// `burn_in` discarded steps.
    ZeroStart {
        #[serde(default)]
        burn_in: usize,
    },
    /// `X_0 ~ N(0, σ_Z² / (1 - g²))` where `g` is the closed-loop gain.
    SteadyStateDraw,
}

impl InitPolicy {
    pub const fn zero() -> Self {
        InitPolicy::ZeroStart { burn_in: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Params {
    pub gain: f64,
    pub horizon: usize,
    pub init: InitPolicy,
    pub noise: NoiseModel,
}

impl Ar1Params {
    pub fn new(gain: f64, horizon: usize, init: InitPolicy, noise: NoiseModel) -> Result<Self> {
        let p = Self {
            gain,
            horizon,
            init,
            noise,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("gain", self.gain)?;
        if self.horizon == 0 {
            return Err(config("horizon must be at least 1"));
        }
        self.noise.validate()?;
        if self.init == InitPolicy::SteadyStateDraw && self.gain.abs() >= 1.0 {
            return Err(config(format!(
                "steady-state initialisation needs |a| < 1, got {}",
                self.gain
            )));
        }
        Ok(())
    }

    /// `σ_Z² / (1 - a²)`; meaningful only for `|a| < 1`.
    pub fn stationary_variance(&self) -> f64 {
        self.noise.variance() / (1.0 - self.gain * self.gain)
    }
}

/// One realised run of the plant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub initial_state: f64,
    /// `X_1 .. X_N`.
    pub states: Vec<f64>,
    /// `U_1 .. U_N`.
    pub controls: Vec<f64>,
    /// `Z_1 .. Z_N`.
    pub noises: Vec<f64>,
    pub seed: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// State `X_k` for `0 <= k <= N`.
    pub fn state(&self, k: usize) -> f64 {
        if k == 0 {
            self.initial_state
        } else {
            self.states[k - 1]
        }
    }
}

/// One step of the plant recursion.
pub fn step(x_prev: f64, a: f64, z: f64, u: f64) -> Result<f64> {
    for (name, v) in [("x_prev", x_prev), ("a", a), ("z", z), ("u", u)] {
        ensure_finite(name, v)?;
    }
    Ok(a * x_prev + z - u)
}

/// Runs the plant under `controller` with noise drawn from `seed`.
pub fn simulate(params: &Ar1Params, controller: &ControllerSpec, seed: u64) -> Result<Trajectory> {
    params.validate()?;
    controller.validate_against(params.gain, &params.noise)?;
    let closed_loop = controller.closed_loop_gain(params.gain);
    if params.init == InitPolicy::SteadyStateDraw && closed_loop.abs() >= 1.0 {
        return Err(config(format!(
            "steady-state initialisation needs a stable closed loop, got gain {closed_loop}"
        )));
    }
    let mut law = controller.law();
    Ok(simulate_with_law(params, closed_loop, law.as_mut(), seed))
}

/// Runs the plant under an arbitrary law. `steady_gain` selects the
/// stationary law used by [`InitPolicy::SteadyStateDraw`].
///
/// The initial state is drawn first, then all `N` noise samples, so the
/// noise sequence for a given seed does not depend on the law.
pub fn simulate_with_law(
    params: &Ar1Params,
    steady_gain: f64,
    law: &mut (impl ControlLaw + ?Sized),
    seed: u64,
) -> Trajectory {
    let mut rng = rng_from_seed(seed);
    let x0 = draw_initial_state(params, steady_gain, &mut rng);
    let noises: Vec<f64> = (0..params.horizon)
        .map(|_| params.noise.sample(&mut rng))
        .collect();
    let mut t = replay(params.gain, x0, &noises, law);
    t.seed = seed;
    t
}

fn draw_initial_state(params: &Ar1Params, steady_gain: f64, rng: &mut StreamRng) -> f64 {
    match params.init {
        InitPolicy::ZeroStart { burn_in } => {
            let mut x = 0.0;
            for _ in 0..burn_in {
                x = params.gain * x + params.noise.sample(rng);
            }
            x
        }
        InitPolicy::SteadyStateDraw => {
            let var = params.noise.variance() / (1.0 - steady_gain * steady_gain);
            if var == 0.0 {
                return 0.0;
            }
            Normal::new(0.0, var.sqrt())
                .expect("finite positive standard deviation")
                .sample(rng)
        }
    }
}

/// Applies the recursion to a fixed noise sequence.
pub fn replay(
    gain: f64,
    x0: f64,
    noises: &[f64],
    law: &mut (impl ControlLaw + ?Sized),
) -> Trajectory {
    let n = noises.len();
    let mut states = Vec::with_capacity(n);
    let mut controls = Vec::with_capacity(n);
    let mut x = x0;
    for (i, &z) in noises.iter().enumerate() {
        let u = law.control(i + 1, x);
        x = gain * x + z - u;
        states.push(x);
        controls.push(u);
    }
    Trajectory {
        initial_state: x0,
        states,
        controls,
        noises: noises.to_vec(),
        seed: 0,
    }
}

/// `X_k = Σ_{m=1..k} a^{k-m} (Z_m - U_m)` for a plant started at the origin.
pub fn closed_form_state(a: f64, noises: &[f64], controls: &[f64], k: usize) -> Result<f64> {
    closed_form_state_from(0.0, a, noises, controls, k)
}

/// Closed form with a non-zero start: adds `a^k X_0`.
pub fn closed_form_state_from(
    x0: f64,
    a: f64,
    noises: &[f64],
    controls: &[f64],
    k: usize,
) -> Result<f64> {
    if k == 0 || k > noises.len() || k > controls.len() {
        return Err(domain(format!(
            "k = {k} outside 1..={}",
            noises.len().min(controls.len())
        )));
    }
    let driven: f64 = (1..=k)
        .map(|m| a.powi((k - m) as i32) * (noises[m - 1] - controls[m - 1]))
        .sum();
    Ok(a.powi(k as i32) * x0 + driven)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::NoControl;

    #[test]
    fn step_examples() {
        assert_eq!(step(0.0, 0.5, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(step(1.0, 0.5, 0.25, 0.75).unwrap(), 0.0);
        assert_eq!(step(2.0, 1.5, -0.5, 1.0).unwrap(), 1.5);
        assert!(matches!(
            step(f64::NAN, 0.5, 0.0, 0.0),
            Err(crate::Error::Domain(_))
        ));
        assert!(step(0.0, f64::INFINITY, 0.0, 0.0).is_err());
    }

    #[test]
    fn forced_noise_replay() {
        let t = replay(0.5, 0.0, &[1.0, 0.0, 0.0], &mut NoControl);
        assert_eq!(t.states, vec![1.0, 0.5, 0.25]);
        assert_eq!(t.controls, vec![0.0; 3]);
    }

    #[test]
    fn zero_noise_stays_at_origin() {
        let p = Ar1Params::new(0.9, 50, InitPolicy::zero(), NoiseModel::Zero).unwrap();
        let t = simulate(&p, &ControllerSpec::None, 1).unwrap();
        assert!(t.states.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn configuration_errors() {
        assert!(Ar1Params::new(0.5, 0, InitPolicy::zero(), NoiseModel::Zero).is_err());
        assert!(matches!(
            Ar1Params::new(1.0, 5, InitPolicy::SteadyStateDraw, NoiseModel::Zero),
            Err(crate::Error::Config(_))
        ));
        let p = Ar1Params::new(1.0, 5, InitPolicy::zero(), NoiseModel::Gaussian { std: 1.0 })
            .unwrap();
        let err = simulate(&p, &ControllerSpec::one_bit_at_fixed_point(1.0, 1.0), 0);
        assert!(matches!(err, Err(crate::Error::Config(_))));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_state(0.7, &[0.3], &[0.0], 1).unwrap(), 0.3);
        let z = [0.1, -0.4, 2.0];
        let u = [0.0, 0.5, 0.25];
        assert_eq!(closed_form_state(0.0, &z, &u, 3).unwrap(), 1.75);
        assert!(closed_form_state(0.5, &z, &u, 0).is_err());
        assert!(closed_form_state(0.5, &z, &u, 4).is_err());
    }

    #[test]
    fn burn_in_changes_start() {
        let noise = NoiseModel::Gaussian { std: 1.0 };
        let p = Ar1Params::new(0.5, 4, InitPolicy::ZeroStart { burn_in: 10 }, noise).unwrap();
        let t = simulate(&p, &ControllerSpec::None, 5).unwrap();
        assert_ne!(t.initial_state, 0.0);
    }
}

//! Monte Carlo estimation of false-alarm and miss probabilities, sample
//! covariances of simulated trajectories, and parameter sweeps.
//!
//! Every trial draws from its own stream, seeded from
//! `(master seed, hypothesis, trial index)`, and results are reduced by
//! counting. Serial and parallel runs therefore agree exactly.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::bounds::{
    covert_gain_bound_gain_change, covert_gain_bound_reset, detection_gain_threshold,
    k0_control_energy, k0_residual_energy, n0_magnitude, LogBase,
};
use crate::analytics::covariance::{origin_reset_covariance, reset_covariance, steady_covariance};
use crate::analytics::divergence::{bound_report, kl_gain_change, kl_reset};
use crate::analytics::matrix::{CovMatrix, Provenance};
use crate::ar1::{simulate_with_law, Ar1Params, InitPolicy, Trajectory};
use crate::controllers::{one_bit_energy, one_bit_fixed_point, ControlLaw, ControllerSpec, ForcedReset, NoControl};
use crate::detectors::{
    control_energy_detector, magnitude_detector, reset_lrt_detector, residual_energy_detector,
    GaussianLrt, Hypothesis, MagnitudeConfig,
};
use crate::error::{config, Error, Result};
use crate::rng::{derive_seed, rng_from_seed, StreamTag};

/// When the single forced reset happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResetSchedule {
    /// Reset right after step `tau`.
    Fixed { tau: usize },
    /// `tau` uniform on `1..=N-1`, drawn independently per trial.
    Uniform,
}

/// Covariance assumed by the likelihood-ratio test under H1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrtModel {
    /// Stationary covariance at the controller's target gain.
    GainChange,
    /// Two independent stationary blocks split at the true `tau`.
    Reset,
    /// Stationary block followed by a block restarted from the origin.
    OriginReset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorSpec {
    /// Magnitude test on `X_{n0}`.
    Magnitude { config: MagnitudeConfig, n0: usize },
    /// Energy of the last `window` controls seen through an AWGN channel.
    ControlEnergy {
        sigma_v: f64,
        delta: f64,
        window: usize,
    },
    /// Energy of the last `window` residuals `X_n - a X_{n-1}`. Noise
    /// variance and fourth moment come from the plant's noise model.
    ResidualEnergy { delta: f64, window: usize },
    /// Test on `X_{tau+1}` at the reset time.
    ResetLrt { delta: f64 },
    /// Optimal test between zero-mean Gaussian laws of `X_1..X_N`.
    GaussianLrt { model: LrtModel },
    /// Always returns the same verdict.
    Constant { decision: Hypothesis },
}

impl DetectorSpec {
    /// Target error sum of a detection guarantee, if the detector has one.
    pub fn delta(&self) -> Option<f64> {
        match *self {
            DetectorSpec::Magnitude { config, .. } => Some(config.delta),
            DetectorSpec::ControlEnergy { delta, .. }
            | DetectorSpec::ResidualEnergy { delta, .. }
            | DetectorSpec::ResetLrt { delta } => Some(delta),
            DetectorSpec::GaussianLrt { .. } | DetectorSpec::Constant { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: Ar1Params,
    /// Controller active under H1. Ignored when `forced_reset` is set.
    pub controller: ControllerSpec,
    pub detector: DetectorSpec,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub forced_reset: Option<ResetSchedule>,
}

/// How trials are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// `threads = 0` uses the machine's parallelism.
    Parallel { threads: usize },
    /// Whatever rayon pool is current.
    #[default]
    Ambient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRates {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub sum: f64,
    pub trials: usize,
    pub std_err_alpha: f64,
    pub std_err_beta: f64,
}

impl ErrorRates {
    pub fn from_counts(false_alarms: usize, misses: usize, trials: usize) -> Self {
        let t = trials as f64;
        let alpha_hat = false_alarms as f64 / t;
        let beta_hat = misses as f64 / t;
        Self {
            alpha_hat,
            beta_hat,
            sum: alpha_hat + beta_hat,
            trials,
            std_err_alpha: binomial_std_err(alpha_hat, trials),
            std_err_beta: binomial_std_err(beta_hat, trials),
        }
    }

    pub fn std_err_sum(&self) -> f64 {
        self.std_err_alpha + self.std_err_beta
    }
}

pub fn binomial_std_err(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn drive_law(
    scenario: &Scenario,
    hypothesis: Hypothesis,
    tau: usize,
) -> (Box<dyn ControlLaw + Send>, f64) {
    let a = scenario.params.gain;
    match hypothesis {
        Hypothesis::Uncontrolled => (Box::new(NoControl), a),
        Hypothesis::Controlled => match scenario.forced_reset {
            Some(_) => (Box::new(ForcedReset { tau, gain: a }), a),
            None => (
                scenario.controller.law(),
                scenario.controller.closed_loop_gain(a),
            ),
        },
    }
}

fn hypothesis_tag(h: Hypothesis) -> StreamTag {
    match h {
        Hypothesis::Uncontrolled => StreamTag::Uncontrolled,
        Hypothesis::Controlled => StreamTag::Controlled,
    }
}

fn ensure_gaussian(params: &Ar1Params, what: &str) -> Result<()> {
    if params.noise.is_gaussian() && params.noise.variance() > 0.0 {
        Ok(())
    } else {
        Err(config(format!("{what} requires non-degenerate Gaussian noise")))
    }
}

/// Detector state shared by all trials.
enum Prepared {
    Magnitude(MagnitudeConfig, usize),
    ControlEnergy { sigma_v: f64, delta: f64, window: usize },
    ResidualEnergy { delta: f64, window: usize, sigma2: f64, m4: f64 },
    ResetLrt { delta: f64, sigma: f64 },
    /// One test per reset time (index `tau - 1`), or a single test.
    Lrt(Vec<Option<GaussianLrt>>),
    Constant(Hypothesis),
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config("trials must be at least 1"));
        }
        self.params.validate()?;
        let n = self.params.horizon;
        match self.forced_reset {
            Some(ResetSchedule::Fixed { tau }) => {
                if tau < 1 || tau + 1 > n {
                    return Err(config(format!(
                        "forced reset time {tau} outside 1..={}",
                        n.saturating_sub(1)
                    )));
                }
            }
            Some(ResetSchedule::Uniform) => {
                if n < 2 {
                    return Err(config("forced reset needs a horizon of at least 2"));
                }
            }
            None => {
                self.controller
                    .validate_against(self.params.gain, &self.params.noise)?;
                let g = self.controller.closed_loop_gain(self.params.gain);
                if self.params.init == InitPolicy::SteadyStateDraw && g.abs() >= 1.0 {
                    return Err(config(format!(
                        "steady-state initialisation needs a stable closed loop, got gain {g}"
                    )));
                }
            }
        }
        match self.detector {
            DetectorSpec::Magnitude { config: cfg, n0 } => {
                cfg.validate()?;
                if n0 == 0 || n0 > n {
                    return Err(config(format!("n0 = {n0} outside 1..={n}")));
                }
            }
            DetectorSpec::ControlEnergy { window, .. } | DetectorSpec::ResidualEnergy { window, .. } => {
                if window == 0 || window + 1 > n {
                    return Err(config(format!(
                        "energy window {window} needs 1 <= K <= horizon - 1 = {}",
                        n.saturating_sub(1)
                    )));
                }
            }
            DetectorSpec::ResetLrt { .. } => {
                if self.forced_reset.is_none() {
                    return Err(config("reset test requires a forced reset schedule"));
                }
                if self.params.gain.abs() >= 1.0 {
                    return Err(config("reset test requires |a| < 1"));
                }
            }
            DetectorSpec::GaussianLrt { model } => {
                ensure_gaussian(&self.params, "the likelihood-ratio test")?;
                if self.params.init != InitPolicy::SteadyStateDraw {
                    return Err(config(
                        "the likelihood-ratio test assumes a steady-state start",
                    ));
                }
                match model {
                    LrtModel::GainChange => {
                        if self.forced_reset.is_some()
                            || !matches!(self.controller, ControllerSpec::GainChange { .. })
                        {
                            return Err(config("gain-change model requires a gain-change controller"));
                        }
                    }
                    LrtModel::Reset | LrtModel::OriginReset => {
                        if self.forced_reset.is_none() {
                            return Err(config("reset model requires a forced reset schedule"));
                        }
                    }
                }
            }
            DetectorSpec::Constant { .. } => {}
        }
        Ok(())
    }

    fn prepare(&self) -> Result<Prepared> {
        let p = &self.params;
        let n = p.horizon;
        Ok(match self.detector {
            DetectorSpec::Magnitude { config, n0 } => Prepared::Magnitude(config, n0),
            DetectorSpec::ControlEnergy {
                sigma_v,
                delta,
                window,
            } => Prepared::ControlEnergy {
                sigma_v,
                delta,
                window,
            },
            DetectorSpec::ResidualEnergy { delta, window } => Prepared::ResidualEnergy {
                delta,
                window,
                sigma2: p.noise.variance(),
                m4: p.noise.fourth_moment(),
            },
            DetectorSpec::ResetLrt { delta } => Prepared::ResetLrt {
                delta,
                sigma: p.noise.variance().sqrt(),
            },
            DetectorSpec::GaussianLrt { model } => {
                let sigma = p.noise.variance().sqrt();
                let s0 = steady_covariance(p.gain, sigma, n)?;
                match model {
                    LrtModel::GainChange => {
                        let b = self.controller.closed_loop_gain(p.gain);
                        let s1 = steady_covariance(b, sigma, n)?;
                        Prepared::Lrt(vec![Some(GaussianLrt::new(&s0, &s1)?)])
                    }
                    LrtModel::Reset | LrtModel::OriginReset => {
                        let build = |tau: usize| -> Result<GaussianLrt> {
                            let s1 = if model == LrtModel::Reset {
                                reset_covariance(p.gain, sigma, n, tau)?
                            } else {
                                origin_reset_covariance(p.gain, sigma, n, tau)?
                            };
                            GaussianLrt::new(&s0, &s1)
                        };
                        let mut tests: Vec<Option<GaussianLrt>> = (1..n).map(|_| None).collect();
                        match self.forced_reset {
                            Some(ResetSchedule::Fixed { tau }) => tests[tau - 1] = Some(build(tau)?),
                            _ => {
                                for tau in 1..n {
                                    tests[tau - 1] = Some(build(tau)?);
                                }
                            }
                        }
                        Prepared::Lrt(tests)
                    }
                }
            }
            DetectorSpec::Constant { decision } => Prepared::Constant(decision),
        })
    }

    fn reset_time(&self, trial_seed: u64) -> usize {
        match self.forced_reset {
            Some(ResetSchedule::Fixed { tau }) => tau,
            Some(ResetSchedule::Uniform) => {
                let mut rng = rng_from_seed(derive_seed(trial_seed, StreamTag::Auxiliary, 0));
                rng.random_range(1..self.params.horizon)
            }
            None => 0,
        }
    }

    /// Simulates trial `index` under `hypothesis`. Also returns the reset
    /// time used (0 without a forced reset).
    pub fn trajectory(&self, hypothesis: Hypothesis, index: u64) -> (Trajectory, usize) {
        let seed = derive_seed(self.master_seed, hypothesis_tag(hypothesis), index);
        let tau = self.reset_time(seed);
        let (mut law, steady_gain) = drive_law(self, hypothesis, tau);
        (
            simulate_with_law(&self.params, steady_gain, law.as_mut(), seed),
            tau,
        )
    }

    fn decide(&self, prepared: &Prepared, hypothesis: Hypothesis, index: u64) -> Result<Hypothesis> {
        if let Prepared::Constant(d) = prepared {
            return Ok(*d);
        }
        let (t, tau) = self.trajectory(hypothesis, index);
        let n = t.len();
        let verdict = match prepared {
            Prepared::Magnitude(cfg, n0) => magnitude_detector(t.state(*n0), cfg)?,
            Prepared::ControlEnergy {
                sigma_v,
                delta,
                window,
            } => {
                let channel = derive_seed(t.seed, StreamTag::Channel, 0);
                let mut rng = rng_from_seed(channel);
                let noise = rand_distr::Normal::new(0.0, *sigma_v)
                    .map_err(|e| config(format!("channel noise: {e}")))?;
                let observed: Vec<f64> = t.controls[n - window..]
                    .iter()
                    .map(|u| u + rng.sample(noise))
                    .collect();
                control_energy_detector(&observed, *sigma_v, *delta)?
            }
            Prepared::ResidualEnergy {
                delta,
                window,
                sigma2,
                m4,
            } => {
                let states: Vec<f64> = (n - window..=n).map(|k| t.state(k)).collect();
                residual_energy_detector(&states, self.params.gain, *sigma2, *m4, *delta)?
            }
            Prepared::ResetLrt { delta, sigma } => {
                reset_lrt_detector(t.state(tau + 1), self.params.gain, *sigma, *delta)?
            }
            Prepared::Lrt(tests) => {
                let test = if tests.len() == 1 && self.forced_reset.is_none() {
                    tests[0].as_ref()
                } else {
                    tests[tau - 1].as_ref()
                };
                test.expect("test prepared for every reachable reset time")
                    .decide(&t.states)?
            }
            Prepared::Constant(_) => unreachable!(),
        };
        Ok(verdict.decision)
    }
}

fn count_wrong(
    scenario: &Scenario,
    prepared: &Prepared,
    hypothesis: Hypothesis,
    execution: Execution,
) -> Result<usize> {
    let wrong = |i: usize| -> Result<usize> {
        let d = scenario.decide(prepared, hypothesis, i as u64)?;
        Ok(usize::from(d != hypothesis))
    };
    let trials = scenario.trials;
    match execution {
        Execution::Serial => (0..trials).map(wrong).sum(),
        Execution::Ambient => (0..trials).into_par_iter().map(wrong).sum(),
        Execution::Parallel { threads } => with_pool(threads, || {
            (0..trials).into_par_iter().map(wrong).sum()
        })?,
    }
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs `trials` trajectories under each hypothesis and counts detector
/// errors.
pub fn estimate_error_rates(scenario: &Scenario) -> Result<ErrorRates> {
    estimate_error_rates_with(scenario, Execution::default())
}

pub fn estimate_error_rates_with(scenario: &Scenario, execution: Execution) -> Result<ErrorRates> {
    scenario.validate()?;
    let prepared = scenario.prepare()?;
    let false_alarms = count_wrong(scenario, &prepared, Hypothesis::Uncontrolled, execution)?;
    let misses = count_wrong(scenario, &prepared, Hypothesis::Controlled, execution)?;
    Ok(ErrorRates::from_counts(false_alarms, misses, scenario.trials))
}

/// What acts on the plant while sampling a covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drive {
    Uncontrolled,
    Controller { spec: ControllerSpec },
    ForcedReset { tau: usize },
}

/// Sample covariance of `X_1..X_N` with entrywise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCovariance {
    pub cov: CovMatrix,
    pub std_err: DMatrix<f64>,
    pub trials: usize,
}

impl EmpiricalCovariance {
    /// Largest `|empirical - reference| / std_err` over all entries. Entries
    /// with zero standard error count only if they differ.
    pub fn max_z_score(&self, reference: &CovMatrix) -> f64 {
        let e = self.cov.matrix();
        let r = reference.matrix();
        let mut worst: f64 = 0.0;
        for ((x, y), s) in e.iter().zip(r.iter()).zip(self.std_err.iter()) {
            let d = (x - y).abs();
            let z = if *s > 0.0 {
                d / s
            } else if d > 1e-12 {
                f64::INFINITY
            } else {
                0.0
            };
            worst = worst.max(z);
        }
        worst
    }
}

/// Unbiased sample covariance of the uncontrolled state vector.
pub fn empirical_covariance(params: &Ar1Params, trials: usize, seed: u64) -> Result<CovMatrix> {
    Ok(empirical_covariance_under(params, &Drive::Uncontrolled, trials, seed)?.cov)
}

pub fn empirical_covariance_under(
    params: &Ar1Params,
    drive: &Drive,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalCovariance> {
    params.validate()?;
    if trials < 2 {
        return Err(config("empirical covariance needs at least 2 trials"));
    }
    let n = params.horizon;
    let steady_gain = match drive {
        Drive::Uncontrolled | Drive::ForcedReset { .. } => params.gain,
        Drive::Controller { spec } => {
            spec.validate_against(params.gain, &params.noise)?;
            spec.closed_loop_gain(params.gain)
        }
    };
    if let Drive::ForcedReset { tau } = *drive {
        if tau < 1 || tau + 1 > n {
            return Err(config(format!("forced reset time {tau} outside 1..={}", n - 1)));
        }
    }
    if params.init == InitPolicy::SteadyStateDraw && steady_gain.abs() >= 1.0 {
        return Err(config("steady-state initialisation needs a stable closed loop"));
    }
    let samples: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, StreamTag::Auxiliary, i as u64);
            let mut law: Box<dyn ControlLaw + Send> = match *drive {
                Drive::Uncontrolled => Box::new(NoControl),
                Drive::Controller { spec } => spec.law(),
                Drive::ForcedReset { tau } => Box::new(ForcedReset {
                    tau,
                    gain: params.gain,
                }),
            };
            simulate_with_law(params, steady_gain, law.as_mut(), s).states
        })
        .collect();

    let t = trials as f64;
    let mut mean = vec![0.0; n];
    for x in &samples {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= t);

    let mut cov = DMatrix::<f64>::zeros(n, n);
    let mut second = DMatrix::<f64>::zeros(n, n);
    for x in &samples {
        for i in 0..n {
            let di = x[i] - mean[i];
            for j in i..n {
                let p = di * (x[j] - mean[j]);
                cov[(i, j)] += p;
                second[(i, j)] += p * p;
            }
        }
    }
    let mut std_err = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let m1 = cov[(i, j)] / t;
            let var = (second[(i, j)] / t - m1 * m1).max(0.0) * t / (t - 1.0);
            let c = cov[(i, j)] / (t - 1.0);
            let se = (var / t).sqrt();
            cov[(i, j)] = c;
            cov[(j, i)] = c;
            std_err[(i, j)] = se;
            std_err[(j, i)] = se;
        }
    }
    Ok(EmpiricalCovariance {
        cov: CovMatrix::new(cov, Provenance::Empirical)?,
        std_err,
        trials,
    })
}

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Plant gain `a`.
    A,
    /// Target gain `b` of a gain-change controller.
    B,
    /// Threshold controller trigger level.
    D,
    /// Detector error target `δ`.
    Delta,
    /// Energy-detector window length.
    K,
    /// Channel SNR `E_U / σ_v²` of the control-energy test.
    Snr,
    /// Covertness level; places the controller at 95% of the covert bound.
    Eps,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "a" | "A" => Axis::A,
            "b" | "B" => Axis::B,
            "d" | "D" => Axis::D,
            "delta" => Axis::Delta,
            "k" | "K" => Axis::K,
            "snr" | "SNR" => Axis::Snr,
            "eps" | "epsilon" => Axis::Eps,
            other => return Err(config(format!("unknown sweep axis '{other}'"))),
        })
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::A => "a",
            Axis::B => "b",
            Axis::D => "D",
            Axis::Delta => "delta",
            Axis::K => "K",
            Axis::Snr => "snr",
            Axis::Eps => "eps",
        })
    }
}

/// Fraction of the covert gain bound used by [`Axis::Eps`].
pub const EPS_BOUND_FRACTION: f64 = 0.95;

fn window_from(value: f64) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 && value < usize::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(config(format!("window length must be a positive integer, got {value}")))
    }
}

fn one_bit_energy_of(controller: &ControllerSpec) -> Result<f64> {
    match *controller {
        ControllerSpec::OneBit { bound, gain, .. } => Ok(one_bit_energy(gain, bound)),
        _ => Err(config("control energy is defined for the one-bit controller only")),
    }
}

fn set_plant_gain(s: &mut Scenario, a: f64) {
    s.params.gain = a;
    match &mut s.controller {
        ControllerSpec::None => {}
        ControllerSpec::OneBit { c1, bound, gain } => {
            *gain = a;
            if a > 0.0 && a < 2.0 {
                *c1 = c1.max(one_bit_fixed_point(a, *bound));
            }
        }
        ControllerSpec::Threshold { gain, .. } | ControllerSpec::GainChange { gain, .. } => *gain = a,
    }
}

impl Axis {
    /// Copy of `template` with this axis set to `value`.
    pub fn apply(self, template: &Scenario, value: f64, base: LogBase) -> Result<Scenario> {
        let mut s = *template;
        match self {
            Axis::A => set_plant_gain(&mut s, value),
            Axis::B => match &mut s.controller {
                ControllerSpec::GainChange { target, .. } => *target = value,
                _ => return Err(config("axis b requires a gain-change controller")),
            },
            Axis::D => match &mut s.controller {
                ControllerSpec::Threshold { d, .. } => *d = value,
                _ => return Err(config("axis D requires a threshold controller")),
            },
            Axis::Delta => match &mut s.detector {
                DetectorSpec::Magnitude { config: cfg, .. } => {
                    let min = MagnitudeConfig::minimal(cfg.gamma, cfg.c, value)?;
                    cfg.delta = value;
                    cfg.m = cfg.m.max(min.m);
                }
                DetectorSpec::ControlEnergy { delta, .. }
                | DetectorSpec::ResidualEnergy { delta, .. }
                | DetectorSpec::ResetLrt { delta } => *delta = value,
                _ => return Err(config("axis delta requires a thresholded detector")),
            },
            Axis::K => match &mut s.detector {
                DetectorSpec::ControlEnergy { window, .. }
                | DetectorSpec::ResidualEnergy { window, .. } => {
                    *window = window_from(value)?;
                    s.params.horizon = s.params.horizon.max(*window + 1);
                }
                _ => return Err(config("axis K requires an energy detector")),
            },
            Axis::Snr => {
                if !(value > 0.0) {
                    return Err(config(format!("SNR must be positive, got {value}")));
                }
                let energy = one_bit_energy_of(&s.controller)?;
                match &mut s.detector {
                    DetectorSpec::ControlEnergy { sigma_v, .. } => *sigma_v = (energy / value).sqrt(),
                    _ => return Err(config("axis snr requires the control-energy detector")),
                }
            }
            Axis::Eps => {
                if s.forced_reset.is_some() {
                    let a = EPS_BOUND_FRACTION * covert_gain_bound_reset(value, base)?;
                    set_plant_gain(&mut s, a);
                } else {
                    let a = s.params.gain;
                    match &mut s.controller {
                        ControllerSpec::GainChange { target, .. } => {
                            let bound = covert_gain_bound_gain_change(a, value)?;
                            let sign = if a < 0.0 { -1.0 } else { 1.0 };
                            *target = sign * EPS_BOUND_FRACTION * bound;
                        }
                        _ => {
                            return Err(config(
                                "axis eps requires a gain-change controller or a forced reset",
                            ))
                        }
                    }
                }
            }
        }
        Ok(s)
    }
}

/// Whether a bound constrains the error sum from below (covertness) or
/// from above (detection).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `α + β >= value` for every test.
    LowerOnSum,
    /// `α + β <= value` for this detector once the guarantee applies.
    UpperOnSum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticBound {
    pub name: String,
    pub value: f64,
    pub kind: BoundKind,
    /// For detection guarantees: whether the scenario meets the window,
    /// time or gain requirement. Always true for covertness bounds.
    pub applicable: bool,
    /// The requirement itself (`K0`, `n0` or the minimal gain), if any.
    pub requirement: Option<f64>,
}

/// Closed-form bound matching the scenario's detector, if one exists.
pub fn analytic_bound(s: &Scenario) -> Result<Option<AnalyticBound>> {
    let p = &s.params;
    let n = p.horizon;
    let detection = |name: &str, delta: f64, applicable: bool, req: f64| AnalyticBound {
        name: name.to_string(),
        value: delta,
        kind: BoundKind::UpperOnSum,
        applicable,
        requirement: Some(req),
    };
    Ok(Some(match s.detector {
        DetectorSpec::GaussianLrt { model } => {
            let kl = match model {
                LrtModel::GainChange => kl_gain_change(p.gain, s.controller.closed_loop_gain(p.gain), n)?,
                LrtModel::Reset | LrtModel::OriginReset => kl_reset(p.gain)?,
            };
            let name = match model {
                LrtModel::GainChange => "gain_change_error_sum_lower",
                _ => "reset_error_sum_lower",
            };
            AnalyticBound {
                name: name.to_string(),
                value: bound_report(kl)?.error_sum_lower,
                kind: BoundKind::LowerOnSum,
                applicable: true,
                requirement: None,
            }
        }
        DetectorSpec::ControlEnergy {
            sigma_v,
            delta,
            window,
        } => {
            let snr = one_bit_energy_of(&s.controller)? / (sigma_v * sigma_v);
            let k0 = k0_control_energy(snr, delta)?;
            detection("control_energy_k0", delta, window as f64 >= k0.ceil(), k0)
        }
        DetectorSpec::ResidualEnergy { delta, window } => {
            let energy = one_bit_energy_of(&s.controller)?;
            let k0 = k0_residual_energy(energy, p.noise.variance(), p.noise.fourth_moment(), delta)?.k0;
            detection("residual_energy_k0", delta, window as f64 >= k0.ceil(), k0)
        }
        DetectorSpec::ResetLrt { delta } => {
            let g = detection_gain_threshold(delta)?;
            detection("reset_min_detect_gain", delta, p.gain.abs() >= g, g)
        }
        DetectorSpec::Magnitude { config: cfg, n0 } => {
            let req = n0_magnitude(p.gain, p.noise.variance().sqrt(), cfg.m, cfg.delta)?;
            let ok = p.noise.is_gaussian() && p.init == InitPolicy::zero() && n0 as f64 >= req.ceil();
            detection("magnitude_n0", cfg.delta, ok, req)
        }
        DetectorSpec::Constant { .. } => return Ok(None),
    }))
}

/// Named comparison between empirical rates and an analytic bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCheck {
    /// `α̂ + β̂ >= bound - 4 (se_α + se_β)`.
    ErrorSumLower,
    /// The detection guarantee applies and `α̂ + β̂ <= δ`.
    MustDetect,
}

/// Standard errors of slack allowed by [`BoundCheck::ErrorSumLower`].
pub const LOWER_BOUND_SLACK_SE: f64 = 4.0;

impl BoundCheck {
    pub fn name(self) -> &'static str {
        match self {
            BoundCheck::ErrorSumLower => "error_sum_lower",
            BoundCheck::MustDetect => "must_detect",
        }
    }

    pub fn evaluate(self, rates: &ErrorRates, bound: Option<&AnalyticBound>) -> bool {
        let Some(b) = bound else { return false };
        match (self, b.kind) {
            (BoundCheck::ErrorSumLower, BoundKind::LowerOnSum) => {
                rates.sum >= b.value - LOWER_BOUND_SLACK_SE * rates.std_err_sum()
            }
            (BoundCheck::MustDetect, BoundKind::UpperOnSum) => b.applicable && rates.sum <= b.value,
            _ => false,
        }
    }
}

impl std::str::FromStr for BoundCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error_sum_lower" => Ok(BoundCheck::ErrorSumLower),
            "must_detect" => Ok(BoundCheck::MustDetect),
            other => Err(config(format!("unknown bound check '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub rates: ErrorRates,
    pub bound: Option<AnalyticBound>,
}

/// One independent estimate per value, in the order given.
pub fn sweep(template: &Scenario, axis: Axis, values: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_with(template, axis, values, LogBase::Natural, Execution::default())
}

pub fn sweep_with(
    template: &Scenario,
    axis: Axis,
    values: &[f64],
    base: LogBase,
    execution: Execution,
) -> Result<Vec<SweepRow>> {
    values
        .iter()
        .map(|&value| {
            let s = axis.apply(template, value, base)?;
            Ok(SweepRow {
                value,
                rates: estimate_error_rates_with(&s, execution)?,
                bound: analytic_bound(&s)?,
            })
        })
        .collect()
}

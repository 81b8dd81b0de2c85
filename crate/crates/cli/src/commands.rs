//! Subcommand implementations. Each resolves its settings (defaults, then
//! the config-file table, then flags, then `--set`), runs the library and
//! returns a [`Report`].

use covertctl_core::analytics::{
    self, bound_report, covert_gain_bound_gain_change, covert_gain_bound_reset,
    detection_gain_threshold, k0_control_energy, k0_residual_energy, kl_gain_change, kl_reset,
    n0_magnitude, CovMatrix,
};
use covertctl_core::ar1::simulate_with_law;
use covertctl_core::controllers::{one_bit_energy, one_bit_fixed_point, ForcedReset};
use covertctl_core::detectors::{Hypothesis, MagnitudeConfig};
use covertctl_core::montecarlo::{
    analytic_bound, estimate_error_rates_with, sweep_with, AnalyticBound, Axis, BoundCheck,
    DetectorSpec, ErrorRates, LrtModel, ResetSchedule, Scenario,
};
use covertctl_core::{simulate as simulate_plant, Ar1Params, ControllerSpec, InitPolicy, NoiseModel};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::config::{flags_table, merge, typed, ConfigFile};
use crate::output::{format_g17, format_short, opt_g17, to_csv, to_json};
use crate::{
    BoundsFlags, CliError, CovarianceFlags, Globals, KlFlags, Overrides, Report, ScenarioFlags,
};

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    Uniform,
    Truncated,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Zero,
    Steady,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    None,
    OneBit,
    Threshold,
    GainChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Magnitude,
    ControlEnergy,
    ResidualEnergy,
    ResetLrt,
    GaussianLrt,
    AlwaysControlled,
    AlwaysUncontrolled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetKind {
    Uniform,
    Fixed,
}

fn default_name() -> String {
    "scenario".into()
}
fn default_a() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_delta() -> f64 {
    0.1
}
fn default_trials() -> usize {
    10_000
}

/// Declarative scenario. After [`ScenarioConfig::build`] every derived
/// default is filled in, so serialising it records the full setup.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_a")]
    pub a: f64,
    pub n: Option<usize>,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default = "one")]
    pub sigma: f64,
    pub bound: Option<f64>,
    pub init: Option<InitKind>,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default)]
    pub controller: ControllerKind,
    pub b: Option<f64>,
    #[serde(default)]
    pub relaxed: bool,
    pub d: Option<f64>,
    pub c1: Option<f64>,
    pub design_bound: Option<f64>,
    pub detector: Option<DetectorKind>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub sigma_v: Option<f64>,
    pub snr: Option<f64>,
    pub window: Option<usize>,
    pub n0: Option<usize>,
    pub m: Option<f64>,
    #[serde(default = "two")]
    pub gamma: f64,
    pub c: Option<f64>,
    pub model: Option<LrtModel>,
    pub reset: Option<ResetKind>,
    pub tau: Option<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub checks: Vec<String>,
    pub axis: Option<String>,
    #[serde(default)]
    pub values: Vec<f64>,
}

impl ScenarioConfig {
    fn noise_model(&mut self) -> NoiseModel {
        match self.noise {
            NoiseKind::Gaussian => NoiseModel::Gaussian { std: self.sigma },
            NoiseKind::Uniform => NoiseModel::UniformBounded {
                bound: *self.bound.get_or_insert(1.0),
            },
            NoiseKind::Truncated => {
                let std = self.sigma;
                NoiseModel::TruncatedGaussian {
                    std,
                    bound: *self.bound.get_or_insert(4.0 * std),
                }
            }
            NoiseKind::Zero => NoiseModel::Zero,
        }
    }

    fn controller_spec(&mut self, noise: &NoiseModel) -> Result<ControllerSpec, CliError> {
        let a = self.a;
        Ok(match self.controller {
            ControllerKind::None => ControllerSpec::None,
            ControllerKind::OneBit => {
                let bound = match self.design_bound.or(noise.support_bound()) {
                    Some(b) => b,
                    None => return Err(cfg_err("one_bit needs design_bound or bounded noise")),
                };
                self.design_bound = Some(bound);
                let c1 = *self.c1.get_or_insert(one_bit_fixed_point(a, bound));
                ControllerSpec::OneBit { c1, bound, gain: a }
            }
            ControllerKind::Threshold => ControllerSpec::Threshold {
                d: self.d.ok_or_else(|| cfg_err("threshold controller needs d"))?,
                gain: a,
            },
            ControllerKind::GainChange => ControllerSpec::GainChange {
                gain: a,
                target: self.b.ok_or_else(|| cfg_err("gain_change controller needs b"))?,
                relaxed: self.relaxed,
            },
        })
    }

    fn energy_window(&mut self) -> Result<usize, CliError> {
        let w = match (self.window, self.n) {
            (Some(w), _) => w,
            (None, Some(n)) if n >= 2 => n - 1,
            _ => return Err(cfg_err("energy detectors need window (or n >= 2)")),
        };
        self.window = Some(w);
        self.n.get_or_insert(w + 1);
        Ok(w)
    }

    fn one_bit_energy(&self) -> Option<f64> {
        match (self.controller, self.design_bound) {
            (ControllerKind::OneBit, Some(b)) => Some(one_bit_energy(self.a, b)),
            _ => None,
        }
    }

    /// Fills every derived default and assembles the library scenario.
    pub fn build(&mut self, seed: u64, need_detector: bool) -> Result<Scenario, CliError> {
        let noise = self.noise_model();
        let detector_kind = match self.detector {
            Some(d) => d,
            None if need_detector => return Err(cfg_err("no detector configured")),
            None => DetectorKind::AlwaysUncontrolled,
        };

        if detector_kind == DetectorKind::GaussianLrt && self.model.is_none() {
            self.model = Some(if self.controller == ControllerKind::GainChange {
                LrtModel::GainChange
            } else {
                LrtModel::Reset
            });
        }
        let wants_reset = detector_kind == DetectorKind::ResetLrt
            || (detector_kind == DetectorKind::GaussianLrt && self.model != Some(LrtModel::GainChange));
        let forced_reset = match (self.reset, self.tau) {
            (Some(ResetKind::Uniform), Some(_)) => {
                return Err(cfg_err("tau given together with reset = \"uniform\""))
            }
            (Some(ResetKind::Fixed), None) => return Err(cfg_err("reset = \"fixed\" needs tau")),
            (_, Some(tau)) => {
                self.reset = Some(ResetKind::Fixed);
                Some(ResetSchedule::Fixed { tau })
            }
            (Some(ResetKind::Uniform), None) => Some(ResetSchedule::Uniform),
            (None, None) if wants_reset => {
                self.reset = Some(ResetKind::Uniform);
                Some(ResetSchedule::Uniform)
            }
            (None, None) => None,
        };
        let init = *self.init.get_or_insert(
            if matches!(detector_kind, DetectorKind::GaussianLrt | DetectorKind::ResetLrt) {
                InitKind::Steady
            } else {
                InitKind::Zero
            },
        );
        let controller = if forced_reset.is_some() && self.controller == ControllerKind::None {
            ControllerSpec::None
        } else {
            self.controller_spec(&noise)?
        };

        let detector = match detector_kind {
            DetectorKind::Magnitude => {
                let c = match (self.c, self.controller, self.b) {
                    (Some(c), ..) => c,
                    (None, ControllerKind::GainChange, Some(b)) if b.abs() < 1.0 => {
                        noise.variance() / (1.0 - b * b)
                    }
                    _ => return Err(cfg_err("magnitude detector needs the moment bound c")),
                };
                self.c = Some(c);
                let config = match self.m {
                    Some(m) => MagnitudeConfig::new(m, self.gamma, c, self.delta)?,
                    None => MagnitudeConfig::minimal(self.gamma, c, self.delta)?,
                };
                self.m = Some(config.m);
                let n0 = match self.n0 {
                    Some(n0) => n0,
                    None => {
                        let t = n0_magnitude(self.a, noise.variance().sqrt(), config.m, self.delta)?;
                        t.ceil().max(1.0) as usize
                    }
                };
                self.n0 = Some(n0);
                self.n.get_or_insert(n0);
                DetectorSpec::Magnitude { config, n0 }
            }
            DetectorKind::ControlEnergy => {
                let window = self.energy_window()?;
                let energy = self.one_bit_energy();
                let sigma_v = match (self.sigma_v, self.snr, energy) {
                    (Some(s), ..) => s,
                    (None, Some(snr), Some(e)) => (e / snr).sqrt(),
                    (None, Some(_), None) => {
                        return Err(cfg_err("snr needs a one_bit controller to fix the control energy"))
                    }
                    (None, None, _) => 1.0,
                };
                self.sigma_v = Some(sigma_v);
                if let (None, Some(e)) = (self.snr, energy) {
                    self.snr = Some(e / (sigma_v * sigma_v));
                }
                DetectorSpec::ControlEnergy {
                    sigma_v,
                    delta: self.delta,
                    window,
                }
            }
            DetectorKind::ResidualEnergy => DetectorSpec::ResidualEnergy {
                delta: self.delta,
                window: self.energy_window()?,
            },
            DetectorKind::ResetLrt => DetectorSpec::ResetLrt { delta: self.delta },
            DetectorKind::GaussianLrt => DetectorSpec::GaussianLrt {
                model: self.model.expect("set above"),
            },
            DetectorKind::AlwaysControlled => DetectorSpec::Constant {
                decision: Hypothesis::Controlled,
            },
            DetectorKind::AlwaysUncontrolled => DetectorSpec::Constant {
                decision: Hypothesis::Uncontrolled,
            },
        };
        let n = *self.n.get_or_insert(10);
        let init = match init {
            InitKind::Zero => InitPolicy::ZeroStart {
                burn_in: self.burn_in,
            },
            InitKind::Steady => InitPolicy::SteadyStateDraw,
        };
        let params = Ar1Params::new(self.a, n, init, noise)?;
        let scenario = Scenario {
            params,
            controller,
            detector,
            trials: self.trials,
            master_seed: seed,
            forced_reset,
        };
        if need_detector {
            scenario.validate()?;
        }
        Ok(scenario)
    }

    fn bound_checks(&self) -> Result<Vec<BoundCheck>, CliError> {
        self.checks
            .iter()
            .map(|c| c.parse::<BoundCheck>().map_err(CliError::from))
            .collect()
    }
}

fn scenario_config(section: &str, file: &ConfigFile, flags: &ScenarioFlags) -> Result<ScenarioConfig, CliError> {
    let table = merge(file.section(section), flags_table(flags), &flags.overrides.set)?;
    typed(section, table)
}

/// The stable per-scenario record.
#[derive(Debug, Clone, Serialize)]
pub struct RatesRecord {
    pub scenario: Json,
    pub seed: u64,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub sum: f64,
    pub bound_name: Option<String>,
    pub bound_value: Option<f64>,
    pub pass: bool,
}

fn record(scenario: Json, seed: u64, rates: &ErrorRates, bound: Option<&AnalyticBound>, pass: bool) -> RatesRecord {
    RatesRecord {
        scenario,
        seed,
        alpha_hat: rates.alpha_hat,
        beta_hat: rates.beta_hat,
        sum: rates.sum,
        bound_name: bound.map(|b| b.name.clone()),
        bound_value: bound.map(|b| b.value),
        pass,
    }
}

fn rates_line(label: &str, r: &ErrorRates) -> String {
    format!(
        "{label}: alpha_hat={} beta_hat={} sum={} (se {}, {} trials per hypothesis)",
        format_short(r.alpha_hat),
        format_short(r.beta_hat),
        format_short(r.sum),
        format_short(r.std_err_sum()),
        r.trials
    )
}

fn check_lines(checks: &[BoundCheck], r: &ErrorRates, bound: Option<&AnalyticBound>) -> (Vec<String>, bool) {
    let mut lines = Vec::new();
    let mut all = true;
    for c in checks {
        let ok = c.evaluate(r, bound);
        all &= ok;
        let detail = match bound {
            Some(b) => {
                let req = b
                    .requirement
                    .map(|v| format!(", requirement {}", format_short(v)))
                    .unwrap_or_default();
                format!("{} = {}{req}", b.name, format_short(b.value))
            }
            None => "no analytic bound".to_string(),
        };
        lines.push(format!(
            "check {}: sum={} vs {detail} -> {}",
            c.name(),
            format_short(r.sum),
            if ok { "PASS" } else { "FAIL" }
        ));
    }
    (lines, all)
}

fn to_value<T: Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("config types serialise")
}

pub fn detect(file: &ConfigFile, flags: &ScenarioFlags, g: &Globals) -> Result<Report, CliError> {
    let mut cfg = scenario_config("detect", file, flags)?;
    let checks = cfg.bound_checks()?;
    let scenario = cfg.build(g.seed, true)?;
    let rates = estimate_error_rates_with(&scenario, g.execution)?;
    let bound = analytic_bound(&scenario)?;
    let (mut lines, pass) = check_lines(&checks, &rates, bound.as_ref());
    lines.insert(0, rates_line(&cfg.name, &rates));
    if checks.is_empty() {
        if let Some(b) = &bound {
            lines.push(format!("bound {} = {}", b.name, format_short(b.value)));
        }
    }
    let rec = record(to_value(&cfg), g.seed, &rates, bound.as_ref(), pass);
    let csv = to_csv(
        &[
            "scenario", "seed", "alpha_hat", "beta_hat", "sum", "std_err_alpha", "std_err_beta",
            "bound_name", "bound_value", "pass",
        ],
        &[vec![
            cfg.name.clone(),
            g.seed.to_string(),
            format_g17(rates.alpha_hat),
            format_g17(rates.beta_hat),
            format_g17(rates.sum),
            format_g17(rates.std_err_alpha),
            format_g17(rates.std_err_beta),
            rec.bound_name.clone().unwrap_or_default(),
            opt_g17(rec.bound_value),
            pass.to_string(),
        ]],
    );
    Ok(Report {
        json: to_json(&rec),
        csv,
        summary: lines,
        checks_failed: !pass,
    })
}

pub fn sweep(file: &ConfigFile, flags: &ScenarioFlags, g: &Globals) -> Result<Report, CliError> {
    let mut cfg = scenario_config("sweep", file, flags)?;
    let checks = cfg.bound_checks()?;
    let axis_name = cfg.axis.clone().ok_or_else(|| cfg_err("sweep needs axis"))?;
    let axis: Axis = axis_name.parse()?;
    if cfg.values.is_empty() {
        return Err(cfg_err("sweep needs at least one value"));
    }
    // A K sweep fixes its own windows; start the template at the first one.
    if axis == Axis::K && cfg.window.is_none() && cfg.n.is_none() {
        cfg.window = Some(cfg.values[0].max(1.0) as usize);
    }
    let template = cfg.build(g.seed, true)?;
    let rows = sweep_with(&template, axis, &cfg.values, g.log_base, g.execution)?;
    let base = to_value(&cfg);
    let mut records = Vec::new();
    let mut csv_rows = Vec::new();
    let mut lines = vec![format!("sweep {} over {}", cfg.name, axis)];
    let mut all = true;
    for row in &rows {
        let (_, pass) = check_lines(&checks, &row.rates, row.bound.as_ref());
        all &= pass;
        let mut scenario = base.clone();
        if let Json::Object(m) = &mut scenario {
            m.insert("value".into(), json!(row.value));
        }
        records.push(record(scenario, g.seed, &row.rates, row.bound.as_ref(), pass));
        csv_rows.push(vec![
            axis.to_string(),
            format_g17(row.value),
            format_g17(row.rates.alpha_hat),
            format_g17(row.rates.beta_hat),
            format_g17(row.rates.sum),
            format_g17(row.rates.std_err_alpha),
            format_g17(row.rates.std_err_beta),
            row.bound.as_ref().map(|b| b.name.clone()).unwrap_or_default(),
            opt_g17(row.bound.as_ref().map(|b| b.value)),
            row.bound.as_ref().map(|b| b.applicable.to_string()).unwrap_or_default(),
            pass.to_string(),
        ]);
        let bound = row
            .bound
            .as_ref()
            .map(|b| {
                format!(
                    " {}={}{}",
                    b.name,
                    format_short(b.value),
                    if b.applicable { "" } else { " (not applicable)" }
                )
            })
            .unwrap_or_default();
        lines.push(format!(
            "{}={} alpha_hat={} beta_hat={} sum={}{bound}{}",
            axis,
            format_short(row.value),
            format_short(row.rates.alpha_hat),
            format_short(row.rates.beta_hat),
            format_short(row.rates.sum),
            if checks.is_empty() {
                ""
            } else if pass {
                " PASS"
            } else {
                " FAIL"
            }
        ));
    }
    let csv = to_csv(
        &[
            "axis", "value", "alpha_hat", "beta_hat", "sum", "std_err_alpha", "std_err_beta",
            "bound_name", "bound_value", "bound_applicable", "pass",
        ],
        &csv_rows,
    );
    Ok(Report {
        json: to_json(&records),
        csv,
        summary: lines,
        checks_failed: !all,
    })
}

pub fn simulate(file: &ConfigFile, flags: &ScenarioFlags, g: &Globals) -> Result<Report, CliError> {
    let mut cfg = scenario_config("simulate", file, flags)?;
    let scenario = cfg.build(g.seed, false)?;
    let t = match scenario.forced_reset {
        Some(ResetSchedule::Fixed { tau }) => {
            if tau < 1 || tau + 1 > scenario.params.horizon {
                return Err(cfg_err(format!("tau = {tau} outside 1..N-1")));
            }
            let mut law = ForcedReset {
                tau,
                gain: scenario.params.gain,
            };
            simulate_with_law(&scenario.params, scenario.params.gain, &mut law, g.seed)
        }
        Some(ResetSchedule::Uniform) => return Err(cfg_err("simulate needs a fixed tau for a forced reset")),
        None => simulate_plant(&scenario.params, &scenario.controller, g.seed)?,
    };
    let doc = json!({
        "scenario": to_value(&cfg),
        "seed": g.seed,
        "initial_state": t.initial_state,
        "states": t.states,
        "controls": t.controls,
        "noises": t.noises,
    });
    let mut rows = vec![vec!["0".to_string(), format_g17(t.initial_state), String::new(), String::new()]];
    for k in 0..t.len() {
        rows.push(vec![
            (k + 1).to_string(),
            format_g17(t.states[k]),
            format_g17(t.controls[k]),
            format_g17(t.noises[k]),
        ]);
    }
    let max_abs = t.states.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let energy = t.controls.iter().map(|u| u * u).sum::<f64>() / t.len() as f64;
    Ok(Report {
        json: to_json(&doc),
        csv: to_csv(&["k", "state", "control", "noise"], &rows),
        summary: vec![format!(
            "{}: N={} final_state={} max_abs_state={} mean_control_energy={}",
            cfg.name,
            t.len(),
            format_short(*t.states.last().expect("horizon >= 1")),
            format_short(max_abs),
            format_short(energy)
        )],
        checks_failed: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    Transient,
    #[default]
    Steady,
    Precision,
    Reset,
    OriginReset,
}

fn default_cov_n() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceConfig {
    #[serde(default)]
    pub kind: CovarianceKind,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "default_cov_n")]
    pub n: usize,
    pub tau: Option<usize>,
}

pub fn covariance(file: &ConfigFile, flags: &CovarianceFlags, _g: &Globals) -> Result<Report, CliError> {
    let table = merge(file.section("covariance"), flags_table(flags), &flags.overrides.set)?;
    let cfg: CovarianceConfig = typed("covariance", table)?;
    let tau = || cfg.tau.ok_or_else(|| cfg_err("reset covariances need tau"));
    let m: CovMatrix = match cfg.kind {
        CovarianceKind::Transient => analytics::transient_covariance(cfg.a, cfg.sigma, cfg.n)?,
        CovarianceKind::Steady => analytics::steady_covariance(cfg.a, cfg.sigma, cfg.n)?,
        CovarianceKind::Precision => analytics::steady_precision(cfg.a, cfg.sigma, cfg.n)?,
        CovarianceKind::Reset => analytics::reset_covariance(cfg.a, cfg.sigma, cfg.n, tau()?)?,
        CovarianceKind::OriginReset => {
            analytics::origin_reset_covariance(cfg.a, cfg.sigma, cfg.n, tau()?)?
        }
    };
    let rows = m.to_rows();
    let doc = json!({
        "kind": cfg.kind,
        "a": cfg.a,
        "sigma": cfg.sigma,
        "n": cfg.n,
        "tau": cfg.tau,
        "matrix": rows,
    });
    let header: Vec<String> = (1..=cfg.n).map(|j| format!("c{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|v| format_g17(*v)).collect())
        .collect();
    let summary = rows
        .iter()
        .map(|r| r.iter().map(|v| format_short(*v)).collect::<Vec<_>>().join(" "))
        .collect();
    Ok(Report {
        json: to_json(&doc),
        csv: to_csv(&header, &csv_rows),
        summary,
        checks_failed: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlKind {
    GainChange,
    #[default]
    Reset,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlConfig {
    #[serde(default)]
    pub kind: KlKind,
    #[serde(default = "default_a")]
    pub a: f64,
    pub b: Option<f64>,
    #[serde(default = "default_cov_n")]
    pub n: usize,
}

pub fn kl(file: &ConfigFile, flags: &KlFlags, _g: &Globals) -> Result<Report, CliError> {
    let table = merge(file.section("kl"), flags_table(flags), &flags.overrides.set)?;
    let cfg: KlConfig = typed("kl", table)?;
    let kl = match cfg.kind {
        KlKind::GainChange => {
            let b = cfg.b.ok_or_else(|| cfg_err("gain_change divergence needs b"))?;
            kl_gain_change(cfg.a, b, cfg.n)?
        }
        KlKind::Reset => kl_reset(cfg.a)?,
    };
    let r = bound_report(kl)?;
    let doc = json!({
        "kind": cfg.kind,
        "a": cfg.a,
        "b": cfg.b,
        "n": cfg.n,
        "kl": r.kl,
        "tv_upper": r.tv_upper,
        "error_sum_lower": r.error_sum_lower,
    });
    Ok(Report {
        json: to_json(&doc),
        csv: to_csv(
            &["kind", "a", "b", "n", "kl", "tv_upper", "error_sum_lower"],
            &[vec![
                match cfg.kind {
                    KlKind::GainChange => "gain_change".into(),
                    KlKind::Reset => "reset".into(),
                },
                format_g17(cfg.a),
                opt_g17(cfg.b),
                cfg.n.to_string(),
                format_g17(r.kl),
                format_g17(r.tv_upper),
                format_g17(r.error_sum_lower),
            ]],
        ),
        summary: vec![
            format!("kl = {}", format_short(r.kl)),
            format!("tv_upper = {}", format_short(r.tv_upper)),
            format!("error_sum_lower = {}", format_short(r.error_sum_lower)),
        ],
        checks_failed: false,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default = "default_bounds_a")]
    pub a: f64,
    #[serde(default = "two")]
    pub a_unstable: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "one")]
    pub snr: f64,
    #[serde(default = "one")]
    pub energy: f64,
    #[serde(default = "one")]
    pub noise_bound: f64,
}

fn default_bounds_a() -> f64 {
    0.3
}
fn default_m() -> f64 {
    10.0
}
fn default_eps() -> f64 {
    0.2
}

#[derive(Debug, Clone, Serialize)]
struct BoundEntry {
    name: &'static str,
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn bounds(file: &ConfigFile, flags: &BoundsFlags, g: &Globals) -> Result<Report, CliError> {
    let table = merge(file.section("bounds"), flags_table(flags), &flags.overrides.set)?;
    let cfg: BoundsConfig = typed("bounds", table)?;
    let uniform_var = cfg.noise_bound.powi(2) / 3.0;
    let uniform_m4 = cfg.noise_bound.powi(4) / 5.0;
    let results: [(&'static str, covertctl_core::Result<f64>); 6] = [
        ("magnitude_n0", n0_magnitude(cfg.a_unstable, cfg.sigma, cfg.m, cfg.delta)),
        ("gain_change_max_gain", covert_gain_bound_gain_change(cfg.a, cfg.eps)),
        ("control_energy_k0", k0_control_energy(cfg.snr, cfg.delta)),
        (
            "residual_energy_k0",
            k0_residual_energy(cfg.energy, uniform_var, uniform_m4, cfg.delta).map(|w| w.k0),
        ),
        ("reset_max_covert_gain", covert_gain_bound_reset(cfg.eps, g.log_base)),
        ("reset_min_detect_gain", detection_gain_threshold(cfg.delta)),
    ];
    let entries: Vec<BoundEntry> = results
        .into_iter()
        .map(|(name, r)| match r {
            Ok(v) => BoundEntry {
                name,
                value: Some(v),
                error: None,
            },
            Err(e) => BoundEntry {
                name,
                value: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let summary = entries
        .iter()
        .map(|e| match (e.value, &e.error) {
            (Some(v), _) => format!("{} = {}", e.name, format_short(v)),
            (None, err) => format!("{} = n/a ({})", e.name, err.as_deref().unwrap_or("")),
        })
        .collect();
    let doc = json!({
        "inputs": cfg,
        "log_base": g.log_base,
        "bounds": entries,
    });
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| vec![e.name.to_string(), opt_g17(e.value)])
        .collect();
    Ok(Report {
        json: to_json(&doc),
        csv: to_csv(&["name", "value"], &rows),
        summary,
        checks_failed: false,
    })
}

/// Runs the subcommand `name` with only config-file values and overrides.
pub fn dispatch_named(name: &str, file: &ConfigFile, set: &[String], g: &Globals) -> Result<Report, CliError> {
    let overrides = Overrides { set: set.to_vec() };
    match name {
        "simulate" => simulate(file, &ScenarioFlags { overrides, ..Default::default() }, g),
        "detect" => detect(file, &ScenarioFlags { overrides, ..Default::default() }, g),
        "sweep" => sweep(file, &ScenarioFlags { overrides, ..Default::default() }, g),
        "covariance" => covariance(file, &CovarianceFlags { overrides, ..Default::default() }, g),
        "kl" => kl(file, &KlFlags { overrides, ..Default::default() }, g),
        "bounds" => bounds(file, &BoundsFlags { overrides, ..Default::default() }, g),
        other => Err(cfg_err(format!("unknown command '{other}'"))),
    }
}

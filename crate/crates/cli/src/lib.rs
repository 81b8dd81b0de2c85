//! Batch front end for the covert-control workbench.
//!
//! Exit status: 0 on success, 1 on configuration or usage errors, 2 when a
//! requested bound check fails.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use covertctl_core::analytics::LogBase;
use covertctl_core::montecarlo::Execution;
use serde::Serialize;

use crate::config::{ConfigFile, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Environment variable consulted when no seed is given on the command
/// line or in the config file.
pub const SEED_ENV: &str = "COVERTCTL_SEED";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(covertctl_core::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<covertctl_core::Error> for CliError {
    fn from(e: covertctl_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LogBaseArg {
    Natural,
    Two,
}

#[derive(Debug, Parser)]
#[command(name = "covertctl", version, about = "Covert control of AR(1) systems: simulation, bounds and detection")]
pub struct Cli {
    /// TOML experiment file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed. Falls back to the config file, then $COVERTCTL_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo runs (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the result document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long = "log-base", global = true, value_enum)]
    pub log_base: Option<LogBaseArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one trajectory.
    Simulate(ScenarioFlags),
    /// Print a closed-form covariance matrix.
    Covariance(CovarianceFlags),
    /// Closed-form divergence and the implied error-sum bound.
    Kl(KlFlags),
    /// Evaluate the six threshold formulas.
    Bounds(BoundsFlags),
    /// Estimate detector error rates for one scenario.
    Detect(ScenarioFlags),
    /// Estimate error rates along one parameter axis.
    Sweep(ScenarioFlags),
    /// Execute the subcommand named by `command` in a config file.
    Run(RunFlags),
}

/// Generic `key=value` overrides, applied after every other source.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Overrides {
    #[arg(long = "set", value_name = "KEY=VALUE")]
    #[serde(skip)]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ScenarioFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Plant gain.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Horizon N.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// gaussian | uniform | truncated | zero
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Support bound of uniform or truncated noise.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// zero | steady
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    /// none | one_bit | threshold | gain_change
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<String>,
    /// Target gain of the gain-change controller.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Trigger level of the threshold controller.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    /// Noise bound assumed by the one-bit controller.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design_bound: Option<f64>,
    /// magnitude | control_energy | residual_energy | reset_lrt | gaussian_lrt |
    /// always_controlled | always_uncontrolled
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_v: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    /// Energy-detector window K.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,
    /// Magnitude threshold M.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// gain_change | reset | origin_reset
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// uniform | fixed
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reset: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// error_sum_lower | must_detect
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<String>,
    /// Sweep axis: a | b | D | delta | K | snr | eps
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct CovarianceFlags {
    /// transient | steady | precision | reset | origin_reset
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct KlFlags {
    /// gain_change | reset
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct BoundsFlags {
    /// Stable plant gain for the gain-change bound.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Unstable plant gain for the magnitude test.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_unstable: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Magnitude threshold M.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    /// Time-averaged control energy for the residual test.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    /// Uniform noise bound for the residual test.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_bound: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Args)]
pub struct RunFlags {
    /// Experiment file (alternatively pass --config).
    pub path: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Settings shared by every subcommand after resolving all sources.
#[derive(Debug, Clone)]
pub struct Globals {
    pub seed: u64,
    pub execution: Execution,
    pub log_base: LogBase,
}

/// Output of one subcommand.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub json: String,
    pub csv: String,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
    pub checks_failed: bool,
}

fn parse_log_base(s: &str) -> Result<LogBase, CliError> {
    match s {
        "natural" | "e" => Ok(LogBase::Natural),
        "two" | "2" => Ok(LogBase::Two),
        other => Err(CliError::Config(format!("unknown log base '{other}'"))),
    }
}

fn resolve_seed(cli: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = cli.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}='{v}' is not a 64-bit unsigned integer"))),
        Err(_) => Ok(0),
    }
}

/// Runs the command line and writes to the process streams.
pub fn run_from_env() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(cli, stdout) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            let _ = writeln!(stderr, "covertctl: {e}");
            EXIT_CONFIG
        }
    }
}

/// Returns `Ok(false)` when a bound check failed.
fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let config_path = match &cli.command {
        Command::Run(r) => r.path.clone().or_else(|| cli.config.clone()),
        _ => cli.config.clone(),
    };
    let file = match &config_path {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Command::Run(_) = &cli.command {
        if config_path.is_none() {
            return Err(CliError::Config("run needs a config file".into()));
        }
    }
    let log_base = match cli.log_base {
        Some(LogBaseArg::Natural) => LogBase::Natural,
        Some(LogBaseArg::Two) => LogBase::Two,
        None => match &file.log_base {
            Some(s) => parse_log_base(s)?,
            None => LogBase::Natural,
        },
    };
    let threads = cli.threads.or(file.threads).unwrap_or(0);
    let globals = Globals {
        seed: resolve_seed(cli.seed, file.seed)?,
        execution: Execution::Parallel { threads },
        log_base,
    };
    let report = match cli.command {
        Command::Run(r) => {
            let name = file
                .command
                .clone()
                .ok_or_else(|| CliError::Config("config file has no 'command' key".into()))?;
            commands::dispatch_named(&name, &file, &r.overrides.set, &globals)?
        }
        Command::Simulate(f) => commands::simulate(&file, &f, &globals)?,
        Command::Covariance(f) => commands::covariance(&file, &f, &globals)?,
        Command::Kl(f) => commands::kl(&file, &f, &globals)?,
        Command::Bounds(f) => commands::bounds(&file, &f, &globals)?,
        Command::Detect(f) => commands::detect(&file, &f, &globals)?,
        Command::Sweep(f) => commands::sweep(&file, &f, &globals)?,
    };
    let format = cli.format.or(file.output.format);
    let out = cli.out.or(file.output.path);
    let document = |fmt: Format| match fmt {
        Format::Json => &report.json,
        Format::Csv => &report.csv,
    };
    match (out, format) {
        (Some(path), fmt) => {
            std::fs::write(&path, document(fmt.unwrap_or(Format::Json)))
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            for line in &report.summary {
                writeln!(stdout, "{line}")?;
            }
        }
        (None, Some(fmt)) => stdout.write_all(document(fmt).as_bytes())?,
        (None, None) => {
            for line in &report.summary {
                writeln!(stdout, "{line}")?;
            }
        }
    }
    Ok(!report.checks_failed)
}

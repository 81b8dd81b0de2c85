//! Experiment files and the precedence between file values, flags and
//! `--set` overrides.
//!
//! A config file is TOML with a few top-level keys and one flat table per
//! subcommand:
//!
//! ```toml
//! command = "detect"   # what `run` executes
//! seed = 7
//! threads = 4
//! log_base = "natural"
//!
//! [output]
//! format = "json"
//! path = "rates.json"
//!
//! [detect]
//! a = 0.99
//! detector = "reset_lrt"
//! delta = 0.5
//! ```

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

/// Parsed config file: top-level settings plus raw subcommand tables.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub log_base: Option<String>,
    pub output: OutputSection,
    pub sections: Table,
}

const SUBCOMMANDS: [&str; 6] = ["simulate", "covariance", "kl", "bounds", "detect", "sweep"];

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        let mut cfg = ConfigFile::default();
        if let Some(v) = table.remove("command") {
            cfg.command = Some(take::<String>(v, "command")?);
        }
        if let Some(v) = table.remove("seed") {
            cfg.seed = Some(take::<u64>(v, "seed")?);
        }
        if let Some(v) = table.remove("threads") {
            cfg.threads = Some(take::<usize>(v, "threads")?);
        }
        if let Some(v) = table.remove("log_base") {
            cfg.log_base = Some(take::<String>(v, "log_base")?);
        }
        if let Some(v) = table.remove("output") {
            cfg.output = take::<OutputSection>(v, "output")?;
        }
        for (k, v) in table {
            if !SUBCOMMANDS.contains(&k.as_str()) {
                return Err(CliError::Config(format!("unknown top-level key '{k}'")));
            }
            if !v.is_table() {
                return Err(CliError::Config(format!("[{k}] must be a table")));
            }
            cfg.sections.insert(k, v);
        }
        Ok(cfg)
    }

    pub fn section(&self, name: &str) -> Table {
        match self.sections.get(name) {
            Some(Value::Table(t)) => t.clone(),
            _ => Table::new(),
        }
    }
}

fn take<T: DeserializeOwned>(v: Value, key: &str) -> Result<T, CliError> {
    v.try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("{key}: {e}")))
}

/// Parses `key=value`; the value is read as a TOML literal and falls back to
/// a bare string.
pub fn parse_override(s: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{s}' is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("override '{s}' has an empty key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

/// Layers `flags` then `overrides` on top of `base`; later layers win.
pub fn merge(mut base: Table, flags: Table, overrides: &[String]) -> Result<Table, CliError> {
    base.extend(flags);
    for o in overrides {
        let (k, v) = parse_override(o)?;
        base.insert(k, v);
    }
    Ok(base)
}

/// Non-`None` fields of a clap argument struct as a TOML table.
pub fn flags_table<T: Serialize>(flags: &T) -> Table {
    match Value::try_from(flags) {
        Ok(Value::Table(t)) => t,
        _ => Table::new(),
    }
}

/// Deserialises a merged table into a typed config.
pub fn typed<T: DeserializeOwned>(section: &str, table: Table) -> Result<T, CliError> {
    Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("[{section}] {}", e.message())))
}

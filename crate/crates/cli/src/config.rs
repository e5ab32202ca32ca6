//! Error classification and optional TOML config files.
//!
//! Precedence is flags, then the config file, then built-in defaults.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::{DynamicArg, StaticArg};

#[derive(Debug)]
pub enum Failure {
    /// Input missing, unreadable or malformed.
    Input(String),
    /// Flag or config values rejected.
    Config(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Config(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Config(m) => f.write_str(m),
        }
    }
}

impl From<dyntcp::Error> for Failure {
    fn from(e: dyntcp::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ReplayFile {
    #[serde(rename = "static")]
    pub static_kind: Option<StaticArg>,
    pub dynamic: Option<DynamicArg>,
    pub history: Option<usize>,
    pub k: Option<f64>,
    pub reps: Option<u32>,
    pub seed: Option<u64>,
    pub cycles: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SynthFile {
    pub tests: Option<usize>,
    pub cycles: Option<usize>,
    pub groups: Option<String>,
    pub group_rate: Option<f64>,
    pub rho: Option<f64>,
    pub background: Option<f64>,
    pub flakiness: Option<f64>,
    pub seed: Option<u64>,
}

pub fn load<T: Default + for<'de> Deserialize<'de>>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| Failure::Config(format!("invalid config {}: {e}", path.display())))
}

//! The JSON report written by `spectrum` and `verify-hvz`. The schema is
//! described in `docs/report-schema.md`.

use hvz_core::spectral::{EdgeEstimate, RefinementCheck, SpectralReport};
use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub hvz_cli: &'static str,
    pub hvz_core: &'static str,
    pub schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            hvz_cli: env!("CARGO_PKG_VERSION"),
            hvz_core: hvz_core::VERSION,
            schema: SCHEMA_VERSION,
        }
    }
}

/// `inf c_α` against the brute-force edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub essential_bottom: f64,
    pub edge: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// False when refining the grid moves some `c_α` by more than its tolerance.
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub versions: Versions,
    /// The effective config, after command-line overrides.
    pub config: RunConfig,
    /// Same config as TOML; parsing it back reproduces the run.
    pub config_toml: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<EdgeEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    pub exit_code: i32,
    pub timing_seconds: f64,
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.into(),
            versions: Versions::default(),
            config: config.clone(),
            config_toml: config.to_toml(),
            spectral: None,
            refinement: None,
            edge: None,
            verification: None,
            exit_code: 0,
            timing_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize to JSON")
    }
}

//! Scenario files (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{AgeFunction, ModelSpec};
use crate::oracle::GradientMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec<f64>,
    /// Initial capital profile; zero when omitted.
    #[serde(default = "zero_profile")]
    pub initial: AgeFunction<f64>,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub gradient_check: GradientCheckConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn zero_profile() -> AgeFunction<f64> {
    AgeFunction::constant(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_s: usize,
    /// Explicit horizon; when absent it comes from `tail_tol`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_tail_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub theta: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta: 0.5,
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientChoice {
    BlockFd,
    Adjoint,
}

impl From<GradientChoice> for GradientMode {
    fn from(g: GradientChoice) -> Self {
        match g {
            GradientChoice::BlockFd => GradientMode::BlockFiniteDifference,
            GradientChoice::Adjoint => GradientMode::Adjoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub enabled: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub gradient: GradientChoice,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            enabled: false,
            tol: 1e-7,
            max_iter: 200,
            gradient: GradientChoice::BlockFd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradientCheckConfig {
    pub enabled: bool,
    pub eps: f64,
    /// Number of cosine directions `cos(i pi s / sbar)`, `i = 0..directions`.
    pub directions: usize,
}

impl Default for GradientCheckConfig {
    fn default() -> Self {
        GradientCheckConfig {
            enabled: false,
            eps: 1e-3,
            directions: 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario: {0}")]
    Parse(#[from] toml::de::Error),
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::from_toml(&text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

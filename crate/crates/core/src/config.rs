// SPDX-License-Identifier: MIT OR Apache-2.0

//! TOML run configuration.

use crate::error::{Error, Result};
use crate::experiment::TestSpec;
use crate::generators::NoiseSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Run-wide settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    /// Replicates; command-specific default when absent.
    #[serde(default)]
    pub reps: Option<usize>,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            reps: None,
            eps: default_eps(),
        }
    }
}

fn default_eps() -> f64 {
    0.1
}

fn default_beta() -> f64 {
    0.9
}

/// Data dimensions and, for `test`, the CSV location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub p: usize,
    pub n: usize,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// Pre-computed calibration to use instead of simulating one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(default)]
    pub multiplier: Option<f64>,
}

/// Power-study design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    pub t0: usize,
    pub s: usize,
    /// Explicit grid; otherwise `points` values on `[0, rho_max]`.
    #[serde(default)]
    pub rho: Option<Vec<f64>>,
    #[serde(default)]
    pub rho_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

/// Alternative used by the `risk` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltSection {
    pub t0: usize,
    pub s: usize,
    pub rho: f64,
}

/// Phase-diagram grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSection {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub step: f64,
}

/// Full configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub data: Option<DataSection>,
    #[serde(default)]
    pub test: Option<TestSpec>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub calibration: Option<CalibrationSection>,
    #[serde(default)]
    pub power: Option<PowerSection>,
    #[serde(default)]
    pub alt: Option<AltSection>,
    #[serde(default)]
    pub phase: Option<PhaseSection>,
}

fn missing(section: &str) -> Error {
    Error::config(format!("missing section [{section}]"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn data(&self) -> Result<&DataSection> {
        self.data.as_ref().ok_or_else(|| missing("data"))
    }

    pub fn test(&self) -> Result<&TestSpec> {
        self.test.as_ref().ok_or_else(|| missing("test"))
    }

    pub fn noise(&self) -> Result<&NoiseSpec> {
        self.noise.as_ref().ok_or_else(|| missing("noise"))
    }

    pub fn power(&self) -> Result<&PowerSection> {
        self.power.as_ref().ok_or_else(|| missing("power"))
    }

    pub fn alt(&self) -> Result<&AltSection> {
        self.alt.as_ref().ok_or_else(|| missing("alt"))
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::optimize::{OptimizerSettings, VqeResult};
use super::{MeasurementMode, DEFAULT_MAX_BOND, DEFAULT_SVD_CUTOFF};
use crate::error::{Error, Result};

fn default_max_bond() -> usize {
    DEFAULT_MAX_BOND
}

fn default_cutoff() -> f64 {
    DEFAULT_SVD_CUTOFF
}

fn one() -> usize {
    1
}

/// JSON run description for a VQE job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeConfig {
    /// FCIDUMP file; relative paths resolve against the config's directory.
    pub bundle: PathBuf,
    #[serde(default = "default_max_bond")]
    pub max_bond: usize,
    #[serde(default = "default_cutoff")]
    pub svd_cutoff: f64,
    #[serde(default)]
    pub measurement_mode: MeasurementMode,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "one")]
    pub trotter_steps: usize,
    /// Drop generators that break a Z2 symmetry of the Hamiltonian.
    #[serde(default = "yes")]
    pub symmetry_screening: bool,
    #[serde(default)]
    pub initial_parameters: Option<Vec<f64>>,
}

fn yes() -> bool {
    true
}

impl VqeConfig {
    pub fn from_json_str(text: &str, source: &Path) -> Result<Self> {
        let mut c: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: source.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if c.bundle.is_relative() {
            if let Some(dir) = source.parent() {
                c.bundle = dir.join(&c.bundle);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_bond == 0 {
            return Err(Error::Validation("max_bond must be positive".into()));
        }
        if !(self.svd_cutoff >= 0.0) {
            return Err(Error::Validation("svd_cutoff must be non-negative".into()));
        }
        if self.trotter_steps == 0 {
            return Err(Error::Validation("trotter_steps must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Validation("workers must be positive".into()));
        }
        Ok(())
    }
}

/// `iteration,energy` rows.
pub fn energy_history_csv(result: &VqeResult) -> String {
    let mut out = String::from("iteration,energy\n");
    for (k, e) in result.energy_history.iter().enumerate() {
        out.push_str(&format!("{k},{e:.15e}\n"));
    }
    out
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scf::ScfSettings;
use super::solver::{FragmentSolver, VqeSolverSettings};
use super::{fragments_by_size, DmetSettings};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    Fci,
    MpsVqe,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fci" => Ok(Self::Fci),
            "mps-vqe" | "mps_vqe" => Ok(Self::MpsVqe),
            _ => Err(Error::Argument(format!("unknown solver \"{s}\" (expected fci or mps-vqe)"))),
        }
    }
}

/// Either a uniform block size or explicit orbital lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FragmentSpec {
    Size(usize),
    Orbitals(Vec<Vec<usize>>),
}

impl FragmentSpec {
    pub fn resolve(&self, n_orbitals: usize) -> Result<Vec<Vec<usize>>> {
        match self {
            FragmentSpec::Size(k) => fragments_by_size(n_orbitals, *k),
            FragmentSpec::Orbitals(f) => Ok(f.clone()),
        }
    }
}

fn default_bounds() -> [f64; 2] {
    [-1.0, 1.0]
}

fn default_step() -> f64 {
    DmetSettings::default().mu_step
}

fn default_tolerance() -> f64 {
    DmetSettings::default().electron_tolerance
}

fn default_mu_iterations() -> usize {
    DmetSettings::default().max_mu_iterations
}

/// JSON run description for a DMET job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmetConfig {
    /// FCIDUMP file; relative paths resolve against the config's directory.
    pub bundle: PathBuf,
    pub fragments: FragmentSpec,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default)]
    pub vqe: VqeSolverSettings,
    #[serde(default = "default_bounds")]
    pub mu_bounds: [f64; 2],
    #[serde(default = "default_step")]
    pub mu_step: f64,
    #[serde(default = "default_tolerance")]
    pub electron_tolerance: f64,
    #[serde(default = "default_mu_iterations")]
    pub max_mu_iterations: usize,
    #[serde(default)]
    pub scf: ScfSettings,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl DmetConfig {
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
        let [lo, hi] = self.mu_bounds;
        if !(lo <= 0.0 && 0.0 <= hi) {
            return Err(Error::Validation(format!("mu_bounds [{lo}, {hi}] must contain 0")));
        }
        if !(self.mu_step > 0.0) {
            return Err(Error::Validation("mu_step must be positive".into()));
        }
        if !(self.electron_tolerance > 0.0) {
            return Err(Error::Validation("electron_tolerance must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Validation("workers must be positive".into()));
        }
        if self.vqe.max_bond == 0 || self.vqe.trotter_steps == 0 {
            return Err(Error::Validation("vqe.max_bond and vqe.trotter_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn settings(&self) -> DmetSettings {
        DmetSettings {
            solver: match self.solver {
                SolverKind::Fci => FragmentSolver::Fci,
                SolverKind::MpsVqe => FragmentSolver::MpsVqe(self.vqe.clone()),
            },
            mu_bounds: (self.mu_bounds[0], self.mu_bounds[1]),
            mu_step: self.mu_step,
            electron_tolerance: self.electron_tolerance,
            max_mu_iterations: self.max_mu_iterations,
            scf: self.scf,
        }
    }
}

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::optimize::{minimize, VqeResult};
use super::report::VqeConfig;
use super::VqeProblem;
use crate::ansatz::build_uccsd;
use crate::dmet::{rhf_scf, MeanField};
use crate::error::{Error, Result};
use crate::hamiltonian::{parse_fcidump, qubit_hamiltonian, IntegralBundle};

/// Largest deviation of the RHF density from the aufbau density of the
/// given orbitals for which they count as already canonical.
const CANONICAL_TOL: f64 = 1e-6;

/// Bundle in orbitals whose lowest `n_electrons / 2` form the RHF
/// determinant. Orbitals that already do are kept (so degenerate sets are not
/// remixed); otherwise the bundle is rotated into the canonical RHF orbitals.
pub fn reference_bundle(b: &IntegralBundle) -> Result<(IntegralBundle, MeanField, bool)> {
    let mf = rhf_scf(b)?;
    let n = b.n_orbitals;
    let n_occ = b.n_electrons / 2;
    let aufbau = Array2::from_shape_fn((n, n), |(p, q)| if p == q && p < n_occ { 2.0 } else { 0.0 });
    let deviation = (&mf.density_matrix - &aufbau).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if deviation < CANONICAL_TOL {
        Ok((b.clone(), mf, false))
    } else {
        Ok((b.transform(&mf.orbital_coefficients), mf, true))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeRun {
    #[serde(flatten)]
    pub result: VqeResult,
    pub rhf_energy: f64,
    pub n_qubits: usize,
    pub n_parameters: usize,
    pub n_pauli_strings: usize,
    pub rotated_to_rhf_orbitals: bool,
    pub workers: usize,
}

/// Problem for a bundle under a run configuration, with its mean field and
/// whether the orbitals were rotated.
pub fn build_problem(b: &IntegralBundle, config: &VqeConfig) -> Result<(VqeProblem, MeanField, bool)> {
    config.validate()?;
    let (bundle, mf, rotated) = reference_bundle(b)?;
    let h = qubit_hamiltonian(&bundle)?;
    let mut ansatz = build_uccsd(bundle.n_orbitals, bundle.n_electrons)?;
    if config.symmetry_screening {
        ansatz = ansatz.screen_by_symmetry(&h);
    }
    let mut problem = VqeProblem::new(h, ansatz)?.with_trotter_steps(config.trotter_steps)?;
    problem.max_bond = config.max_bond;
    problem.svd_cutoff = config.svd_cutoff;
    problem.measurement_mode = config.measurement_mode;
    problem.optimizer = config.optimizer;
    Ok((problem, mf, rotated))
}

pub fn run_vqe_on(b: &IntegralBundle, config: &VqeConfig, workers: usize) -> Result<VqeRun> {
    let (problem, mf, rotated) = build_problem(b, config)?;
    let theta0 = match &config.initial_parameters {
        Some(t) if t.len() != problem.parameter_count() => {
            return Err(Error::Validation(format!(
                "initial_parameters has {} entries, the ansatz has {} parameters",
                t.len(),
                problem.parameter_count()
            )))
        }
        Some(t) => t.clone(),
        None => vec![0.0; problem.parameter_count()],
    };
    let result = minimize(&problem, &theta0, workers)?;
    Ok(VqeRun {
        result,
        rhf_energy: mf.hf_energy,
        n_qubits: problem.n_qubits(),
        n_parameters: problem.parameter_count(),
        n_pauli_strings: problem.strings().len(),
        rotated_to_rhf_orbitals: rotated,
        workers,
    })
}

pub fn run_vqe(config: &VqeConfig, workers: usize) -> Result<VqeRun> {
    let b = parse_fcidump(&config.bundle)?;
    run_vqe_on(&b, config, workers)
}

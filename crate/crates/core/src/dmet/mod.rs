//! Single-shot density matrix embedding: RHF for the whole system, one
//! Schmidt bath per fragment, and a global chemical potential tuned until
//! the fragment electron counts add up to the total.

mod config;
mod embedding;
mod scf;
mod solver;

use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::IntegralBundle;
use crate::vqe::partition;

const MU_RESOLUTION: f64 = 1e-10;

pub use config::{DmetConfig, FragmentSpec, SolverKind};
pub use embedding::{build_bath, core_potential, embed_hamiltonian, energy_one_body, EmbeddingBasis, BATH_CUTOFF};
pub use scf::{electronic_energy, mean_field_potential, rhf_scf, rhf_scf_with, MeanField, ScfSettings};
pub use solver::{solve_fragment, EmbeddedProblem, FragmentSolution, FragmentSolver, VqeSolverSettings};

#[derive(Debug, Clone, PartialEq)]
pub struct DmetSettings {
    pub solver: FragmentSolver,
    /// Search interval for the chemical potential, in Hartree.
    pub mu_bounds: (f64, f64),
    /// First trial step away from `mu = 0` when bracketing.
    pub mu_step: f64,
    pub electron_tolerance: f64,
    pub max_mu_iterations: usize,
    pub scf: ScfSettings,
}

impl Default for DmetSettings {
    fn default() -> Self {
        Self {
            solver: FragmentSolver::Fci,
            mu_bounds: (-1.0, 1.0),
            mu_step: 0.05,
            electron_tolerance: 1e-5,
            max_mu_iterations: 60,
            scf: ScfSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentRecord {
    pub orbital_indices: Vec<usize>,
    pub n_bath: usize,
    pub n_embedding_electrons: usize,
    pub bath_singular_values: Vec<f64>,
    /// Rows are whole-system orbitals, columns embedding orbitals.
    pub embedding_basis: Vec<Vec<f64>>,
    pub solution: FragmentSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuStep {
    pub mu: f64,
    pub electrons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmetState {
    pub solver: String,
    pub fragments: Vec<FragmentRecord>,
    pub chemical_potential: f64,
    /// Sum of fragment energies plus nuclear repulsion.
    pub total_energy: f64,
    pub total_electron_count: f64,
    pub n_electrons: usize,
    pub hf_energy: f64,
    pub mu_history: Vec<MuStep>,
    /// Electron count within tolerance and every fragment solve converged.
    pub converged: bool,
}

impl DmetState {
    pub fn fragment_energies(&self) -> Vec<f64> {
        self.fragments.iter().map(|f| f.solution.energy).collect()
    }

    pub fn fragment_rdm1s(&self) -> Vec<&Vec<Vec<f64>>> {
        self.fragments.iter().map(|f| &f.solution.rdm1).collect()
    }
}

/// Consecutive orbital blocks of `size`.
pub fn fragments_by_size(n_orbitals: usize, size: usize) -> Result<Vec<Vec<usize>>> {
    if size == 0 || n_orbitals % size != 0 {
        return Err(Error::Validation(format!(
            "{n_orbitals} orbitals cannot be split into fragments of {size}"
        )));
    }
    Ok((0..n_orbitals / size).map(|k| (k * size..(k + 1) * size).collect()).collect())
}

/// Fragments must cover every orbital exactly once.
fn check_partition(n: usize, fragments: &[Vec<usize>]) -> Result<()> {
    let mut count = vec![0usize; n];
    for f in fragments {
        for &p in f {
            if p >= n {
                return Err(Error::Validation(format!("fragment orbital {p} outside 0..{n}")));
            }
            count[p] += 1;
        }
    }
    if let Some(p) = count.iter().position(|&c| c != 1) {
        return Err(Error::Validation(format!(
            "orbital {p} appears in {} fragments; fragments must partition the orbitals",
            count[p]
        )));
    }
    Ok(())
}

struct Embedder<'a> {
    bundle: &'a IntegralBundle,
    mf: MeanField,
    bases: Vec<EmbeddingBasis>,
    settings: &'a DmetSettings,
    workers: usize,
}

impl Embedder<'_> {
    /// Solves every fragment at `mu`. Fragments are spread over the workers
    /// in contiguous blocks; leftover workers go to the VQE inside each.
    fn solve_all(&self, mu: f64, warm: &[Option<Vec<f64>>]) -> Result<Vec<FragmentSolution>> {
        let n = self.bases.len();
        let blocks = partition(n, self.workers.min(n));
        let inner = (self.workers / blocks.len()).max(1);
        let solve = |k: usize| -> Result<FragmentSolution> {
            let problem = EmbeddedProblem::new(self.bundle, &self.mf.density_matrix, &self.bases[k], mu)?;
            solve_fragment(&problem, &self.settings.solver, warm[k].as_deref(), inner)
        };
        let per_block: Vec<Result<Vec<FragmentSolution>>> = if blocks.len() == 1 {
            vec![(0..n).map(solve).collect()]
        } else {
            thread::scope(|scope| {
                let handles: Vec<_> = blocks
                    .iter()
                    .map(|&(lo, hi)| scope.spawn(move || (lo..hi).map(solve).collect::<Result<Vec<_>>>()))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("fragment worker panicked"))
                    .collect()
            })
        };
        let mut out = Vec::with_capacity(n);
        for b in per_block {
            out.extend(b?);
        }
        Ok(out)
    }
}

/// Electron-count residual at one trial chemical potential.
struct Trial {
    mu: f64,
    residual: f64,
    solutions: Vec<FragmentSolution>,
}

pub fn dmet_run(
    b: &IntegralBundle,
    fragments: &[Vec<usize>],
    settings: &DmetSettings,
    workers: usize,
) -> Result<DmetState> {
    if workers == 0 {
        return Err(Error::Argument("at least one worker is required".into()));
    }
    check_partition(b.n_orbitals, fragments)?;
    let (lo, hi) = settings.mu_bounds;
    if !(lo <= 0.0 && 0.0 <= hi) {
        return Err(Error::Validation(format!("mu bounds [{lo}, {hi}] must contain 0")));
    }
    let mf = rhf_scf_with(b, &settings.scf)?;
    log::info!("RHF energy {:.10} in {} cycles", mf.hf_energy, mf.cycles);
    let bases = fragments
        .iter()
        .map(|f| build_bath(&mf, f))
        .collect::<Result<Vec<_>>>()?;
    let embedder = Embedder {
        bundle: b,
        mf,
        bases,
        settings,
        workers,
    };
    let target = b.n_electrons as f64;
    let mut history = Vec::new();
    let mut warm: Vec<Option<Vec<f64>>> = vec![None; fragments.len()];
    let mut evaluate = |mu: f64, warm: &mut Vec<Option<Vec<f64>>>| -> Result<Trial> {
        let solutions = embedder.solve_all(mu, warm)?;
        for (w, s) in warm.iter_mut().zip(&solutions) {
            *w = s.parameters.clone();
        }
        let electrons: f64 = solutions.iter().map(|s| s.electrons).sum();
        log::info!("mu {mu:+.8}: {electrons:.8} electrons");
        history.push(MuStep { mu, electrons });
        Ok(Trial {
            mu,
            residual: electrons - target,
            solutions,
        })
    };

    let tol = settings.electron_tolerance;
    let mut best = evaluate(0.0, &mut warm)?;
    let mut found = best.residual.abs() < tol;
    if !found {
        // Raising mu pulls electrons onto the fragments, so step against the
        // sign of the residual until it flips.
        let dir = -best.residual.signum();
        let limit = if dir > 0.0 { hi } else { lo };
        let mut step = settings.mu_step;
        let mut a = best;
        let mut b_trial: Option<Trial> = None;
        while (a.mu - limit).abs() > 0.0 {
            let mu = if dir > 0.0 { (a.mu + step).min(limit) } else { (a.mu - step).max(limit) };
            let t = evaluate(mu, &mut warm)?;
            if t.residual.abs() < tol || t.residual.signum() != a.residual.signum() {
                b_trial = Some(t);
                break;
            }
            a = t;
            step *= 2.0;
        }
        let Some(mut b2) = b_trial else {
            return Err(Error::Embedding(format!(
                "no chemical potential in [{lo}, {hi}] balances the electron count (residual {:e} at {})",
                a.residual, a.mu
            )));
        };
        // Illinois false position on the bracket [a, b2].
        let (mut fa, mut fb) = (a.residual, b2.residual);
        let mut iterations = 0;
        while b2.residual.abs() >= tol && iterations < settings.max_mu_iterations {
            iterations += 1;
            let mu = (a.mu * fb - b2.mu * fa) / (fb - fa);
            // Solver noise can leave a residual that no mu in the collapsed
            // bracket removes.
            if (mu - a.mu).abs() < MU_RESOLUTION || (mu - b2.mu).abs() < MU_RESOLUTION {
                log::warn!("mu bracket collapsed at {mu:+.10} with residual {:e}", b2.residual);
                break;
            }
            let t = evaluate(mu, &mut warm)?;
            if t.residual.signum() != b2.residual.signum() {
                a = std::mem::replace(&mut b2, t);
                fa = fb;
            } else {
                b2 = t;
                fa *= 0.5;
            }
            fb = b2.residual;
        }
        best = if a.residual.abs() < b2.residual.abs() { a } else { b2 };
        found = best.residual.abs() < tol;
    }

    let Trial { mu, solutions, .. } = best;
    let converged = found && solutions.iter().all(|s| s.converged);
    let total_electron_count = solutions.iter().map(|s| s.electrons).sum();
    let total_energy = solutions.iter().map(|s| s.energy).sum::<f64>() + b.nuclear_repulsion;
    let records = embedder
        .bases
        .iter()
        .zip(solutions)
        .map(|(e, solution)| FragmentRecord {
            orbital_indices: e.orbital_indices.clone(),
            n_bath: e.n_bath(),
            n_embedding_electrons: e.n_embedding_electrons,
            bath_singular_values: e.bath_singular_values.clone(),
            embedding_basis: e.basis.outer_iter().map(|r| r.to_vec()).collect(),
            solution,
        })
        .collect();
    Ok(DmetState {
        solver: settings.solver.name().to_string(),
        fragments: records,
        chemical_potential: mu,
        total_energy,
        total_electron_count,
        n_electrons: b.n_electrons,
        hf_energy: embedder.mf.hf_energy,
        mu_history: history,
        converged,
    })
}

//! Ground-state solves of embedded problems and the observables DMET needs
//! from them: the democratic fragment energy and the 1-RDM.

use std::collections::BTreeMap;

use ndarray::{Array2, Array4};
use ndarray_linalg::{Eigh, UPLO};
use serde::{Deserialize, Serialize};

use super::embedding::{embed_hamiltonian, energy_one_body, EmbeddingBasis};
use crate::ansatz::build_uccsd;
use crate::error::{Error, Result};
use crate::hamiltonian::fermion::spin_summed_operator;
use crate::hamiltonian::integrals::transform_eri;
use crate::hamiltonian::{jordan_wigner, qubit_hamiltonian, IntegralBundle, PauliString, PauliSum};
use crate::mps::MpsState;
use crate::oracle::fci::{fci_ground_state, Sector};
use crate::vqe::{minimize, MeasurementMode, OptimizerSettings, VqeProblem, DEFAULT_MAX_BOND, DEFAULT_SVD_CUTOFF};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeSolverSettings {
    pub max_bond: usize,
    pub svd_cutoff: f64,
    pub measurement_mode: MeasurementMode,
    pub optimizer: OptimizerSettings,
    pub trotter_steps: usize,
    pub symmetry_screening: bool,
}

impl Default for VqeSolverSettings {
    fn default() -> Self {
        Self {
            max_bond: DEFAULT_MAX_BOND,
            svd_cutoff: DEFAULT_SVD_CUTOFF,
            measurement_mode: MeasurementMode::Direct,
            // The mu search differences electron counts to 1e-5, so fragment
            // solves need to be converged well below that.
            optimizer: OptimizerSettings {
                energy_tolerance: 1e-12,
                gradient_tolerance: 1e-7,
                ..OptimizerSettings::default()
            },
            trotter_steps: 1,
            symmetry_screening: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FragmentSolver {
    Fci,
    MpsVqe(VqeSolverSettings),
}

impl FragmentSolver {
    pub fn name(&self) -> &'static str {
        match self {
            FragmentSolver::Fci => "fci",
            FragmentSolver::MpsVqe(_) => "mps-vqe",
        }
    }
}

/// An embedded problem at one chemical potential, with the integrals used
/// to assemble its fragment energy.
#[derive(Debug, Clone)]
pub struct EmbeddedProblem {
    /// Hamiltonian to solve, including `-mu` on the fragment diagonal.
    pub bundle: IntegralBundle,
    pub n_fragment: usize,
    /// Fragment-energy one-body integrals, without `mu`.
    pub energy_one_body: Array2<f64>,
    /// Columns span the embedding space, most occupied first in the
    /// projected mean-field density; the VQE reference fills the leading ones.
    pub reference_orbitals: Array2<f64>,
}

impl EmbeddedProblem {
    pub fn new(b: &IntegralBundle, mf_density: &Array2<f64>, emb: &EmbeddingBasis, mu: f64) -> Result<Self> {
        let projected = emb.basis.t().dot(mf_density).dot(&emb.basis);
        let (_, vecs) = projected.eigh(UPLO::Lower).map_err(|e| Error::Numerical {
            rows: projected.nrows(),
            cols: projected.ncols(),
            reason: format!("projected density: {e}"),
        })?;
        let m = vecs.ncols();
        let reference_orbitals = Array2::from_shape_fn((m, m), |(r, c)| vecs[[r, m - 1 - c]]);
        Ok(Self {
            bundle: embed_hamiltonian(b, emb, mu),
            n_fragment: emb.n_fragment(),
            energy_one_body: energy_one_body(b, emb),
            reference_orbitals,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentSolution {
    /// Democratic-partitioning energy, excluding any constant.
    pub energy: f64,
    /// Trace of the fragment block of the 1-RDM.
    pub electrons: f64,
    /// Spin-summed 1-RDM in the embedding basis.
    pub rdm1: Vec<Vec<f64>>,
    /// Ground energy of the embedded Hamiltonian including its constant.
    pub embedded_energy: f64,
    pub parameters: Option<Vec<f64>>,
    pub iterations: Option<u64>,
    pub converged: bool,
}

/// Hermitian part of the fragment-projected energy operator, rotated into
/// `c`. Rows of the one-body block and the first index of the two-body
/// block are restricted to fragment orbitals.
fn fragment_energy_operator(p: &EmbeddedProblem, c: &Array2<f64>) -> Result<PauliSum> {
    let m = p.bundle.n_orbitals;
    let nf = p.n_fragment;
    let a = Array2::from_shape_fn((m, m), |(i, j)| if i < nf { p.energy_one_body[[i, j]] } else { 0.0 });
    let g = Array4::from_shape_fn((m, m, m, m), |(i, j, k, l)| if i < nf { p.bundle.g[[i, j, k, l]] } else { 0.0 });
    let a = c.t().dot(&a).dot(c);
    let g = transform_eri(&g, c);
    // (a+_p a+_r a_s a_q)^H = a+_q a+_s a_r a_p
    let a_h = (&a + &a.t()) * 0.5;
    let g_h = Array4::from_shape_fn((m, m, m, m), |(i, j, k, l)| 0.5 * (g[[i, j, k, l]] + g[[j, i, l, k]]));
    jordan_wigner(&spin_summed_operator(0.0, &a_h, &g_h), 2 * m)
}

/// `(p, q, sum_sigma (a+_p a_q + a+_q a_p) / 2)` for `p <= q`.
fn rdm1_operators(m: usize) -> Result<Vec<(usize, usize, PauliSum)>> {
    let g = Array4::zeros((m, m, m, m));
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    for p in 0..m {
        for q in p..m {
            let mut a = Array2::zeros((m, m));
            a[[p, q]] += 0.5;
            a[[q, p]] += 0.5;
            out.push((p, q, jordan_wigner(&spin_summed_operator(0.0, &a, &g), 2 * m)?));
        }
    }
    Ok(out)
}

/// Fragment electron count and 1-RDM from rotated-basis RDM elements.
fn assemble(
    p: &EmbeddedProblem,
    c: &Array2<f64>,
    rdm_values: &[(usize, usize, f64)],
) -> (f64, Vec<Vec<f64>>) {
    let m = p.bundle.n_orbitals;
    let mut rotated = Array2::zeros((m, m));
    for &(i, j, v) in rdm_values {
        rotated[[i, j]] = v;
        rotated[[j, i]] = v;
    }
    let rdm = c.dot(&rotated).dot(&c.t());
    let electrons = (0..p.n_fragment).map(|k| rdm[[k, k]]).sum();
    (electrons, rdm.outer_iter().map(|r| r.to_vec()).collect())
}

/// Expectations of several Pauli sums on one MPS, measuring each distinct
/// string once in sorted order.
fn expect_sums(state: &MpsState, sums: &[&PauliSum]) -> Result<Vec<f64>> {
    let mut index: BTreeMap<PauliString, usize> = BTreeMap::new();
    for s in sums {
        for (p, _) in s.terms() {
            index.insert(*p, 0);
        }
    }
    let strings: Vec<PauliString> = index.keys().copied().collect();
    for (k, v) in index.values_mut().enumerate() {
        *v = k;
    }
    let values = state.expect_pauli_strings(&strings)?;
    Ok(sums
        .iter()
        .map(|s| {
            s.constant_term() + s.terms().map(|(p, c)| c * values[index[p]]).sum::<f64>()
        })
        .collect())
}

/// Solves the embedded Hamiltonian and evaluates the fragment energy and
/// 1-RDM. `warm_start` seeds the VQE parameters when its length fits.
pub fn solve_fragment(
    p: &EmbeddedProblem,
    solver: &FragmentSolver,
    warm_start: Option<&[f64]>,
    workers: usize,
) -> Result<FragmentSolution> {
    let c = &p.reference_orbitals;
    let rotated = p.bundle.transform(c);
    let m = rotated.n_orbitals;
    let h = qubit_hamiltonian(&rotated)?;
    let energy_op = fragment_energy_operator(p, c)?;
    let rdm_ops = rdm1_operators(m)?;
    let n_e = rotated.n_electrons;
    match solver {
        FragmentSolver::Fci => {
            let gs = fci_ground_state(&h, Sector::singlet(n_e))?;
            let energy = gs.expect(&energy_op)?;
            let values = rdm_ops
                .iter()
                .map(|(i, j, op)| Ok((*i, *j, gs.expect(op)?)))
                .collect::<Result<Vec<_>>>()?;
            let (electrons, rdm1) = assemble(p, c, &values);
            Ok(FragmentSolution {
                energy,
                electrons,
                rdm1,
                embedded_energy: gs.energy,
                parameters: None,
                iterations: None,
                converged: true,
            })
        }
        FragmentSolver::MpsVqe(settings) => {
            let mut ansatz = build_uccsd(m, n_e)?;
            if settings.symmetry_screening {
                ansatz = ansatz.screen_by_symmetry(&h);
            }
            let mut problem = VqeProblem::new(h, ansatz)?.with_trotter_steps(settings.trotter_steps)?;
            problem.max_bond = settings.max_bond;
            problem.svd_cutoff = settings.svd_cutoff;
            problem.measurement_mode = settings.measurement_mode;
            problem.optimizer = settings.optimizer;
            let theta0 = match warm_start {
                Some(t) if t.len() == problem.parameter_count() => t.to_vec(),
                _ => vec![0.0; problem.parameter_count()],
            };
            let result = minimize(&problem, &theta0, workers)?;
            problem.measurement_mode = MeasurementMode::Direct;
            let state = problem.prepare_state(&result.parameters)?;
            let mut sums: Vec<&PauliSum> = vec![&energy_op];
            sums.extend(rdm_ops.iter().map(|(_, _, op)| op));
            let values = expect_sums(&state, &sums)?;
            let rdm_values: Vec<_> = rdm_ops
                .iter()
                .zip(&values[1..])
                .map(|((i, j, _), v)| (*i, *j, *v))
                .collect();
            let (electrons, rdm1) = assemble(p, c, &rdm_values);
            Ok(FragmentSolution {
                energy: values[0],
                electrons,
                rdm1,
                embedded_energy: result.energy,
                parameters: Some(result.parameters),
                iterations: Some(result.iterations),
                converged: result.converged,
            })
        }
    }
}

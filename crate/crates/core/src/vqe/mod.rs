//! Energy estimation over a worker pool and the classical outer loop.
//!
//! Every worker evolves one private MPS through the shared ansatz gate list,
//! then measures a contiguous block of Pauli strings on it. Per-string values
//! are summed by the coordinator in term order, so the energy does not depend
//! on the worker count.

mod optimize;
mod pipeline;
mod report;

use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::ansatz::UccsdAnsatz;
use crate::circuit::{cancel_inverse_pairs, hadamard_test_measurement, Circuit, Gate};
use crate::error::{Error, Result};
use crate::hamiltonian::{Pauli, PauliString, PauliSum};
use crate::mps::MpsState;

pub use optimize::{minimize, OptimizerKind, OptimizerSettings, VqeResult};
pub use pipeline::{build_problem, reference_bundle, run_vqe, run_vqe_on, VqeRun};
pub use report::{energy_history_csv, VqeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementMode {
    #[default]
    Direct,
    HadamardTest,
}

impl std::str::FromStr for MeasurementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "hadamard_test" | "hadamard-test" => Ok(Self::HadamardTest),
            _ => Err(Error::Argument(format!(
                "unknown measurement mode \"{s}\" (expected direct or hadamard_test)"
            ))),
        }
    }
}

pub const DEFAULT_MAX_BOND: usize = 64;
pub const DEFAULT_SVD_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct VqeProblem {
    hamiltonian: PauliSum,
    ansatz: UccsdAnsatz,
    trotter_steps: usize,
    gates: Arc<[Gate]>,
    strings: Vec<(PauliString, f64)>,
    pub max_bond: usize,
    pub svd_cutoff: f64,
    pub measurement_mode: MeasurementMode,
    pub optimizer: OptimizerSettings,
}

impl VqeProblem {
    pub fn new(hamiltonian: PauliSum, ansatz: UccsdAnsatz) -> Result<Self> {
        if hamiltonian.n_qubits() != ansatz.n_qubits {
            return Err(Error::Validation(format!(
                "Hamiltonian has {} qubits, ansatz has {}",
                hamiltonian.n_qubits(),
                ansatz.n_qubits
            )));
        }
        let strings = hamiltonian
            .terms()
            .filter(|(p, _)| !p.is_identity())
            .map(|(p, c)| (*p, c))
            .collect();
        Ok(Self {
            gates: Arc::from(cancel_inverse_pairs(&ansatz.ansatz_gates(1))),
            hamiltonian,
            ansatz,
            trotter_steps: 1,
            strings,
            max_bond: DEFAULT_MAX_BOND,
            svd_cutoff: DEFAULT_SVD_CUTOFF,
            measurement_mode: MeasurementMode::Direct,
            optimizer: OptimizerSettings::default(),
        })
    }

    pub fn with_trotter_steps(mut self, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Argument("trotter_steps must be positive".into()));
        }
        self.trotter_steps = steps;
        self.gates = Arc::from(cancel_inverse_pairs(&self.ansatz.ansatz_gates(steps)));
        Ok(self)
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn ansatz(&self) -> &UccsdAnsatz {
        &self.ansatz
    }

    pub fn n_qubits(&self) -> usize {
        self.ansatz.n_qubits
    }

    pub fn parameter_count(&self) -> usize {
        self.ansatz.parameter_count()
    }

    pub fn trotter_steps(&self) -> usize {
        self.trotter_steps
    }

    /// Shared parametric gate list of the ansatz body, with adjacent inverse
    /// gate pairs between consecutive exponentials removed.
    pub fn ansatz_gates(&self) -> &Arc<[Gate]> {
        &self.gates
    }

    /// Non-identity Hamiltonian strings in term order.
    pub fn strings(&self) -> &[(PauliString, f64)] {
        &self.strings
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.parameter_count() {
            return Err(Error::Argument(format!(
                "{} parameters given, ansatz has {}",
                theta.len(),
                self.parameter_count()
            )));
        }
        Ok(())
    }

    /// Register bits, with a trailing ancilla in Hadamard-test mode.
    fn register(&self) -> Vec<bool> {
        let mut bits = self.ansatz.reference_bits.clone();
        if self.measurement_mode == MeasurementMode::HadamardTest {
            bits.push(false);
        }
        bits
    }

    /// Reference state evolved through the ansatz for `theta`.
    pub fn prepare_state(&self, theta: &[f64]) -> Result<MpsState> {
        self.check_theta(theta)?;
        let mut s = MpsState::product_state(&self.register(), self.max_bond, self.svd_cutoff)?;
        s.apply_gates(self.gates.iter(), theta)?;
        Ok(s)
    }

    /// Every string's expectation on a prepared state, in term order.
    fn measure_all(&self, state: &MpsState, range: (usize, usize)) -> Result<Vec<f64>> {
        let block = &self.strings[range.0..range.1];
        match self.measurement_mode {
            MeasurementMode::Direct => {
                let ps: Vec<PauliString> = block.iter().map(|(p, _)| *p).collect();
                state.expect_pauli_strings(&ps)
            }
            MeasurementMode::HadamardTest => block.iter().map(|(p, _)| self.measure(state, p)).collect(),
        }
    }

    /// `<P>` on a prepared state, in the configured measurement mode.
    fn measure(&self, state: &MpsState, p: &PauliString) -> Result<f64> {
        match self.measurement_mode {
            MeasurementMode::Direct => state.expect_pauli_string(p),
            MeasurementMode::HadamardTest => {
                let n = self.n_qubits();
                let mut s = state.clone();
                s.apply_gates(hadamard_test_measurement(p, n)?.iter(), &[])?;
                s.expect_pauli_string(&PauliString::from_sparse(n + 1, &[(n, Pauli::Z)])?)
            }
        }
    }

    fn total(&self, values: &[f64], theta: &[f64]) -> Result<f64> {
        let mut e = self.hamiltonian.constant_term();
        for ((_, c), v) in self.strings.iter().zip(values) {
            e += c * v;
        }
        if e.is_finite() {
            Ok(e)
        } else {
            Err(Error::NonFiniteEnergy {
                parameters: theta.to_vec(),
            })
        }
    }
}

/// Energy and the largest accumulated truncation error among the workers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub energy: f64,
    pub truncation_error: f64,
}

/// Contiguous block boundaries `[start, end)` for `workers` workers.
pub fn partition(n_items: usize, workers: usize) -> Vec<(usize, usize)> {
    let w = workers.min(n_items).max(1);
    let (base, extra) = (n_items / w, n_items % w);
    let mut out = Vec::with_capacity(w);
    let mut start = 0;
    for k in 0..w {
        let len = base + usize::from(k < extra);
        out.push((start, start + len));
        start += len;
    }
    out
}

fn run_block(problem: &VqeProblem, theta: &[f64], range: (usize, usize)) -> Result<(Vec<f64>, f64)> {
    let state = problem.prepare_state(theta)?;
    let values = problem.measure_all(&state, range)?;
    Ok((values, state.truncation_error()))
}

/// `<P_i>` for every non-identity string, in term order.
pub fn string_expectations(problem: &VqeProblem, theta: &[f64], workers: usize) -> Result<(Vec<f64>, f64)> {
    if workers == 0 {
        return Err(Error::Argument("at least one worker is required".into()));
    }
    problem.check_theta(theta)?;
    let blocks = partition(problem.strings.len(), workers);
    let results: Vec<Result<(Vec<f64>, f64)>> = if blocks.len() == 1 {
        vec![run_block(problem, theta, blocks[0])]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = blocks
                .iter()
                .map(|&range| scope.spawn(move || run_block(problem, theta, range)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Argument("energy worker panicked".into()))))
                .collect()
        })
    };
    let mut values = Vec::with_capacity(problem.strings.len());
    let mut trunc: f64 = 0.0;
    for r in results {
        let (v, t) = r?;
        values.extend(v);
        trunc = trunc.max(t);
    }
    Ok((values, trunc))
}

pub fn evaluate(problem: &VqeProblem, theta: &[f64], workers: usize) -> Result<Evaluation> {
    let (values, truncation_error) = string_expectations(problem, theta, workers)?;
    Ok(Evaluation {
        energy: problem.total(&values, theta)?,
        truncation_error,
    })
}

pub fn evaluate_energy(problem: &VqeProblem, theta: &[f64], workers: usize) -> Result<f64> {
    evaluate(problem, theta, workers).map(|e| e.energy)
}

/// Central finite-difference gradient with step `h`.
///
/// Gates before the first use of a slot do not depend on it, so one forward
/// pass stores the state at every first use and each probe resumes from
/// there. Probes are split over workers in contiguous slot blocks; every
/// probe energy is reduced in term order, independent of the worker count.
pub fn energy_gradient(problem: &VqeProblem, theta: &[f64], h: f64, workers: usize) -> Result<Vec<f64>> {
    if workers == 0 {
        return Err(Error::Argument("at least one worker is required".into()));
    }
    problem.check_theta(theta)?;
    let n = problem.parameter_count();
    let gates = &problem.gates;
    let mut first_use = vec![gates.len(); n];
    for (idx, g) in gates.iter().enumerate() {
        if let Some(p) = g.param {
            first_use[p.slot] = first_use[p.slot].min(idx);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&k| first_use[k]);
    let mut checkpoints: Vec<Option<MpsState>> = vec![None; n];
    let mut state = MpsState::product_state(&problem.register(), problem.max_bond, problem.svd_cutoff)?;
    let mut applied = 0;
    for &k in &order {
        state.apply_gates(gates[applied..first_use[k]].iter(), theta)?;
        applied = first_use[k];
        checkpoints[k] = Some(state.clone());
    }
    let probe = |k: usize, shift: f64| -> Result<f64> {
        let mut t = theta.to_vec();
        t[k] += shift;
        let mut s = checkpoints[k].clone().expect("checkpoint for every slot");
        s.apply_gates(gates[first_use[k]..].iter(), &t)?;
        let values = problem.measure_all(&s, (0, problem.strings.len()))?;
        problem.total(&values, &t)
    };
    let block = |range: (usize, usize)| -> Result<Vec<f64>> {
        (range.0..range.1)
            .map(|k| Ok((probe(k, h)? - probe(k, -h)?) / (2.0 * h)))
            .collect()
    };
    let blocks = partition(n, workers);
    let results: Vec<Result<Vec<f64>>> = if blocks.len() == 1 {
        vec![block(blocks[0])]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = blocks.iter().map(|&r| scope.spawn(move || block(r))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Argument("gradient worker panicked".into()))))
                .collect()
        })
    };
    let mut grad = Vec::with_capacity(n);
    for r in results {
        grad.extend(r?);
    }
    Ok(grad)
}

/// Energy with one freshly built full circuit per string (reference, ansatz
/// and measurement suffix), evolved from scratch every time.
pub fn evaluate_energy_per_string(problem: &VqeProblem, theta: &[f64]) -> Result<f64> {
    problem.check_theta(theta)?;
    let n = problem.n_qubits();
    let bits = problem.register();
    let zeros = vec![false; bits.len()];
    let mut values = Vec::with_capacity(problem.strings.len());
    for (p, _) in &problem.strings {
        let (measurement, observable) = match problem.measurement_mode {
            MeasurementMode::Direct => (Vec::new(), *p),
            MeasurementMode::HadamardTest => (
                hadamard_test_measurement(p, n)?,
                PauliString::from_sparse(n + 1, &[(n, Pauli::Z)])?,
            ),
        };
        let circuit = Circuit::new(
            bits.len(),
            problem.ansatz.reference_gates(),
            Arc::from(cancel_inverse_pairs(&problem.ansatz.ansatz_gates(problem.trotter_steps))),
            measurement,
            problem.parameter_count(),
        )?;
        let mut s = MpsState::product_state(&zeros, problem.max_bond, problem.svd_cutoff)?;
        s.apply_gates(circuit.gates(), theta)?;
        values.push(s.expect_pauli_string(&observable)?);
    }
    problem.total(&values, theta)
}

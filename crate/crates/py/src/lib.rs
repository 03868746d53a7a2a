//! Python bindings: integral bundles, Jordan-Wigner sums, MPS states, and
//! the VQE and DMET drivers.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mpsvqe::circuit::{Gate, GateKind};
use mpsvqe::dmet::{dmet_run, fragments_by_size, rhf_scf, DmetSettings, FragmentSolver, VqeSolverSettings};
use mpsvqe::hamiltonian::{parse_fcidump, qubit_hamiltonian, PauliString};
use mpsvqe::oracle::fci::{fci_ground_state, Sector};
use mpsvqe::vqe::{run_vqe_on, MeasurementMode, OptimizerKind, VqeConfig};
use mpsvqe::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::Argument(_)
        | Error::Dimension { .. }
        | Error::Index(_)
        | Error::RoutingRequired(..) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// One- and two-electron integrals read from an FCIDUMP file.
#[pyclass(module = "pympsvqe", frozen)]
struct IntegralBundle(mpsvqe::hamiltonian::IntegralBundle);

#[pymethods]
impl IntegralBundle {
    #[staticmethod]
    fn from_fcidump(path: &str) -> PyResult<Self> {
        parse_fcidump(path).map(Self).map_err(py_err)
    }

    #[getter]
    fn n_orbitals(&self) -> usize {
        self.0.n_orbitals
    }

    #[getter]
    fn n_electrons(&self) -> usize {
        self.0.n_electrons
    }

    #[getter]
    fn nuclear_repulsion(&self) -> f64 {
        self.0.nuclear_repulsion
    }

    /// Restricted Hartree-Fock total energy.
    fn rhf_energy(&self) -> PyResult<f64> {
        rhf_scf(&self.0).map(|mf| mf.hf_energy).map_err(py_err)
    }

    /// Exact ground energy in the singlet sector with the bundle's electron count.
    fn fci_energy(&self, py: Python<'_>) -> PyResult<f64> {
        let b = self.0.clone();
        py.detach(move || {
            let h = qubit_hamiltonian(&b)?;
            fci_ground_state(&h, Sector::singlet(b.n_electrons)).map(|g| g.energy)
        })
        .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "IntegralBundle(n_orbitals={}, n_electrons={})",
            self.0.n_orbitals, self.0.n_electrons
        )
    }
}

/// Real-weighted sum of Pauli strings.
#[pyclass(module = "pympsvqe", frozen)]
struct PauliSum(mpsvqe::hamiltonian::PauliSum);

#[pymethods]
impl PauliSum {
    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    #[getter]
    fn constant(&self) -> f64 {
        self.0.constant_term()
    }

    fn term_count(&self) -> usize {
        self.0.term_count()
    }

    /// `(string, coefficient)` pairs without the identity.
    fn terms(&self) -> Vec<(String, f64)> {
        self.0.terms().map(|(p, c)| (p.to_string(), c)).collect()
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    fn __len__(&self) -> usize {
        self.0.term_count()
    }
}

#[pyfunction]
fn jordan_wigner(bundle: &IntegralBundle) -> PyResult<PauliSum> {
    qubit_hamiltonian(&bundle.0).map(PauliSum).map_err(py_err)
}

fn gate_kind(name: &str, angle: Option<f64>) -> PyResult<GateKind> {
    let needs_angle = || angle.ok_or_else(|| PyValueError::new_err(format!("gate {name} needs an angle")));
    Ok(match name.to_ascii_lowercase().as_str() {
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "h" => GateKind::H,
        "s" => GateKind::S,
        "sdg" => GateKind::Sdg,
        "rx" => GateKind::Rx(needs_angle()?),
        "ry" => GateKind::Ry(needs_angle()?),
        "rz" => GateKind::Rz(needs_angle()?),
        "cnot" | "cx" => GateKind::Cnot,
        "cz" => GateKind::Cz,
        "swap" => GateKind::Swap,
        other => return Err(PyValueError::new_err(format!("unknown gate {other}"))),
    })
}

/// Matrix product state over qubits, qubit 0 leftmost.
#[pyclass(module = "pympsvqe")]
struct MpsState(mpsvqe::mps::MpsState);

#[pymethods]
impl MpsState {
    #[new]
    #[pyo3(signature = (bits, max_bond = 64, svd_cutoff = 0.0))]
    fn new(bits: &str, max_bond: usize, svd_cutoff: f64) -> PyResult<Self> {
        mpsvqe::mps::MpsState::from_bitstring(bits, max_bond, svd_cutoff)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    /// Applies a named gate; two-qubit gates must act on neighbours.
    #[pyo3(signature = (name, qubits, angle = None))]
    fn apply_gate(&mut self, name: &str, qubits: Vec<usize>, angle: Option<f64>) -> PyResult<()> {
        let kind = gate_kind(name, angle)?;
        let gate = match (kind.arity(), qubits.as_slice()) {
            (1, [q]) => Gate::single(kind, *q),
            (2, [a, b]) => Gate::two(kind, *a, *b),
            (k, _) => return Err(PyValueError::new_err(format!("gate {name} takes {k} qubits"))),
        };
        gate.validate(self.0.n_qubits(), 0).map_err(py_err)?;
        self.0.apply_gate(&gate, &[]).map_err(py_err)
    }

    fn expect_pauli(&self, pauli: &str) -> PyResult<f64> {
        let p: PauliString = pauli.parse().map_err(py_err)?;
        self.0.expect_pauli_string(&p).map_err(py_err)
    }

    fn amplitude(&self, bits: &str) -> PyResult<Complex64> {
        let b = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(value_err(format!("bad bit {other:?}"))),
            })
            .collect::<PyResult<Vec<bool>>>()?;
        self.0.amplitude(&b).map_err(py_err)
    }

    fn to_statevector(&self) -> PyResult<Vec<Complex64>> {
        self.0.to_statevector().map_err(py_err)
    }

    fn bond_dims(&self) -> Vec<usize> {
        self.0.bond_dims()
    }

    fn truncation_error(&self) -> f64 {
        self.0.truncation_error()
    }

    fn canonical_residual(&self) -> f64 {
        self.0.canonical_residual()
    }
}

/// Outcome of a VQE optimization.
#[pyclass(module = "pympsvqe", frozen, get_all)]
struct VqeOutcome {
    energy: f64,
    rhf_energy: f64,
    parameters: Vec<f64>,
    iterations: u64,
    energy_history: Vec<f64>,
    n_qubits: usize,
    n_parameters: usize,
    converged: bool,
}

#[pyfunction]
#[pyo3(signature = (bundle, max_bond = 64, measurement_mode = "direct", optimizer = "bfgs", workers = 1))]
fn run_vqe(
    py: Python<'_>,
    bundle: &IntegralBundle,
    max_bond: usize,
    measurement_mode: &str,
    optimizer: &str,
    workers: usize,
) -> PyResult<VqeOutcome> {
    let mut config: VqeConfig = serde_json::from_value(serde_json::json!({ "bundle": "" })).map_err(value_err)?;
    config.max_bond = max_bond;
    config.measurement_mode = measurement_mode.parse::<MeasurementMode>().map_err(py_err)?;
    config.optimizer.kind = optimizer.parse::<OptimizerKind>().map_err(py_err)?;
    let b = bundle.0.clone();
    let run = py.detach(move || run_vqe_on(&b, &config, workers)).map_err(py_err)?;
    Ok(VqeOutcome {
        energy: run.result.energy,
        rhf_energy: run.rhf_energy,
        parameters: run.result.parameters,
        iterations: run.result.iterations,
        energy_history: run.result.energy_history,
        n_qubits: run.n_qubits,
        n_parameters: run.n_parameters,
        converged: run.result.converged,
    })
}

/// Outcome of a DMET calculation.
#[pyclass(module = "pympsvqe", frozen, get_all)]
struct DmetOutcome {
    total_energy: f64,
    chemical_potential: f64,
    total_electron_count: f64,
    fragment_energies: Vec<f64>,
    hf_energy: f64,
    converged: bool,
}

#[pyfunction]
#[pyo3(signature = (bundle, fragment_size, solver = "fci", max_bond = 64, workers = 1))]
fn run_dmet(
    py: Python<'_>,
    bundle: &IntegralBundle,
    fragment_size: usize,
    solver: &str,
    max_bond: usize,
    workers: usize,
) -> PyResult<DmetOutcome> {
    let solver = match solver {
        "fci" => FragmentSolver::Fci,
        "mps-vqe" => FragmentSolver::MpsVqe(VqeSolverSettings {
            max_bond,
            ..Default::default()
        }),
        other => return Err(PyValueError::new_err(format!("unknown solver {other}"))),
    };
    let settings = DmetSettings {
        solver,
        ..Default::default()
    };
    let b = bundle.0.clone();
    let state = py
        .detach(move || {
            let fragments = fragments_by_size(b.n_orbitals, fragment_size)?;
            dmet_run(&b, &fragments, &settings, workers)
        })
        .map_err(py_err)?;
    Ok(DmetOutcome {
        total_energy: state.total_energy,
        chemical_potential: state.chemical_potential,
        total_electron_count: state.total_electron_count,
        fragment_energies: state.fragment_energies(),
        hf_energy: state.hf_energy,
        converged: state.converged,
    })
}

#[pymodule]
fn pympsvqe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<IntegralBundle>()?;
    m.add_class::<PauliSum>()?;
    m.add_class::<MpsState>()?;
    m.add_class::<VqeOutcome>()?;
    m.add_class::<DmetOutcome>()?;
    m.add_function(wrap_pyfunction!(jordan_wigner, m)?)?;
    m.add_function(wrap_pyfunction!(run_vqe, m)?)?;
    m.add_function(wrap_pyfunction!(run_dmet, m)?)?;
    Ok(())
}

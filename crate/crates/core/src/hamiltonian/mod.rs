//! Molecular integrals, fermion operators and their qubit images.

pub mod fermion;
pub mod integrals;
pub mod jordan_wigner;
pub mod pauli;

pub use fermion::{molecular_hamiltonian, number_operator, spin_orbital, FermionOperator, Ladder};
pub use integrals::{parse_fcidump, parse_fcidump_str, IntegralBundle};
pub use jordan_wigner::jordan_wigner;
pub use pauli::{pauli_multiply, Pauli, PauliString, PauliSum, Phase};

/// Qubit Hamiltonian of an integral bundle on `2 * n_orbitals` qubits.
pub fn qubit_hamiltonian(b: &IntegralBundle) -> crate::Result<PauliSum> {
    jordan_wigner(&molecular_hamiltonian(b), 2 * b.n_orbitals)
}

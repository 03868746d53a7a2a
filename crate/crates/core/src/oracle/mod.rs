//! Brute-force references: dense state-vector simulation and exact
//! diagonalization.

pub mod fci;
pub mod statevector;

pub use fci::{fci_ground_energy, fci_ground_state, sector_basis, GroundState, Sector};
pub use statevector::{circuit_unitary, sv_run, sv_run_gates, StateVector};

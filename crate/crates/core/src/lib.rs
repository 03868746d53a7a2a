//! Matrix-product-state simulation of UCCSD-VQE for molecular Hamiltonians,
//! with a DMET embedding layer and exact-diagonalization oracles.
//!
//! Qubit 0 is the leftmost MPS site and the most significant bit of any
//! computational-basis index.

pub mod ansatz;
pub mod bench;
pub mod circuit;
pub mod dmet;
pub mod error;
pub mod hamiltonian;
pub mod mps;
pub mod oracle;
pub mod tensor;
pub mod vqe;

pub use error::{Error, Result};

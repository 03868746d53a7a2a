#![allow(dead_code)]

use std::path::PathBuf;

use mpsvqe::hamiltonian::{parse_fcidump, IntegralBundle};
use mpsvqe::tensor::C64;
use ndarray::Array2;
use ndarray_linalg::QR;
use num_complex::Complex64;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn load(name: &str) -> (IntegralBundle, serde_json::Value) {
    let b = parse_fcidump(fixture(&format!("{name}.fcidump"))).unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture(&format!("{name}.json"))).unwrap()).unwrap();
    (b, meta)
}

/// Haar-ish random unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> Array2<C64> {
    let m = Array2::from_shape_fn((dim, dim), |_| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let (q, _) = m.qr().unwrap();
    q
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

use mpsvqe::hamiltonian::{FermionOperator, PauliSum};
use mpsvqe::oracle::StateVector;

/// Dense matrix of a fermion operator acting on occupation-number states.
/// Mode `j` is stored in index bit `n - 1 - j`; a ladder operator on `j`
/// picks up the parity of the occupied modes below `j`.
pub fn fermion_matrix(f: &FermionOperator, n: usize) -> Array2<C64> {
    let dim = 1usize << n;
    let mut m = Array2::zeros((dim, dim));
    for col in 0..dim {
        for (ops, c) in f.terms() {
            let mut state = col;
            let mut sign = 1.0;
            let mut alive = true;
            for op in ops.iter().rev() {
                let bit = 1usize << (n - 1 - op.mode);
                let occupied = state & bit != 0;
                if occupied == op.dagger {
                    alive = false;
                    break;
                }
                let below = (0..op.mode).filter(|&k| state & (1 << (n - 1 - k)) != 0).count();
                if below % 2 == 1 {
                    sign = -sign;
                }
                state ^= bit;
            }
            if alive {
                m[[state, col]] += c * sign;
            }
        }
    }
    m
}

/// Dense matrix of a Pauli sum, built column by column.
pub fn pauli_matrix(h: &PauliSum) -> Array2<C64> {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let mut m = Array2::zeros((dim, dim));
    for col in 0..dim {
        let bits: Vec<bool> = (0..n).map(|q| (col >> (n - 1 - q)) & 1 == 1).collect();
        let sv = StateVector::basis(&bits).unwrap();
        m[[col, col]] += Complex64::new(h.constant_term(), 0.0);
        for (p, c) in h.terms() {
            for (row, a) in sv.apply_pauli(p).into_iter().enumerate() {
                m[[row, col]] += a * c;
            }
        }
    }
    m
}

pub fn matrix_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::hamiltonian::{PauliString, PauliSum};
use crate::tensor::C64;

pub const MAX_SV_QUBITS: usize = 24;

/// Dense state; amplitude index bit `N - 1 - q` holds qubit `q`, matching
/// [`crate::mps::MpsState::to_statevector`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

/// Reverses the low `n` bits so a qubit mask becomes an index mask.
pub(crate) fn qubit_mask_to_index(mask: u128, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        (mask.reverse_bits() >> (128 - n)) as u64
    }
}

impl StateVector {
    pub fn basis(bits: &[bool]) -> Result<Self> {
        let n = bits.len();
        check_capacity(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits: n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.is_empty() || amps.len() != 1 << n {
            return Err(Error::Argument(format!("{} amplitudes is not a power of two", amps.len())));
        }
        check_capacity(n)?;
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    pub fn apply_single(&mut self, m: ArrayView2<'_, C64>, q: usize) {
        let b = self.bit(q);
        for i in 0..self.amps.len() {
            if i & b == 0 {
                let (x0, x1) = (self.amps[i], self.amps[i | b]);
                self.amps[i] = m[[0, 0]] * x0 + m[[0, 1]] * x1;
                self.amps[i | b] = m[[1, 0]] * x0 + m[[1, 1]] * x1;
            }
        }
    }

    /// 4x4 `m` in the `(a, b)` basis, `a` the more significant factor.
    pub fn apply_two(&mut self, m: ArrayView2<'_, C64>, a: usize, b: usize) {
        let (ba, bb) = (self.bit(a), self.bit(b));
        for i in 0..self.amps.len() {
            if i & (ba | bb) == 0 {
                let idx = [i, i | bb, i | ba, i | ba | bb];
                let v = idx.map(|k| self.amps[k]);
                for (r, &k) in idx.iter().enumerate() {
                    self.amps[k] = m[[r, 0]] * v[0] + m[[r, 1]] * v[1] + m[[r, 2]] * v[2] + m[[r, 3]] * v[3];
                }
            }
        }
    }

    pub fn apply_gate(&mut self, g: &Gate, theta: &[f64]) -> Result<()> {
        for &q in g.qubits() {
            if q >= self.n_qubits {
                return Err(Error::Index(format!("gate {g} touches qubit {q} of {}", self.n_qubits)));
            }
        }
        let m = g.matrix(theta)?;
        match g.qubits() {
            &[q] => self.apply_single(m.view(), q),
            &[a, b] => self.apply_two(m.view(), a, b),
            _ => unreachable!("gates act on one or two qubits"),
        }
        Ok(())
    }

    /// `P |psi>`.
    pub fn apply_pauli(&self, p: &PauliString) -> Vec<C64> {
        let x = qubit_mask_to_index(p.x_mask(), self.n_qubits) as usize;
        let z = qubit_mask_to_index(p.z_mask(), self.n_qubits) as usize;
        let base = Complex64::new(0.0, 1.0).powu(p.y_count());
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let sign = if (i & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[i ^ x] += a * base * sign;
        }
        out
    }

    pub fn expect_pauli(&self, p: &PauliString) -> C64 {
        self.apply_pauli(p)
            .iter()
            .zip(&self.amps)
            .map(|(pa, a)| a.conj() * pa)
            .sum()
    }

    pub fn expect_pauli_sum(&self, h: &PauliSum) -> f64 {
        let mut e = h.constant_term() * self.norm().powi(2);
        for (p, c) in h.terms() {
            e += c * self.expect_pauli(p).re;
        }
        e
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_SV_QUBITS {
        Err(Error::Capacity(format!("{n} qubits exceeds the {MAX_SV_QUBITS}-qubit statevector limit")))
    } else {
        Ok(())
    }
}

/// Runs a gate list from `|initial>`.
pub fn sv_run_gates(gates: &[Gate], initial: &[bool], theta: &[f64]) -> Result<StateVector> {
    let mut sv = StateVector::basis(initial)?;
    for g in gates {
        sv.apply_gate(g, theta)?;
    }
    Ok(sv)
}

/// Runs every segment of `circuit` from `|initial>`.
pub fn sv_run(circuit: &Circuit, initial: &[bool], theta: &[f64]) -> Result<StateVector> {
    if initial.len() != circuit.n_qubits {
        return Err(Error::Argument(format!(
            "initial state has {} bits, circuit has {} qubits",
            initial.len(),
            circuit.n_qubits
        )));
    }
    let mut sv = StateVector::basis(initial)?;
    for g in circuit.gates() {
        sv.apply_gate(g, theta)?;
    }
    Ok(sv)
}

/// Dense unitary of a gate list; column `j` is the image of basis state `j`.
pub fn circuit_unitary(gates: &[Gate], n_qubits: usize, theta: &[f64]) -> Result<Array2<C64>> {
    if n_qubits > 12 {
        return Err(Error::Capacity(format!("unitary of {n_qubits} qubits is too large")));
    }
    let dim = 1usize << n_qubits;
    let mut u = Array2::zeros((dim, dim));
    for j in 0..dim {
        let bits: Vec<bool> = (0..n_qubits).map(|q| (j >> (n_qubits - 1 - q)) & 1 == 1).collect();
        let sv = sv_run_gates(gates, &bits, theta)?;
        for (i, a) in sv.amps.into_iter().enumerate() {
            u[[i, j]] = a;
        }
    }
    Ok(u)
}

/// Largest entrywise difference between two matrices.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

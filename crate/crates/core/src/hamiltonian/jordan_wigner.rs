use num_complex::Complex64;

use super::fermion::{FermionOperator, Ladder};
use super::pauli::{ComplexPauliSum, PauliString, PauliSum, MAX_QUBITS, PRUNE_THRESHOLD};
use crate::error::{Error, Result};

/// Largest imaginary part tolerated when a Hermitian operator is mapped.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// `a_j -> Z_0 ... Z_{j-1} (X_j + i Y_j) / 2`, and the conjugate for `a+_j`.
fn ladder_image(op: Ladder, n_modes: usize) -> ComplexPauliSum {
    let parity: u128 = if op.mode == 0 { 0 } else { (1u128 << op.mode) - 1 };
    let bit = 1u128 << op.mode;
    let x = PauliString::from_masks(bit, parity, n_modes).expect("mode checked");
    let y = PauliString::from_masks(bit, parity | bit, n_modes).expect("mode checked");
    let sign = if op.dagger { -1.0 } else { 1.0 };
    let mut s = ComplexPauliSum::default();
    s.add(x, Complex64::new(0.5, 0.0));
    // Z_{<j} Y_j carries no phase because the parity string and Y act on
    // disjoint qubits.
    s.add(y, Complex64::new(0.0, 0.5 * sign));
    s
}

fn check_modes(f: &FermionOperator, n_modes: usize) -> Result<()> {
    if n_modes > MAX_QUBITS {
        return Err(Error::Capacity(format!("{n_modes} modes exceeds {MAX_QUBITS}")));
    }
    if let Some(m) = f.max_mode() {
        if m >= n_modes {
            return Err(Error::Index(format!("mode {m} out of range for {n_modes} modes")));
        }
    }
    Ok(())
}

/// Jordan-Wigner image with complex coefficients. Terms below the Pauli
/// pruning threshold are dropped.
pub(crate) fn jordan_wigner_complex(f: &FermionOperator, n_modes: usize) -> Result<ComplexPauliSum> {
    check_modes(f, n_modes)?;
    let mut out = ComplexPauliSum::default();
    for (ops, coeff) in f.terms() {
        let mut acc = ComplexPauliSum::scalar(n_modes, coeff);
        for &op in ops {
            acc = acc.mul(&ladder_image(op, n_modes));
        }
        for (p, c) in acc.terms {
            out.add(p, c);
        }
    }
    out.prune(PRUNE_THRESHOLD);
    Ok(out)
}

/// Maps a Hermitian fermion operator to a real-weighted Pauli sum on
/// `n_modes` qubits (qubit `j` = spin-orbital `j`).
pub fn jordan_wigner(f: &FermionOperator, n_modes: usize) -> Result<PauliSum> {
    let c = jordan_wigner_complex(f, n_modes)?;
    let mut out = PauliSum::new(n_modes);
    for (p, v) in c.terms {
        if v.im.abs() > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "coefficient of {p} has imaginary part {:e}; operator is not Hermitian",
                v.im
            )));
        }
        out.add_term(p, v.re)?;
    }
    out.prune();
    Ok(out)
}

use super::passes::route_nearest_neighbour;
use super::Gate;
use crate::error::{Error, Result};
use crate::hamiltonian::{Pauli, PauliString};

/// Hadamard-test suffix for `<P>` on `n_qubits` system qubits plus an
/// ancilla at index `n_qubits`. After it, `<Z_ancilla> = Re <P>`.
///
/// The controlled Paulis are routed onto neighbouring qubits; identity
/// strings are rejected because their value is known to be 1.
pub fn hadamard_test_measurement(p: &PauliString, n_qubits: usize) -> Result<Vec<Gate>> {
    if p.is_identity() {
        return Err(Error::Argument("identity string has no Hadamard test; its value is 1".into()));
    }
    let support = p.support();
    if let Some(&q) = support.last() {
        if q >= n_qubits {
            return Err(Error::Index(format!("Pauli string {p} acts outside {n_qubits} qubits")));
        }
    }
    let anc = n_qubits;
    let mut gates = vec![Gate::h(anc)];
    for &q in &support {
        match p.letter(q) {
            Pauli::X => gates.push(Gate::cnot(anc, q)),
            Pauli::Z => gates.push(Gate::cz(anc, q)),
            Pauli::Y => {
                // S X Sdg = Y
                gates.push(Gate::sdg(q));
                gates.push(Gate::cnot(anc, q));
                gates.push(Gate::s(q));
            }
            Pauli::I => unreachable!("support excludes identities"),
        }
    }
    let mut out = route_nearest_neighbour(&gates);
    out.push(Gate::h(anc));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_rejected() {
        let p: PauliString = "II".parse().unwrap();
        assert!(matches!(hadamard_test_measurement(&p, 2), Err(Error::Argument(_))));
    }

    #[test]
    fn structure_of_single_z() {
        let p: PauliString = "Z".parse().unwrap();
        let g = hadamard_test_measurement(&p, 1).unwrap();
        assert_eq!(g, vec![Gate::h(1), Gate::cz(1, 0), Gate::h(1)]);
    }

    #[test]
    fn all_two_qubit_gates_are_adjacent() {
        let p: PauliString = "XIYZ".parse().unwrap();
        for g in hadamard_test_measurement(&p, 4).unwrap() {
            if g.arity() == 2 {
                let (lo, hi) = g.span();
                assert_eq!(hi - lo, 1, "{g}");
            }
        }
    }
}

//! Trotterized UCCSD on the interleaved spin-orbital register.

use std::sync::Arc;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::hamiltonian::fermion::{FermionOperator, Ladder};
use crate::hamiltonian::jordan_wigner::jordan_wigner_complex;
use crate::hamiltonian::{Pauli, PauliString, PauliSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Excitation {
    Single { i: usize, a: usize },
    Double { i: usize, j: usize, a: usize, b: usize },
}

impl Excitation {
    /// `T = a+_a a_i` or `a+_a a+_b a_j a_i`.
    fn operator(&self) -> FermionOperator {
        let mut t = FermionOperator::new();
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Excitation::Single { i, a } => t.add_product(&[Ladder::create(a), Ladder::annihilate(i)], one),
            Excitation::Double { i, j, a, b } => t.add_product(
                &[
                    Ladder::create(a),
                    Ladder::create(b),
                    Ladder::annihilate(j),
                    Ladder::annihilate(i),
                ],
                one,
            ),
        }
        t
    }

    pub fn modes(&self) -> Vec<usize> {
        match *self {
            Excitation::Single { i, a } => vec![i, a],
            Excitation::Double { i, j, a, b } => vec![i, j, a, b],
        }
    }
}

/// One excitation and its qubit image: `T - T^H = sum_k i c_k P_k`.
#[derive(Debug, Clone)]
pub struct ExcitationGenerator {
    pub excitation: Excitation,
    pub slot: usize,
    /// `(P_k, c_k)` in lexicographic string order.
    pub terms: Vec<(PauliString, f64)>,
}

impl ExcitationGenerator {
    fn new(excitation: Excitation, slot: usize, n_qubits: usize) -> Result<Self> {
        let t = excitation.operator();
        let g = t.sub(&t.adjoint());
        let image = jordan_wigner_complex(&g, n_qubits)?;
        let mut terms = Vec::with_capacity(image.terms.len());
        for (p, c) in image.terms {
            if c.re.abs() > 1e-12 {
                return Err(Error::Validation(format!("generator term {p} has a real part {}", c.re)));
            }
            terms.push((p, c.im));
        }
        Ok(Self {
            excitation,
            slot,
            terms,
        })
    }

    /// The real weights `c_k` of `i P_k` as a Pauli sum.
    pub fn pauli_decomposition(&self, n_qubits: usize) -> PauliSum {
        let mut s = PauliSum::new(n_qubits);
        for (p, c) in &self.terms {
            s.add_term(*p, *c).expect("term fits the register");
        }
        s
    }

    /// All terms of one generator flip the same qubits.
    pub fn x_mask(&self) -> u128 {
        self.terms.first().map_or(0, |(p, _)| p.x_mask())
    }
}

#[derive(Debug, Clone)]
pub struct UccsdAnsatz {
    pub n_qubits: usize,
    pub n_electrons: usize,
    pub reference_bits: Vec<bool>,
    pub generators: Vec<ExcitationGenerator>,
}

fn spin(mode: usize) -> usize {
    mode % 2
}

/// All spin-conserving singles then doubles from the lowest `n_electrons`
/// spin-orbitals, ordered by `(i, a)` and `(i, j, a, b)`.
pub fn build_uccsd(n_orbitals: usize, n_electrons: usize) -> Result<UccsdAnsatz> {
    if n_electrons == 0 || n_electrons > 2 * n_orbitals {
        return Err(Error::Argument(format!(
            "{n_electrons} electrons do not fit {n_orbitals} orbitals"
        )));
    }
    if n_electrons % 2 == 1 {
        return Err(Error::Unsupported(format!("open-shell reference with {n_electrons} electrons")));
    }
    let occupied: Vec<usize> = (0..n_electrons / 2).collect();
    build_uccsd_with(n_orbitals, &occupied, None)
}

/// UCCSD over a closed-shell reference with the given doubly occupied
/// spatial orbitals. With `max_span`, only excitations whose spatial
/// orbitals lie within `max_span` of each other are kept.
pub fn build_uccsd_with(n_orbitals: usize, occupied: &[usize], max_span: Option<usize>) -> Result<UccsdAnsatz> {
    let n = 2 * n_orbitals;
    let mut reference_bits = vec![false; n];
    for &p in occupied {
        if p >= n_orbitals {
            return Err(Error::Argument(format!("occupied orbital {p} outside 0..{n_orbitals}")));
        }
        reference_bits[2 * p] = true;
        reference_bits[2 * p + 1] = true;
    }
    let occ: Vec<usize> = (0..n).filter(|&q| reference_bits[q]).collect();
    let virt: Vec<usize> = (0..n).filter(|&q| !reference_bits[q]).collect();
    if occ.len() != 2 * occupied.len() {
        return Err(Error::Argument("occupied orbitals listed twice".into()));
    }
    let local = |modes: &[usize]| {
        max_span.is_none_or(|w| {
            let lo = modes.iter().min().expect("non-empty") / 2;
            let hi = modes.iter().max().expect("non-empty") / 2;
            hi - lo <= w
        })
    };
    let mut excitations = Vec::new();
    for &i in &occ {
        for &a in &virt {
            if spin(i) == spin(a) && local(&[i, a]) {
                excitations.push(Excitation::Single { i, a });
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    let mut from = [spin(i), spin(j)];
                    let mut to = [spin(a), spin(b)];
                    from.sort_unstable();
                    to.sort_unstable();
                    if from == to && local(&[i, j, a, b]) {
                        excitations.push(Excitation::Double { i, j, a, b });
                    }
                }
            }
        }
    }
    let generators = excitations
        .into_iter()
        .enumerate()
        .map(|(slot, e)| ExcitationGenerator::new(e, slot, n))
        .collect::<Result<_>>()?;
    Ok(UccsdAnsatz {
        n_qubits: n,
        n_electrons: occ.len(),
        reference_bits,
        generators,
    })
}

/// Basis of the GF(2) span of the given masks, reduced by leading bit.
fn gf2_basis(masks: impl IntoIterator<Item = u128>) -> Vec<u128> {
    let mut basis: Vec<u128> = Vec::new();
    for m in masks {
        let r = reduce(&basis, m);
        if r != 0 {
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}

fn reduce(basis: &[u128], mut m: u128) -> u128 {
    for &b in basis {
        let top = 127 - b.leading_zeros();
        if m >> top & 1 == 1 {
            m ^= b;
        }
    }
    m
}

impl UccsdAnsatz {
    pub fn parameter_count(&self) -> usize {
        self.generators.len()
    }

    /// Drops generators whose bit-flip pattern lies outside the span of the
    /// Hamiltonian's flip patterns. Such a generator changes an eigenvalue of
    /// a Z-type symmetry of `h` that the reference fixes, so its energy
    /// gradient vanishes for every parameter vector. Slots are renumbered.
    pub fn screen_by_symmetry(&self, h: &PauliSum) -> UccsdAnsatz {
        let basis = gf2_basis(h.terms().map(|(p, _)| p.x_mask()));
        let generators = self
            .generators
            .iter()
            .filter(|g| reduce(&basis, g.x_mask()) == 0)
            .enumerate()
            .map(|(slot, g)| ExcitationGenerator { slot, ..g.clone() })
            .collect();
        UccsdAnsatz {
            generators,
            ..self.clone()
        }
    }

    pub fn reference_gates(&self) -> Vec<Gate> {
        self.reference_bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(q, _)| Gate::x(q))
            .collect()
    }

    /// Parametric gate list for `steps` first-order Trotter steps.
    pub fn ansatz_gates(&self, steps: usize) -> Vec<Gate> {
        let mut gates = Vec::new();
        let steps = steps.max(1);
        for _ in 0..steps {
            for g in &self.generators {
                for (p, c) in &g.terms {
                    // exp(i theta c P) = RZ(-2 c theta) conjugated into P's basis
                    pauli_exponential(&mut gates, p, g.slot, -2.0 * c / steps as f64);
                }
            }
        }
        gates
    }

    pub fn parametric_circuit(&self, steps: usize) -> Circuit {
        Circuit::new(
            self.n_qubits,
            self.reference_gates(),
            Arc::from(self.ansatz_gates(steps)),
            Vec::new(),
            self.parameter_count(),
        )
        .expect("ansatz circuits are valid by construction")
    }

    /// Single-step circuit for `theta`. Rotations keep their parameter slots
    /// so one circuit serves every parameter vector; `theta` fixes the length.
    pub fn trotter_circuit(&self, theta: &[f64]) -> Result<Circuit> {
        if theta.len() != self.parameter_count() {
            return Err(Error::Argument(format!(
                "{} parameters given, ansatz has {}",
                theta.len(),
                self.parameter_count()
            )));
        }
        Ok(self.parametric_circuit(1))
    }
}

/// Appends `exp(-i angle/2 P)` with `angle = scale * theta[slot]`, using
/// only nearest-neighbour two-qubit gates.
///
/// The parity of the support is accumulated with a CNOT ladder; across
/// identity qubits the carrier is moved with SWAPs so every gate stays
/// local. The ladder is undone in reverse.
pub fn pauli_exponential(gates: &mut Vec<Gate>, p: &PauliString, slot: usize, scale: f64) {
    let support = p.support();
    let Some(&last) = support.last() else { return };
    for &q in &support {
        match p.letter(q) {
            Pauli::X => gates.push(Gate::h(q)),
            Pauli::Y => {
                gates.push(Gate::sdg(q));
                gates.push(Gate::h(q));
            }
            _ => {}
        }
    }
    let mut ladder = Vec::new();
    for pair in support.windows(2) {
        let (mut pos, next) = (pair[0], pair[1]);
        while pos + 1 < next {
            ladder.push(Gate::swap(pos, pos + 1));
            pos += 1;
        }
        ladder.push(Gate::cnot(pos, next));
    }
    gates.extend(ladder.iter().cloned());
    gates.push(Gate::rz_param(last, slot, scale));
    gates.extend(ladder.into_iter().rev());
    for &q in &support {
        match p.letter(q) {
            Pauli::X => gates.push(Gate::h(q)),
            Pauli::Y => {
                gates.push(Gate::h(q));
                gates.push(Gate::s(q));
            }
            _ => {}
        }
    }
}

mod common;

use common::{load, max_diff};
use mpsvqe::ansatz::{build_uccsd, Excitation, UccsdAnsatz};
use mpsvqe::hamiltonian::qubit_hamiltonian;
use mpsvqe::mps::MpsState;
use mpsvqe::oracle::{sv_run, sv_run_gates, StateVector};
use mpsvqe::tensor::C64;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_theta(a: &UccsdAnsatz, seed: u64, width: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..a.parameter_count()).map(|_| rng.random_range(-width..width)).collect()
}

/// `exp(i phi P) v = cos(phi) v + i sin(phi) P v`, generator by generator in
/// slot order.
fn product_of_exponentials(a: &UccsdAnsatz, theta: &[f64]) -> Vec<C64> {
    let mut sv = StateVector::basis(&a.reference_bits).unwrap();
    for g in &a.generators {
        for (p, c) in &g.terms {
            let phi = theta[g.slot] * c;
            let pv = sv.apply_pauli(p);
            let next: Vec<C64> = sv
                .amplitudes()
                .iter()
                .zip(&pv)
                .map(|(v, w)| v * phi.cos() + Complex64::new(0.0, phi.sin()) * w)
                .collect();
            sv = StateVector::from_amplitudes(next).unwrap();
        }
    }
    sv.into_amplitudes()
}

/// Taylor series of `exp(theta G)` applied to `v`, `G = sum_k i c_k P_k`.
fn taylor_exponential(a: &UccsdAnsatz, slot: usize, theta: f64) -> Vec<C64> {
    let g = &a.generators[slot];
    let mut term = StateVector::basis(&a.reference_bits).unwrap();
    let mut sum = term.amplitudes().to_vec();
    for k in 1..60 {
        let mut next = vec![Complex64::new(0.0, 0.0); sum.len()];
        for (p, c) in &g.terms {
            for (x, y) in next.iter_mut().zip(term.apply_pauli(p)) {
                *x += Complex64::new(0.0, *c) * y * (theta / k as f64);
            }
        }
        for (s, x) in sum.iter_mut().zip(&next) {
            *s += x;
        }
        term = StateVector::from_amplitudes(next).unwrap();
    }
    sum
}

#[test]
fn zero_parameters_give_the_hartree_fock_energy() {
    for name in ["h2_sto3g", "lih_sto3g", "h2o_sto3g"] {
        let (b, meta) = load(name);
        let h = qubit_hamiltonian(&b).unwrap();
        let a = build_uccsd(b.n_orbitals, b.n_electrons).unwrap();
        let theta = vec![0.0; a.parameter_count()];
        let mut s = MpsState::product_state(&a.reference_bits, 64, 1e-12).unwrap();
        s.apply_gates(&a.ansatz_gates(1), &theta).unwrap();
        let mut e = h.constant_term();
        for (p, c) in h.terms() {
            e += c * s.expect_pauli_string(p).unwrap();
        }
        let rhf = meta["rhf_energy"].as_f64().unwrap();
        assert!((e - rhf).abs() < 1e-8, "{name}: {e} vs {rhf}");
        assert_eq!(s.max_bond_dim(), 1);
    }
}

#[test]
fn parameter_counts_follow_spin_conserving_excitations() {
    for (n_orb, n_e) in [(2usize, 2usize), (4, 4), (6, 4), (7, 10)] {
        let (occ, virt) = (n_e / 2, n_orb - n_e / 2);
        let singles = 2 * occ * virt;
        let same = 2 * (occ * (occ - 1) / 2) * (virt * (virt.saturating_sub(1)) / 2);
        let mixed = occ * occ * virt * virt;
        let a = build_uccsd(n_orb, n_e).unwrap();
        assert_eq!(a.parameter_count(), singles + same + mixed, "{n_orb} orbitals, {n_e} electrons");
    }
    assert_eq!(build_uccsd(6, 4).unwrap().parameter_count(), 92);
}

#[test]
fn circuit_equals_ordered_pauli_exponentials() {
    for (n_orb, n_e, seed) in [(2, 2, 1), (4, 4, 2), (3, 2, 3)] {
        let a = build_uccsd(n_orb, n_e).unwrap();
        let theta = random_theta(&a, seed, 1.0);
        let circuit = a.trotter_circuit(&theta).unwrap();
        let sv = sv_run(&circuit, &vec![false; a.n_qubits], &theta).unwrap();
        let d = max_diff(sv.amplitudes(), &product_of_exponentials(&a, &theta));
        assert!(d < 1e-10, "{n_orb} orbitals: {d}");
    }
}

#[test]
fn single_generator_is_the_exact_exponential() {
    let a = build_uccsd(3, 2).unwrap();
    for slot in [0, 3, a.parameter_count() - 1] {
        let mut theta = vec![0.0; a.parameter_count()];
        for t in [1e-3, 0.4] {
            theta[slot] = t;
            let sv = sv_run_gates(&a.ansatz_gates(1), &a.reference_bits, &theta).unwrap();
            let d = max_diff(sv.amplitudes(), &taylor_exponential(&a, slot, t));
            assert!(d < 1e-10, "slot {slot} ({:?}) at {t}: {d}", a.generators[slot].excitation);
        }
    }
}

#[test]
fn particle_number_and_spin_are_conserved() {
    let a = build_uccsd(4, 4).unwrap();
    let theta = random_theta(&a, 8, 1.5);
    let sv = sv_run_gates(&a.ansatz_gates(2), &a.reference_bits, &theta).unwrap();
    let n = a.n_qubits;
    for (i, amp) in sv.amplitudes().iter().enumerate() {
        if amp.norm() < 1e-12 {
            continue;
        }
        let up = (0..n).step_by(2).filter(|q| (i >> (n - 1 - q)) & 1 == 1).count();
        assert_eq!(i.count_ones(), 4, "index {i:b}");
        assert_eq!(up, 2, "index {i:b}");
    }
}

#[test]
fn doubles_act_on_paired_spin_orbitals() {
    let a = build_uccsd(2, 2).unwrap();
    let Excitation::Double { i, j, a: x, b: y } = a.generators[2].excitation else {
        panic!("third generator should be the double");
    };
    assert_eq!((i, j, x, y), (0, 1, 2, 3));
    assert_eq!(a.generators[2].terms.len(), 8);
    for (p, c) in &a.generators[2].terms {
        assert_eq!(p.weight(), 4);
        assert!((c.abs() - 0.125).abs() < 1e-15);
    }
}

#[test]
fn inverse_pair_cancellation_preserves_the_ansatz_state() {
    use mpsvqe::circuit::cancel_inverse_pairs;
    for name in ["h2_sto3g", "lih_sto3g"] {
        let (b, _) = load(name);
        let a = build_uccsd(b.n_orbitals, b.n_electrons).unwrap();
        let theta = random_theta(&a, 13, 0.4);
        let gates = a.ansatz_gates(1);
        let reduced = cancel_inverse_pairs(&gates);
        assert!(reduced.len() < gates.len());
        let full = sv_run_gates(&gates, &a.reference_bits, &theta).unwrap();
        let short = sv_run_gates(&reduced, &a.reference_bits, &theta).unwrap();
        assert!(max_diff(full.amplitudes(), short.amplitudes()) < 1e-10, "{name}");
    }
}

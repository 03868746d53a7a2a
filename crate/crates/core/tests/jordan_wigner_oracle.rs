mod common;

use common::{fermion_matrix, load, matrix_diff, pauli_matrix};
use mpsvqe::hamiltonian::{jordan_wigner, molecular_hamiltonian, qubit_hamiltonian, FermionOperator, Ladder};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random Hermitian operator with one- and two-body parts on `n` modes.
fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> FermionOperator {
    let mut f = FermionOperator::identity(rng.random_range(-1.0..1.0));
    for _ in 0..terms {
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let ops: Vec<Ladder> = if rng.random_bool(0.5) {
            vec![Ladder::create(rng.random_range(0..n)), Ladder::annihilate(rng.random_range(0..n))]
        } else {
            vec![
                Ladder::create(rng.random_range(0..n)),
                Ladder::create(rng.random_range(0..n)),
                Ladder::annihilate(rng.random_range(0..n)),
                Ladder::annihilate(rng.random_range(0..n)),
            ]
        };
        let mut t = FermionOperator::new();
        t.add_product(&ops, c);
        f.add(&t);
        f.add(&t.adjoint());
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn qubit_image_matches_occupation_action(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_hermitian(&mut rng, n, 6);
        let q = jordan_wigner(&f, n).unwrap();
        let d = matrix_diff(&pauli_matrix(&q), &fermion_matrix(&f, n));
        prop_assert!(d < 1e-10, "difference {}", d);
    }
}

#[test]
fn h2_qubit_hamiltonian_matches_fermion_matrix() {
    let (b, meta) = load("h2_sto3g");
    let f = molecular_hamiltonian(&b);
    let hf = fermion_matrix(&f, 4);
    let hq = pauli_matrix(&qubit_hamiltonian(&b).unwrap());
    assert!(matrix_diff(&hf, &hq) < 1e-12);
    let (w, _) = hf.eigh(UPLO::Lower).unwrap();
    let fci = meta["fci_energy"].as_f64().unwrap();
    assert!((w[0] - fci).abs() < 1e-9, "{} vs {fci}", w[0]);
}

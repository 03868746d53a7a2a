use std::collections::BTreeMap;

use ndarray::{Array2, Array4};
use num_complex::Complex64;

use super::integrals::IntegralBundle;

/// Coefficients below this magnitude are dropped from fermion operators.
pub const FERMION_PRUNE: f64 = 1e-14;

/// A creation (`dagger = true`) or annihilation operator on one spin-orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }
}

/// Spin-orbital index of spatial orbital `p` with spin `sigma` (0 = up,
/// 1 = down). Spins are interleaved along the register.
pub fn spin_orbital(p: usize, sigma: usize) -> usize {
    2 * p + sigma
}

/// Sum of products of ladder operators.
///
/// Each stored product is normal ordered: creations precede annihilations,
/// and within each group modes are strictly descending.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionOperator {
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

impl FermionOperator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(coeff: f64) -> Self {
        let mut f = Self::new();
        f.add_product(&[], Complex64::new(coeff, 0.0));
        f
    }

    /// Adds `coeff` times the product `ops[0] ops[1] ...`, normal ordering it.
    pub fn add_product(&mut self, ops: &[Ladder], coeff: Complex64) {
        if coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        normal_order_into(ops.to_vec(), coeff, &mut self.terms);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Ladder], Complex64)> {
        self.terms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.keys().flat_map(|k| k.iter().map(|l| l.mode)).max()
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= FERMION_PRUNE);
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::new();
        for (k, &c) in &self.terms {
            let rev: Vec<Ladder> = k
                .iter()
                .rev()
                .map(|l| Ladder {
                    mode: l.mode,
                    dagger: !l.dagger,
                })
                .collect();
            out.add_product(&rev, c.conj());
        }
        out.prune();
        out
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, &c)| (k.clone(), c * s)).collect(),
        }
    }

    pub fn add(&mut self, other: &FermionOperator) {
        for (k, &c) in &other.terms {
            *self.terms.entry(k.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        self.prune();
    }

    pub fn sub(&self, other: &FermionOperator) -> Self {
        let mut out = self.clone();
        out.add(&other.scaled(Complex64::new(-1.0, 0.0)));
        out
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn normal_order_into(mut term: Vec<Ladder>, mut coeff: Complex64, out: &mut BTreeMap<Vec<Ladder>, Complex64>) {
    // Insertion sort with anticommutation signs; a_p a+_p = 1 - a+_p a_p
    // spawns a contracted term.
    for i in 1..term.len() {
        for j in (1..=i).rev() {
            let left = term[j - 1];
            let right = term[j];
            if right.dagger && !left.dagger {
                if right.mode == left.mode {
                    let mut contracted = term[..j - 1].to_vec();
                    contracted.extend_from_slice(&term[j + 1..]);
                    normal_order_into(contracted, coeff, out);
                }
                term.swap(j - 1, j);
                coeff = -coeff;
            } else if right.dagger == left.dagger {
                if right.mode == left.mode {
                    return;
                }
                if right.mode > left.mode {
                    term.swap(j - 1, j);
                    coeff = -coeff;
                }
            }
        }
    }
    *out.entry(term).or_insert(Complex64::new(0.0, 0.0)) += coeff;
}

/// `constant + sum_pq A[p,q] a+_p a_q + 1/2 sum_pqrs G[p,q,r,s] a+_p a+_r a_s a_q`
/// summed over spins, with `G` in chemists' order. No symmetry of `A` or `G`
/// is assumed.
pub fn spin_summed_operator(constant: f64, one_body: &Array2<f64>, two_body: &Array4<f64>) -> FermionOperator {
    let n = one_body.nrows();
    let mut f = FermionOperator::identity(constant);
    for p in 0..n {
        for q in 0..n {
            let v = one_body[[p, q]];
            if v.abs() < FERMION_PRUNE {
                continue;
            }
            for s in 0..2 {
                f.add_product(
                    &[
                        Ladder::create(spin_orbital(p, s)),
                        Ladder::annihilate(spin_orbital(q, s)),
                    ],
                    Complex64::new(v, 0.0),
                );
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = 0.5 * two_body[[p, q, r, s]];
                    if v.abs() < FERMION_PRUNE {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let (a, b) = (spin_orbital(p, sigma), spin_orbital(r, tau));
                            let (c, d) = (spin_orbital(s, tau), spin_orbital(q, sigma));
                            if a == b || c == d {
                                continue;
                            }
                            f.add_product(
                                &[
                                    Ladder::create(a),
                                    Ladder::create(b),
                                    Ladder::annihilate(c),
                                    Ladder::annihilate(d),
                                ],
                                Complex64::new(v, 0.0),
                            );
                        }
                    }
                }
            }
        }
    }
    f.prune();
    f
}

/// Electronic Hamiltonian on `2 * n_orbitals` interleaved spin-orbitals,
/// including the nuclear repulsion as the identity coefficient.
pub fn molecular_hamiltonian(b: &IntegralBundle) -> FermionOperator {
    spin_summed_operator(b.nuclear_repulsion, &b.h, &b.g)
}

/// Total number operator over `n_modes` spin-orbitals.
pub fn number_operator(modes: impl IntoIterator<Item = usize>) -> FermionOperator {
    let mut f = FermionOperator::new();
    for m in modes {
        f.add_product(&[Ladder::create(m), Ladder::annihilate(m)], Complex64::new(1.0, 0.0));
    }
    f
}

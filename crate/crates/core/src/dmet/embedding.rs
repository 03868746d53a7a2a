//! Bath construction from the mean-field density and the embedded
//! Hamiltonian in the fragment-plus-bath space.

use ndarray::{s, Array2};
use ndarray_linalg::SVD;

use super::scf::{mean_field_potential, MeanField};
use crate::error::{Error, Result};
use crate::hamiltonian::integrals::transform_eri;
use crate::hamiltonian::IntegralBundle;

/// Singular values of the environment-fragment density block below this
/// are treated as zero coupling.
pub const BATH_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EmbeddingBasis {
    pub orbital_indices: Vec<usize>,
    /// `n x m`: fragment identity columns, then bath columns.
    pub basis: Array2<f64>,
    pub bath_singular_values: Vec<f64>,
    pub n_embedding_electrons: usize,
    /// Mean-field density left outside the embedding space.
    pub core_density: Array2<f64>,
}

impl EmbeddingBasis {
    pub fn n_fragment(&self) -> usize {
        self.orbital_indices.len()
    }

    pub fn n_bath(&self) -> usize {
        self.basis.ncols() - self.n_fragment()
    }

    pub fn n_orbitals(&self) -> usize {
        self.basis.ncols()
    }
}

fn check_fragment(n: usize, orbitals: &[usize]) -> Result<()> {
    if orbitals.is_empty() {
        return Err(Error::Embedding("empty fragment".into()));
    }
    let mut seen = vec![false; n];
    for &p in orbitals {
        if p >= n {
            return Err(Error::Embedding(format!("fragment orbital {p} outside 0..{n}")));
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::Embedding(format!("fragment orbital {p} listed twice")));
        }
    }
    Ok(())
}

/// Schmidt decomposition of the mean-field state for one fragment: the
/// left singular vectors of `D[env, frag]` become bath orbitals.
///
/// A fragment covering every orbital gets an empty bath.
pub fn build_bath(mf: &MeanField, fragment_orbitals: &[usize]) -> Result<EmbeddingBasis> {
    let d = &mf.density_matrix;
    let n = d.nrows();
    check_fragment(n, fragment_orbitals)?;
    let env: Vec<usize> = (0..n).filter(|p| !fragment_orbitals.contains(p)).collect();
    let nf = fragment_orbitals.len();
    let block = Array2::from_shape_fn((env.len(), nf), |(e, f)| d[[env[e], fragment_orbitals[f]]]);
    let (bath, sv) = if env.is_empty() {
        (Array2::zeros((0, 0)), Vec::new())
    } else {
        let (u, sigma, _) = block.svd(true, false).map_err(|e| Error::Numerical {
            rows: env.len(),
            cols: nf,
            reason: format!("bath SVD: {e}"),
        })?;
        let u = u.expect("left vectors requested");
        let kept: Vec<f64> = sigma.iter().copied().filter(|&x| x > BATH_CUTOFF).collect();
        (u.slice(s![.., ..kept.len()]).to_owned(), kept)
    };
    let m = nf + sv.len();
    let mut basis = Array2::zeros((n, m));
    for (k, &p) in fragment_orbitals.iter().enumerate() {
        basis[[p, k]] = 1.0;
    }
    for (e, &p) in env.iter().enumerate() {
        for b in 0..sv.len() {
            basis[[p, nf + b]] = bath[[e, b]];
        }
    }
    let projected = basis.t().dot(d).dot(&basis);
    let trace: f64 = projected.diag().sum();
    let n_embedding_electrons = trace.round();
    if n_embedding_electrons < 0.0 || (trace - n_embedding_electrons).abs() > 1e-4 {
        return Err(Error::Embedding(format!(
            "embedding space holds a non-integer {trace} electrons"
        )));
    }
    let projector = basis.dot(&basis.t());
    let outside = Array2::<f64>::eye(n) - &projector;
    let core_density = outside.dot(d).dot(&outside);
    Ok(EmbeddingBasis {
        orbital_indices: fragment_orbitals.to_vec(),
        basis,
        bath_singular_values: sv,
        n_embedding_electrons: n_embedding_electrons as usize,
        core_density,
    })
}

/// Core potential `J - K/2` of the density outside the embedding space.
pub fn core_potential(b: &IntegralBundle, emb: &EmbeddingBasis) -> Array2<f64> {
    mean_field_potential(&b.g, &emb.core_density)
}

/// Interacting-bath Hamiltonian on the embedding orbitals. The core
/// contributes its Coulomb and exchange field and its mean-field energy
/// (folded into the constant together with the nuclear repulsion); `-mu`
/// is added on the fragment diagonal.
pub fn embed_hamiltonian(b: &IntegralBundle, emb: &EmbeddingBasis, mu: f64) -> IntegralBundle {
    let c = &emb.basis;
    let v_core = core_potential(b, emb);
    let core_energy = (&emb.core_density * &(&b.h + &(&v_core * 0.5))).sum();
    let mut h = c.t().dot(&(&b.h + &v_core)).dot(c);
    for k in 0..emb.n_fragment() {
        h[[k, k]] -= mu;
    }
    IntegralBundle {
        n_orbitals: c.ncols(),
        n_electrons: emb.n_embedding_electrons,
        nuclear_repulsion: b.nuclear_repulsion + core_energy,
        h,
        g: transform_eri(&b.g, c),
        basis_label: b.basis_label.clone(),
    }
}

/// One-electron integrals for fragment energy assembly: the core field is
/// counted half, the other half belongs to the environment.
pub fn energy_one_body(b: &IntegralBundle, emb: &EmbeddingBasis) -> Array2<f64> {
    let c = &emb.basis;
    let v_core = core_potential(b, emb);
    c.t().dot(&(&b.h + &(&v_core * 0.5))).dot(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn mean_field(d: Array2<f64>) -> MeanField {
        let n = d.nrows();
        MeanField {
            orbital_coefficients: Array2::eye(n),
            orbital_energies: Array1::zeros(n),
            density_matrix: d,
            hf_energy: 0.0,
            cycles: 0,
        }
    }

    #[test]
    fn decoupled_fragment_has_no_bath() {
        let d = Array2::from_diag(&Array1::from(vec![2.0, 0.0, 2.0, 0.0]));
        let emb = build_bath(&mean_field(d), &[0, 1]).unwrap();
        assert_eq!(emb.n_bath(), 0);
        assert_eq!(emb.n_embedding_electrons, 2);
    }

    #[test]
    fn invalid_fragments_are_rejected() {
        let mf = mean_field(Array2::eye(3));
        assert!(build_bath(&mf, &[]).is_err());
        assert!(build_bath(&mf, &[3]).is_err());
        assert!(build_bath(&mf, &[1, 1]).is_err());
    }
}

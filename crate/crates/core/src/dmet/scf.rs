//! Closed-shell restricted Hartree-Fock in an orthonormal orbital basis.

use std::collections::VecDeque;

use ndarray::{s, Array1, Array2, Array4};
use ndarray_linalg::{Eigh, Solve, UPLO};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::IntegralBundle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScfSettings {
    pub max_cycles: usize,
    pub density_tolerance: f64,
    pub commutator_tolerance: f64,
    pub diis_space: usize,
}

impl Default for ScfSettings {
    fn default() -> Self {
        Self {
            max_cycles: 200,
            density_tolerance: 1e-8,
            commutator_tolerance: 1e-8,
            diis_space: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeanField {
    /// Molecular orbitals as columns, ascending in energy.
    pub orbital_coefficients: Array2<f64>,
    pub orbital_energies: Array1<f64>,
    /// Spin-summed 1-RDM; its trace is the electron count.
    pub density_matrix: Array2<f64>,
    /// Total energy including nuclear repulsion.
    pub hf_energy: f64,
    pub cycles: usize,
}

/// `J[D] - K[D]/2` for a spin-summed density.
pub fn mean_field_potential(g: &Array4<f64>, d: &Array2<f64>) -> Array2<f64> {
    let n = d.nrows();
    let mut v = Array2::zeros((n, n));
    for p in 0..n {
        for q in 0..=p {
            let mut acc = 0.0;
            for r in 0..n {
                for s in 0..n {
                    let drs = d[[r, s]];
                    if drs != 0.0 {
                        acc += drs * (g[[p, q, r, s]] - 0.5 * g[[p, r, s, q]]);
                    }
                }
            }
            v[[p, q]] = acc;
            v[[q, p]] = acc;
        }
    }
    v
}

fn closed_shell_density(c: &Array2<f64>, n_occ: usize) -> Array2<f64> {
    let occ = c.slice(s![.., ..n_occ]);
    occ.dot(&occ.t()) * 2.0
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn diagonalize(f: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    f.eigh(UPLO::Lower).map_err(|e| Error::Numerical {
        rows: f.nrows(),
        cols: f.ncols(),
        reason: format!("Fock diagonalization: {e}"),
    })
}

/// Pulay extrapolation over stored Fock matrices and commutator residuals.
struct Diis {
    space: usize,
    focks: VecDeque<Array2<f64>>,
    errors: VecDeque<Array2<f64>>,
}

impl Diis {
    fn push(&mut self, f: Array2<f64>, e: Array2<f64>) {
        if self.focks.len() == self.space {
            self.focks.pop_front();
            self.errors.pop_front();
        }
        self.focks.push_back(f);
        self.errors.push_back(e);
    }

    fn extrapolate(&self) -> Option<Array2<f64>> {
        let m = self.focks.len();
        if m < 2 {
            return None;
        }
        let mut b = Array2::zeros((m + 1, m + 1));
        for i in 0..m {
            for j in 0..=i {
                let v = (&self.errors[i] * &self.errors[j]).sum();
                b[[i, j]] = v;
                b[[j, i]] = v;
            }
            b[[i, m]] = -1.0;
            b[[m, i]] = -1.0;
        }
        let mut rhs = Array1::zeros(m + 1);
        rhs[m] = -1.0;
        let c = b.solve_into(rhs).ok()?;
        if c.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let mut f = Array2::zeros(self.focks[0].raw_dim());
        for (ci, fi) in c.iter().zip(&self.focks) {
            f.scaled_add(*ci, fi);
        }
        Some(f)
    }
}

pub fn rhf_scf(b: &IntegralBundle) -> Result<MeanField> {
    rhf_scf_with(b, &ScfSettings::default())
}

/// Self-consistent field iterations from the core-Hamiltonian guess,
/// accelerated by DIIS. Converged when both the density change and the
/// commutator `FD - DF` fall below their tolerances.
pub fn rhf_scf_with(b: &IntegralBundle, settings: &ScfSettings) -> Result<MeanField> {
    if b.n_electrons % 2 == 1 {
        return Err(Error::Unsupported(format!(
            "restricted Hartree-Fock with {} electrons",
            b.n_electrons
        )));
    }
    let n_occ = b.n_electrons / 2;
    let (_, c) = diagonalize(&b.h)?;
    let mut d = closed_shell_density(&c, n_occ);
    let mut diis = Diis {
        space: settings.diis_space.max(1),
        focks: VecDeque::new(),
        errors: VecDeque::new(),
    };
    let mut residual = f64::INFINITY;
    for cycle in 1..=settings.max_cycles {
        let f = &b.h + &mean_field_potential(&b.g, &d);
        let comm = f.dot(&d) - d.dot(&f);
        let comm_norm = max_abs(&comm);
        diis.push(f.clone(), comm);
        let f_next = if settings.diis_space > 0 {
            diis.extrapolate().unwrap_or(f)
        } else {
            f
        };
        let (_, c) = diagonalize(&f_next)?;
        let d_next = closed_shell_density(&c, n_occ);
        let delta = max_abs(&(&d_next - &d));
        d = d_next;
        residual = delta.max(comm_norm);
        log::debug!("scf cycle {cycle}: density change {delta:e}, commutator {comm_norm:e}");
        if delta < settings.density_tolerance && comm_norm < settings.commutator_tolerance {
            // Final Fock build at the converged density for consistent orbitals.
            let f = &b.h + &mean_field_potential(&b.g, &d);
            let (eps, c) = diagonalize(&f)?;
            let d = closed_shell_density(&c, n_occ);
            let hf_energy = electronic_energy(&b.h, &f, &d) + b.nuclear_repulsion;
            return Ok(MeanField {
                orbital_coefficients: c,
                orbital_energies: eps,
                density_matrix: d,
                hf_energy,
                cycles: cycle,
            });
        }
    }
    Err(Error::Scf {
        cycles: settings.max_cycles,
        residual,
    })
}

/// `1/2 tr[D (h + F)]`.
pub fn electronic_energy(h: &Array2<f64>, f: &Array2<f64>, d: &Array2<f64>) -> f64 {
    0.5 * (d * &(h + f)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_interacting_limit_fills_lowest_levels() {
        let h = Array2::from_diag(&Array1::from(vec![0.3, -1.0, 0.5, -0.2]));
        let g = Array4::zeros((4, 4, 4, 4));
        let b = IntegralBundle::new(4, 0.7, h, g, "test").unwrap();
        let mf = rhf_scf(&b).unwrap();
        assert!((mf.hf_energy - (2.0 * (-1.0 - 0.2) + 0.7)).abs() < 1e-12);
        assert!((mf.density_matrix[[1, 1]] - 2.0).abs() < 1e-12);
        assert!((mf.density_matrix[[3, 3]] - 2.0).abs() < 1e-12);
        assert!(mf.density_matrix[[0, 0]].abs() < 1e-12);
    }

    #[test]
    fn odd_electron_count_is_rejected() {
        let b = IntegralBundle::new(1, 0.0, Array2::eye(2), Array4::zeros((2, 2, 2, 2)), "t").unwrap();
        assert!(matches!(rhf_scf(&b), Err(Error::Unsupported(_))));
    }
}

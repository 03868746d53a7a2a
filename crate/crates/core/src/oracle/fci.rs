//! Exact ground states of qubit Hamiltonians, optionally restricted to a
//! fixed particle number (and spin projection).

use std::collections::BTreeMap;

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use super::statevector::qubit_mask_to_index;
use crate::error::{Error, Result};
use crate::hamiltonian::{PauliString, PauliSum};

/// Largest register diagonalized without a particle-number restriction.
pub const MAX_FULL_QUBITS: usize = 24;
/// Largest register accepted with a sector restriction.
pub const MAX_SECTOR_QUBITS: usize = 28;
/// Sectors up to this dimension are diagonalized densely.
pub const DENSE_LIMIT: usize = 2000;
pub const LANCZOS_TOL: f64 = 1e-10;

/// Computational-basis subspace. Spin-up orbitals sit on even qubits, so
/// `n_up` counts ones on even qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Sector {
    pub n_particles: Option<usize>,
    pub n_up: Option<usize>,
}

impl Sector {
    pub fn full() -> Self {
        Self::default()
    }

    pub fn particles(n: usize) -> Self {
        Self {
            n_particles: Some(n),
            n_up: None,
        }
    }

    /// Closed-shell sector: `n` particles with equal up and down counts.
    pub fn singlet(n: usize) -> Self {
        Self {
            n_particles: Some(n),
            n_up: Some(n / 2),
        }
    }
}

/// Ground state in a sector basis. `basis[k]` is a dense amplitude index
/// (qubit 0 most significant).
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub n_qubits: usize,
    pub basis: Vec<u64>,
    pub vector: Vec<f64>,
}

impl GroundState {
    /// `<psi|H|psi>` for a real Hamiltonian evaluated in the sector basis.
    pub fn expect(&self, h: &PauliSum) -> Result<f64> {
        let m = SectorMatrix::build(h, self.n_qubits, &self.basis, true)?;
        let hv = m.apply(&self.vector);
        Ok(hv.iter().zip(&self.vector).map(|(a, b)| a * b).sum())
    }

    /// Amplitudes expanded to the full `2^N` register.
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        if self.n_qubits > MAX_FULL_QUBITS {
            return Err(Error::Capacity(format!("{} qubits too large to expand", self.n_qubits)));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        for (&b, &v) in self.basis.iter().zip(&self.vector) {
            out[b as usize] = Complex64::new(v, 0.0);
        }
        Ok(out)
    }
}

fn even_qubit_index_mask(n: usize) -> u64 {
    let mut m = 0u128;
    for q in (0..n).step_by(2) {
        m |= 1 << q;
    }
    qubit_mask_to_index(m, n)
}

/// Sorted basis indices of the sector.
pub fn sector_basis(n_qubits: usize, sector: Sector) -> Result<Vec<u64>> {
    let limit = if sector.n_particles.is_some() {
        MAX_SECTOR_QUBITS
    } else {
        MAX_FULL_QUBITS
    };
    if n_qubits > limit || n_qubits == 0 {
        return Err(Error::Capacity(format!("{n_qubits} qubits outside the exact-diagonalization range")));
    }
    let even = even_qubit_index_mask(n_qubits);
    let keep_up = |b: u64| sector.n_up.is_none_or(|u| (b & even).count_ones() as usize == u);
    let out: Vec<u64> = match sector.n_particles {
        None => (0..1u64 << n_qubits).filter(|&b| keep_up(b)).collect(),
        Some(k) if k > n_qubits => Vec::new(),
        Some(0) => vec![0].into_iter().filter(|&b| keep_up(b)).collect(),
        Some(k) => {
            // Gosper's hack over k-subsets, ascending
            let mut v = Vec::new();
            let mut b: u64 = (1 << k) - 1;
            let end = 1u64 << n_qubits;
            while b < end {
                if keep_up(b) {
                    v.push(b);
                }
                let c = b & b.wrapping_neg();
                let r = b + c;
                b = (((r ^ b) >> 2) / c) | r;
            }
            v
        }
    };
    if out.is_empty() {
        return Err(Error::Argument(format!("sector {sector:?} is empty on {n_qubits} qubits")));
    }
    Ok(out)
}

/// Sparse Hermitian matrix in a sector basis, stored row-wise.
struct SectorMatrix {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

struct Group {
    x: u64,
    terms: Vec<(u64, Complex64)>,
}

fn group_terms(h: &PauliSum, n: usize) -> Vec<Group> {
    let mut groups: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
    for (p, c) in h.terms() {
        let x = qubit_mask_to_index(p.x_mask(), n);
        let z = qubit_mask_to_index(p.z_mask(), n);
        let phase = Complex64::new(0.0, 1.0).powu(p.y_count());
        groups.entry(x).or_default().push((z, phase * c));
    }
    groups.into_iter().map(|(x, terms)| Group { x, terms }).collect()
}

enum Lookup<'a> {
    Dense(Vec<u32>),
    Sorted(&'a [u64]),
}

impl Lookup<'_> {
    fn find(&self, b: u64) -> Option<usize> {
        match self {
            Lookup::Dense(t) => {
                let v = t[b as usize];
                (v != u32::MAX).then_some(v as usize)
            }
            Lookup::Sorted(s) => s.binary_search(&b).ok(),
        }
    }
}

impl SectorMatrix {
    /// Row `i` holds `<b_i| H |b_j>`. With `real_only`, imaginary matrix
    /// elements above 1e-12 are an error.
    fn build(h: &PauliSum, n: usize, basis: &[u64], real_only: bool) -> Result<Self> {
        let groups = group_terms(h, n);
        let lookup = if n <= 24 {
            let mut t = vec![u32::MAX; 1 << n];
            for (i, &b) in basis.iter().enumerate() {
                t[b as usize] = i as u32;
            }
            Lookup::Dense(t)
        } else {
            Lookup::Sorted(basis)
        };
        let constant = h.constant_term();
        let mut row_ptr = Vec::with_capacity(basis.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut row: Vec<(u32, f64)> = Vec::new();
        for &bi in basis {
            row.clear();
            // <b_i| P |b_j> is non-zero only for b_j = b_i ^ x; the element is
            // phase * (-1)^{popcount(b_j & z)}.
            for g in &groups {
                let bj = bi ^ g.x;
                let Some(j) = lookup.find(bj) else { continue };
                let mut v = Complex64::new(0.0, 0.0);
                for &(z, c) in &g.terms {
                    if (bj & z).count_ones() % 2 == 1 {
                        v -= c;
                    } else {
                        v += c;
                    }
                }
                if g.x == 0 {
                    v += constant;
                }
                if v.im.abs() > 1e-12 && real_only {
                    return Err(Error::Unsupported(
                        "Hamiltonian has complex matrix elements; only real sectors are diagonalized".into(),
                    ));
                }
                if v.re != 0.0 {
                    row.push((j as u32, v.re));
                }
            }
            if groups.first().is_none_or(|g| g.x != 0) && constant != 0.0 {
                let i = lookup.find(bi).expect("basis state is in the sector");
                row.push((i as u32, constant));
            }
            row.sort_unstable_by_key(|e| e.0);
            for &(j, v) in &row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { row_ptr, cols, vals })
    }

    fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
                self.cols[a..b]
                    .iter()
                    .zip(&self.vals[a..b])
                    .map(|(&j, &v)| v * x[j as usize])
                    .sum()
            })
            .collect()
    }

    fn to_dense(&self) -> Array2<f64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[[i, self.cols[k] as usize]] = self.vals[k];
            }
        }
        m
    }
}

/// Lowest eigenvalue of `h`, restricted to `n_particles` when given.
pub fn fci_ground_energy(h: &PauliSum, n_particles: Option<usize>) -> Result<f64> {
    let sector = Sector {
        n_particles,
        n_up: None,
    };
    Ok(fci_ground_state(h, sector)?.energy)
}

pub fn fci_ground_state(h: &PauliSum, sector: Sector) -> Result<GroundState> {
    let n = h.n_qubits();
    let basis = sector_basis(n, sector)?;
    let complex = h.terms().any(|(p, _)| p.y_count() % 2 == 1);
    if complex {
        return complex_ground_state(h, n, basis);
    }
    let m = SectorMatrix::build(h, n, &basis, true)?;
    log::debug!("sector dimension {}, {} stored elements", m.dim(), m.vals.len());
    let (energy, vector) = if m.dim() <= DENSE_LIMIT {
        let (w, v) = m
            .to_dense()
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Eigensolver(format!("dense eigh: {e}")))?;
        (w[0], v.column(0).to_vec())
    } else {
        lanczos_lowest(&m, LANCZOS_TOL, 30)?
    };
    Ok(GroundState {
        energy,
        n_qubits: n,
        basis,
        vector,
    })
}

fn complex_ground_state(h: &PauliSum, n: usize, basis: Vec<u64>) -> Result<GroundState> {
    if basis.len() > DENSE_LIMIT * 2 {
        return Err(Error::Unsupported(format!(
            "complex Hamiltonian with sector dimension {} exceeds the dense limit",
            basis.len()
        )));
    }
    let dim = basis.len();
    let mut m = Array2::<Complex64>::zeros((dim, dim));
    let index: BTreeMap<u64, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    for (j, &bj) in basis.iter().enumerate() {
        m[[j, j]] += h.constant_term();
        for (p, c) in h.terms() {
            let (phase, target) = apply_pauli_to_basis(p, n, bj);
            if let Some(&i) = index.get(&target) {
                m[[i, j]] += phase * c;
            }
        }
    }
    let (w, _) = m
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Eigensolver(format!("dense eigh: {e}")))?;
    // The real vector representation is not available for complex states.
    Ok(GroundState {
        energy: w[0],
        n_qubits: n,
        basis,
        vector: Vec::new(),
    })
}

fn apply_pauli_to_basis(p: &PauliString, n: usize, b: u64) -> (Complex64, u64) {
    let x = qubit_mask_to_index(p.x_mask(), n);
    let z = qubit_mask_to_index(p.z_mask(), n);
    let mut phase = Complex64::new(0.0, 1.0).powu(p.y_count());
    if (b & z).count_ones() % 2 == 1 {
        phase = -phase;
    }
    (phase, b ^ x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Restarted Lanczos with full reorthogonalization. Converged when the
/// residual norm of the lowest Ritz pair is below `tol * max(1, |E|)`.
fn lanczos_lowest(m: &SectorMatrix, tol: f64, max_restarts: usize) -> Result<(f64, Vec<f64>)> {
    let dim = m.dim();
    let krylov = dim.min(120);
    // Deterministic start with weight on every basis state.
    let mut start: Vec<f64> = (0..dim).map(|i| 1.0 + ((i * 7919) % 104729) as f64 * 1e-6).collect();
    normalize(&mut start);
    let mut last_residual = f64::INFINITY;
    for restart in 0..max_restarts {
        let mut q: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for k in 0..krylov {
            let mut w = m.apply(&q[k]);
            alpha.push(dot(&w, &q[k]));
            for _ in 0..2 {
                for v in &q {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
                }
            }
            let b = normalize(&mut w);
            if k + 1 == krylov || b < 1e-13 {
                beta.push(b);
                break;
            }
            beta.push(b);
            q.push(w);
        }
        let kdim = alpha.len();
        let mut t = Array2::<f64>::zeros((kdim, kdim));
        for i in 0..kdim {
            t[[i, i]] = alpha[i];
            if i + 1 < kdim {
                t[[i, i + 1]] = beta[i];
                t[[i + 1, i]] = beta[i];
            }
        }
        let (w, s) = t
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Eigensolver(format!("tridiagonal eigh: {e}")))?;
        let energy = w[0];
        let mut ritz = vec![0.0; dim];
        for (i, v) in q.iter().enumerate().take(kdim) {
            let c = s[[i, 0]];
            ritz.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
        }
        normalize(&mut ritz);
        let hr = m.apply(&ritz);
        let res: f64 = hr.iter().zip(&ritz).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>().sqrt();
        log::debug!("lanczos restart {restart}: E = {energy:.12}, residual {res:e}");
        last_residual = res;
        if res < tol * energy.abs().max(1.0) || kdim == dim {
            return Ok((energy, ritz));
        }
        start = ritz;
    }
    Err(Error::Eigensolver(format!(
        "Lanczos did not converge in {max_restarts} restarts (residual {last_residual:e})"
    )))
}

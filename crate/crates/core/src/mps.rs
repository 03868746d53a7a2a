//! Right-canonical matrix product state.
//!
//! Site `n` holds a tensor `B[a_{n-1}, i_n, a_n]` stored as an `Array3` of
//! shape `(left, 2, right)`. Bond `n` sits between sites `n` and `n + 1` and
//! carries the Schmidt weights of that cut. A computational-basis index has
//! qubit 0 as its most significant bit.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3, ArrayView2, Axis};
use num_complex::Complex64;

use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::hamiltonian::{Pauli, PauliString};
use crate::tensor::{truncated_svd, DenseTensor, C64};

/// Schmidt weights below this value are always discarded.
pub const SCHMIDT_FLOOR: f64 = 1e-14;

/// Largest register that [`MpsState::to_statevector`] will expand.
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

const SNAPSHOT_MAGIC: &[u8; 4] = b"MPSV";
const SNAPSHOT_VERSION: u32 = 1;

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone)]
pub struct MpsState {
    sites: Vec<Array3<C64>>,
    weights: Vec<Vec<f64>>,
    max_bond: usize,
    svd_cutoff: f64,
    truncation_error: f64,
    discarded_weight: f64,
}

impl MpsState {
    /// Computational-basis state `|bits>`; `bits[0]` is qubit 0.
    pub fn product_state(bits: &[bool], max_bond: usize, svd_cutoff: f64) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Argument("product state needs at least one qubit".into()));
        }
        if max_bond == 0 {
            return Err(Error::Argument("max_bond must be positive".into()));
        }
        if !(svd_cutoff >= 0.0) {
            return Err(Error::Argument(format!("svd_cutoff must be non-negative, got {svd_cutoff}")));
        }
        let sites = bits
            .iter()
            .map(|&b| {
                let mut t = Array3::zeros((1, 2, 1));
                t[[0, usize::from(b), 0]] = ONE;
                t
            })
            .collect();
        Ok(Self {
            sites,
            weights: vec![vec![1.0]; bits.len() - 1],
            max_bond,
            svd_cutoff,
            truncation_error: 0.0,
            discarded_weight: 0.0,
        })
    }

    /// Parses a string of `0`/`1` characters, qubit 0 first.
    pub fn from_bitstring(bits: &str, max_bond: usize, svd_cutoff: f64) -> Result<Self> {
        let parsed: Vec<bool> = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Argument(format!("invalid bit '{c}' in \"{bits}\""))),
            })
            .collect::<Result<_>>()?;
        Self::product_state(&parsed, max_bond, svd_cutoff)
    }

    pub fn n_qubits(&self) -> usize {
        self.sites.len()
    }

    pub fn max_bond(&self) -> usize {
        self.max_bond
    }

    pub fn svd_cutoff(&self) -> f64 {
        self.svd_cutoff
    }

    /// Sum of per-gate truncation errors (Frobenius norms of the discarded parts).
    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    /// Total squared Schmidt weight discarded before renormalization.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded_weight
    }

    pub fn site_tensor(&self, n: usize) -> &Array3<C64> {
        &self.sites[n]
    }

    pub fn schmidt_weights(&self, bond: usize) -> &[f64] {
        &self.weights[bond]
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.weights.iter().map(Vec::len).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.weights.iter().map(Vec::len).max().unwrap_or(1)
    }

    fn check_site(&self, site: usize, span: usize) -> Result<()> {
        if site + span > self.n_qubits() {
            return Err(Error::Index(format!(
                "site {site} out of range for a {span}-site operation on {} qubits",
                self.n_qubits()
            )));
        }
        Ok(())
    }

    fn left_weights(&self, site: usize) -> &[f64] {
        if site == 0 {
            &[1.0]
        } else {
            &self.weights[site - 1]
        }
    }

    pub fn apply_single_qubit_gate(&mut self, gate: &DenseTensor, site: usize) -> Result<()> {
        self.apply_single_qubit_matrix(gate_matrix(gate, 2)?.view(), site)
    }

    /// Contracts a 2x2 matrix into the physical leg of `site`.
    pub fn apply_single_qubit_matrix(&mut self, u: ArrayView2<'_, C64>, site: usize) -> Result<()> {
        self.check_site(site, 1)?;
        let b = &mut self.sites[site];
        let (l, _, r) = b.dim();
        for a in 0..l {
            for c in 0..r {
                let (x0, x1) = (b[[a, 0, c]], b[[a, 1, c]]);
                b[[a, 0, c]] = u[[0, 0]] * x0 + u[[0, 1]] * x1;
                b[[a, 1, c]] = u[[1, 0]] * x0 + u[[1, 1]] * x1;
            }
        }
        Ok(())
    }

    /// `gate` has shape `[2, 2, 2, 2]` ordered `(out_n, out_n+1, in_n, in_n+1)`,
    /// or `[4, 4]` with row index `2 * out_n + out_n+1`.
    pub fn apply_two_qubit_gate(&mut self, gate: &DenseTensor, site: usize) -> Result<()> {
        self.apply_two_qubit_matrix(gate_matrix(gate, 4)?.view(), site).map(|_| ())
    }

    /// Applies a 4x4 gate to sites `(site, site + 1)` and returns the
    /// truncation error of this step.
    ///
    /// The update never divides by Schmidt weights: with `M = U B_n B_{n+1}`
    /// and `M' = diag(lambda_{n-1}) M = X S Y`, the new right site is `Y` and
    /// the new left site is `M Y^H`.
    pub fn apply_two_qubit_matrix(&mut self, u: ArrayView2<'_, C64>, site: usize) -> Result<f64> {
        self.check_site(site, 2)?;
        let (l, _, m) = self.sites[site].dim();
        let (_, _, r) = self.sites[site + 1].dim();
        let left = self.sites[site]
            .view()
            .into_shape_with_order((l * 2, m))
            .expect("contiguous site");
        let right = self.sites[site + 1]
            .view()
            .into_shape_with_order((m, 2 * r))
            .expect("contiguous site");
        let theta = left.dot(&right);
        let theta = theta.as_slice().expect("standard layout");

        // M[(a, i'), (j', c)] = sum_ij U[i'j', ij] theta[(a, i), (j, c)]
        let mut mm = Array2::<C64>::zeros((l * 2, 2 * r));
        {
            let out = mm.as_slice_mut().expect("standard layout");
            for a in 0..l {
                for c in 0..r {
                    let mut v = [ZERO; 4];
                    for (ij, slot) in v.iter_mut().enumerate() {
                        let (i, j) = (ij >> 1, ij & 1);
                        *slot = theta[(a * 2 + i) * 2 * r + j * r + c];
                    }
                    for ip in 0..2 {
                        for jp in 0..2 {
                            let row = u.row(ip * 2 + jp);
                            let val = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
                            out[(a * 2 + ip) * 2 * r + jp * r + c] = val;
                        }
                    }
                }
            }
        }

        let mut scaled = mm.clone();
        let lw = self.left_weights(site).to_vec();
        for (row, mut line) in scaled.axis_iter_mut(Axis(0)).enumerate() {
            let w = lw[row / 2];
            line.mapv_inplace(|x| x * w);
        }
        let t = truncated_svd(scaled.view(), self.max_bond, self.svd_cutoff, SCHMIDT_FLOOR)?;
        let k = t.s.len();

        let vh = t.vt.mapv(|x| x.conj()).reversed_axes();
        let new_left = mm.dot(&vh);
        self.sites[site] = new_left
            .into_shape_with_order((l, 2, k))
            .expect("reshape of contiguous product");
        self.sites[site + 1] = t
            .vt
            .as_standard_layout()
            .to_owned()
            .into_shape_with_order((k, 2, r))
            .expect("reshape of contiguous factor");

        let norm = t.s.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.weights[site] = t.s.iter().map(|x| x / norm).collect();
        let err = t.discarded_weight.sqrt();
        if t.discarded_weight > 0.0 {
            log::trace!("bond {site}: kept {k}, discarded weight {:e}", t.discarded_weight);
        }
        self.truncation_error += err;
        self.discarded_weight += t.discarded_weight;
        Ok(err)
    }

    /// Applies one gate; two-qubit gates must act on neighbouring qubits.
    pub fn apply_gate(&mut self, g: &Gate, theta: &[f64]) -> Result<()> {
        let m = g.ascending_matrix(theta)?;
        if g.arity() == 1 {
            return self.apply_single_qubit_matrix(m.view(), g.qubits()[0]);
        }
        let (lo, hi) = g.span();
        if hi - lo != 1 {
            return Err(Error::RoutingRequired(g.qubits()[0], g.qubits()[1]));
        }
        self.apply_two_qubit_matrix(m.view(), lo).map(|_| ())
    }

    pub fn apply_gates<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>, theta: &[f64]) -> Result<()> {
        for g in gates {
            self.apply_gate(g, theta)?;
        }
        Ok(())
    }

    /// `<psi| op_site |psi>` from the Schmidt weights left of `site`.
    pub fn expect_local(&self, op: &DenseTensor, site: usize) -> Result<C64> {
        let op = gate_matrix(op, 2)?;
        self.check_site(site, 1)?;
        let b = &self.sites[site];
        let lw = self.left_weights(site);
        let (l, _, r) = b.dim();
        let mut acc = ZERO;
        for a in 0..l {
            let w2 = lw[a] * lw[a];
            let mut part = ZERO;
            for c in 0..r {
                for ip in 0..2 {
                    for i in 0..2 {
                        part += b[[a, ip, c]].conj() * op[[ip, i]] * b[[a, i, c]];
                    }
                }
            }
            acc += part * w2;
        }
        Ok(acc)
    }

    /// `<psi|P|psi>` by a transfer-matrix sweep over the support of `P`.
    pub fn expect_pauli_string(&self, p: &PauliString) -> Result<f64> {
        let mut cache = PrefixCache::default();
        self.expect_cached(p, &mut cache)
    }

    /// `<P>` for every string, reusing transfer environments between
    /// consecutive strings that share their first support site and leading
    /// letters. Values equal those of [`Self::expect_pauli_string`] exactly.
    pub fn expect_pauli_strings(&self, strings: &[PauliString]) -> Result<Vec<f64>> {
        let mut cache = PrefixCache::default();
        strings.iter().map(|p| self.expect_cached(p, &mut cache)).collect()
    }

    fn expect_cached(&self, p: &PauliString, cache: &mut PrefixCache) -> Result<f64> {
        let n = self.n_qubits();
        if n < 128 && (p.x_mask() | p.z_mask()) >> n != 0 {
            return Err(Error::Index(format!("Pauli string {p} acts outside {n} qubits")));
        }
        let support = p.support();
        let (Some(&first), Some(&last)) = (support.first(), support.last()) else {
            return Ok(1.0);
        };
        if cache.first != Some(first) {
            let lw = self.left_weights(first);
            let mut env = Array2::<C64>::zeros((lw.len(), lw.len()));
            for (a, w) in lw.iter().enumerate() {
                env[[a, a]] = Complex64::new(w * w, 0.0);
            }
            cache.first = Some(first);
            cache.letters.clear();
            cache.envs.clear();
            cache.envs.push(env);
        }
        let shared = cache
            .letters
            .iter()
            .zip(first..=last)
            .take_while(|(l, site)| **l == p.letter(*site))
            .count();
        cache.letters.truncate(shared);
        cache.envs.truncate(shared + 1);
        for site in first + shared..=last {
            let letter = p.letter(site);
            let next = transfer(cache.envs.last().expect("seed environment"), &self.sites[site], letter);
            cache.letters.push(letter);
            cache.envs.push(next);
        }
        let env = &cache.envs[last - first + 1];
        Ok(env.diag().iter().map(|z| z.re).sum())
    }

    /// `<bits|psi>`, `bits[0]` being qubit 0.
    pub fn amplitude(&self, bits: &[bool]) -> Result<C64> {
        if bits.len() != self.n_qubits() {
            return Err(Error::Argument(format!(
                "bit string has {} entries, state has {} qubits",
                bits.len(),
                self.n_qubits()
            )));
        }
        let mut row = Array2::<C64>::from_elem((1, 1), ONE);
        for (site, &b) in bits.iter().enumerate() {
            row = row.dot(&self.sites[site].index_axis(Axis(1), usize::from(b)));
        }
        Ok(row[[0, 0]])
    }

    /// Dense amplitudes, index bit `N - 1 - q` holding qubit `q`.
    pub fn to_statevector(&self) -> Result<Vec<C64>> {
        let n = self.n_qubits();
        if n > MAX_STATEVECTOR_QUBITS {
            return Err(Error::Capacity(format!(
                "{n} qubits exceeds the {MAX_STATEVECTOR_QUBITS}-qubit statevector limit"
            )));
        }
        // rows: basis index of qubits processed so far; columns: right bond
        let mut acc = Array2::<C64>::from_elem((1, 1), ONE);
        for b in &self.sites {
            let (l, _, r) = b.dim();
            let flat = b.view().into_shape_with_order((l, 2 * r)).expect("contiguous site");
            let next = acc.dot(&flat);
            let rows = next.nrows() * 2;
            acc = next.into_shape_with_order((rows, r)).expect("contiguous product");
        }
        Ok(acc.into_iter().collect())
    }

    /// Largest entry of `sum_{i, c} B[a, i, c] B*[a', i, c] - delta_{a a'}` over all sites.
    pub fn canonical_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.sites {
            let (l, _, r) = b.dim();
            let flat = b.view().into_shape_with_order((l, 2 * r)).expect("contiguous site");
            let gram = flat.dot(&flat.t().mapv(|x| x.conj()));
            for ((i, j), v) in gram.indexed_iter() {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }

    /// Largest deviation from unit norm or sortedness among the Schmidt
    /// weight vectors, plus a check of bond dimensions against the caps.
    pub fn weights_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (bond, w) in self.weights.iter().enumerate() {
            let norm2: f64 = w.iter().map(|x| x * x).sum();
            worst = worst.max((norm2.sqrt() - 1.0).abs());
            for pair in w.windows(2) {
                worst = worst.max(pair[1] - pair[0]);
            }
            if w.iter().any(|&x| x < 0.0) || w.len() > self.max_bond {
                return f64::INFINITY;
            }
            let (_, _, r) = self.sites[bond].dim();
            let (l, _, _) = self.sites[bond + 1].dim();
            if r != w.len() || l != w.len() {
                return f64::INFINITY;
            }
        }
        let boundary_ok = self.sites[0].dim().0 == 1 && self.sites[self.n_qubits() - 1].dim().2 == 1;
        if boundary_ok {
            worst
        } else {
            f64::INFINITY
        }
    }

    pub fn write_snapshot(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        self.write_snapshot_to(&mut f).map_err(|e| Error::io(path, e))
    }

    /// Little-endian layout: magic, version, N, D, cutoff, truncation error,
    /// discarded weight, then per site `(left, right)` and interleaved re/im
    /// data, then per bond its length and weights.
    pub fn write_snapshot_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&(self.n_qubits() as u64).to_le_bytes())?;
        w.write_all(&(self.max_bond as u64).to_le_bytes())?;
        for x in [self.svd_cutoff, self.truncation_error, self.discarded_weight] {
            w.write_all(&x.to_le_bytes())?;
        }
        for b in &self.sites {
            let (l, _, r) = b.dim();
            w.write_all(&(l as u64).to_le_bytes())?;
            w.write_all(&(r as u64).to_le_bytes())?;
            for z in b.iter() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        for lam in &self.weights {
            w.write_all(&(lam.len() as u64).to_le_bytes())?;
            for x in lam {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut f = std::io::BufReader::new(std::fs::File::open(path).map_err(|e| Error::io(path, e))?);
        Self::read_snapshot_from(&mut f).map_err(|e| match e {
            SnapshotError::Io(e) => Error::io(path, e),
            SnapshotError::Format(msg) => Error::Parse {
                path: path.display().to_string(),
                line: 0,
                message: msg,
            },
        })
    }

    fn read_snapshot_from(r: &mut impl Read) -> std::result::Result<Self, SnapshotError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(SnapshotError::Format("not an MPS snapshot".into()));
        }
        let version = read_u32(r)?;
        if version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Format(format!("unsupported snapshot version {version}")));
        }
        let n = read_u64(r)? as usize;
        let max_bond = read_u64(r)? as usize;
        if n == 0 || max_bond == 0 {
            return Err(SnapshotError::Format("empty register or zero bond cap".into()));
        }
        let svd_cutoff = read_f64(r)?;
        let truncation_error = read_f64(r)?;
        let discarded_weight = read_f64(r)?;
        let mut sites = Vec::with_capacity(n);
        for _ in 0..n {
            let l = read_u64(r)? as usize;
            let rr = read_u64(r)? as usize;
            if l == 0 || rr == 0 || l > max_bond.max(1) || rr > max_bond.max(1) {
                return Err(SnapshotError::Format(format!("bad site shape ({l}, 2, {rr})")));
            }
            let mut data = Vec::with_capacity(l * 2 * rr);
            for _ in 0..l * 2 * rr {
                let re = read_f64(r)?;
                let im = read_f64(r)?;
                data.push(Complex64::new(re, im));
            }
            sites.push(Array3::from_shape_vec((l, 2, rr), data).expect("sized above"));
        }
        let mut weights = Vec::with_capacity(n - 1);
        for _ in 0..n - 1 {
            let len = read_u64(r)? as usize;
            if len > max_bond {
                return Err(SnapshotError::Format(format!("bond of length {len} exceeds cap")));
            }
            weights.push((0..len).map(|_| read_f64(r)).collect::<std::result::Result<_, _>>()?);
        }
        let state = Self {
            sites,
            weights,
            max_bond,
            svd_cutoff,
            truncation_error,
            discarded_weight,
        };
        if !state.weights_residual().is_finite() {
            return Err(SnapshotError::Format("bond shapes are inconsistent".into()));
        }
        Ok(state)
    }
}

enum SnapshotError {
    Io(std::io::Error),
    Format(String),
}

impl From<std::io::Error> for SnapshotError {
    fn from(e: std::io::Error) -> Self {
        SnapshotError::Io(e)
    }
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Accepts `[d, d]` or `[2, 2]`-per-qubit shapes and returns the `d x d` matrix.
fn gate_matrix(gate: &DenseTensor, dim: usize) -> Result<Array2<C64>> {
    if gate.len() != dim * dim || gate.shape().iter().any(|&x| x != 2 && x != dim) {
        return Err(Error::Argument(format!(
            "gate of shape {:?} is not a {dim}x{dim} operator",
            gate.shape()
        )));
    }
    Ok(Array2::from_shape_vec((dim, dim), gate.data().to_vec()).expect("length checked"))
}

/// `E'[c, c'] = sum conj(B[a, i', c]) E[a, a'] sigma[i', i] B[a', i, c']`.
/// Transfer environments along the sites of the last measured string.
#[derive(Default)]
struct PrefixCache {
    first: Option<usize>,
    letters: Vec<Pauli>,
    /// `envs[k]` is the environment left of site `first + k`.
    envs: Vec<Array2<C64>>,
}

fn transfer(env: &Array2<C64>, b: &Array3<C64>, letter: Pauli) -> Array2<C64> {
    let (_, _, r) = b.dim();
    let mut out = Array2::<C64>::zeros((r, r));
    for i in 0..2 {
        let (ip, phase) = match letter {
            Pauli::I => (i, ONE),
            Pauli::X => (1 - i, ONE),
            Pauli::Y => (1 - i, if i == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) }),
            Pauli::Z => (i, if i == 0 { ONE } else { -ONE }),
        };
        let ket = b.index_axis(Axis(1), i);
        let bra = b.index_axis(Axis(1), ip);
        let t = env.dot(&ket);
        let contrib = bra.t().mapv(|x| x.conj()).dot(&t);
        out.scaled_add(phase, &contrib);
    }
    out
}

/// Von Neumann entropy of a bond from its Schmidt weights.
pub fn entanglement_entropy(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w * w;
            -p * p.ln()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        Complex64::new(re, im)
    }

    fn mat(rows: &[[C64; 2]; 2]) -> DenseTensor {
        DenseTensor::new(vec![2, 2], rows.iter().flatten().copied().collect()).unwrap()
    }

    fn x_gate() -> DenseTensor {
        mat(&[[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]])
    }

    fn z_gate() -> DenseTensor {
        mat(&[[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]])
    }

    fn h_gate() -> DenseTensor {
        let h = FRAC_1_SQRT_2;
        mat(&[[c(h, 0.), c(h, 0.)], [c(h, 0.), c(-h, 0.)]])
    }

    fn cnot() -> DenseTensor {
        let mut d = vec![c(0., 0.); 16];
        for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            d[row * 4 + col] = c(1., 0.);
        }
        DenseTensor::new(vec![4, 4], d).unwrap()
    }

    fn bell() -> MpsState {
        let mut s = MpsState::from_bitstring("00", 4, 0.0).unwrap();
        // CNOT (H x I) as one gate
        let h = FRAC_1_SQRT_2;
        let hi = Array2::from_shape_fn((4, 4), |(r, col)| {
            let (a, b) = (r >> 1, r & 1);
            let (a2, b2) = (col >> 1, col & 1);
            if b != b2 {
                c(0., 0.)
            } else if a == 1 && a2 == 1 {
                c(-h, 0.)
            } else {
                c(h, 0.)
            }
        });
        let cn = Array2::from_shape_vec((4, 4), cnot().data().to_vec()).unwrap();
        let fused = DenseTensor::from_matrix(&cn.dot(&hi));
        s.apply_two_qubit_gate(&fused, 0).unwrap();
        s
    }

    #[test]
    fn product_state_amplitudes() {
        let s = MpsState::from_bitstring("00", 2, 0.0).unwrap();
        assert_eq!(s.amplitude(&[false, false]).unwrap(), c(1., 0.));
        assert_eq!(s.truncation_error(), 0.0);
        let s = MpsState::from_bitstring("1", 2, 0.0).unwrap();
        assert_eq!(s.expect_local(&z_gate(), 0).unwrap(), c(-1., 0.));
        assert!(matches!(MpsState::product_state(&[], 2, 0.0), Err(Error::Argument(_))));
    }

    #[test]
    fn statevector_bit_order() {
        let s = MpsState::from_bitstring("10", 2, 0.0).unwrap();
        let v = s.to_statevector().unwrap();
        assert_eq!(v, vec![c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.)]);
    }

    #[test]
    fn cnot_on_zero_keeps_product() {
        let mut s = MpsState::from_bitstring("00", 4, 0.0).unwrap();
        s.apply_two_qubit_gate(&cnot(), 0).unwrap();
        assert_eq!(s.bond_dims(), vec![1]);
        assert!((s.amplitude(&[false, false]).unwrap() - c(1., 0.)).norm() < 1e-14);
    }

    #[test]
    fn bell_state() {
        let s = bell();
        let w = s.schmidt_weights(0);
        assert_eq!(w.len(), 2);
        assert!((w[0] - FRAC_1_SQRT_2).abs() < 1e-14 && (w[1] - FRAC_1_SQRT_2).abs() < 1e-14);
        let v = s.to_statevector().unwrap();
        let expected = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
        for (a, e) in v.iter().zip(expected) {
            assert!((a - c(e, 0.)).norm() < 1e-14);
        }
        assert!(s.expect_local(&z_gate(), 0).unwrap().norm() < 1e-14);
        let xx: PauliString = "XX".parse().unwrap();
        assert!((s.expect_pauli_string(&xx).unwrap() - 1.0).abs() < 1e-14);
        let ii: PauliString = "II".parse().unwrap();
        assert_eq!(s.expect_pauli_string(&ii).unwrap(), 1.0);
        assert!(s.canonical_residual() < 1e-12);
        assert!(s.weights_residual() < 1e-12);
    }

    #[test]
    fn single_qubit_gates() {
        let mut s = MpsState::from_bitstring("0", 1, 0.0).unwrap();
        s.apply_single_qubit_gate(&x_gate(), 0).unwrap();
        assert_eq!(s.to_statevector().unwrap(), vec![c(0., 0.), c(1., 0.)]);

        let mut s = MpsState::from_bitstring("0", 1, 0.0).unwrap();
        s.apply_single_qubit_gate(&h_gate(), 0).unwrap();
        s.apply_single_qubit_gate(&z_gate(), 0).unwrap();
        let v = s.to_statevector().unwrap();
        assert!((v[0] - c(FRAC_1_SQRT_2, 0.)).norm() < 1e-15);
        assert!((v[1] - c(-FRAC_1_SQRT_2, 0.)).norm() < 1e-15);
        assert!(matches!(s.apply_single_qubit_gate(&x_gate(), 1), Err(Error::Index(_))));
    }

    #[test]
    fn rz_pair_is_identity() {
        let mut s = bell();
        let before = s.to_statevector().unwrap();
        let t = 0.731;
        let rz = |a: f64| mat(&[[c(0., -a / 2.).exp(), c(0., 0.)], [c(0., 0.), c(0., a / 2.).exp()]]);
        s.apply_single_qubit_gate(&rz(t), 1).unwrap();
        s.apply_single_qubit_gate(&rz(-t), 1).unwrap();
        let after = s.to_statevector().unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_sites() {
        let mut s = MpsState::from_bitstring("000", 4, 0.0).unwrap();
        assert!(matches!(s.apply_two_qubit_gate(&cnot(), 2), Err(Error::Index(_))));
        assert!(matches!(s.expect_local(&z_gate(), 3), Err(Error::Index(_))));
        let p: PauliString = "IIIZ".parse().unwrap();
        assert!(matches!(s.expect_pauli_string(&p), Err(Error::Index(_))));
    }

    #[test]
    fn truncation_is_tracked_and_renormalized() {
        // max_bond 1 forces the Bell state down to one Schmidt value
        let mut s = MpsState::from_bitstring("00", 1, 0.0).unwrap();
        let mut g = Array2::<C64>::zeros((4, 4));
        // maps |00> to cos|00> + sin|11>
        let (co, si) = (0.8f64, 0.6f64);
        g[[0, 0]] = c(co, 0.);
        g[[3, 0]] = c(si, 0.);
        g[[0, 3]] = c(-si, 0.);
        g[[3, 3]] = c(co, 0.);
        g[[1, 1]] = c(1., 0.);
        g[[2, 2]] = c(1., 0.);
        let err = s.apply_two_qubit_matrix(g.view(), 0).unwrap();
        assert!((err - 0.6).abs() < 1e-12);
        assert!((s.discarded_weight() - 0.36).abs() < 1e-12);
        assert_eq!(s.bond_dims(), vec![1]);
        assert!(s.weights_residual() < 1e-12);
    }

    #[test]
    fn snapshot_round_trip() {
        let s = bell();
        let mut buf = Vec::new();
        s.write_snapshot_to(&mut buf).unwrap();
        let back = MpsState::read_snapshot_from(&mut buf.as_slice()).ok().unwrap();
        assert_eq!(back.to_statevector().unwrap(), s.to_statevector().unwrap());
        assert_eq!(back.bond_dims(), s.bond_dims());
        buf[0] = b'X';
        assert!(MpsState::read_snapshot_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn capacity_guard() {
        let s = MpsState::product_state(&[false; 25], 2, 0.0).unwrap();
        assert!(matches!(s.to_statevector(), Err(Error::Capacity(_))));
    }
}

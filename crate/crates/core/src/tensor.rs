//! Dense complex tensors.
//!
//! Every tensor is stored row-major: the last axis varies fastest, so the
//! entry at multi-index `(i0, i1, ..., ik)` lives at
//! `((i0 * d1 + i1) * d2 + ...) * dk + ik`. All modules rely on this layout.

use ndarray::{Array2, ArrayView2, ArrayViewD, IxDyn, ShapeBuilder};
use ndarray_linalg::{JobSvd, SVDDC, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::Argument(format!("zero-length axis in shape {shape:?}")));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::Argument(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![C64::new(0.0, 0.0); len])
    }

    pub fn from_real(shape: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(shape, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn scalar(value: C64) -> Self {
        Self {
            shape: vec![],
            data: vec![value],
        }
    }

    pub fn from_matrix(m: &Array2<C64>) -> Self {
        let (r, c) = m.dim();
        Self {
            shape: vec![r, c],
            data: m.iter().copied().collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape)
    }

    pub fn get(&self, index: &[usize]) -> Result<C64> {
        if index.len() != self.rank() {
            return Err(Error::Index(format!(
                "multi-index of length {} for rank-{} tensor",
                index.len(),
                self.rank()
            )));
        }
        let mut off = 0;
        for ((&i, &d), s) in index.iter().zip(&self.shape).zip(self.strides()) {
            if i >= d {
                return Err(Error::Index(format!("index {i} out of range for axis of length {d}")));
            }
            off += i * s;
        }
        Ok(self.data[off])
    }

    pub fn view(&self) -> ArrayViewD<'_, C64> {
        ArrayViewD::from_shape(IxDyn(&self.shape), &self.data).expect("layout invariant")
    }

    /// Rank-2 view; panics if the tensor is not a matrix.
    pub fn as_matrix(&self) -> ArrayView2<'_, C64> {
        assert_eq!(self.rank(), 2, "as_matrix on rank-{} tensor", self.rank());
        ArrayView2::from_shape((self.shape[0], self.shape[1]), &self.data).expect("layout invariant")
    }

    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data.clone())
    }

    pub fn conj(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Axis `k` of the result is axis `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if order.len() != rank {
            return Err(Error::Index(format!("permutation {order:?} for rank-{rank} tensor")));
        }
        for &o in order {
            if o >= rank || seen[o] {
                return Err(Error::Index(format!("invalid permutation {order:?}")));
            }
            seen[o] = true;
        }
        if order.iter().enumerate().all(|(k, &o)| k == o) {
            return Ok(self.clone());
        }
        let permuted = self.view().permuted_axes(IxDyn(order));
        let shape: Vec<usize> = order.iter().map(|&o| self.shape[o]).collect();
        Ok(Self {
            shape,
            data: permuted.iter().copied().collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

/// Sums over the paired axes `axes_a[k]` of `a` and `axes_b[k]` of `b`. The
/// result carries the remaining axes of `a` (in order) followed by those of `b`.
pub fn contract(a: &DenseTensor, axes_a: &[usize], b: &DenseTensor, axes_b: &[usize]) -> Result<DenseTensor> {
    if axes_a.len() != axes_b.len() {
        return Err(Error::Index(format!(
            "paired axis lists differ in length: {axes_a:?} vs {axes_b:?}"
        )));
    }
    check_axes(axes_a, a.rank(), "a")?;
    check_axes(axes_b, b.rank(), "b")?;
    for (&ia, &ib) in axes_a.iter().zip(axes_b) {
        if a.shape[ia] != b.shape[ib] {
            return Err(Error::Dimension {
                axis_a: ia,
                len_a: a.shape[ia],
                axis_b: ib,
                len_b: b.shape[ib],
            });
        }
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|k| !axes_a.contains(k)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|k| !axes_b.contains(k)).collect();

    let order_a: Vec<usize> = free_a.iter().chain(axes_a).copied().collect();
    let order_b: Vec<usize> = axes_b.iter().chain(&free_b).copied().collect();
    let pa = a.permute(&order_a)?;
    let pb = b.permute(&order_b)?;

    let rows: usize = free_a.iter().map(|&k| a.shape[k]).product();
    let inner: usize = axes_a.iter().map(|&k| a.shape[k]).product();
    let cols: usize = free_b.iter().map(|&k| b.shape[k]).product();
    let ma = ArrayView2::from_shape((rows, inner), &pa.data).expect("layout invariant");
    let mb = ArrayView2::from_shape((inner, cols), &pb.data).expect("layout invariant");
    let prod = ma.dot(&mb);

    let shape: Vec<usize> = free_a
        .iter()
        .map(|&k| a.shape[k])
        .chain(free_b.iter().map(|&k| b.shape[k]))
        .collect();
    Ok(DenseTensor {
        shape,
        data: prod.iter().copied().collect(),
    })
}

fn check_axes(axes: &[usize], rank: usize, name: &str) -> Result<()> {
    for (k, &ax) in axes.iter().enumerate() {
        if ax >= rank {
            return Err(Error::Index(format!("axis {ax} out of range for rank-{rank} tensor {name}")));
        }
        if axes[..k].contains(&ax) {
            return Err(Error::Index(format!("duplicate axis {ax} in {name}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows x kept` isometry.
    pub left: DenseTensor,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `kept x cols` co-isometry.
    pub right: DenseTensor,
    /// Square root of the summed squares of the discarded singular values.
    pub truncation_error: f64,
}

/// Truncated SVD of a matrix. Keeps at most `max_rank` singular values and
/// drops any value not above `cutoff` times the largest one, always keeping at
/// least one.
pub fn svd_truncate(m: &DenseTensor, max_rank: usize, cutoff: f64) -> Result<SvdResult> {
    if m.rank() != 2 {
        return Err(Error::Argument(format!("svd_truncate needs a matrix, got rank {}", m.rank())));
    }
    if max_rank == 0 {
        return Err(Error::Argument("max_rank must be at least 1".into()));
    }
    if !(cutoff >= 0.0) {
        return Err(Error::Argument(format!("cutoff must be non-negative, got {cutoff}")));
    }
    let t = truncated_svd(m.as_matrix(), max_rank, cutoff, 0.0)?;
    Ok(SvdResult {
        left: DenseTensor::from_matrix(&t.u),
        singular_values: t.s,
        right: DenseTensor::from_matrix(&t.vt),
        truncation_error: t.discarded_weight.sqrt(),
    })
}

pub(crate) struct Truncated {
    pub u: Array2<C64>,
    pub s: Vec<f64>,
    pub vt: Array2<C64>,
    /// Sum of squares of the discarded singular values.
    pub discarded_weight: f64,
}

/// Divide-and-conquer SVD with a QR-iteration fallback. Singular values at
/// or below `rel_cutoff * s_max` or below `abs_floor` are discarded.
pub(crate) fn truncated_svd(
    m: ArrayView2<'_, C64>,
    max_rank: usize,
    rel_cutoff: f64,
    abs_floor: f64,
) -> Result<Truncated> {
    let (rows, cols) = m.dim();
    // LAPACK wants Fortran order; a transposed copy avoids an internal transpose.
    let mut owned = Array2::<C64>::zeros((rows, cols).f());
    owned.assign(&m);
    let (u, s, vt) = match owned.svddc(JobSvd::Some) {
        Ok((Some(u), s, Some(vt))) if s.iter().all(|x| x.is_finite()) => (u, s, vt),
        _ => match owned.svd(true, true) {
            Ok((Some(u), s, Some(vt))) if s.iter().all(|x| x.is_finite()) => {
                let k = s.len();
                (
                    u.slice(ndarray::s![.., ..k]).to_owned(),
                    s,
                    vt.slice(ndarray::s![..k, ..]).to_owned(),
                )
            }
            Ok(_) => {
                return Err(Error::Numerical {
                    rows,
                    cols,
                    reason: "SVD produced non-finite singular values".into(),
                })
            }
            Err(e) => {
                return Err(Error::Numerical {
                    rows,
                    cols,
                    reason: format!("SVD failed: {e}"),
                })
            }
        },
    };
    let s_max = s.first().copied().unwrap_or(0.0);
    let threshold = (rel_cutoff * s_max).max(0.0);
    let mut keep = s
        .iter()
        .take_while(|&&x| x > threshold && x >= abs_floor)
        .count()
        .min(max_rank);
    keep = keep.max(1);
    let discarded_weight: f64 = s.iter().skip(keep).map(|x| x * x).sum();
    Ok(Truncated {
        u: u.slice(ndarray::s![.., ..keep]).to_owned(),
        s: s.iter().take(keep).copied().collect(),
        vt: vt.slice(ndarray::s![..keep, ..]).to_owned(),
        discarded_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_tensor(shape: Vec<usize>, rng: &mut ChaCha8Rng) -> DenseTensor {
        let n = shape.iter().product();
        let data = (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        DenseTensor::new(shape, data).unwrap()
    }

    #[test]
    fn identity_times_vector() {
        let id = DenseTensor::from_real(vec![2, 2], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let v = DenseTensor::from_real(vec![2], &[1.0, 2.0]).unwrap();
        let r = contract(&id, &[1], &v, &[0]).unwrap();
        assert_eq!(r.shape(), &[2]);
        assert_eq!(r.data(), &[c(1.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn rank_one_product_is_scalar() {
        let a = DenseTensor::new(vec![1], vec![c(1.0, 1.0)]).unwrap();
        let b = DenseTensor::from_real(vec![1], &[2.0]).unwrap();
        let r = contract(&a, &[0], &b, &[0]).unwrap();
        assert_eq!(r.rank(), 0);
        assert_eq!(r.data(), &[c(2.0, 2.0)]);
    }

    #[test]
    fn matrix_product_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_tensor(vec![3, 4], &mut rng);
        let b = random_tensor(vec![4, 5], &mut rng);
        let r = contract(&a, &[1], &b, &[0]).unwrap();
        for i in 0..3 {
            for j in 0..5 {
                let mut acc = c(0.0, 0.0);
                for k in 0..4 {
                    acc += a.get(&[i, k]).unwrap() * b.get(&[k, j]).unwrap();
                }
                assert!((r.get(&[i, j]).unwrap() - acc).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn contraction_errors() {
        let a = DenseTensor::zeros(vec![2, 3]).unwrap();
        let b = DenseTensor::zeros(vec![4, 2]).unwrap();
        match contract(&a, &[1], &b, &[0]) {
            Err(Error::Dimension { axis_a: 1, len_a: 3, axis_b: 0, len_b: 4 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(contract(&a, &[2], &b, &[0]), Err(Error::Index(_))));
        assert!(matches!(contract(&a, &[0, 0], &b, &[1, 1]), Err(Error::Index(_))));
    }

    #[test]
    fn permute_identity_and_transpose() {
        let t = DenseTensor::from_real(vec![2, 3], &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(t.permute(&[0, 1]).unwrap(), t);
        let tt = t.permute(&[1, 0]).unwrap();
        assert_eq!(tt.shape(), &[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(tt.get(&[j, i]).unwrap(), t.get(&[i, j]).unwrap());
            }
        }
        assert_eq!(tt.permute(&[1, 0]).unwrap(), t);
        assert!(t.permute(&[0, 0]).is_err());
        assert!(t.permute(&[0]).is_err());
    }

    #[test]
    fn svd_of_identity() {
        let id = DenseTensor::from_real(vec![2, 2], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let r = svd_truncate(&id, 2, 0.0).unwrap();
        assert_eq!(r.singular_values.len(), 2);
        for s in &r.singular_values {
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert_eq!(r.truncation_error, 0.0);
    }

    #[test]
    fn svd_of_rank_one_outer_product() {
        let u = [1.0, 2.0, -1.0];
        let v = [0.5, 3.0];
        let data: Vec<f64> = u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
        let m = DenseTensor::from_real(vec![3, 2], &data).unwrap();
        let r = svd_truncate(&m, 1, 0.0).unwrap();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert_eq!(r.singular_values.len(), 1);
        assert!((r.singular_values[0] - nu * nv).abs() < 1e-12);
        assert!(r.truncation_error < 1e-12);
    }

    #[test]
    fn truncation_error_matches_full_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_tensor(vec![4, 4], &mut rng);
        let full = svd_truncate(&m, 4, 0.0).unwrap();
        assert_eq!(full.singular_values.len(), 4);
        let s = &full.singular_values;
        let trunc = svd_truncate(&m, 2, 0.0).unwrap();
        let expected = (s[2] * s[2] + s[3] * s[3]).sqrt();
        assert!((trunc.truncation_error - expected).abs() < 1e-12);
        let recon = reconstruct(&trunc);
        let diff = DenseTensor::new(
            vec![4, 4],
            m.data().iter().zip(recon.data()).map(|(a, b)| a - b).collect(),
        )
        .unwrap();
        assert!((diff.frobenius_norm() - trunc.truncation_error).abs() < 1e-10);
    }

    #[test]
    fn relative_cutoff_drops_small_values() {
        let m = DenseTensor::from_real(vec![3, 3], &[1.0, 0.0, 0.0, 0.0, 1e-3, 0.0, 0.0, 0.0, 1e-9]).unwrap();
        let r = svd_truncate(&m, 3, 1e-6).unwrap();
        assert_eq!(r.singular_values.len(), 2);
        assert!((r.truncation_error - 1e-9).abs() < 1e-15);
        let zero = DenseTensor::zeros(vec![2, 2]).unwrap();
        assert_eq!(svd_truncate(&zero, 2, 0.5).unwrap().singular_values.len(), 1);
    }

    #[test]
    fn svd_argument_errors() {
        let v = DenseTensor::zeros(vec![3]).unwrap();
        assert!(matches!(svd_truncate(&v, 1, 0.0), Err(Error::Argument(_))));
        let m = DenseTensor::zeros(vec![2, 2]).unwrap();
        assert!(matches!(svd_truncate(&m, 0, 0.0), Err(Error::Argument(_))));
    }

    pub(crate) fn reconstruct(r: &SvdResult) -> DenseTensor {
        let k = r.singular_values.len();
        let mut scaled = r.left.clone();
        let rows = scaled.shape()[0];
        let data: Vec<C64> = (0..rows * k)
            .map(|idx| scaled.data()[idx] * r.singular_values[idx % k])
            .collect();
        scaled = DenseTensor::new(vec![rows, k], data).unwrap();
        contract(&scaled, &[1], &r.right, &[0]).unwrap()
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn tensor_strategy(max_rank: usize) -> impl Strategy<Value = (Vec<usize>, u64)> {
            (prop::collection::vec(1usize..4, 1..=max_rank), any::<u64>())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn permute_preserves_entries((shape, seed) in tensor_strategy(4)) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let t = random_tensor(shape.clone(), &mut rng);
                let mut order: Vec<usize> = (0..shape.len()).collect();
                order.reverse();
                let p = t.permute(&order).unwrap();
                let mut a: Vec<_> = t.data().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect();
                let mut b: Vec<_> = p.data().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect();
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
            }

            #[test]
            fn contract_commutes_with_permute((shape, seed) in tensor_strategy(3), extra in 1usize..4) {
                // a has shape [shape..., extra]; contract its last axis with b's first.
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut sa = shape.clone();
                sa.push(extra);
                let a = random_tensor(sa.clone(), &mut rng);
                let b = random_tensor(vec![extra, 2], &mut rng);
                let direct = contract(&a, &[sa.len() - 1], &b, &[0]).unwrap();
                // Move the paired axis to the front, then contract axis 0.
                let mut order = vec![sa.len() - 1];
                order.extend(0..sa.len() - 1);
                let pa = a.permute(&order).unwrap();
                let via = contract(&pa, &[0], &b, &[0]).unwrap();
                prop_assert!(direct.max_abs_diff(&via) < 1e-12);
            }

            #[test]
            fn svd_reconstructs_within_truncation_error(r in 1usize..6, c in 1usize..6, cap in 1usize..6, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = random_tensor(vec![r, c], &mut rng);
                let t = svd_truncate(&m, cap, 0.0).unwrap();
                prop_assert!(t.singular_values.windows(2).all(|w| w[0] >= w[1]));
                prop_assert!(t.singular_values.iter().all(|&s| s >= 0.0));
                let recon = reconstruct(&t);
                let err = m.data().iter().zip(recon.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(err <= t.truncation_error + 1e-10);
                if cap >= r.min(c) {
                    prop_assert!(err < 1e-10);
                }
                // Isometry checks.
                let u = t.left.as_matrix();
                let v = t.right.as_matrix();
                let k = t.singular_values.len();
                let uu = u.t().mapv(|z| z.conj()).dot(&u);
                let vv = v.dot(&v.t().mapv(|z| z.conj()));
                for i in 0..k {
                    for j in 0..k {
                        let e = if i == j { 1.0 } else { 0.0 };
                        prop_assert!((uu[[i, j]] - e).norm() < 1e-10);
                        prop_assert!((vv[[i, j]] - e).norm() < 1e-10);
                    }
                }
            }
        }
    }
}

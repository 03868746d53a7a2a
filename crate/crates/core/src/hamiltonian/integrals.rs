use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, Array4};

use crate::error::{Error, Result};

/// Tolerance for symmetry checks on parsed integrals.
const PARSE_SYMMETRY_TOL: f64 = 1e-8;

/// One- and two-electron integrals over an orthonormal spatial-orbital basis.
///
/// `g[[p, q, r, s]]` is the chemists'-notation integral `(pq|rs)`. All
/// energies are in Hartree.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralBundle {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub nuclear_repulsion: f64,
    pub h: Array2<f64>,
    pub g: Array4<f64>,
    pub basis_label: String,
}

impl IntegralBundle {
    pub fn new(
        n_electrons: usize,
        nuclear_repulsion: f64,
        h: Array2<f64>,
        g: Array4<f64>,
        basis_label: impl Into<String>,
    ) -> Result<Self> {
        let n = h.nrows();
        let b = Self {
            n_orbitals: n,
            n_electrons,
            nuclear_repulsion,
            h,
            g,
            basis_label: basis_label.into(),
        };
        b.validate(1e-10)?;
        Ok(b)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.n_orbitals;
        if self.h.dim() != (n, n) {
            return Err(Error::Validation(format!("h has shape {:?}, expected ({n}, {n})", self.h.dim())));
        }
        if self.g.dim() != (n, n, n, n) {
            return Err(Error::Validation(format!("g has shape {:?}, expected {n}^4", self.g.dim())));
        }
        if self.n_electrons > 2 * n {
            return Err(Error::Validation(format!(
                "{} electrons do not fit in {n} spatial orbitals",
                self.n_electrons
            )));
        }
        for p in 0..n {
            for q in 0..n {
                if (self.h[[p, q]] - self.h[[q, p]]).abs() > tol {
                    return Err(Error::Validation(format!("h not symmetric at ({p}, {q})")));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.g[[p, q, r, s]];
                        for w in symmetric_images(p, q, r, s) {
                            if (self.g[w] - v).abs() > tol {
                                return Err(Error::Validation(format!(
                                    "g lacks 8-fold symmetry at ({p}{q}|{r}{s}) vs {w:?}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Rotates into the orbitals given by the columns of `c` (n x m). The
    /// electron count is carried over unchanged.
    pub fn transform(&self, c: &Array2<f64>) -> IntegralBundle {
        let h = c.t().dot(&self.h).dot(c);
        let g = transform_eri(&self.g, c);
        IntegralBundle {
            n_orbitals: c.ncols(),
            n_electrons: self.n_electrons,
            nuclear_repulsion: self.nuclear_repulsion,
            h,
            g,
            basis_label: self.basis_label.clone(),
        }
    }

    /// Folds the first `n_frozen` orbitals, taken as doubly occupied, into the
    /// constant and the one-electron integrals.
    pub fn freeze_core(&self, n_frozen: usize) -> Result<IntegralBundle> {
        if 2 * n_frozen > self.n_electrons || n_frozen > self.n_orbitals {
            return Err(Error::Argument(format!(
                "cannot freeze {n_frozen} orbitals with {} electrons",
                self.n_electrons
            )));
        }
        let n = self.n_orbitals;
        let mut e_core = self.nuclear_repulsion;
        for i in 0..n_frozen {
            e_core += 2.0 * self.h[[i, i]];
            for j in 0..n_frozen {
                e_core += 2.0 * self.g[[i, i, j, j]] - self.g[[i, j, j, i]];
            }
        }
        let active: Vec<usize> = (n_frozen..n).collect();
        let m = active.len();
        let mut h = Array2::zeros((m, m));
        for (a, &p) in active.iter().enumerate() {
            for (b, &q) in active.iter().enumerate() {
                let mut v = self.h[[p, q]];
                for i in 0..n_frozen {
                    v += 2.0 * self.g[[p, q, i, i]] - self.g[[p, i, i, q]];
                }
                h[[a, b]] = v;
            }
        }
        let g = Array4::from_shape_fn((m, m, m, m), |(a, b, c, d)| {
            self.g[[active[a], active[b], active[c], active[d]]]
        });
        Ok(IntegralBundle {
            n_orbitals: m,
            n_electrons: self.n_electrons - 2 * n_frozen,
            nuclear_repulsion: e_core,
            h,
            g,
            basis_label: self.basis_label.clone(),
        })
    }

    /// FCIDUMP text with 1-based indices, unique `(pq|rs)` with p>=q, r>=s,
    /// pq>=rs, and values printed with round-trip precision.
    pub fn to_fcidump(&self) -> String {
        let n = self.n_orbitals;
        let mut out = String::new();
        let _ = writeln!(out, " &FCI NORB={n},NELEC={},MS2=0,", self.n_electrons);
        let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(n));
        let _ = writeln!(out, "  ISYM=1,");
        let _ = writeln!(out, " &END");
        for p in 0..n {
            for q in 0..=p {
                for r in 0..n {
                    for s in 0..=r {
                        if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                            continue;
                        }
                        let v = self.g[[p, q, r, s]];
                        if v != 0.0 {
                            let _ = writeln!(out, "{v:e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..=p {
                let v = self.h[[p, q]];
                if v != 0.0 {
                    let _ = writeln!(out, "{v:e} {} {} 0 0", p + 1, q + 1);
                }
            }
        }
        let _ = writeln!(out, "{:e} 0 0 0 0", self.nuclear_repulsion);
        out
    }
}

fn symmetric_images(p: usize, q: usize, r: usize, s: usize) -> [[usize; 4]; 8] {
    [
        [p, q, r, s],
        [q, p, r, s],
        [p, q, s, r],
        [q, p, s, r],
        [r, s, p, q],
        [s, r, p, q],
        [r, s, q, p],
        [s, r, q, p],
    ]
}

/// `(pq|rs)` in the rotated basis, one index at a time.
pub(crate) fn transform_eri(g: &Array4<f64>, c: &Array2<f64>) -> Array4<f64> {
    let (n, m) = c.dim();
    // (abcd) -> (pbcd) -> (pqcd) -> (pqrd) -> (pqrs), each a matrix product on
    // a flattened view.
    let step = |t: Array4<f64>| -> Array4<f64> {
        // Contract the first axis with c and move it to the back.
        let (d0, d1, d2, d3) = t.dim();
        let flat = t.into_shape_with_order((d0, d1 * d2 * d3)).expect("contiguous");
        let r = c.t().dot(&flat); // m x rest
        let r4 = r.into_shape_with_order((m, d1, d2, d3)).expect("contiguous");
        let mut moved = r4.permuted_axes([1, 2, 3, 0]).as_standard_layout().into_owned();
        moved = moved.into_shape_with_order((d1, d2, d3, m)).expect("contiguous");
        moved
    };
    assert_eq!(g.dim(), (n, n, n, n));
    step(step(step(step(g.as_standard_layout().into_owned()))))
}

/// Reads a FCIDUMP file: a `&FCI ... &END` (or `/`) namelist header with NORB
/// and NELEC, then lines `value i j k l` with 1-based chemists'-order indices.
/// `k = l = 0` marks one-electron integrals, all-zero indices the nuclear
/// repulsion, and `j = k = l = 0` orbital energies (ignored).
pub fn parse_fcidump(path: impl AsRef<Path>) -> Result<IntegralBundle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fcidump_str(&text, &path.display().to_string())
}

pub fn parse_fcidump_str(text: &str, source: &str) -> Result<IntegralBundle> {
    let perr = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };

    let mut header = String::new();
    let mut body_start = None;
    let mut in_header = false;
    for (ln, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if !in_header {
            if t.is_empty() {
                continue;
            }
            if t.to_ascii_uppercase().starts_with("&FCI") {
                in_header = true;
                header.push_str(&t[4..]);
                header.push(',');
                if t.contains("&END") || t.ends_with('/') {
                    body_start = Some(ln + 1);
                    break;
                }
                continue;
            }
            return Err(perr(ln + 1, "expected '&FCI' header".into()));
        }
        let upper = t.to_ascii_uppercase();
        if upper.starts_with("&END") || upper == "/" || upper.starts_with('/') {
            body_start = Some(ln + 1);
            break;
        }
        header.push_str(t);
        header.push(',');
    }
    let body_start = body_start.ok_or_else(|| perr(1, "unterminated &FCI header".into()))?;
    let header = header.replace("&END", "").replace("&end", "");

    let mut norb = None;
    let mut nelec = None;
    let mut current_key = String::new();
    for item in header.split(',') {
        let item = item.trim().trim_end_matches('/');
        if item.is_empty() {
            continue;
        }
        let (key, value) = match item.split_once('=') {
            Some((k, v)) => {
                current_key = k.trim().to_ascii_uppercase();
                (current_key.clone(), v.trim())
            }
            None => (current_key.clone(), item),
        };
        let parse_int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| perr(1, format!("bad integer '{v}' for {key}")))
        };
        match key.as_str() {
            "NORB" => norb = Some(parse_int(value)?),
            "NELEC" => nelec = Some(parse_int(value)?),
            _ => {}
        }
    }
    let n = norb.ok_or_else(|| perr(1, "header lacks NORB".into()))?;
    let n_electrons = nelec.ok_or_else(|| perr(1, "header lacks NELEC".into()))?;

    let mut h = Array2::<f64>::zeros((n, n));
    let mut h_set = Array2::<bool>::from_elem((n, n), false);
    let mut g = Array4::<f64>::zeros((n, n, n, n));
    let mut g_set = Array4::<bool>::from_elem((n, n, n, n), false);
    let mut e_nuc = 0.0;

    for (ln, raw) in text.lines().enumerate().skip(body_start) {
        let line_no = ln + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(perr(line_no, format!("expected 'value i j k l', got {} fields", fields.len())));
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| perr(line_no, format!("bad value '{}'", fields[0])))?;
        let mut idx = [0usize; 4];
        for (k, f) in fields[1..].iter().enumerate() {
            idx[k] = f
                .parse()
                .map_err(|_| perr(line_no, format!("bad index '{f}'")))?;
            if idx[k] > n {
                return Err(perr(line_no, format!("index {} exceeds NORB={n}", idx[k])));
            }
        }
        match idx {
            [0, 0, 0, 0] => e_nuc = value,
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, 0, 0] if i > 0 && j > 0 => {
                for (a, b) in [(i - 1, j - 1), (j - 1, i - 1)] {
                    if h_set[[a, b]] && (h[[a, b]] - value).abs() > PARSE_SYMMETRY_TOL {
                        return Err(Error::Validation(format!(
                            "{source}:{line_no}: h({i},{j}) conflicts with a symmetric entry"
                        )));
                    }
                    h[[a, b]] = value;
                    h_set[[a, b]] = true;
                }
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                for w in symmetric_images(i - 1, j - 1, k - 1, l - 1) {
                    if g_set[w] && (g[w] - value).abs() > PARSE_SYMMETRY_TOL {
                        return Err(Error::Validation(format!(
                            "{source}:{line_no}: ({i}{j}|{k}{l}) conflicts with a symmetric entry"
                        )));
                    }
                    g[w] = value;
                    g_set[w] = true;
                }
            }
            _ => return Err(perr(line_no, format!("unsupported index pattern {idx:?}"))),
        }
    }

    let bundle = IntegralBundle {
        n_orbitals: n,
        n_electrons,
        nuclear_repulsion: e_nuc,
        h,
        g,
        basis_label: String::new(),
    };
    bundle.validate(PARSE_SYMMETRY_TOL)?;
    Ok(bundle)
}

//! Gate lists for the MPS simulator.
//!
//! Two-qubit matrices are written in the basis of `(qubits[0], qubits[1])`
//! with row index `2 * bit(qubits[0]) + bit(qubits[1])`.

mod measure;
mod passes;

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::C64;

pub use measure::hadamard_test_measurement;
pub use passes::{bind_parameters, cancel_inverse_pairs, fuse_gates, route_nearest_neighbour};

/// Reference to a variational parameter: the gate angle is
/// `base + scale * theta[slot]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Param {
    pub slot: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    Cz,
    Swap,
    U4(Box<Array2<C64>>),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap | GateKind::U4(_) => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, GateKind::Rx(_) | GateKind::Ry(_) | GateKind::Rz(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::Rx(_) => "RX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
            GateKind::U4(_) => "U4",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    qubits: [usize; 2],
    pub param: Option<Param>,
}

impl Gate {
    pub fn single(kind: GateKind, q: usize) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        Self {
            kind,
            qubits: [q, q],
            param: None,
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        debug_assert_eq!(kind.arity(), 2);
        Self {
            kind,
            qubits: [a, b],
            param: None,
        }
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }

    pub fn s(q: usize) -> Self {
        Self::single(GateKind::S, q)
    }

    pub fn sdg(q: usize) -> Self {
        Self::single(GateKind::Sdg, q)
    }

    pub fn rz(q: usize, angle: f64) -> Self {
        Self::single(GateKind::Rz(angle), q)
    }

    /// `RZ(scale * theta[slot])` on `q`.
    pub fn rz_param(q: usize, slot: usize, scale: f64) -> Self {
        Self {
            kind: GateKind::Rz(0.0),
            qubits: [q, q],
            param: Some(Param { slot, scale }),
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::two(GateKind::Cnot, control, target)
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::two(GateKind::Cz, a, b)
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::two(GateKind::Swap, a, b)
    }

    /// Arbitrary two-qubit unitary in the `(a, b)` basis.
    pub fn u4(a: usize, b: usize, m: Array2<C64>) -> Self {
        Self::two(GateKind::U4(Box::new(m)), a, b)
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.arity()]
    }

    /// Lower and upper qubit of a two-qubit gate.
    pub fn span(&self) -> (usize, usize) {
        let q = self.qubits();
        let lo = *q.iter().min().expect("non-empty");
        let hi = *q.iter().max().expect("non-empty");
        (lo, hi)
    }

    pub fn angle(&self, theta: &[f64]) -> Result<f64> {
        let base = match self.kind {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) => a,
            _ => 0.0,
        };
        match self.param {
            None => Ok(base),
            Some(p) => theta.get(p.slot).map(|t| base + p.scale * t).ok_or_else(|| {
                Error::Argument(format!("parameter slot {} but only {} values given", p.slot, theta.len()))
            }),
        }
    }

    /// Dense matrix (2x2 or 4x4) with parameters resolved from `theta`.
    pub fn matrix(&self, theta: &[f64]) -> Result<Array2<C64>> {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m2 = |a: C64, b: C64, c: C64, d: C64| Array2::from_shape_vec((2, 2), vec![a, b, c, d]).unwrap();
        let perm4 = |cols: [usize; 4]| {
            let mut m = Array2::zeros((4, 4));
            for (col, &row) in cols.iter().enumerate() {
                m[[row, col]] = o;
            }
            m
        };
        Ok(match &self.kind {
            GateKind::X => m2(z, o, o, z),
            GateKind::Y => m2(z, -i, i, z),
            GateKind::Z => m2(o, z, z, -o),
            GateKind::H => m2(o * h, o * h, o * h, -o * h),
            GateKind::S => m2(o, z, z, i),
            GateKind::Sdg => m2(o, z, z, -i),
            GateKind::Rx(_) => {
                let t = self.angle(theta)? / 2.0;
                m2(o * t.cos(), -i * t.sin(), -i * t.sin(), o * t.cos())
            }
            GateKind::Ry(_) => {
                let t = self.angle(theta)? / 2.0;
                m2(o * t.cos(), -o * t.sin(), o * t.sin(), o * t.cos())
            }
            GateKind::Rz(_) => {
                let t = self.angle(theta)? / 2.0;
                m2((-i * t).exp(), z, z, (i * t).exp())
            }
            GateKind::Cnot => perm4([0, 1, 3, 2]),
            GateKind::Swap => perm4([0, 2, 1, 3]),
            GateKind::Cz => {
                let mut m = perm4([0, 1, 2, 3]);
                m[[3, 3]] = -o;
                m
            }
            GateKind::U4(m) => (**m).clone(),
        })
    }

    /// Matrix in the basis of ascending qubit indices.
    pub fn ascending_matrix(&self, theta: &[f64]) -> Result<Array2<C64>> {
        let m = self.matrix(theta)?;
        if self.arity() == 1 || self.qubits[0] < self.qubits[1] {
            return Ok(m);
        }
        let swap = [0usize, 2, 1, 3];
        Ok(Array2::from_shape_fn((4, 4), |(r, c)| m[[swap[r], swap[c]]]))
    }

    pub fn validate(&self, n_qubits: usize, parameter_count: usize) -> Result<()> {
        for &q in self.qubits() {
            if q >= n_qubits {
                return Err(Error::Index(format!("gate {self} touches qubit {q} of {n_qubits}")));
            }
        }
        if self.arity() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::Validation(format!("gate {self} repeats a qubit")));
        }
        if let Some(p) = self.param {
            if !self.kind.is_rotation() {
                return Err(Error::Validation(format!("fixed gate {self} carries a parameter")));
            }
            if p.slot >= parameter_count {
                return Err(Error::Validation(format!(
                    "gate {self} uses slot {} of {parameter_count}",
                    p.slot
                )));
            }
        }
        if let GateKind::U4(m) = &self.kind {
            if m.dim() != (4, 4) {
                return Err(Error::Validation(format!("U4 matrix has shape {:?}", m.dim())));
            }
        }
        Ok(())
    }
}

/// One line per gate: kind, qubits, then `angle=`, `slot=`/`scale=` or the
/// sixteen `re,im` entries of a U4 in row-major order.
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        match &self.kind {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) => {
                if *a != 0.0 || self.param.is_none() {
                    write!(f, " angle={a:e}")?;
                }
            }
            GateKind::U4(m) => {
                for z in m.iter() {
                    write!(f, " {:e},{:e}", z.re, z.im)?;
                }
            }
            _ => {}
        }
        if let Some(p) = self.param {
            write!(f, " slot={} scale={:e}", p.slot, p.scale)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = |msg: String| Error::Argument(format!("bad gate line \"{line}\": {msg}"));
        let mut fields = line.split_whitespace();
        let name = fields.next().ok_or_else(|| bad("empty".into()))?;
        let mut kind = match name {
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "H" => GateKind::H,
            "S" => GateKind::S,
            "SDG" => GateKind::Sdg,
            "RX" => GateKind::Rx(0.0),
            "RY" => GateKind::Ry(0.0),
            "RZ" => GateKind::Rz(0.0),
            "CNOT" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "SWAP" => GateKind::Swap,
            "U4" => GateKind::U4(Box::new(Array2::zeros((4, 4)))),
            other => return Err(bad(format!("unknown kind {other}"))),
        };
        let mut qubits = [0usize; 2];
        for slot in qubits.iter_mut().take(kind.arity()) {
            let tok = fields.next().ok_or_else(|| bad("missing qubit".into()))?;
            *slot = tok.parse().map_err(|_| bad(format!("qubit '{tok}'")))?;
        }
        if kind.arity() == 1 {
            qubits[1] = qubits[0];
        }
        let mut param: Option<Param> = None;
        let mut entries = Vec::new();
        for tok in fields {
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("number '{s}'")));
            if let Some(v) = tok.strip_prefix("angle=") {
                let a = num(v)?;
                kind = match kind {
                    GateKind::Rx(_) => GateKind::Rx(a),
                    GateKind::Ry(_) => GateKind::Ry(a),
                    GateKind::Rz(_) => GateKind::Rz(a),
                    _ => return Err(bad("angle on a fixed gate".into())),
                };
            } else if let Some(v) = tok.strip_prefix("slot=") {
                let slot = v.parse().map_err(|_| bad(format!("slot '{v}'")))?;
                param.get_or_insert(Param { slot: 0, scale: 1.0 }).slot = slot;
            } else if let Some(v) = tok.strip_prefix("scale=") {
                param.get_or_insert(Param { slot: 0, scale: 1.0 }).scale = num(v)?;
            } else if let Some((re, im)) = tok.split_once(',') {
                entries.push(Complex64::new(num(re)?, num(im)?));
            } else {
                return Err(bad(format!("unexpected field '{tok}'")));
            }
        }
        if let GateKind::U4(_) = kind {
            if entries.len() != 16 {
                return Err(bad(format!("U4 needs 16 entries, got {}", entries.len())));
            }
            kind = GateKind::U4(Box::new(Array2::from_shape_vec((4, 4), entries).unwrap()));
        } else if !entries.is_empty() {
            return Err(bad("matrix entries on a named gate".into()));
        }
        Ok(Gate { kind, qubits, param })
    }
}

/// Gate list split into a reference prefix, an ansatz body shared between
/// measurements, and a per-observable measurement suffix.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub n_qubits: usize,
    pub reference: Vec<Gate>,
    pub ansatz: Arc<[Gate]>,
    pub measurement: Vec<Gate>,
    pub parameter_count: usize,
}

impl Circuit {
    pub fn new(
        n_qubits: usize,
        reference: Vec<Gate>,
        ansatz: Arc<[Gate]>,
        measurement: Vec<Gate>,
        parameter_count: usize,
    ) -> Result<Self> {
        let c = Self {
            n_qubits,
            reference,
            ansatz,
            measurement,
            parameter_count,
        };
        c.validate()?;
        Ok(c)
    }

    /// Reference and ansatz only, no measurement suffix.
    pub fn state_prep(&self) -> Circuit {
        Circuit {
            measurement: Vec::new(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.reference {
            if g.kind != GateKind::X {
                return Err(Error::Validation(format!("reference segment holds non-X gate {g}")));
            }
        }
        let mut used = vec![false; self.parameter_count];
        for g in self.gates() {
            g.validate(self.n_qubits, self.parameter_count)?;
            if let Some(p) = g.param {
                used[p.slot] = true;
            }
        }
        if let Some(slot) = used.iter().position(|u| !u) {
            return Err(Error::Validation(format!("parameter slot {slot} is never used")));
        }
        Ok(())
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.reference.iter().chain(self.ansatz.iter()).chain(self.measurement.iter())
    }

    pub fn len(&self) -> usize {
        self.reference.len() + self.ansatz.len() + self.measurement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Text dump with `# reference`, `# ansatz` and `# measurement` headers.
    pub fn dump(&self) -> String {
        let mut out = format!("# qubits {} parameters {}\n", self.n_qubits, self.parameter_count);
        for (title, seg) in [
            ("reference", &self.reference[..]),
            ("ansatz", &self.ansatz[..]),
            ("measurement", &self.measurement[..]),
        ] {
            out.push_str(&format!("# {title}\n"));
            for g in seg {
                out.push_str(&g.to_string());
                out.push('\n');
            }
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut n_qubits = None;
        let mut parameter_count = 0;
        let mut segments: [Vec<Gate>; 3] = Default::default();
        let mut current = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                let words: Vec<&str> = rest.split_whitespace().collect();
                match words.as_slice() {
                    ["qubits", n, "parameters", p] => {
                        n_qubits = n.parse().ok();
                        parameter_count = p.parse().map_err(|_| Error::Argument(format!("bad header \"{line}\"")))?;
                    }
                    ["reference"] => current = Some(0),
                    ["ansatz"] => current = Some(1),
                    ["measurement"] => current = Some(2),
                    _ => return Err(Error::Argument(format!("unknown header \"{line}\""))),
                }
                continue;
            }
            let seg = current.ok_or_else(|| Error::Argument("gate before any segment header".into()))?;
            segments[seg].push(line.parse()?);
        }
        let n_qubits = n_qubits.ok_or_else(|| Error::Argument("missing qubit count header".into()))?;
        let [reference, ansatz, measurement] = segments;
        Circuit::new(n_qubits, reference, ansatz.into(), measurement, parameter_count)
    }
}

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register a `PauliString` can describe.
pub const MAX_QUBITS: usize = 128;

/// Coefficients below this magnitude are pruned from Pauli sums.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Phase factor `i^k` produced by Pauli multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Tensor product of single-qubit Paulis in symplectic form: bit `q` of
/// `x` / `z` marks an X / Z component on qubit `q` (Y has both).
///
/// Equality, hashing and ordering ignore `n_qubits`, so strings that differ
/// only by trailing identities compare equal.
#[derive(Debug, Clone, Copy)]
pub struct PauliString {
    x: u128,
    z: u128,
    n_qubits: usize,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self { x: 0, z: 0, n_qubits }
    }

    pub fn from_masks(x: u128, z: u128, n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        let used = x | z;
        if n_qubits < MAX_QUBITS && used >> n_qubits != 0 {
            return Err(Error::Index(format!("Pauli masks exceed {n_qubits} qubits")));
        }
        Ok(Self { x, z, n_qubits })
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        check_width(letters.len())?;
        let mut s = Self::identity(letters.len());
        for (q, &p) in letters.iter().enumerate() {
            s.set(q, p);
        }
        Ok(s)
    }

    /// Builds a string from `(qubit, letter)` pairs on an `n_qubits` register.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        check_width(n_qubits)?;
        let mut s = Self::identity(n_qubits);
        for &(q, p) in ops {
            if q >= n_qubits {
                return Err(Error::Index(format!("qubit {q} out of range for {n_qubits} qubits")));
            }
            s.set(q, p);
        }
        Ok(s)
    }

    fn set(&mut self, q: usize, p: Pauli) {
        let bit = 1u128 << q;
        self.x &= !bit;
        self.z &= !bit;
        match p {
            Pauli::I => {}
            Pauli::X => self.x |= bit,
            Pauli::Y => {
                self.x |= bit;
                self.z |= bit;
            }
            Pauli::Z => self.z |= bit,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u128 {
        self.x
    }

    pub fn z_mask(&self) -> u128 {
        self.z
    }

    pub fn letter(&self, q: usize) -> Pauli {
        let bit = 1u128 << q;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut m = self.x | self.z;
        let mut out = Vec::with_capacity(m.count_ones() as usize);
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            out.push(q);
            m &= m - 1;
        }
        out
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    pub fn with_n_qubits(mut self, n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        if n_qubits < MAX_QUBITS && (self.x | self.z) >> n_qubits != 0 {
            return Err(Error::Index(format!("string does not fit in {n_qubits} qubits")));
        }
        self.n_qubits = n_qubits;
        Ok(self)
    }

    /// Product without a width check; the result keeps the wider register.
    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> (Phase, PauliString) {
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let px = x1 & !z1;
        let py = x1 & z1;
        let pz = !x1 & z1;
        let qx = x2 & !z2;
        let qy = x2 & z2;
        let qz = !x2 & z2;
        // XY = iZ, YZ = iX, ZX = iY and the reverses give -i.
        let plus = ((px & qy) | (py & qz) | (pz & qx)).count_ones() as i64;
        let minus = ((py & qx) | (pz & qy) | (px & qz)).count_ones() as i64;
        (
            Phase::from_power(plus - minus),
            PauliString {
                x: x1 ^ x2,
                z: z1 ^ z2,
                n_qubits: self.n_qubits.max(other.n_qubits),
            },
        )
    }
}

fn check_width(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::Capacity(format!("{n} qubits exceeds the {MAX_QUBITS}-qubit Pauli limit")))
    } else {
        Ok(())
    }
}

/// Letter-wise product with accumulated phase.
pub fn pauli_multiply(p: &PauliString, q: &PauliString) -> Result<(Phase, PauliString)> {
    if p.n_qubits != q.n_qubits {
        return Err(Error::Argument(format!(
            "cannot multiply {}-qubit and {}-qubit Pauli strings",
            p.n_qubits, q.n_qubits
        )));
    }
    Ok(p.mul_unchecked(q))
}

impl PartialEq for PauliString {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }
}

impl Eq for PauliString {}

impl Hash for PauliString {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.x.hash(state);
        self.z.hash(state);
    }
}

impl Ord for PauliString {
    /// Lexicographic on letters from qubit 0, with I < X < Y < Z.
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = (self.x ^ other.x) | (self.z ^ other.z);
        if diff == 0 {
            return Ordering::Equal;
        }
        let q = diff.trailing_zeros() as usize;
        self.letter(q).cmp(&other.letter(q))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Argument(format!("bad Pauli letter '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters)
    }
}

/// Real-weighted sum of Pauli strings plus an identity coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    constant: f64,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            constant: 0.0,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_qubits: usize, value: f64) -> Self {
        let mut s = Self::new(n_qubits);
        s.constant = value;
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn set_constant(&mut self, value: f64) {
        self.constant = value;
    }

    /// Adds `coeff * p`; identity strings fold into the constant term.
    pub fn add_term(&mut self, p: PauliString, coeff: f64) -> Result<()> {
        if self.n_qubits < MAX_QUBITS && (p.x | p.z) >> self.n_qubits != 0 {
            return Err(Error::Index(format!(
                "term {p} does not fit in {} qubits",
                self.n_qubits
            )));
        }
        if p.is_identity() {
            self.constant += coeff;
            return Ok(());
        }
        let p = PauliString { n_qubits: self.n_qubits, ..p };
        let entry = self.terms.entry(p).or_insert(0.0);
        *entry += coeff;
        Ok(())
    }

    /// Drops terms with magnitude below [`PRUNE_THRESHOLD`].
    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() >= PRUNE_THRESHOLD);
    }

    /// Non-identity terms in lexicographic string order.
    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&PauliString, f64)> {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    pub fn non_identity_len(&self) -> usize {
        self.terms.len()
    }

    /// Number of Pauli strings including the identity when its weight is non-zero.
    pub fn term_count(&self) -> usize {
        self.terms.len() + usize::from(self.constant != 0.0)
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        if p.is_identity() {
            self.constant
        } else {
            self.terms.get(p).copied().unwrap_or(0.0)
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PauliSumJson::from(self)).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: PauliSumJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Argument(format!("bad PauliSum JSON: {e}")))?;
        j.try_into()
    }
}

/// JSON layout: `{"n_qubits", "constant", "terms": [{"pauli": "XZIY", "coeff"}]}`.
/// Letter `k` of a `pauli` string acts on qubit `k`.
#[derive(Debug, Serialize, Deserialize)]
pub struct PauliSumJson {
    pub n_qubits: usize,
    pub constant: f64,
    pub terms: Vec<PauliTermJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PauliTermJson {
    pub pauli: String,
    pub coeff: f64,
}

impl From<&PauliSum> for PauliSumJson {
    fn from(s: &PauliSum) -> Self {
        Self {
            n_qubits: s.n_qubits,
            constant: s.constant,
            terms: s
                .terms()
                .map(|(p, c)| PauliTermJson {
                    pauli: p.to_string(),
                    coeff: c,
                })
                .collect(),
        }
    }
}

impl TryFrom<PauliSumJson> for PauliSum {
    type Error = Error;
    fn try_from(j: PauliSumJson) -> Result<Self> {
        let mut s = PauliSum::constant(j.n_qubits, j.constant);
        for t in j.terms {
            if t.pauli.len() != j.n_qubits {
                return Err(Error::Argument(format!(
                    "term '{}' has {} letters, expected {}",
                    t.pauli,
                    t.pauli.len(),
                    j.n_qubits
                )));
            }
            s.add_term(t.pauli.parse()?, t.coeff)?;
        }
        Ok(s)
    }
}

/// Complex-weighted Pauli sum used during operator expansion.
#[derive(Debug, Clone, Default)]
pub(crate) struct ComplexPauliSum {
    pub terms: BTreeMap<PauliString, Complex64>,
}

impl ComplexPauliSum {
    pub fn scalar(n_qubits: usize, c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(PauliString::identity(n_qubits), c);
        Self { terms }
    }

    pub fn add(&mut self, p: PauliString, c: Complex64) {
        *self.terms.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn mul(&self, other: &ComplexPauliSum) -> ComplexPauliSum {
        let mut out = ComplexPauliSum::default();
        for (p, &a) in &self.terms {
            for (q, &b) in &other.terms {
                let (ph, r) = p.mul_unchecked(q);
                out.add(r, a * b * ph.to_complex());
            }
        }
        out
    }

    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.norm() >= threshold);
    }
}

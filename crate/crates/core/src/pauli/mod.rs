//! Pauli strings in symplectic form, basis enumeration and the Clifford
//! circuits that map one Pauli string onto another.

mod circuit;
mod synthesis;

pub use circuit::{Circuit, Gate};
pub use synthesis::synthesize_clifford_map;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};

/// Largest qubit count for which dense `2^n x 2^n` matrices are built.
pub const DENSE_LIMIT: usize = 6;

/// Largest qubit count a `PauliString` can carry.
pub const MAX_QUBITS: usize = 32;

pub(crate) fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        Err(Error::Capacity {
            n,
            limit: DENSE_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// An n-qubit Pauli operator without global phase.
///
/// Bits are stored big-endian: qubit 0 occupies bit `n - 1`, so the `x`
/// mask read as an integer is exactly the computational-basis index flipped
/// by the operator. The per-qubit operator is I, X, Z, Y for `(x, z)` equal
/// to `(0,0)`, `(1,0)`, `(0,1)`, `(1,1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

/// Which family of Pauli strings [`enumerate_basis`] produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFamily {
    /// All `4^n - 1` non-identity strings.
    TracelessPauli,
    /// The `2^n` strings over `{I, X}`, identity included.
    XStrings,
    /// The `2^n` strings over `{I, Z}`, identity included.
    ZStrings,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS);
        PauliString { n, x: 0, z: 0 }
    }

    /// Builds a string from big-endian bit masks; panics on stray bits.
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= MAX_QUBITS);
        let full = (1u64 << n) - 1;
        assert!(x & !full == 0 && z & !full == 0, "mask exceeds {n} qubits");
        PauliString { n, x, z }
    }

    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        if n > MAX_QUBITS {
            return Err(Error::Capacity {
                n,
                limit: MAX_QUBITS,
            });
        }
        let mut p = PauliString::identity(n);
        for (q, ch) in label.chars().enumerate() {
            let (xb, zb) = match ch {
                'I' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                _ => return Err(Error::PauliParse { position: q, ch }),
            };
            p.set(q, xb, zb);
        }
        Ok(p)
    }

    /// String with base-4 digits (I=0, X=1, Y=2, Z=3), qubit 0 most significant.
    pub fn from_index(n: usize, index: usize) -> Self {
        let mut p = PauliString::identity(n);
        let mut rest = index;
        for q in (0..n).rev() {
            let (xb, zb) = match rest % 4 {
                0 => (false, false),
                1 => (true, false),
                2 => (true, true),
                _ => (false, true),
            };
            p.set(q, xb, zb);
            rest /= 4;
        }
        p
    }

    pub fn index(&self) -> usize {
        (0..self.n).fold(0, |acc, q| {
            let digit = match (self.x_bit(q), self.z_bit(q)) {
                (false, false) => 0,
                (true, false) => 1,
                (true, true) => 2,
                (false, true) => 3,
            };
            acc * 4 + digit
        })
    }

    #[inline]
    fn shift(&self, q: usize) -> usize {
        self.n - 1 - q
    }

    pub(crate) fn set(&mut self, q: usize, xb: bool, zb: bool) {
        let bit = 1u64 << self.shift(q);
        self.x = if xb { self.x | bit } else { self.x & !bit };
        self.z = if zb { self.z | bit } else { self.z & !bit };
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x >> self.shift(q)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z >> self.shift(q)) & 1 == 1
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn x_bits(&self) -> Vec<bool> {
        (0..self.n).map(|q| self.x_bit(q)).collect()
    }

    pub fn z_bits(&self) -> Vec<bool> {
        (0..self.n).map(|q| self.z_bit(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when the string only contains I and Z.
    pub fn is_z_string(&self) -> bool {
        self.x == 0
    }

    pub fn is_x_string(&self) -> bool {
        self.z == 0
    }

    /// Qubits acted on non-trivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.x_bit(q) || self.z_bit(q))
            .collect()
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn label(&self) -> String {
        (0..self.n)
            .map(|q| match (self.x_bit(q), self.z_bit(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            })
            .collect()
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "Pauli strings on {} and {} qubits",
                self.n, other.n
            )));
        }
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let form = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        form % 2 == 0
    }

    /// Matrix element `P[j ^ x, j]`; the only non-zero entry in column `j`.
    #[inline]
    pub(crate) fn column_entry(&self, j: usize) -> (usize, C64) {
        let ys = (self.x & self.z).count_ones() % 4;
        let base = match ys {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let sign = if (self.z & j as u64).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        (j ^ self.x as usize, base * sign)
    }

    /// Dense matrix; divided by `2^{n/2}` when `normalized`.
    pub fn dense(&self, normalized: bool) -> Result<CMatrix> {
        check_dense(self.n)?;
        let dim = 1usize << self.n;
        let scale = if normalized {
            1.0 / (dim as f64).sqrt()
        } else {
            1.0
        };
        let mut m = CMatrix::from_element(dim, dim, ZERO);
        for j in 0..dim {
            let (row, v) = self.column_entry(j);
            m[(row, j)] = v * scale;
        }
        Ok(m)
    }

    /// `<l|P|l>` for a diagonal string; `None` when the string has X or Y factors.
    pub fn diagonal_sign(&self, l: usize) -> Option<f64> {
        if !self.is_z_string() {
            return None;
        }
        Some(if (self.z & l as u64).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        })
    }
}

/// Orders by qubit count, then by basis index (lexicographic labels).
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.index()).cmp(&(other.n, other.index()))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({})", self.label())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PauliString::from_label(s)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        PauliString::from_label(&s).map_err(serde::de::Error::custom)
    }
}

/// Free-function form of [`PauliString::from_label`].
pub fn pauli_from_label(label: &str) -> Result<PauliString> {
    PauliString::from_label(label)
}

pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool> {
    p.commutes(q)
}

pub fn pauli_dense(p: &PauliString, normalized: bool) -> Result<CMatrix> {
    p.dense(normalized)
}

/// Deterministic lexicographic enumeration (qubit 0 first, I < X < Y < Z).
pub fn enumerate_basis(n: usize, family: BasisFamily) -> Vec<PauliString> {
    match family {
        BasisFamily::TracelessPauli => (1..1usize << (2 * n))
            .map(|i| PauliString::from_index(n, i))
            .collect(),
        BasisFamily::XStrings => (0..1u64 << n)
            .map(|m| PauliString::from_masks(n, m, 0))
            .collect(),
        BasisFamily::ZStrings => (0..1u64 << n)
            .map(|m| PauliString::from_masks(n, 0, m))
            .collect(),
    }
}

/// Coordinates `Re Tr(P̂ X)` of a Hermitian operator in the normalized
/// Pauli basis, indexed by [`PauliString::index`] (identity at 0).
pub fn pauli_coords(n: usize, op: &CMatrix) -> Vec<f64> {
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    (0..1usize << (2 * n))
        .map(|idx| {
            let p = PauliString::from_index(n, idx);
            let mut acc = ZERO;
            for j in 0..dim {
                let (row, v) = p.column_entry(j);
                acc += v * op[(j, row)];
            }
            acc.re * scale
        })
        .collect()
}

/// Inverse of [`pauli_coords`].
pub fn from_pauli_coords(n: usize, coords: &[f64]) -> CMatrix {
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut m = CMatrix::from_element(dim, dim, ZERO);
    for (idx, &c) in coords.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let p = PauliString::from_index(n, idx);
        for j in 0..dim {
            let (row, v) = p.column_entry(j);
            m[(row, j)] += v * (c * scale);
        }
    }
    m
}

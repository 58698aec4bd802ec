use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{check_dense, PauliString};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};

/// Clifford gates used by the eliminator circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Gate {
    H(usize),
    S(usize),
    Cnot(usize, usize),
    Swap(usize, usize),
    X(usize),
    Z(usize),
}

impl Gate {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) => (q, None),
            Gate::Cnot(a, b) | Gate::Swap(a, b) => (a, Some(b)),
        }
    }

    fn inverse(&self) -> Vec<Gate> {
        match *self {
            Gate::S(q) => vec![Gate::S(q), Gate::Z(q)],
            g => vec![g],
        }
    }

    /// Applies the gate to a state vector in place.
    fn apply(&self, n: usize, psi: &mut [C64]) {
        let bit = |q: usize| 1usize << (n - 1 - q);
        match *self {
            Gate::H(q) => {
                let b = bit(q);
                let r = std::f64::consts::FRAC_1_SQRT_2;
                for idx in (0..psi.len()).filter(|i| i & b == 0) {
                    let (u, v) = (psi[idx], psi[idx | b]);
                    psi[idx] = (u + v) * r;
                    psi[idx | b] = (u - v) * r;
                }
            }
            Gate::S(q) => {
                let b = bit(q);
                for (idx, a) in psi.iter_mut().enumerate() {
                    if idx & b != 0 {
                        *a *= C64::new(0.0, 1.0);
                    }
                }
            }
            Gate::X(q) => {
                let b = bit(q);
                for idx in (0..psi.len()).filter(|i| i & b == 0) {
                    psi.swap(idx, idx | b);
                }
            }
            Gate::Z(q) => {
                let b = bit(q);
                for (idx, a) in psi.iter_mut().enumerate() {
                    if idx & b != 0 {
                        *a = -*a;
                    }
                }
            }
            Gate::Cnot(c, t) => {
                let (bc, bt) = (bit(c), bit(t));
                for idx in (0..psi.len()).filter(|i| i & bc != 0 && i & bt == 0) {
                    psi.swap(idx, idx | bt);
                }
            }
            Gate::Swap(a, b) => {
                let (ba, bb) = (bit(a), bit(b));
                for idx in (0..psi.len()).filter(|i| i & ba != 0 && i & bb == 0) {
                    psi.swap(idx, idx ^ ba ^ bb);
                }
            }
        }
    }

    /// Conjugates a signed Pauli string, `G P G†`.
    fn conjugate(&self, p: &mut PauliString, negative: &mut bool) {
        match *self {
            Gate::H(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                *negative ^= x && z;
                p.set(q, z, x);
            }
            Gate::S(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                *negative ^= x && z;
                p.set(q, x, z ^ x);
            }
            Gate::X(q) => *negative ^= p.z_bit(q),
            Gate::Z(q) => *negative ^= p.x_bit(q),
            Gate::Cnot(c, t) => {
                let (xc, zc, xt, zt) = (p.x_bit(c), p.z_bit(c), p.x_bit(t), p.z_bit(t));
                *negative ^= xc && zt && !(xt ^ zc);
                p.set(t, xt ^ xc, zt);
                p.set(c, xc, zc ^ zt);
            }
            Gate::Swap(a, b) => {
                let (xa, za, xb, zb) = (p.x_bit(a), p.z_bit(a), p.x_bit(b), p.z_bit(b));
                p.set(a, xb, zb);
                p.set(b, xa, za);
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Z(q) => write!(f, "Z {q}"),
            Gate::Cnot(c, t) => write!(f, "CNOT {c} {t}"),
            Gate::Swap(a, b) => write!(f, "SWAP {a} {b}"),
        }
    }
}

impl FromStr for Gate {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let idx = |k: usize| -> std::result::Result<usize, String> {
            parts
                .get(k)
                .ok_or_else(|| format!("gate {s:?} is missing an operand"))?
                .parse()
                .map_err(|e| format!("gate {s:?}: {e}"))
        };
        let arity = match parts.first().copied() {
            Some("H" | "S" | "X" | "Z") => 1,
            Some("CNOT" | "SWAP") => 2,
            _ => return Err(format!("unknown gate {s:?}")),
        };
        if parts.len() != arity + 1 {
            return Err(format!("gate {s:?} expects {arity} operand(s)"));
        }
        Ok(match parts[0] {
            "H" => Gate::H(idx(1)?),
            "S" => Gate::S(idx(1)?),
            "X" => Gate::X(idx(1)?),
            "Z" => Gate::Z(idx(1)?),
            "CNOT" => Gate::Cnot(idx(1)?, idx(2)?),
            _ => Gate::Swap(idx(1)?, idx(2)?),
        })
    }
}

impl From<Gate> for String {
    fn from(g: Gate) -> String {
        g.to_string()
    }
}

impl TryFrom<String> for Gate {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

/// A gate sequence in application order, with its unitary built on demand.
#[derive(Clone, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    #[serde(skip)]
    dense: OnceLock<CMatrix>,
}

impl Circuit {
    pub fn identity(n: usize) -> Self {
        Circuit {
            n,
            gates: Vec::new(),
            dense: OnceLock::new(),
        }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            let (a, b) = g.qubits();
            if a >= n || b.is_some_and(|b| b >= n) {
                return Err(Error::Domain(format!("gate {g} acts outside {n} qubits")));
            }
            if b == Some(a) {
                return Err(Error::Domain(format!("gate {g} repeats a qubit")));
            }
        }
        Ok(Circuit {
            n,
            gates,
            dense: OnceLock::new(),
        })
    }

    /// The Pauli operator itself as a circuit (global phase dropped).
    pub fn pauli(p: &PauliString) -> Self {
        let mut gates = Vec::new();
        for q in 0..p.num_qubits() {
            if p.z_bit(q) {
                gates.push(Gate::Z(q));
            }
            if p.x_bit(q) {
                gates.push(Gate::X(q));
            }
        }
        Circuit {
            n: p.num_qubits(),
            gates,
            dense: OnceLock::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// True when every gate is X or Z, i.e. the circuit is a Pauli operator.
    pub fn is_pauli(&self) -> bool {
        self.gates
            .iter()
            .all(|g| matches!(g, Gate::X(_) | Gate::Z(_)))
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Circuit) -> Circuit {
        assert_eq!(self.n, next.n, "circuits act on different qubit counts");
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&next.gates);
        Circuit {
            n: self.n,
            gates,
            dense: OnceLock::new(),
        }
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n: self.n,
            gates: self.gates.iter().rev().flat_map(Gate::inverse).collect(),
            dense: OnceLock::new(),
        }
    }

    /// Returns `(negative, U P U†)` with the sign split off.
    pub fn conjugate(&self, p: &PauliString) -> (bool, PauliString) {
        assert_eq!(p.num_qubits(), self.n);
        let mut out = *p;
        let mut negative = false;
        for g in &self.gates {
            g.conjugate(&mut out, &mut negative);
        }
        (negative, out)
    }

    /// Applies the circuit to a state vector of length `2^n`.
    pub fn apply_to_state(&self, psi: &mut [C64]) {
        assert_eq!(psi.len(), 1 << self.n);
        for g in &self.gates {
            g.apply(self.n, psi);
        }
    }

    pub fn dense_unitary(&self) -> Result<&CMatrix> {
        check_dense(self.n)?;
        Ok(self.dense.get_or_init(|| {
            let dim = 1usize << self.n;
            let mut u = CMatrix::from_element(dim, dim, ZERO);
            let mut col = vec![ZERO; dim];
            for j in 0..dim {
                col.iter_mut().for_each(|c| *c = ZERO);
                col[j] = ONE;
                self.apply_to_state(&mut col);
                for (i, v) in col.iter().enumerate() {
                    u[(i, j)] = *v;
                }
            }
            u
        }))
    }

    /// `U ρ U†`.
    pub fn conjugate_matrix(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != 1 << self.n || rho.ncols() != rho.nrows() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for a {}-qubit circuit",
                rho.nrows(),
                rho.ncols(),
                self.n
            )));
        }
        if self.gates.is_empty() {
            return Ok(rho.clone());
        }
        let u = self.dense_unitary()?;
        Ok(u * rho * u.adjoint())
    }
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.gates == other.gates
    }
}

impl Eq for Circuit {}

impl Hash for Circuit {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.gates.hash(state);
    }
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Circuit[{}]{{", self.n)?;
        for (k, g) in self.gates.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("}")
    }
}

//! POVMs, their Pauli coefficient matrix `m`, the covariance matrix `C`,
//! and reduction of linearly dependent POVMs to independent ones.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    column_space, hermitian_defect, inv_sqrt_hermitian, min_eigenvalue, numerical_rank, trace,
    trace_product, CMatrix, RMatrix, C64, ONE, ZERO,
};
use crate::pauli::{check_dense, pauli_coords, PauliString};

/// Tolerance for the POVM validity checks.
pub const POVM_TOL: f64 = 1e-10;

/// Relative singular-value cutoff for linear independence.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PovmKind {
    Computational,
    General,
}

#[derive(Debug, Clone)]
pub struct Povm {
    n: usize,
    elements: Vec<CMatrix>,
    kind: PovmKind,
}

impl Povm {
    /// Validates Hermiticity, positivity and completeness.
    pub fn new(n: usize, elements: Vec<CMatrix>) -> Result<Self> {
        check_dense(n)?;
        let dim = 1usize << n;
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let mut sum = CMatrix::from_element(dim, dim, ZERO);
        for (k, m) in elements.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "element {k} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if hermitian_defect(m) > POVM_TOL {
                return Err(Error::InvalidPovm(format!("element {k} is not Hermitian")));
            }
            let low = min_eigenvalue(m);
            if low < -POVM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "element {k} has eigenvalue {low:e}"
                )));
            }
            sum += m;
        }
        let defect = (sum - CMatrix::identity(dim, dim)).norm();
        if defect > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {defect:e}"
            )));
        }
        Ok(Povm {
            n,
            elements,
            kind: PovmKind::General,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn kind(&self) -> PovmKind {
        self.kind
    }

    pub fn is_computational(&self) -> bool {
        self.kind == PovmKind::Computational
    }

    /// Outcome probabilities `Tr(ρ M_k)`.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        match self.kind {
            PovmKind::Computational => (0..rho.nrows()).map(|k| rho[(k, k)].re).collect(),
            PovmKind::General => self
                .elements
                .iter()
                .map(|m| trace_product(rho, m))
                .collect(),
        }
    }

    /// Column `m_{kI} = Tr(M_k) / 2^{n/2}`.
    pub fn m_identity(&self) -> Vec<f64> {
        let scale = (2f64).powf(-(self.n as f64) / 2.0);
        self.elements
            .iter()
            .map(|m| trace(m).re * scale)
            .collect()
    }

    /// `C_ij = Tr(M̄_i M̄_j)` for the traceless parts `M̄_k = M_k - Tr(M_k) I / 2^n`.
    pub fn covariance(&self) -> RMatrix {
        let d = self.num_outcomes();
        let dim = (1usize << self.n) as f64;
        let traces: Vec<f64> = self.elements.iter().map(|m| trace(m).re).collect();
        RMatrix::from_fn(d, d, |i, j| {
            trace_product(&self.elements[i], &self.elements[j]) - traces[i] * traces[j] / dim
        })
    }

    /// `D x (|basis| + 1)` matrix with `m_{kI}` first, then `Tr(M_k Q̂)`.
    pub fn m_matrix(&self, basis: &[PauliString]) -> RMatrix {
        let coords = self.pauli_coordinates();
        let d = self.num_outcomes();
        RMatrix::from_fn(d, basis.len() + 1, |k, c| {
            if c == 0 {
                coords[(k, 0)]
            } else {
                coords[(k, basis[c - 1].index())]
            }
        })
    }

    /// Real `D x 4^n` matrix of element coordinates in the normalized Pauli basis.
    pub fn pauli_coordinates(&self) -> RMatrix {
        let cols = 1usize << (2 * self.n);
        let rows: Vec<Vec<f64>> = self
            .elements
            .iter()
            .map(|m| pauli_coords(self.n, m))
            .collect();
        RMatrix::from_fn(self.num_outcomes(), cols, |r, c| rows[r][c])
    }

    pub fn independence_rank(&self) -> usize {
        numerical_rank(&self.pauli_coordinates(), RANK_TOL)
    }

    pub fn is_independent(&self) -> bool {
        self.independence_rank() == self.num_outcomes()
    }

    /// Recombines a dependent POVM into `r` independent outcomes.
    ///
    /// Returns the new POVM and the `r x D` matrix `p` with
    /// `M'_j = Σ_i p_ji M_i`; `p` is entrywise nonnegative with unit column sums.
    pub fn reduce(&self) -> Result<(Povm, RMatrix)> {
        let d = self.num_outcomes();
        let coords = self.pauli_coordinates();
        let r = numerical_rank(&coords, RANK_TOL);
        if r == d {
            return Err(Error::AlreadyIndependent(r));
        }
        let u: Vec<f64> = self.elements.iter().map(|m| trace(m).re).collect();
        let umin = u.iter().copied().fold(f64::INFINITY, f64::min);
        if umin <= 0.0 {
            return Err(Error::InvalidPovm("zero element in POVM".into()));
        }
        let f = column_space(&coords, RANK_TOL);
        let unorm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let uhat: Vec<f64> = u.iter().map(|x| x / unorm).collect();
        let mut spanning: Vec<Vec<f64>> = Vec::new();
        for c in 0..f.ncols() {
            let mut v: Vec<f64> = (0..d).map(|k| f[(k, c)]).collect();
            for w in std::iter::once(&uhat).chain(spanning.iter()) {
                let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(w).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 && spanning.len() < r - 1 {
                spanning.push(v.iter().map(|x| x / norm).collect());
            }
        }
        // Nonnegative recombinations of a valid spanning set can still lose
        // rank after column normalisation; larger shifts restore it.
        let mut shift = 1.0;
        for _ in 0..8 {
            let mut mu = vec![u.clone()];
            for v in &spanning {
                let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let alpha = shift * (vmax / umin + 1.0);
                mu.push(v.iter().zip(&u).map(|(a, b)| a + alpha * b).collect());
            }
            let p = RMatrix::from_fn(r, d, |j, i| {
                let col: f64 = mu.iter().map(|m| m[i]).sum();
                mu[j][i] / col
            });
            let elements: Vec<CMatrix> = (0..r)
                .map(|j| {
                    let mut acc = CMatrix::from_element(1 << self.n, 1 << self.n, ZERO);
                    for (i, m) in self.elements.iter().enumerate() {
                        acc += m * C64::new(p[(j, i)], 0.0);
                    }
                    acc
                })
                .collect();
            let reduced = Povm::new(self.n, elements)?;
            if reduced.is_independent() {
                return Ok((reduced, p));
            }
            shift *= 3.0;
        }
        Err(Error::InvalidPovm(
            "could not build an independent recombination".into(),
        ))
    }
}

/// Projectors onto the computational basis states.
pub fn computational_povm(n: usize) -> Result<Povm> {
    check_dense(n)?;
    let dim = 1usize << n;
    let elements = (0..dim)
        .map(|k| {
            let mut m = CMatrix::from_element(dim, dim, ZERO);
            m[(k, k)] = ONE;
            m
        })
        .collect();
    Ok(Povm {
        n,
        elements,
        kind: PovmKind::Computational,
    })
}

pub fn covariance(povm: &Povm) -> RMatrix {
    povm.covariance()
}

pub fn m_matrix(povm: &Povm, basis: &[PauliString]) -> RMatrix {
    povm.m_matrix(basis)
}

pub fn independence_rank(povm: &Povm) -> usize {
    povm.independence_rank()
}

pub fn reduce_povm(povm: &Povm) -> Result<(Povm, RMatrix)> {
    povm.reduce()
}

/// Random full-rank POVM with `d` outcomes: `M_k = S^{-1/2} G_k S^{-1/2}` for
/// random positive `G_k` with `S = Σ G_k`.
pub fn random_povm<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Povm> {
    check_dense(n)?;
    let dim = 1usize << n;
    let gs: Vec<CMatrix> = (0..d)
        .map(|_| {
            let g = CMatrix::from_fn(dim, dim, |_, _| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            &g * g.adjoint()
        })
        .collect();
    let total = gs
        .iter()
        .fold(CMatrix::from_element(dim, dim, ZERO), |acc, g| acc + g);
    let s = inv_sqrt_hermitian(&total);
    let elements = gs
        .iter()
        .map(|g| {
            let m = &s * g * &s;
            (&m + m.adjoint()) * C64::new(0.5, 0.0)
        })
        .collect();
    Povm::new(n, elements)
}

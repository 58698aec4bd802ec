use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, min_eigenvalue, trace, CMatrix, C64, ZERO};
use crate::pauli::{check_dense, from_pauli_coords, pauli_coords, PauliString};

pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_PSD_TOL: f64 = 1e-9;

/// A validated n-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        check_dense(n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for {n} qubits",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        if hermitian_defect(&matrix) > STATE_TRACE_TOL {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let low = min_eigenvalue(&matrix);
        if low < -STATE_PSD_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {low:e}")));
        }
        Ok(DensityMatrix { n, matrix })
    }

    /// `|b⟩⟨b|` for a bit string such as `"01"` (qubit 0 first).
    pub fn basis_state(bits: &str) -> Result<Self> {
        let n = bits.len();
        check_dense(n)?;
        let mut index = 0usize;
        for (pos, ch) in bits.chars().enumerate() {
            index = match ch {
                '0' => index << 1,
                '1' => (index << 1) | 1,
                _ => return Err(Error::config("state", format!("bad bit {ch:?} at {pos}"))),
            };
        }
        let dim = 1usize << n;
        let mut m = CMatrix::from_element(dim, dim, ZERO);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { n, matrix: m })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_dense(n)?;
        let dim = 1usize << n;
        Ok(DensityMatrix {
            n,
            matrix: CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0),
        })
    }

    /// `|ψ⟩⟨ψ|` after normalizing `psi`.
    pub fn pure(n: usize, psi: &[C64]) -> Result<Self> {
        check_dense(n)?;
        if psi.len() != 1 << n {
            return Err(Error::Dimension(format!("state vector of length {}", psi.len())));
        }
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|a| a / norm));
        Ok(DensityMatrix {
            n,
            matrix: &v * v.adjoint(),
        })
    }

    /// Haar-random pure state.
    pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let psi: Vec<C64> = (0..1usize << n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        DensityMatrix::pure(n, &psi)
    }

    /// `w |ψ⟩⟨ψ| + (1 - w) I / 2^n` with Haar-random `ψ`.
    pub fn random_mixed<R: Rng + ?Sized>(n: usize, w: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Domain(format!("mixing weight {w} outside [0, 1]")));
        }
        let pure = DensityMatrix::random_pure(n, rng)?;
        let mixed = DensityMatrix::maximally_mixed(n)?;
        Ok(DensityMatrix {
            n,
            matrix: pure.matrix * C64::new(w, 0.0) + mixed.matrix * C64::new(1.0 - w, 0.0),
        })
    }

    pub fn from_coefficients(s: &StateCoefficients) -> Result<Self> {
        DensityMatrix::new(s.n, s.to_matrix())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn to_coefficients(&self) -> StateCoefficients {
        let mut coords = pauli_coords(self.n, &self.matrix);
        coords.remove(0);
        StateCoefficients {
            n: self.n,
            coeffs: coords,
        }
    }

    pub fn purity(&self) -> f64 {
        crate::linalg::trace_product(&self.matrix, &self.matrix)
    }
}

/// Traceless Pauli coefficients `s_P = Tr(ρ P̂)`, indexed by basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateCoefficients {
    n: usize,
    coeffs: Vec<f64>,
}

impl StateCoefficients {
    pub fn zeros(n: usize) -> Self {
        StateCoefficients {
            n,
            coeffs: vec![0.0; (1usize << (2 * n)) - 1],
        }
    }

    pub fn from_vec(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != (1usize << (2 * n)) - 1 {
            return Err(Error::Dimension(format!(
                "{} coefficients for {n} qubits",
                coeffs.len()
            )));
        }
        Ok(StateCoefficients { n, coeffs })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        assert!(!p.is_identity(), "identity coefficient is fixed");
        self.coeffs[p.index() - 1]
    }

    pub fn set(&mut self, p: &PauliString, value: f64) {
        assert!(!p.is_identity(), "identity coefficient is fixed");
        self.coeffs[p.index() - 1] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// `s_I = 1 / 2^{n/2}`.
    pub fn identity_coefficient(&self) -> f64 {
        (2f64).powf(-(self.n as f64) / 2.0)
    }

    /// Strings with `|s_P| > tol`, in basis order.
    pub fn support(&self, tol: f64) -> Vec<PauliString> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > tol)
            .map(|(i, _)| PauliString::from_index(self.n, i + 1))
            .collect()
    }

    /// `max_P |s_P|`.
    pub fn m_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn to_matrix(&self) -> CMatrix {
        let mut coords = Vec::with_capacity(self.coeffs.len() + 1);
        coords.push(self.identity_coefficient());
        coords.extend_from_slice(&self.coeffs);
        from_pauli_coords(self.n, &coords)
    }
}

pub fn m_norm(s: &StateCoefficients) -> f64 {
    s.m_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn running_example_coefficients() {
        let rho = DensityMatrix::basis_state("01").unwrap();
        let s = rho.to_coefficients();
        let get = |l: &str| s.get(&PauliString::from_label(l).unwrap());
        assert!((get("ZI") - 0.5).abs() < 1e-14);
        assert!((get("IZ") + 0.5).abs() < 1e-14);
        assert!((get("ZZ") + 0.5).abs() < 1e-14);
        assert_eq!(s.support(1e-12).len(), 3);
        assert!((s.m_norm() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_has_no_coefficients() {
        let s = DensityMatrix::maximally_mixed(3).unwrap().to_coefficients();
        assert!(s.m_norm() < 1e-15);
    }

    #[test]
    fn coefficient_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let rho = DensityMatrix::random_mixed(3, 0.7, &mut rng).unwrap();
            let back = DensityMatrix::from_coefficients(&rho.to_coefficients()).unwrap();
            assert!((back.matrix() - rho.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_states() {
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(1, m), Err(Error::InvalidState(_))));
        assert!(DensityMatrix::basis_state("0a").is_err());
    }
}

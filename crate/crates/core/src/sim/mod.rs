//! Ground truth: states, noise, exact distributions, the gauge family and
//! finite-shot sampling.

mod noise;
mod shots;
mod state;

pub use noise::{apply_noise, u_norm, NoiseMatrix, NOISE_TOL};
pub use shots::{multinomial, sample_shots, RngStream, ShotRecord};
pub use state::{m_norm, DensityMatrix, StateCoefficients, STATE_PSD_TOL, STATE_TRACE_TOL};

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, CMatrix, RMatrix, C64};
use crate::pauli::Circuit;
use crate::povm::Povm;

/// Anything that returns the noisy outcome distribution of a circuit.
pub trait NoisyOracle: Sync {
    fn num_outcomes(&self) -> usize;
    fn noisy_distribution(&self, circuit: &Circuit) -> Result<Arc<Vec<f64>>>;
}

/// `y_k(U) = Tr(U ρ U† M_k)`.
pub fn ideal_distribution(rho: &DensityMatrix, u: &Circuit, povm: &Povm) -> Result<Vec<f64>> {
    check_sizes(rho, povm)?;
    if u.num_qubits() != rho.num_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit circuit on a {}-qubit state",
            u.num_qubits(),
            rho.num_qubits()
        )));
    }
    let rotated = u.conjugate_matrix(rho.matrix())?;
    Ok(povm.probabilities(&rotated))
}

/// Same as [`ideal_distribution`] for an arbitrary dense unitary.
pub fn ideal_distribution_dense(rho: &DensityMatrix, u: &CMatrix, povm: &Povm) -> Result<Vec<f64>> {
    check_sizes(rho, povm)?;
    if u.nrows() != rho.matrix().nrows() {
        return Err(Error::Dimension("unitary size".into()));
    }
    Ok(povm.probabilities(&(u * rho.matrix() * u.adjoint())))
}

fn check_sizes(rho: &DensityMatrix, povm: &Povm) -> Result<()> {
    if rho.num_qubits() != povm.num_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit state with a {}-qubit POVM",
            rho.num_qubits(),
            povm.num_qubits()
        )));
    }
    Ok(())
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let dim = 1usize << n;
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    }));
    q * phases
}

/// `d_k = Σ_j A_kj m_{jI} / 2^{n/2}`, the gauge-invariant offset column.
pub fn gauge_offset(a: &RMatrix, povm: &Povm) -> Vec<f64> {
    let scale = (2f64).powf(-(povm.num_qubits() as f64) / 2.0);
    let mi = povm.m_identity();
    (0..a.nrows())
        .map(|k| (0..a.ncols()).map(|j| a[(k, j)] * mi[j] * scale).sum())
        .collect()
}

/// Physicality margins of a gauge candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    /// Smallest eigenvalue of the state candidate.
    pub min_eigenvalue: f64,
    /// Smallest entry of the noise candidate.
    pub min_entry: f64,
    /// Largest entry of the noise candidate.
    pub max_entry: f64,
    /// Largest deviation of a column sum from 1.
    pub column_sum_defect: f64,
}

impl Validity {
    pub fn of(rho: &CMatrix, a: &RMatrix) -> Self {
        let column_sum_defect = a
            .column_iter()
            .map(|c| (c.sum() - 1.0).abs())
            .fold(0.0, f64::max);
        Validity {
            min_eigenvalue: min_eigenvalue(rho),
            min_entry: a.min(),
            max_entry: a.max(),
            column_sum_defect,
        }
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.min_eigenvalue >= -tol
            && self.min_entry >= -tol
            && self.max_entry <= 1.0 + tol
            && self.column_sum_defect <= tol
    }
}

/// A point on the gauge orbit, not necessarily physical.
#[derive(Debug, Clone)]
pub struct GaugeCandidate {
    pub rho: CMatrix,
    pub noise: RMatrix,
    pub validity: Validity,
}

/// `A' = αA + (1-α) d 1ᵀ`, `ρ' = ρ/α + (1 - 1/α) I / 2^n`.
pub fn gauge_transform(
    rho: &CMatrix,
    a: &RMatrix,
    alpha: f64,
    povm: &Povm,
) -> Result<GaugeCandidate> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::Domain(format!("gauge parameter {alpha}")));
    }
    let dim = rho.nrows();
    if dim != 1 << povm.num_qubits() || a.nrows() != povm.num_outcomes() {
        return Err(Error::Dimension("gauge transform operands".into()));
    }
    let d = gauge_offset(a, povm);
    let noise = RMatrix::from_fn(a.nrows(), a.ncols(), |k, j| {
        alpha * a[(k, j)] + (1.0 - alpha) * d[k]
    });
    let rho_t = rho * C64::new(1.0 / alpha, 0.0)
        + CMatrix::identity(dim, dim) * C64::new((1.0 - 1.0 / alpha) / dim as f64, 0.0);
    let validity = Validity::of(&rho_t, &noise);
    Ok(GaugeCandidate {
        rho: rho_t,
        noise,
        validity,
    })
}

/// Simulated device with exact noisy distributions, memoized per circuit.
pub struct SimulatedDevice {
    rho: DensityMatrix,
    noise: NoiseMatrix,
    povm: Povm,
    cache: RwLock<HashMap<Circuit, Arc<Vec<f64>>>>,
}

impl SimulatedDevice {
    pub fn new(rho: DensityMatrix, noise: NoiseMatrix, povm: Povm) -> Result<Self> {
        check_sizes(&rho, &povm)?;
        if noise.dim() != povm.num_outcomes() {
            return Err(Error::Dimension(format!(
                "{}-outcome noise with a {}-outcome POVM",
                noise.dim(),
                povm.num_outcomes()
            )));
        }
        Ok(SimulatedDevice {
            rho,
            noise,
            povm,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn noise(&self) -> &NoiseMatrix {
        &self.noise
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn num_qubits(&self) -> usize {
        self.rho.num_qubits()
    }
}

impl NoisyOracle for SimulatedDevice {
    fn num_outcomes(&self) -> usize {
        self.povm.num_outcomes()
    }

    fn noisy_distribution(&self, circuit: &Circuit) -> Result<Arc<Vec<f64>>> {
        if let Some(hit) = self.cache.read().expect("cache lock").get(circuit) {
            return Ok(hit.clone());
        }
        let y = ideal_distribution(&self.rho, circuit, &self.povm)?;
        let noisy = Arc::new(apply_noise(&y, &self.noise)?);
        self.cache
            .write()
            .expect("cache lock")
            .insert(circuit.clone(), noisy.clone());
        Ok(noisy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Gate;
    use crate::povm::computational_povm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_state_distributions() {
        let povm = computational_povm(2).unwrap();
        let rho = DensityMatrix::basis_state("01").unwrap();
        let y = ideal_distribution(&rho, &Circuit::identity(2), &povm).unwrap();
        assert_eq!(y, vec![0.0, 1.0, 0.0, 0.0]);
        let flip = Circuit::from_gates(2, vec![Gate::X(0)]).unwrap();
        let y = ideal_distribution(&rho, &flip, &povm).unwrap();
        assert!((y[3] - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let h = Circuit::from_gates(2, vec![Gate::H(1), Gate::Cnot(1, 0)]).unwrap();
        for v in ideal_distribution(&mixed, &h, &povm).unwrap() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(3, &mut rng);
        assert!((&u * u.adjoint() - CMatrix::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn gauge_transform_identity_and_running_example() {
        let povm = computational_povm(2).unwrap();
        let rho = DensityMatrix::basis_state("01").unwrap();
        let a = NoiseMatrix::tensor_flip(&[0.1, 0.1]).unwrap();
        let same = gauge_transform(rho.matrix(), a.matrix(), 1.0, &povm).unwrap();
        assert!((same.noise.clone() - a.matrix()).abs().max() < 1e-15);
        assert!((same.rho - rho.matrix()).norm() < 1e-15);
        let half = gauge_transform(rho.matrix(), a.matrix(), 0.5, &povm).unwrap();
        assert!((half.noise[(0, 0)] - 0.53).abs() < 1e-12);
        assert!((half.noise[(0, 1)] - 0.17).abs() < 1e-12);
        assert!((half.noise[(0, 3)] - 0.13).abs() < 1e-12);
        assert!(!half.validity.is_physical(1e-9));
        assert!(gauge_transform(rho.matrix(), a.matrix(), 0.0, &povm).is_err());
    }

    #[test]
    fn device_caches_distributions() {
        let povm = computational_povm(1).unwrap();
        let dev = SimulatedDevice::new(
            DensityMatrix::basis_state("0").unwrap(),
            NoiseMatrix::tensor_flip(&[0.2]).unwrap(),
            povm,
        )
        .unwrap();
        let c = Circuit::from_gates(1, vec![Gate::X(0)]).unwrap();
        let a = dev.noisy_distribution(&c).unwrap();
        let b = dev.noisy_distribution(&c).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!((a[1] - 0.8).abs() < 1e-15);
    }
}

#![allow(dead_code)]

use rand::Rng;
use spamtomo::linalg::CMatrix;
use spamtomo::{DensityMatrix, NoiseMatrix, PauliString, Povm, StateCoefficients};

/// Random state with `‖ρ‖_m >= floor`.
pub fn random_state<R: Rng>(n: usize, floor: f64, rng: &mut R) -> DensityMatrix {
    loop {
        let w = rng.random_range(0.4..=1.0);
        let rho = DensityMatrix::random_mixed(n, w, rng).unwrap();
        if rho.to_coefficients().m_norm() >= floor {
            return rho;
        }
    }
}

/// Random noise with `‖A‖_u >= floor`.
pub fn random_noise<R: Rng>(d: usize, floor: f64, rng: &mut R) -> NoiseMatrix {
    NoiseMatrix::random_with_floor(d, floor, rng).unwrap()
}

pub fn true_support(s: &StateCoefficients) -> Vec<PauliString> {
    s.support(1e-9)
}

/// `U ρ U†` measured by `povm`, then pushed through `a`.
pub fn noisy_probabilities(rho: &CMatrix, a: &spamtomo::linalg::RMatrix, u: &CMatrix, povm: &Povm) -> Vec<f64> {
    let y = povm.probabilities(&(u * rho * u.adjoint()));
    (0..a.nrows())
        .map(|k| (0..a.ncols()).map(|j| a[(k, j)] * y[j]).sum())
        .collect()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn max_diff_c(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

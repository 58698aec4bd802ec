use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::decoder::compute_z;
use crate::eliminators::{EliminatorSpec, PlanCache};
use crate::error::{Error, Result};
use crate::linalg::{column_space, numerical_rank, RMatrix};
use crate::pauli::{enumerate_basis, BasisFamily, PauliString};
use crate::povm::{Povm, RANK_TOL};
use crate::sim::{NoisyOracle, StateCoefficients};

/// Known value of `Σ_P b_P s_P`, with `b` indexed like the traceless basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePrior {
    pub weights: Vec<f64>,
    pub value: f64,
}

/// Known action `A c = d` of the noise matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePrior {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPriorSolution {
    pub coefficients: StateCoefficients,
    #[serde(with = "crate::linalg::serde_rows")]
    pub noise: RMatrix,
}

/// Orthonormal basis of the complement of the rows of `vectors` in `R^dim`.
fn complement(vectors: &[&[f64]], dim: usize) -> Result<Vec<Vec<f64>>> {
    if vectors.is_empty() {
        return Ok((0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect());
    }
    let b = RMatrix::from_fn(vectors.len(), dim, |r, c| vectors[r][c]);
    if numerical_rank(&b, RANK_TOL) < vectors.len() {
        return Err(Error::InsufficientPrior("prior vectors are linearly dependent".into()));
    }
    let gram = &b * b.transpose();
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::InsufficientPrior("singular prior Gram matrix".into()))?;
    let proj = RMatrix::identity(dim, dim) - b.transpose() * inv * &b;
    let basis = column_space(&proj, RANK_TOL);
    Ok(basis
        .column_iter()
        .map(|c| c.iter().copied().collect())
        .collect())
}

/// Deviations `z^{PQ} - z^I` for every traceless `P` and Z-string `Q ≠ I`.
struct Deviations {
    z_identity: Vec<f64>,
    /// `[P.index() - 1][slot of Q]`.
    table: Vec<Vec<Vec<f64>>>,
    z_strings: Vec<PauliString>,
    scale: f64,
}

impl Deviations {
    fn new<O: NoisyOracle + ?Sized>(oracle: &O, n: usize) -> Result<Self> {
        let plans = PlanCache::computational(n);
        let z_identity = compute_z(oracle, &*plans.get(&EliminatorSpec::Identity)?)?;
        let z_strings: Vec<PauliString> = enumerate_basis(n, BasisFamily::ZStrings)
            .into_iter()
            .skip(1)
            .collect();
        let table = enumerate_basis(n, BasisFamily::TracelessPauli)
            .iter()
            .map(|p| {
                z_strings
                    .iter()
                    .map(|q| {
                        let z = compute_z(oracle, &*plans.get(&EliminatorSpec::PauliMap { p: *p, q: *q })?)?;
                        Ok(z.iter().zip(&z_identity).map(|(a, b)| a - b).collect())
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Deviations {
            z_identity,
            table,
            z_strings,
            scale: (2f64).powf(-(n as f64) / 2.0),
        })
    }

    /// Traceless part of `b̃` with `Σ_Q b̃_Q m_kQ = b_k`.
    fn tilde(&self, b: &[f64]) -> Vec<f64> {
        self.z_strings
            .iter()
            .map(|q| {
                b.iter()
                    .enumerate()
                    .map(|(k, v)| q.diagonal_sign(k).expect("Z-string") * v * self.scale)
                    .sum()
            })
            .collect()
    }

    /// `z^{ij}_k - z^I_k` for the operator `P̂ ↦ b_S,P Σ_Q b̃_Q Q̂`.
    fn measure(&self, b_state: &[f64], b_noise: &[f64]) -> Vec<f64> {
        let tilde = self.tilde(b_noise);
        let mut out = vec![0.0; self.z_identity.len()];
        for (p, row) in self.table.iter().enumerate() {
            if b_state[p] == 0.0 {
                continue;
            }
            for (slot, dev) in row.iter().enumerate() {
                let w = b_state[p] * tilde[slot];
                for (acc, v) in out.iter_mut().zip(dev) {
                    *acc += w * v;
                }
            }
        }
        out
    }
}

/// Full tomography of `(ρ, A)` from linear priors on the state coefficients
/// and on the action of the noise, for computational-basis readout.
pub fn decode_linear_prior<O: NoisyOracle + ?Sized>(
    oracle: &O,
    povm: &Povm,
    state_priors: &[StatePrior],
    noise_priors: &[NoisePrior],
    tol: f64,
) -> Result<LinearPriorSolution> {
    if !povm.is_computational() {
        return Err(Error::Domain("linear priors require computational readout".into()));
    }
    let n = povm.num_qubits();
    let d = povm.num_outcomes();
    let size = (1usize << (2 * n)) - 1;
    if state_priors.iter().any(|s| s.weights.len() != size)
        || noise_priors
            .iter()
            .any(|p| p.input.len() != d || p.output.len() != d)
    {
        return Err(Error::Dimension("prior vector length".into()));
    }
    let gauge = state_priors
        .iter()
        .find(|s| s.value.abs() > tol)
        .ok_or_else(|| {
            Error::InsufficientPrior("no state prior with a nonzero value fixes the gauge".into())
        })?;
    let state_vectors: Vec<&[f64]> = state_priors.iter().map(|s| s.weights.as_slice()).collect();
    let noise_vectors: Vec<&[f64]> = noise_priors.iter().map(|p| p.input.as_slice()).collect();
    let state_rest = complement(&state_vectors, size)?;
    let noise_rest = complement(&noise_vectors, d)?;
    let dev = Deviations::new(oracle, n)?;
    let zi = &dev.z_identity;

    // Rows of the per-row system: complement vectors (measured) then priors.
    let mut system = RMatrix::zeros(d, d);
    let mut rhs = RMatrix::zeros(d, d);
    for (j, b) in noise_rest.iter().enumerate() {
        let w = dev.measure(&gauge.weights, b);
        let total: f64 = b.iter().sum();
        for kp in 0..d {
            system[(j, kp)] = b[kp];
        }
        for k in 0..d {
            rhs[(j, k)] = w[k] / gauge.value + total * zi[k];
        }
    }
    for (j, prior) in noise_priors.iter().enumerate() {
        let r = noise_rest.len() + j;
        for kp in 0..d {
            system[(r, kp)] = prior.input[kp];
            rhs[(r, kp)] = prior.output[kp];
        }
    }
    let lu = system.clone().lu();
    let a_t = lu
        .solve(&rhs)
        .ok_or_else(|| Error::InsufficientPrior("noise system is singular".into()))?;
    let noise = a_t.transpose();

    let mut candidates: Vec<Vec<f64>> = noise_rest.clone();
    candidates.extend(noise_priors.iter().map(|p| p.input.clone()));
    let mut best: Option<(usize, usize, f64)> = None;
    for (c, b) in candidates.iter().enumerate() {
        let ab = &noise * DVector::from_column_slice(b);
        let total: f64 = b.iter().sum();
        for k in 0..d {
            let v = ab[k] - total * zi[k];
            if best.is_none_or(|(_, _, bv)| v.abs() > bv.abs()) {
                best = Some((c, k, v));
            }
        }
    }
    let (c, k, w) = best.ok_or(Error::EmptySupport)?;
    if w.abs() <= tol {
        return Err(Error::Condition {
            number: 1,
            detail: "noise acts as an erasure channel on every probe vector".into(),
        });
    }
    let mut s_system = RMatrix::zeros(size, size);
    let mut s_rhs = DVector::zeros(size);
    for (i, b) in state_rest.iter().enumerate() {
        let z = dev.measure(b, &candidates[c]);
        for p in 0..size {
            s_system[(i, p)] = b[p];
        }
        s_rhs[i] = z[k] / w;
    }
    for (i, prior) in state_priors.iter().enumerate() {
        let r = state_rest.len() + i;
        for p in 0..size {
            s_system[(r, p)] = prior.weights[p];
        }
        s_rhs[r] = prior.value;
    }
    let s = s_system
        .lu()
        .solve(&s_rhs)
        .ok_or_else(|| Error::InsufficientPrior("state system is singular".into()))?;
    Ok(LinearPriorSolution {
        coefficients: StateCoefficients::from_vec(n, s.iter().copied().collect())?,
        noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::povm::computational_povm;
    use crate::sim::{DensityMatrix, NoiseMatrix, SimulatedDevice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_state_prior_on_a_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = DensityMatrix::random_mixed(1, 0.3, &mut rng).unwrap();
        let a = NoiseMatrix::random(2, 0.4, &mut rng).unwrap();
        let povm = computational_povm(1).unwrap();
        let s = rho.to_coefficients();
        let z = PauliString::from_label("Z").unwrap();
        let mut weights = vec![0.0; 3];
        weights[z.index() - 1] = 1.0;
        let prior = StatePrior {
            weights,
            value: s.get(&z),
        };
        let dev = SimulatedDevice::new(rho, a.clone(), povm.clone()).unwrap();
        let sol = decode_linear_prior(&dev, &povm, &[prior], &[], 1e-9).unwrap();
        assert!(max_abs_diff(&sol.noise, a.matrix()) < 1e-8);
        for (x, y) in sol.coefficients.as_slice().iter().zip(s.as_slice()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn no_priors_is_insufficient() {
        let povm = computational_povm(1).unwrap();
        let dev = SimulatedDevice::new(
            DensityMatrix::basis_state("0").unwrap(),
            NoiseMatrix::identity(2),
            povm.clone(),
        )
        .unwrap();
        assert!(matches!(
            decode_linear_prior(&dev, &povm, &[], &[], 1e-9),
            Err(Error::InsufficientPrior(_))
        ));
    }
}

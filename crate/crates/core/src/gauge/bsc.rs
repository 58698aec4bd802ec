use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{enumerate_basis, BasisFamily, Circuit, Gate, PauliString};
use crate::sim::{NoiseMatrix, NoisyOracle, StateCoefficients};

/// Below this `|1 - 2p|` a flip probability is treated as `1/2`.
pub const NEAR_SYMMETRIC_TOL: f64 = 1e-6;

/// Independent bit flips with probabilities `p_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BscModel {
    pub flips: Vec<f64>,
}

impl BscModel {
    /// `λ_S = Π_{i ∈ S} (1 - 2 p_i)`.
    pub fn eigenvalue(&self, qubits: &[usize]) -> f64 {
        qubits.iter().map(|&i| 1.0 - 2.0 * self.flips[i]).product()
    }

    pub fn noise_matrix(&self) -> Result<NoiseMatrix> {
        NoiseMatrix::tensor_flip(&self.flips)
    }
}

/// Diagonal state coefficients and flip probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BscSolution {
    /// `s_P` for every non-identity Z-string.
    pub coefficients: BTreeMap<PauliString, f64>,
    pub model: BscModel,
}

impl BscSolution {
    /// Coefficients embedded in the full basis, zero off the Z-strings.
    pub fn state_coefficients(&self, n: usize) -> StateCoefficients {
        let mut s = StateCoefficients::zeros(n);
        for (p, v) in &self.coefficients {
            s.set(p, *v);
        }
        s
    }
}

struct Contractor<'a, O: NoisyOracle + ?Sized> {
    oracle: &'a O,
    n: usize,
}

impl<O: NoisyOracle + ?Sized> Contractor<'_, O> {
    /// `m_Pᵀ ỹ(U) / 2^{n/2} = λ_{S_P} s_{U†PU}`.
    fn contract(&self, p: &PauliString, gates: Vec<Gate>) -> Result<f64> {
        let u = Circuit::from_gates(self.n, gates)?;
        let y = self.oracle.noisy_distribution(&u)?;
        let mut acc = 0.0;
        for (l, v) in y.iter().enumerate() {
            acc += p.diagonal_sign(l).expect("Z-string") * v;
        }
        Ok(acc * (2f64).powf(-(self.n as f64) / 2.0))
    }
}

fn z_on(n: usize, qubits: &[usize]) -> PauliString {
    let mut label = vec!['I'; n];
    for &q in qubits {
        label[q] = 'Z';
    }
    PauliString::from_label(&label.iter().collect::<String>()).expect("valid label")
}

/// Decodes diagonal state coefficients and bit-flip probabilities from exact
/// noisy distributions using identity, CNOT and SWAP circuits.
pub fn decode_bsc<O: NoisyOracle + ?Sized>(oracle: &O, n: usize, tol: f64) -> Result<BscSolution> {
    if n < 2 {
        return Err(Error::Domain("binary symmetric decoding needs two qubits".into()));
    }
    if oracle.num_outcomes() != 1 << n {
        return Err(Error::Dimension("readout is not computational".into()));
    }
    let c = Contractor { oracle, n };
    let mut lambda: Vec<Option<f64>> = vec![None; n];
    let mut coefficients = BTreeMap::new();
    let mut support = Vec::new();
    for p in enumerate_basis(n, BasisFamily::ZStrings).iter().skip(1) {
        let v = c.contract(p, vec![])?;
        coefficients.insert(*p, 0.0);
        if v.abs() > tol {
            support.push((*p, v));
        }
    }
    let first = *support.first().ok_or(Error::EmptySupport)?;
    for &(p, base) in &support {
        let s: Vec<usize> = p.support();
        let value = if let [i] = s[..] {
            let j = if i == 0 { 1 } else { 0 };
            let swapped = c.contract(&z_on(n, &[j]), vec![Gate::Swap(i, j)])?;
            let joint = c.contract(&z_on(n, &[i, j]), vec![Gate::Cnot(j, i)])?;
            let sp = base * swapped / joint;
            lambda[i].get_or_insert(base / sp);
            lambda[j].get_or_insert(swapped / sp);
            sp
        } else {
            let mut product = 1.0;
            for (pos, &j) in s.iter().enumerate() {
                let i = s[if pos == 0 { 1 } else { 0 }];
                let rest: Vec<usize> = s.iter().copied().filter(|&q| q != j).collect();
                let reduced = c.contract(&z_on(n, &rest), vec![Gate::Cnot(j, i)])?;
                let l = base / reduced;
                lambda[j].get_or_insert(l);
                product *= l;
            }
            base / product
        };
        coefficients.insert(p, value);
    }
    let (p, base) = first;
    let s = p.support();
    for q in 0..n {
        if lambda[q].is_some() {
            continue;
        }
        let mut joint = s.clone();
        joint.push(q);
        let extended = c.contract(&z_on(n, &joint), vec![Gate::Cnot(q, s[0])])?;
        lambda[q] = Some(extended / base);
    }
    let mut flips = Vec::with_capacity(n);
    for (q, l) in lambda.into_iter().enumerate() {
        let l = l.expect("every qubit assigned");
        if l.abs() < NEAR_SYMMETRIC_TOL {
            return Err(Error::NearSymmetric { qubit: q });
        }
        flips.push((1.0 - l) / 2.0);
    }
    Ok(BscSolution {
        coefficients,
        model: BscModel { flips },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::computational_povm;
    use crate::sim::{DensityMatrix, SimulatedDevice};

    fn label(s: &str) -> PauliString {
        PauliString::from_label(s).unwrap()
    }

    #[test]
    fn running_example_flips() {
        let dev = SimulatedDevice::new(
            DensityMatrix::basis_state("01").unwrap(),
            NoiseMatrix::tensor_flip(&[0.1, 0.1]).unwrap(),
            computational_povm(2).unwrap(),
        )
        .unwrap();
        let sol = decode_bsc(&dev, 2, 1e-9).unwrap();
        assert!((sol.coefficients[&label("ZI")] - 0.5).abs() < 1e-10);
        assert!((sol.coefficients[&label("IZ")] + 0.5).abs() < 1e-10);
        assert!((sol.coefficients[&label("ZZ")] + 0.5).abs() < 1e-10);
        for p in &sol.model.flips {
            assert!((p - 0.1).abs() < 1e-10);
        }
        assert!((sol.model.eigenvalue(&[0, 1]) - 0.64).abs() < 1e-10);
    }

    #[test]
    fn half_flip_is_near_symmetric() {
        let dev = SimulatedDevice::new(
            DensityMatrix::basis_state("01").unwrap(),
            NoiseMatrix::tensor_flip(&[0.5, 0.1]).unwrap(),
            computational_povm(2).unwrap(),
        )
        .unwrap();
        assert_eq!(
            decode_bsc(&dev, 2, 1e-9).unwrap_err(),
            Error::NearSymmetric { qubit: 0 }
        );
    }
}

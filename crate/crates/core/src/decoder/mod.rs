//! Decoders recovering the state (up to a common factor) and the noise
//! matrix (up to the gauge) from exact or sampled noisy statistics.

mod exact;
mod randomized;

pub use exact::{
    check_conditions, compute_all_z, compute_z, decode_exact, find_support, recover_noise, recover_ratios,
    run_exact, select_reference, ExactOptions, Support, EXACT_TOL,
};
pub use randomized::{
    estimate_batch, estimate_z_identity, estimate_z_pi, estimate_z_pq, noise_from_estimates,
    ratios_from_estimates, run_randomized, shot_budget, support_threshold, RandomizedConfig,
    Sampler, ShotBudget, ZEstimates, SUPPORT_MARGIN,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{serde_rows, CMatrix, RMatrix};
use crate::pauli::PauliString;
use crate::povm::Povm;
use crate::sim::{gauge_transform, GaugeCandidate, StateCoefficients};

/// Margin by which a candidate must exceed the incumbent to replace it, so
/// that rounding-level ties resolve to the first candidate in order.
pub const TIE_MARGIN: f64 = 1e-12;

/// Read access shared by exact z-values and their finite-shot estimates.
pub trait ZTable {
    fn num_qubits(&self) -> usize;
    fn num_outcomes(&self) -> usize;
    /// `z^I_k`.
    fn z_identity(&self) -> &[f64];
    /// `z^{P,i}_k` over `k`, if available for `p`.
    fn z_pi(&self, p: &PauliString, i: usize) -> Option<Vec<f64>>;
    /// Strings for which `z^{P,i}` is available, in basis order.
    fn paulis(&self) -> Vec<PauliString>;

    /// `z^{P,i}_k - z^I_k`.
    fn deviation(&self, p: &PauliString, i: usize) -> Option<Vec<f64>> {
        let zi = self.z_identity();
        self.z_pi(p, i)
            .map(|z| z.iter().zip(zi).map(|(a, b)| a - b).collect())
    }

    /// `(i, k, |z^{P,i}_k - z^I_k|)` maximizing the deviation over `k` in `rows`.
    fn strongest(&self, p: &PauliString, rows: &[usize]) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.num_outcomes() {
            let dev = self.deviation(p, i)?;
            for &k in rows {
                let v = dev[k].abs();
                if best.is_none_or(|(_, _, b)| v > b + TIE_MARGIN) {
                    best = Some((i, k, v));
                }
            }
        }
        best
    }
}

/// Whether z-values are exact or sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Estimated,
}

/// Exact `z^I` and `z^{P,i}` for every traceless `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZValues {
    n: usize,
    d: usize,
    z_identity: Vec<f64>,
    /// Indexed `[P.index() - 1][i][k]`.
    z_pi: Vec<Vec<Vec<f64>>>,
}

impl ZValues {
    pub fn new(n: usize, z_identity: Vec<f64>, z_pi: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let d = z_identity.len();
        if z_pi.len() != (1usize << (2 * n)) - 1
            || z_pi.iter().any(|per| per.len() != d || per.iter().any(|z| z.len() != d))
        {
            return Err(Error::Dimension("z-value table shape".into()));
        }
        Ok(ZValues {
            n,
            d,
            z_identity,
            z_pi,
        })
    }

    pub fn provenance(&self) -> Provenance {
        Provenance::Exact
    }
}

impl ZTable for ZValues {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn num_outcomes(&self) -> usize {
        self.d
    }

    fn z_identity(&self) -> &[f64] {
        &self.z_identity
    }

    fn z_pi(&self, p: &PauliString, i: usize) -> Option<Vec<f64>> {
        if p.is_identity() || p.num_qubits() != self.n {
            return None;
        }
        self.z_pi.get(p.index() - 1)?.get(i).cloned()
    }

    fn paulis(&self) -> Vec<PauliString> {
        (1..=self.z_pi.len())
            .map(|idx| PauliString::from_index(self.n, idx))
            .collect()
    }
}

/// Outcome/row pair `(i, k)` at which ratios are read off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pivot {
    pub i: usize,
    pub k: usize,
}

/// Shot accounting for the finite-shot decoder.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotUsage {
    pub support: u64,
    pub noise: u64,
    pub pivot: u64,
    pub ratios: u64,
}

impl ShotUsage {
    pub fn total(&self) -> u64 {
        self.support + self.noise + self.pivot + self.ratios
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Number of rows `k` with `z^I_k` nonzero.
    pub active_rows: usize,
    /// Residual of the stacked noise solve (zero for the direct transcription).
    pub noise_residual: f64,
    pub shots: Option<ShotUsage>,
    /// Standard errors of the estimated ratios.
    pub ratio_std_errors: BTreeMap<PauliString, f64>,
}

/// State ratios `s_P / s_R` on the support and the noise matrix `A'(s_R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub n: usize,
    pub support: Vec<PauliString>,
    pub reference: PauliString,
    pub pivot: Pivot,
    pub ratios: BTreeMap<PauliString, f64>,
    #[serde(with = "serde_rows")]
    pub noise: RMatrix,
    /// Gauge value `s_R`, once fixed.
    pub alpha: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl TomographyResult {
    pub fn ratio(&self, p: &PauliString) -> Option<f64> {
        self.ratios.get(p).copied()
    }

    /// Coefficients `s_P / s_R`, zero off the support.
    pub fn ratio_coefficients(&self) -> StateCoefficients {
        let mut s = StateCoefficients::zeros(self.n);
        for (p, r) in &self.ratios {
            s.set(p, *r);
        }
        s
    }

    /// Point on the gauge orbit described by the result, `(ρ(s_R), A'(s_R))`.
    pub fn gauge_reference_pair(&self) -> (CMatrix, RMatrix) {
        (self.ratio_coefficients().to_matrix(), self.noise.clone())
    }

    /// Undoes the gauge: the pair the result describes if `s_R = alpha`.
    pub fn reconstruct(&self, alpha: f64, povm: &Povm) -> Result<GaugeCandidate> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::Domain(format!("gauge value {alpha}")));
        }
        let (rho, a) = self.gauge_reference_pair();
        gauge_transform(&rho, &a, 1.0 / alpha, povm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_table_lookups() {
        let z = ZValues::new(
            1,
            vec![0.5, 0.5],
            vec![vec![vec![0.5, 0.5]; 2], vec![vec![0.5, 0.5]; 2], vec![vec![0.9, 0.1], vec![0.1, 0.9]]],
        )
        .unwrap();
        let zp = PauliString::from_label("Z").unwrap();
        assert_eq!(z.paulis().len(), 3);
        let dev = z.deviation(&zp, 0).unwrap();
        assert!((dev[0] - 0.4).abs() < 1e-15);
        let (i, k, v) = z.strongest(&zp, &[0, 1]).unwrap();
        assert_eq!((i, k), (0, 0));
        assert!((v - 0.4).abs() < 1e-15);
        assert!(ZValues::new(1, vec![0.5, 0.5], vec![]).is_err());
    }
}

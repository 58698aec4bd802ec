//! Fixing the remaining gauge parameter from prior information.

mod block;
mod bsc;
mod linear_prior;
mod probe;
mod purity;

pub use block::fix_block_independent;
pub use bsc::{decode_bsc, BscModel, BscSolution, NEAR_SYMMETRIC_TOL};
pub use linear_prior::{decode_linear_prior, LinearPriorSolution, NoisePrior, StatePrior};
pub use probe::{fix_probe, ProbeOptions};
pub use purity::{fix_purity, fix_purity_within};


use serde::{Deserialize, Serialize};

use crate::decoder::TomographyResult;
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, CMatrix, RMatrix, C64};
use crate::povm::Povm;
use crate::sim::{DensityMatrix, NoiseMatrix, Validity};

/// Tolerance for physicality checks on gauge-fixed reconstructions.
pub const VALIDITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeMethod {
    Purity,
    Probe,
    BlockIndependent,
    Given,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaugeDiagnostics {
    /// Residual of the relation used to determine `alpha`.
    pub residual: Option<f64>,
    /// Smallest eigenvalue of the rejected sign branch.
    pub rejected_min_eigenvalue: Option<f64>,
}

/// The gauge value `alpha = s_R` and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeSolution {
    pub alpha: f64,
    pub method: GaugeMethod,
    pub diagnostics: GaugeDiagnostics,
}

impl GaugeSolution {
    pub fn given(alpha: f64) -> Self {
        GaugeSolution {
            alpha,
            method: GaugeMethod::Given,
            diagnostics: GaugeDiagnostics::default(),
        }
    }
}

/// Offset column `d 1ᵀ` shared by every point of the gauge orbit.
pub(crate) fn offset_matrix(a: &RMatrix, povm: &Povm) -> RMatrix {
    let d = crate::sim::gauge_offset(a, povm);
    RMatrix::from_fn(a.nrows(), a.ncols(), |k, _| d[k])
}

fn repair_state(n: usize, rho: &CMatrix) -> Result<DensityMatrix> {
    let dim = rho.nrows() as f64;
    let low = min_eigenvalue(rho);
    let fixed = if low < 0.0 {
        let shift = -low;
        (rho + CMatrix::identity(rho.nrows(), rho.ncols()) * C64::new(shift, 0.0))
            * C64::new(1.0 / (1.0 + dim * shift), 0.0)
    } else {
        rho.clone()
    };
    let herm = (&fixed + fixed.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(n, herm)
}

fn repair_noise(a: &RMatrix) -> Result<NoiseMatrix> {
    let mut fixed = a.map(|v| v.clamp(0.0, 1.0));
    for mut col in fixed.column_iter_mut() {
        let s = col.sum();
        if s > 0.0 {
            col /= s;
        }
    }
    NoiseMatrix::new(fixed)
}

/// Undoes the gauge with `sol.alpha`; the pair must be physical to `1e-8`.
/// Defects within tolerance are projected away.
pub fn apply_gauge_solution(
    result: &TomographyResult,
    sol: &GaugeSolution,
    povm: &Povm,
) -> Result<(DensityMatrix, NoiseMatrix)> {
    apply_gauge_solution_within(result, sol, povm, VALIDITY_TOL)
}

/// [`apply_gauge_solution`] with physicality checked to `tol`, for
/// estimated results.
pub fn apply_gauge_solution_within(
    result: &TomographyResult,
    sol: &GaugeSolution,
    povm: &Povm,
    tol: f64,
) -> Result<(DensityMatrix, NoiseMatrix)> {
    let cand = result.reconstruct(sol.alpha, povm)?;
    check_validity_within(&cand.validity, tol)?;
    Ok((repair_state(result.n, &cand.rho)?, repair_noise(&cand.noise)?))
}

fn check_validity_within(v: &Validity, tol: f64) -> Result<()> {
    if v.is_physical(tol) {
        Ok(())
    } else {
        Err(Error::GaugeInconsistent(format!(
            "min eigenvalue {:e}, entries in [{:e}, {:e}], column-sum defect {:e}",
            v.min_eigenvalue, v.min_entry, v.max_entry, v.column_sum_defect
        )))
    }
}

use super::{GaugeDiagnostics, GaugeMethod, GaugeSolution};
use crate::decoder::TomographyResult;
use crate::error::{Error, Result};
use crate::pauli::Circuit;
use crate::povm::Povm;
use crate::sim::{gauge_offset, ideal_distribution, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    /// Largest accepted residual per outcome; the bound is `tol · D`.
    pub residual_tol: f64,
    /// Below this norm of `A'y - d` the probe carries no gauge information.
    pub signal_tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            residual_tol: 1e-6,
            signal_tol: 1e-9,
        }
    }
}

/// Solves `ỹ - d = (1/alpha)(A' y - d)` in least squares over all outcomes,
/// where `y` is the ideal distribution of the known probe and `ỹ` its
/// measured distribution.
pub fn fix_probe(
    result: &TomographyResult,
    probe: &DensityMatrix,
    measured: &[f64],
    povm: &Povm,
    options: &ProbeOptions,
) -> Result<GaugeSolution> {
    let d_out = povm.num_outcomes();
    if measured.len() != d_out || result.noise.nrows() != d_out {
        return Err(Error::Dimension("probe distribution length".into()));
    }
    let y = ideal_distribution(probe, &Circuit::identity(probe.num_qubits()), povm)?;
    let d = gauge_offset(&result.noise, povm);
    let v: Vec<f64> = (0..d_out)
        .map(|k| (0..d_out).map(|j| result.noise[(k, j)] * y[j]).sum::<f64>() - d[k])
        .collect();
    let w: Vec<f64> = (0..d_out).map(|k| measured[k] - d[k]).collect();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if vv.sqrt() < options.signal_tol {
        return Err(Error::UninformativeProbe);
    }
    let t = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / vv;
    let residual = v
        .iter()
        .zip(&w)
        .fold(0.0f64, |m, (a, b)| m.max((b - t * a).abs()));
    if residual > options.residual_tol * d_out as f64 {
        return Err(Error::Inconsistent { residual });
    }
    if t == 0.0 {
        return Err(Error::UninformativeProbe);
    }
    Ok(GaugeSolution {
        alpha: 1.0 / t,
        method: GaugeMethod::Probe,
        diagnostics: GaugeDiagnostics {
            residual: Some(residual),
            rejected_min_eigenvalue: None,
        },
    })
}

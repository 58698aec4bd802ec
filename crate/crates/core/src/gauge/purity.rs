use super::{GaugeDiagnostics, GaugeMethod, GaugeSolution, VALIDITY_TOL};
use crate::decoder::TomographyResult;
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;
use crate::povm::Povm;

/// `alpha² = (ν - 2^{-n}) / Σ_P (s_P/s_R)²`; the sign is the branch whose
/// state is positive semidefinite.
pub fn fix_purity(result: &TomographyResult, nu: f64, povm: &Povm) -> Result<GaugeSolution> {
    fix_purity_within(result, nu, povm, VALIDITY_TOL)
}

/// [`fix_purity`] accepting a branch whose smallest eigenvalue is at least
/// `-tol`, for estimated ratios.
pub fn fix_purity_within(
    result: &TomographyResult,
    nu: f64,
    povm: &Povm,
    tol: f64,
) -> Result<GaugeSolution> {
    let min = (2f64).powi(-(result.n as i32));
    if !(nu > min && nu <= 1.0 + 1e-12) {
        return Err(Error::Purity { nu, min });
    }
    let norm: f64 = result.ratios.values().map(|r| r * r).sum();
    if norm <= 0.0 {
        return Err(Error::EmptySupport);
    }
    let magnitude = ((nu - min) / norm).sqrt();
    let branch = |alpha: f64| -> Result<f64> {
        Ok(min_eigenvalue(&result.reconstruct(alpha, povm)?.rho))
    };
    let plus = branch(magnitude)?;
    let minus = branch(-magnitude)?;
    let (alpha, rejected) = match (plus >= -tol, minus >= -tol) {
        (true, true) => return Err(Error::AmbiguousSign),
        (true, false) => (magnitude, minus),
        (false, true) => (-magnitude, plus),
        (false, false) => {
            return Err(Error::GaugeInconsistent(format!(
                "both purity branches are non-positive (min eigenvalues {plus:e}, {minus:e})"
            )))
        }
    };
    Ok(GaugeSolution {
        alpha,
        method: GaugeMethod::Purity,
        diagnostics: GaugeDiagnostics {
            residual: None,
            rejected_min_eigenvalue: Some(rejected),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{run_exact, ExactOptions};
    use crate::pauli::PauliString;
    use crate::povm::computational_povm;
    use crate::sim::{DensityMatrix, NoiseMatrix};

    #[test]
    fn basis_state_sign_is_resolved() {
        let povm = computational_povm(2).unwrap();
        let rho = DensityMatrix::basis_state("01").unwrap();
        let a = NoiseMatrix::tensor_flip(&[0.1, 0.1]).unwrap();
        let opts = ExactOptions {
            reference: Some(PauliString::from_label("ZI").unwrap()),
            ..ExactOptions::default()
        };
        let result = run_exact(&rho, &a, &povm, &opts).unwrap();
        let sol = fix_purity(&result, 1.0, &povm).unwrap();
        assert!((sol.alpha - 0.5).abs() < 1e-12);
        assert!(sol.diagnostics.rejected_min_eigenvalue.unwrap() < -1e-3);
    }

    #[test]
    fn maximally_mixed_purity_is_rejected() {
        let povm = computational_povm(2).unwrap();
        let rho = DensityMatrix::basis_state("01").unwrap();
        let a = NoiseMatrix::tensor_flip(&[0.1, 0.1]).unwrap();
        let result = run_exact(&rho, &a, &povm, &ExactOptions::default()).unwrap();
        assert!(matches!(
            fix_purity(&result, 0.25, &povm),
            Err(Error::Purity { .. })
        ));
    }
}

use super::{offset_matrix, GaugeDiagnostics, GaugeMethod, GaugeSolution};
use crate::decoder::TomographyResult;
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::povm::Povm;

const DEGENERATE_TOL: f64 = 1e-9;
const FACTOR_TOL: f64 = 1e-6;

/// Marginal on the first tensor factor: sum over the second row index,
/// average over the second column index.
fn first_marginal(m: &RMatrix, d1: usize, d2: usize) -> RMatrix {
    RMatrix::from_fn(d1, d1, |k1, j1| {
        let mut s = 0.0;
        for k2 in 0..d2 {
            for j2 in 0..d2 {
                s += m[(k1 * d2 + k2, j1 * d2 + j2)];
            }
        }
        s / d2 as f64
    })
}

fn second_marginal(m: &RMatrix, d1: usize, d2: usize) -> RMatrix {
    RMatrix::from_fn(d2, d2, |k2, j2| {
        let mut s = 0.0;
        for k1 in 0..d1 {
            for j1 in 0..d1 {
                s += m[(k1 * d2 + k2, j1 * d2 + j2)];
            }
        }
        s / d1 as f64
    })
}

/// Gauge from `A = A¹ ⊗ A²` with factor sizes `(d1, d2)`.
///
/// With marginals `a, b` of `A'` and `g, h` of `d 1ᵀ`, the relation
/// `M² = M¹ / alpha` holds for `M¹ = (a-g)⊗(b-h)` and
/// `M² = A' - d1ᵀ - (a-g)⊗h - g⊗(b-h)`; it is read at the largest `|M¹|`.
pub fn fix_block_independent(
    result: &TomographyResult,
    partition: (usize, usize),
    povm: &Povm,
) -> Result<GaugeSolution> {
    let (d1, d2) = partition;
    let a_prime = &result.noise;
    if d1 == 0 || d2 == 0 || d1 * d2 != a_prime.nrows() {
        return Err(Error::Dimension(format!(
            "partition {d1}x{d2} does not match {} outcomes",
            a_prime.nrows()
        )));
    }
    let offset = offset_matrix(a_prime, povm);
    let a = first_marginal(a_prime, d1, d2);
    let b = second_marginal(a_prime, d1, d2);
    let g = first_marginal(&offset, d1, d2);
    let h = second_marginal(&offset, d1, d2);
    let m1 = (&a - &g).kronecker(&(&b - &h));
    let m2 = a_prime - &offset - (&a - &g).kronecker(&h) - g.kronecker(&(&b - &h));
    let (idx, peak) = m1
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, v)| {
            if v.abs() > bv {
                (i, v.abs())
            } else {
                (bi, bv)
            }
        });
    if peak < DEGENERATE_TOL {
        return Err(Error::Degenerate(
            "a tensor factor of the noise is an erasure channel".into(),
        ));
    }
    let t = m2.as_slice()[idx] / m1.as_slice()[idx];
    let full = (a_prime - &offset) * t + &offset;
    let f1 = (&a - &g) * t + &g;
    let f2 = (&b - &h) * t + &h;
    let residual = (&full - f1.kronecker(&f2)).amax();
    if residual > FACTOR_TOL {
        return Err(Error::PriorViolated(format!(
            "noise does not factor as {d1}x{d2} blocks (residual {residual:e})"
        )));
    }
    Ok(GaugeSolution {
        alpha: 1.0 / t,
        method: GaugeMethod::BlockIndependent,
        diagnostics: GaugeDiagnostics {
            residual: Some(residual),
            rejected_min_eigenvalue: None,
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
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn decode(a: &NoiseMatrix) -> (Povm, TomographyResult) {
        let povm = computational_povm(2).unwrap();
        let rho = DensityMatrix::basis_state("01").unwrap();
        let opts = ExactOptions {
            reference: Some(PauliString::from_label("ZI").unwrap()),
            ..ExactOptions::default()
        };
        let result = run_exact(&rho, a, &povm, &opts).unwrap();
        (povm, result)
    }

    #[test]
    fn product_noise_recovers_alpha() {
        let a = NoiseMatrix::tensor_flip(&[0.1, 0.1]).unwrap();
        let (povm, result) = decode(&a);
        let sol = fix_block_independent(&result, (2, 2), &povm).unwrap();
        assert!((sol.alpha - 0.5).abs() < 1e-10);
    }

    #[test]
    fn correlated_noise_violates_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = NoiseMatrix::random(4, 0.5, &mut rng).unwrap();
        let (povm, result) = decode(&a);
        assert!(matches!(
            fix_block_independent(&result, (2, 2), &povm),
            Err(Error::PriorViolated(_))
        ));
    }

    #[test]
    fn erasure_factor_is_degenerate() {
        let e = NoiseMatrix::erasure(&[0.4, 0.6]).unwrap();
        let a = e.kron(&NoiseMatrix::tensor_flip(&[0.1]).unwrap());
        let povm = computational_povm(2).unwrap();
        let rho = DensityMatrix::basis_state("01").unwrap();
        let result = run_exact(&rho, &a, &povm, &ExactOptions::default()).unwrap();
        assert!(matches!(
            fix_block_independent(&result, (2, 2), &povm),
            Err(Error::Degenerate(_))
        ));
    }
}

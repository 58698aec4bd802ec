use nalgebra::DVector;

use super::superop::{observable_basis, target_images, unitary_superoperator};
use super::{EliminatorPlan, EliminatorSpec};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, RMatrix};
use crate::pauli::{enumerate_basis, synthesize_clifford_map, BasisFamily, Circuit, PauliString};
use crate::povm::Povm;

/// Largest residual accepted from the numerical solve.
pub const GENERAL_RESIDUAL_TOL: f64 = 1e-8;

/// Largest qubit count for the numerical solve.
pub const GENERAL_LIMIT: usize = 3;

fn all_paulis(n: usize) -> Vec<PauliString> {
    (0..1usize << (2 * n))
        .map(|i| PauliString::from_index(n, i))
        .collect()
}

/// All Pauli circuits, plus `P' U_{PQ}` for every traceless `Q` when the
/// spec singles out a string `P`.
pub fn default_pool(n: usize, spec: &EliminatorSpec) -> Result<Vec<Circuit>> {
    let paulis: Vec<Circuit> = all_paulis(n).iter().map(Circuit::pauli).collect();
    let p = match spec {
        EliminatorSpec::Identity => return Ok(paulis),
        EliminatorSpec::PauliOutcome { p, .. } | EliminatorSpec::PauliMap { p, .. } => *p,
    };
    let mut pool = paulis.clone();
    for q in enumerate_basis(n, BasisFamily::TracelessPauli) {
        if q == p {
            continue;
        }
        let u = synthesize_clifford_map(&p, &q)?;
        pool.extend(paulis.iter().map(|x| u.then(x)));
    }
    Ok(pool)
}

/// Least-squares affine combination of `pool` realizing `spec` on the
/// observable subspace of `povm`. Returns the plan and its residual.
pub fn general_eliminator_plan(
    povm: &Povm,
    spec: &EliminatorSpec,
    pool: &[Circuit],
) -> Result<(EliminatorPlan, f64)> {
    let n = povm.num_qubits();
    if n > GENERAL_LIMIT {
        return Err(Error::Capacity {
            n,
            limit: GENERAL_LIMIT,
        });
    }
    if pool.is_empty() {
        return Err(Error::InsufficientPool {
            residual: f64::INFINITY,
        });
    }
    if let EliminatorSpec::PauliOutcome { i, .. } = spec {
        if *i >= povm.num_outcomes() {
            return Err(Error::Domain(format!("outcome {i} out of range")));
        }
    }
    let b = observable_basis(povm);
    let size = 1usize << (2 * n);
    let project = |m: &RMatrix| -> Vec<f64> {
        let g = b.transpose() * m.columns(1, size - 1);
        g.iter().copied().collect()
    };
    let target = project(&target_images(spec, povm));
    let images: Vec<Vec<f64>> = pool
        .iter()
        .map(|u| Ok(project(&unitary_superoperator(n, u.dense_unitary()?)?)))
        .collect::<Result<_>>()?;
    let last = images.len() - 1;
    let rows = target.len();
    let a = RMatrix::from_fn(rows, last, |r, l| images[l][r] - images[last][r]);
    let rhs = DVector::from_fn(rows, |r, _| target[r] - images[last][r]);
    let (coeffs, residual) = if last == 0 {
        (DVector::zeros(0), rhs.amax())
    } else {
        least_squares(&a, &rhs)
    };
    if residual > GENERAL_RESIDUAL_TOL {
        return Err(Error::InsufficientPool { residual });
    }
    let mut terms: Vec<(f64, Circuit)> = coeffs
        .iter()
        .zip(pool)
        .map(|(c, u)| (*c, u.clone()))
        .collect();
    terms.push((1.0 - coeffs.sum(), pool[last].clone()));
    Ok((EliminatorPlan::new(n, *spec, terms), residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eliminators::verify_plan;
    use crate::povm::{computational_povm, random_povm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_pool_is_insufficient() {
        let povm = computational_povm(1).unwrap();
        let spec = EliminatorSpec::PauliOutcome {
            p: PauliString::from_label("X").unwrap(),
            i: 0,
        };
        let err = general_eliminator_plan(&povm, &spec, &[Circuit::identity(1)]).unwrap_err();
        assert!(matches!(err, Error::InsufficientPool { .. }));
    }

    #[test]
    fn random_qubit_povm_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in 2..=4 {
            let povm = random_povm(1, d, &mut rng).unwrap();
            let mut specs = vec![EliminatorSpec::Identity];
            for p in enumerate_basis(1, BasisFamily::TracelessPauli) {
                for i in 0..d {
                    specs.push(EliminatorSpec::PauliOutcome { p, i });
                }
            }
            assert_eq!(specs.len(), d * 3 + 1);
            for spec in specs {
                let pool = default_pool(1, &spec).unwrap();
                let (plan, res) = general_eliminator_plan(&povm, &spec, &pool).unwrap();
                assert!(res < GENERAL_RESIDUAL_TOL);
                assert!((plan.coefficient_sum() - 1.0).abs() < 1e-12);
                assert!(verify_plan(&plan, &povm).unwrap() < 1e-8);
            }
        }
    }
}

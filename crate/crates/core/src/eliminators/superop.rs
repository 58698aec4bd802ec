use super::{EliminatorPlan, EliminatorSpec};
use crate::error::{Error, Result};
use crate::linalg::{column_space, CMatrix, RMatrix};
use crate::pauli::pauli_coords;
use crate::povm::{Povm, RANK_TOL};

/// Largest qubit count for which `4^n x 4^n` transfer matrices are built.
pub const SUPEROP_LIMIT: usize = 4;

fn check_superop(n: usize) -> Result<()> {
    if n > SUPEROP_LIMIT {
        Err(Error::Capacity {
            n,
            limit: SUPEROP_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Transfer matrix `Φ(U)_{PQ} = Tr(P̂ U Q̂ U†)` in the normalized Pauli basis.
pub fn unitary_superoperator(n: usize, u: &CMatrix) -> Result<RMatrix> {
    check_superop(n)?;
    let size = 1usize << (2 * n);
    let mut phi = RMatrix::zeros(size, size);
    let mut basis = vec![0.0; size];
    for q in 0..size {
        basis.iter_mut().for_each(|v| *v = 0.0);
        basis[q] = 1.0;
        let qhat = crate::pauli::from_pauli_coords(n, &basis);
        let image = u * qhat * u.adjoint();
        for (p, v) in pauli_coords(n, &image).into_iter().enumerate() {
            phi[(p, q)] = v;
        }
    }
    Ok(phi)
}

/// Effective transfer matrix `Σ_l c_l Φ(U_l)`.
pub fn plan_superoperator(plan: &EliminatorPlan) -> Result<RMatrix> {
    let n = plan.num_qubits();
    check_superop(n)?;
    let size = 1usize << (2 * n);
    let mut acc = RMatrix::zeros(size, size);
    for t in plan.terms() {
        let phi = unitary_superoperator(n, t.circuit.dense_unitary()?)?;
        acc += phi * t.coefficient;
    }
    Ok(acc)
}

/// Orthonormal columns (Pauli coordinates) spanning the traceless POVM elements.
pub fn observable_basis(povm: &Povm) -> RMatrix {
    let mut coords = povm.pauli_coordinates().transpose();
    coords.row_mut(0).fill(0.0);
    column_space(&coords, RANK_TOL)
}

/// Required images of every basis operator, as columns.
pub(crate) fn target_images(spec: &EliminatorSpec, povm: &Povm) -> RMatrix {
    let n = povm.num_qubits();
    let size = 1usize << (2 * n);
    let mut t = RMatrix::zeros(size, size);
    t[(0, 0)] = 1.0;
    match spec {
        EliminatorSpec::Identity => {}
        EliminatorSpec::PauliOutcome { p, i } => {
            let coords = povm.pauli_coordinates();
            for r in 1..size {
                t[(r, p.index())] = coords[(*i, r)];
            }
        }
        EliminatorSpec::PauliMap { p, q } => t[(q.index(), p.index())] = 1.0,
    }
    t
}

/// Largest deviation of the plan from its specification on the observable
/// subspace: trace preservation, `E(Î) = Î`, and the projected images of
/// every traceless basis operator.
pub fn verify_plan(plan: &EliminatorPlan, povm: &Povm) -> Result<f64> {
    let n = plan.num_qubits();
    if povm.num_qubits() != n {
        return Err(Error::Dimension("plan and POVM sizes differ".into()));
    }
    if let EliminatorSpec::PauliOutcome { i, .. } = plan.spec() {
        if i >= povm.num_outcomes() {
            return Err(Error::Domain(format!("outcome {i} out of range")));
        }
    }
    let phi = plan_superoperator(plan)?;
    let target = target_images(&plan.spec(), povm);
    let b = observable_basis(povm);
    let mut worst = (plan.coefficient_sum() - 1.0).abs();
    for r in 0..phi.nrows() {
        worst = worst.max((phi[(r, 0)] - target[(r, 0)]).abs());
    }
    let diff = &phi - &target;
    let projected = b.transpose() * diff.columns(1, phi.ncols() - 1);
    worst = worst.max(projected.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eliminators::{plan_e_identity, plan_e_pq};
    use crate::pauli::{Circuit, Gate, PauliString};
    use crate::povm::computational_povm;

    #[test]
    fn hadamard_transfer_matrix() {
        let h = Circuit::from_gates(1, vec![Gate::H(0)]).unwrap();
        let phi = unitary_superoperator(1, h.dense_unitary().unwrap()).unwrap();
        // I -> I, X -> Z, Y -> -Y, Z -> X
        assert!((phi[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((phi[(3, 1)] - 1.0).abs() < 1e-14);
        assert!((phi[(2, 2)] + 1.0).abs() < 1e-14);
        assert!((phi[(1, 3)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_plan_verifies() {
        let povm = computational_povm(2).unwrap();
        assert!(verify_plan(&plan_e_identity(2), &povm).unwrap() < 1e-12);
    }

    #[test]
    fn perturbation_shows_in_residual() {
        let povm = computational_povm(2).unwrap();
        let p = PauliString::from_label("ZI").unwrap();
        let plan = plan_e_pq(&p, &p).unwrap().perturbed(0, 1e-3);
        let r = verify_plan(&plan, &povm).unwrap();
        assert!(r > 0.5e-3 && r < 3e-3, "{r}");
    }

    #[test]
    fn observable_basis_dimension() {
        let povm = computational_povm(2).unwrap();
        assert_eq!(observable_basis(&povm).ncols(), 3);
    }
}

use super::{EliminatorPlan, EliminatorSpec};
use crate::error::{Error, Result};
use crate::pauli::{enumerate_basis, synthesize_clifford_map, BasisFamily, Circuit, PauliString};

/// `E_I = 2^{-n} Σ_{P ∈ P_X} Φ(P)`.
pub fn plan_e_identity(n: usize) -> EliminatorPlan {
    let w = 1.0 / (1u64 << n) as f64;
    let terms = enumerate_basis(n, BasisFamily::XStrings)
        .iter()
        .map(|x| (w, Circuit::pauli(x)))
        .collect();
    EliminatorPlan::new(n, EliminatorSpec::Identity, terms)
}

/// `H_{iQ} = ⟨i|Q|i⟩ / 2^{n/2}` for a Z-string `Q`.
pub fn hadamard_coefficient(i: usize, q: &PauliString) -> Result<f64> {
    let n = q.num_qubits();
    if i >= 1 << n {
        return Err(Error::Domain(format!("outcome {i} out of range for {n} qubits")));
    }
    let sign = q
        .diagonal_sign(i)
        .ok_or_else(|| Error::Domain(format!("{q} is not a Z-string")))?;
    Ok(sign * (2f64).powf(-(n as f64) / 2.0))
}

/// `E_PQ = (2/2^n) Σ_{Q' ∈ P_X, [Q,Q']=0} Φ(Q' U_PQ)`.
pub fn plan_e_pq(p: &PauliString, q: &PauliString) -> Result<EliminatorPlan> {
    let n = p.num_qubits();
    if !q.is_z_string() || q.is_identity() {
        return Err(Error::Domain(format!("{q} is not a non-identity Z-string")));
    }
    let u = synthesize_clifford_map(p, q)?;
    let w = 2.0 / (1u64 << n) as f64;
    let terms = enumerate_basis(n, BasisFamily::XStrings)
        .iter()
        .filter(|x| x.commutes_unchecked(q))
        .map(|x| (w, u.then(&Circuit::pauli(x))))
        .collect();
    Ok(EliminatorPlan::new(
        n,
        EliminatorSpec::PauliMap { p: *p, q: *q },
        terms,
    ))
}

/// `E_{P,i} = (1 - Σ_{Q≠I} H_iQ) E_I + Σ_{Q≠I} H_iQ E_PQ`.
pub fn plan_e_pi(p: &PauliString, i: usize) -> Result<EliminatorPlan> {
    let n = p.num_qubits();
    if p.is_identity() {
        return Err(Error::Domain("P must be traceless".into()));
    }
    if i >= 1 << n {
        return Err(Error::Domain(format!("outcome {i} out of range for {n} qubits")));
    }
    let e_i = plan_e_identity(n);
    let mut parts = Vec::new();
    let mut rest = 1.0;
    for q in enumerate_basis(n, BasisFamily::ZStrings).iter().skip(1) {
        let h = hadamard_coefficient(i, q)?;
        rest -= h;
        parts.push((h, plan_e_pq(p, q)?));
    }
    let mut refs: Vec<(f64, &EliminatorPlan)> = vec![(rest, &e_i)];
    refs.extend(parts.iter().map(|(h, plan)| (*h, plan)));
    Ok(EliminatorPlan::combine(
        n,
        EliminatorSpec::PauliOutcome { p: *p, i },
        &refs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Gate;

    fn label(s: &str) -> PauliString {
        PauliString::from_label(s).unwrap()
    }

    #[test]
    fn identity_plan_shapes() {
        let p1 = plan_e_identity(1);
        assert_eq!(p1.len(), 2);
        assert!(p1.terms()[0].circuit.is_empty());
        assert_eq!(p1.terms()[1].circuit.gates(), &[Gate::X(0)]);
        assert!(p1.terms().iter().all(|t| t.coefficient == 0.5));
        let p2 = plan_e_identity(2);
        assert_eq!(p2.len(), 4);
        assert!((p2.coefficient_sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_table() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let z = label("Z");
        assert!((hadamard_coefficient(0, &z).unwrap() - r).abs() < 1e-15);
        assert!((hadamard_coefficient(1, &z).unwrap() + r).abs() < 1e-15);
        assert!(hadamard_coefficient(0, &label("X")).is_err());
        assert!(hadamard_coefficient(2, &z).is_err());
        let zs = enumerate_basis(2, BasisFamily::ZStrings);
        let walsh = [[1., 1., 1., 1.], [1., -1., 1., -1.], [1., 1., -1., -1.], [1., -1., -1., 1.]];
        for i in 0..4 {
            for (c, q) in zs.iter().enumerate() {
                assert_eq!(hadamard_coefficient(i, q).unwrap(), walsh[i][c] * 0.5);
            }
        }
    }

    #[test]
    fn pq_plans_single_qubit() {
        let zz = plan_e_pq(&label("Z"), &label("Z")).unwrap();
        assert_eq!(zz.len(), 1);
        assert_eq!(zz.terms()[0].coefficient, 1.0);
        assert!(zz.terms()[0].circuit.is_empty());
        let xz = plan_e_pq(&label("X"), &label("Z")).unwrap();
        assert_eq!(xz.terms()[0].circuit.gates(), &[Gate::H(0)]);
        assert!(plan_e_pq(&label("X"), &label("X")).is_err());
        assert!(plan_e_pq(&label("ZZ"), &label("II")).is_err());
        assert_eq!(plan_e_pq(&label("XYZ"), &label("ZIZ")).unwrap().len(), 4);
    }

    #[test]
    fn pi_plan_single_qubit() {
        let plan = plan_e_pi(&label("Z"), 0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let id = plan.terms().iter().find(|t| t.circuit.is_empty()).unwrap();
        let x = plan.terms().iter().find(|t| !t.circuit.is_empty()).unwrap();
        assert!((id.coefficient - (0.5 * (1.0 - r) + r)).abs() < 1e-15);
        assert!((x.coefficient - 0.5 * (1.0 - r)).abs() < 1e-15);
    }

    #[test]
    fn coefficients_are_affine() {
        for n in 1..=3 {
            for idx in 1..1usize << (2 * n) {
                let p = PauliString::from_index(n, idx);
                for i in 0..1usize << n {
                    let plan = plan_e_pi(&p, i).unwrap();
                    assert!((plan.coefficient_sum() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}

//! Eliminator superoperators realized as affine combinations of unitary
//! circuits: closed forms for computational-basis readout and a numerical
//! solver for general POVMs.

mod cache;
mod computational;
mod general;
mod superop;

pub use cache::PlanCache;
pub use computational::{hadamard_coefficient, plan_e_identity, plan_e_pi, plan_e_pq};
pub use general::{default_pool, general_eliminator_plan, GENERAL_RESIDUAL_TOL};
pub use superop::{observable_basis, plan_superoperator, unitary_superoperator, verify_plan};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pauli::{Circuit, PauliString};

/// Which canonical superoperator a plan realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EliminatorSpec {
    /// Keeps the identity and removes every traceless basis operator.
    Identity,
    /// Sends `P̂` to the traceless POVM element `M̄_i`, removes the rest.
    PauliOutcome { p: PauliString, i: usize },
    /// Sends `P̂` to `Q̂`, removes the rest.
    PauliMap { p: PauliString, q: PauliString },
}

impl fmt::Display for EliminatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EliminatorSpec::Identity => f.write_str("E_I"),
            EliminatorSpec::PauliOutcome { p, i } => write!(f, "E_({p},{i})"),
            EliminatorSpec::PauliMap { p, q } => write!(f, "E_({p}->{q})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanTerm {
    pub coefficient: f64,
    pub circuit: Circuit,
}

/// `Σ_l c_l Φ(U_l)` with `Σ_l c_l = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminatorPlan {
    n: usize,
    spec: EliminatorSpec,
    terms: Vec<PlanTerm>,
}

impl EliminatorPlan {
    /// Builds a plan, merging repeated circuits.
    pub fn new(n: usize, spec: EliminatorSpec, terms: Vec<(f64, Circuit)>) -> Self {
        let mut index: HashMap<Circuit, usize> = HashMap::new();
        let mut merged: Vec<PlanTerm> = Vec::new();
        for (c, u) in terms {
            assert_eq!(u.num_qubits(), n, "circuit size differs from plan size");
            match index.get(&u) {
                Some(&k) => merged[k].coefficient += c,
                None => {
                    index.insert(u.clone(), merged.len());
                    merged.push(PlanTerm {
                        coefficient: c,
                        circuit: u,
                    });
                }
            }
        }
        EliminatorPlan {
            n,
            spec,
            terms: merged,
        }
    }

    /// Affine combination `Σ_j w_j plan_j`.
    pub fn combine(n: usize, spec: EliminatorSpec, parts: &[(f64, &EliminatorPlan)]) -> Self {
        let terms = parts
            .iter()
            .flat_map(|(w, plan)| {
                plan.terms
                    .iter()
                    .map(move |t| (w * t.coefficient, t.circuit.clone()))
            })
            .collect();
        EliminatorPlan::new(n, spec, terms)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> EliminatorSpec {
        self.spec
    }

    pub fn terms(&self) -> &[PlanTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }

    /// Copy with one coefficient shifted; used to probe verification sensitivity.
    pub fn perturbed(&self, term: usize, delta: f64) -> Self {
        let mut out = self.clone();
        out.terms[term].coefficient += delta;
        out
    }
}

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use super::{
    default_pool, general_eliminator_plan, plan_e_identity, plan_e_pi, plan_e_pq, EliminatorPlan,
    EliminatorSpec,
};
use crate::error::{Error, Result};
use crate::povm::Povm;

/// Memoized plans for one readout model; safe to share across threads.
pub struct PlanCache {
    n: usize,
    general: Option<Povm>,
    plans: RwLock<HashMap<EliminatorSpec, Arc<EliminatorPlan>>>,
}

impl PlanCache {
    /// Closed-form Clifford plans for computational-basis readout.
    pub fn computational(n: usize) -> Self {
        PlanCache {
            n,
            general: None,
            plans: RwLock::new(HashMap::new()),
        }
    }

    /// Numerically solved plans for an arbitrary POVM.
    pub fn general(povm: Povm) -> Self {
        PlanCache {
            n: povm.num_qubits(),
            general: Some(povm),
            plans: RwLock::new(HashMap::new()),
        }
    }

    /// Closed forms when the POVM is computational, numerical plans otherwise.
    pub fn for_povm(povm: &Povm) -> Self {
        if povm.is_computational() {
            PlanCache::computational(povm.num_qubits())
        } else {
            PlanCache::general(povm.clone())
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, spec: &EliminatorSpec) -> Result<Arc<EliminatorPlan>> {
        if let Some(hit) = self.plans.read().expect("plan cache lock").get(spec) {
            return Ok(hit.clone());
        }
        let plan = Arc::new(self.build(spec)?);
        let mut guard = self.plans.write().expect("plan cache lock");
        Ok(guard.entry(*spec).or_insert(plan).clone())
    }

    fn build(&self, spec: &EliminatorSpec) -> Result<EliminatorPlan> {
        let spec_n = match spec {
            EliminatorSpec::Identity => self.n,
            EliminatorSpec::PauliOutcome { p, .. } | EliminatorSpec::PauliMap { p, .. } => {
                p.num_qubits()
            }
        };
        if spec_n != self.n {
            return Err(Error::Dimension(format!(
                "{spec} on {spec_n} qubits requested from a {}-qubit cache",
                self.n
            )));
        }
        match &self.general {
            None => match spec {
                EliminatorSpec::Identity => Ok(plan_e_identity(self.n)),
                EliminatorSpec::PauliOutcome { p, i } => plan_e_pi(p, *i),
                EliminatorSpec::PauliMap { p, q } => plan_e_pq(p, q),
            },
            Some(povm) => {
                let pool = default_pool(self.n, spec)?;
                general_eliminator_plan(povm, spec, &pool).map(|(plan, _)| plan)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    #[test]
    fn repeated_lookups_share_plans() {
        let cache = PlanCache::computational(2);
        let spec = EliminatorSpec::PauliOutcome {
            p: PauliString::from_label("ZI").unwrap(),
            i: 1,
        };
        let a = cache.get(&spec).unwrap();
        let b = cache.get(&spec).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let wrong = EliminatorSpec::PauliOutcome {
            p: PauliString::from_label("Z").unwrap(),
            i: 0,
        };
        assert!(cache.get(&wrong).is_err());
    }
}

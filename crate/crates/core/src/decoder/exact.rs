use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;

use super::{Diagnostics, Pivot, TomographyResult, ZTable, ZValues};
use crate::eliminators::{EliminatorPlan, EliminatorSpec, PlanCache};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, numerical_rank, RMatrix};
use crate::pauli::{enumerate_basis, BasisFamily, PauliString};
use crate::povm::{Povm, RANK_TOL};
use crate::sim::{DensityMatrix, NoiseMatrix, NoisyOracle, SimulatedDevice};

/// Absolute tolerance for zero tests on exact data.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    pub tol: f64,
    /// Forces the gauge reference; must lie in the support.
    pub reference: Option<PauliString>,
    /// Forces the pivot used for the ratios.
    pub pivot: Option<Pivot>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            tol: EXACT_TOL,
            reference: None,
            pivot: None,
        }
    }
}

/// Detected support with the rows `K` and the pivot that exposed it.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub paulis: Vec<PauliString>,
    pub rows: Vec<usize>,
    pub pivot: Pivot,
}

/// `Σ_l c_l ỹ(U_l)`.
pub fn compute_z<O: NoisyOracle + ?Sized>(oracle: &O, plan: &EliminatorPlan) -> Result<Vec<f64>> {
    let mut z = vec![0.0; oracle.num_outcomes()];
    for term in plan.terms() {
        let y = oracle.noisy_distribution(&term.circuit)?;
        if y.len() != z.len() {
            return Err(Error::Dimension("oracle distribution length".into()));
        }
        for (acc, v) in z.iter_mut().zip(y.iter()) {
            *acc += term.coefficient * v;
        }
    }
    Ok(z)
}

/// `z^I` and every `z^{P,i}`, evaluated in parallel over `P`.
pub fn compute_all_z<O: NoisyOracle + ?Sized>(oracle: &O, plans: &PlanCache) -> Result<ZValues> {
    let n = plans.num_qubits();
    let d = oracle.num_outcomes();
    let z_identity = compute_z(oracle, &*plans.get(&EliminatorSpec::Identity)?)?;
    let z_pi = enumerate_basis(n, BasisFamily::TracelessPauli)
        .par_iter()
        .map(|p| {
            (0..d)
                .map(|i| compute_z(oracle, &*plans.get(&EliminatorSpec::PauliOutcome { p: *p, i })?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ZValues::new(n, z_identity, z_pi)
}

/// Support `C`, rows `K` with `z^I_k` nonzero, and the pivot of the first
/// detected string (its strongest deviation).
pub fn find_support<Z: ZTable + ?Sized>(z: &Z, tol: f64) -> Result<Support> {
    let rows: Vec<usize> = (0..z.num_outcomes())
        .filter(|&k| z.z_identity()[k].abs() > tol)
        .collect();
    let mut paulis = Vec::new();
    let mut pivot = None;
    for p in z.paulis() {
        if let Some((i, k, v)) = z.strongest(&p, &rows) {
            if v > tol {
                paulis.push(p);
                pivot.get_or_insert(Pivot { i, k });
            }
        }
    }
    match pivot {
        Some(pivot) => Ok(Support {
            paulis,
            rows,
            pivot,
        }),
        None => Err(Error::EmptySupport),
    }
}

/// String in the support with the largest deviation; ties go to the
/// lexicographically first label.
pub fn select_reference<Z: ZTable + ?Sized>(z: &Z, support: &Support) -> Result<PauliString> {
    let mut best: Option<(PauliString, f64)> = None;
    for p in &support.paulis {
        if let Some((_, _, v)) = z.strongest(p, &support.rows) {
            if best.is_none_or(|(_, b)| v > b + super::TIE_MARGIN) {
                best = Some((*p, v));
            }
        }
    }
    best.map(|(p, _)| p).ok_or(Error::EmptySupport)
}

/// `A'(s_R)`: the direct transcription `A'_{ki} = z^{R,i}_k` for computational
/// readout, otherwise the stacked covariance system per active row. Rows
/// outside `rows` are zero. Returns the matrix and the solve residual.
pub fn recover_noise<Z: ZTable + ?Sized>(
    z: &Z,
    reference: &PauliString,
    povm: &Povm,
    rows: &[usize],
) -> Result<(RMatrix, f64)> {
    let d = z.num_outcomes();
    if povm.num_outcomes() != d || povm.num_qubits() != z.num_qubits() {
        return Err(Error::Dimension("z-values and POVM differ in shape".into()));
    }
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            z.z_pi(reference, i)
                .ok_or_else(|| Error::Domain(format!("no z-values for {reference}")))
        })
        .collect::<Result<_>>()?;
    let mut a = RMatrix::zeros(d, d);
    if povm.is_computational() {
        for &k in rows {
            for i in 0..d {
                a[(k, i)] = columns[i][k];
            }
        }
        return Ok((a, 0.0));
    }
    let c = povm.covariance();
    let m_i = povm.m_identity();
    let mut system = RMatrix::zeros(d + 1, d);
    for i in 0..d {
        for kp in 0..d {
            system[(i, kp)] = c[(kp, i)];
        }
    }
    for kp in 0..d {
        system[(d, kp)] = m_i[kp];
    }
    if numerical_rank(&system, RANK_TOL) < d {
        return Err(Error::PovmDependence);
    }
    let scale = (2f64).powf(z.num_qubits() as f64 / 2.0);
    let zi = z.z_identity();
    let mut worst = 0.0f64;
    for &k in rows {
        let rhs = DVector::from_fn(d + 1, |r, _| {
            if r < d {
                columns[r][k] - zi[k]
            } else {
                scale * zi[k]
            }
        });
        let (x, residual) = least_squares(&system, &rhs);
        worst = worst.max(residual);
        for kp in 0..d {
            a[(k, kp)] = x[kp];
        }
    }
    Ok((a, worst))
}

/// `s_P / s_R = (z^{P,j}_l - z^I_l) / (z^{R,j}_l - z^I_l)` at the pivot `(j, l)`.
pub fn recover_ratios<Z: ZTable + ?Sized>(
    z: &Z,
    reference: &PauliString,
    support: &[PauliString],
    pivot: Pivot,
    tol: f64,
) -> Result<BTreeMap<PauliString, f64>> {
    let dev = |p: &PauliString| -> Result<f64> {
        z.deviation(p, pivot.i)
            .and_then(|v| v.get(pivot.k).copied())
            .ok_or_else(|| Error::Domain(format!("no z-values for {p} at {pivot:?}")))
    };
    let den = dev(reference)?;
    if den.abs() <= tol {
        return Err(Error::Pivot(den));
    }
    let mut ratios = BTreeMap::new();
    for p in support {
        let r = if p == reference { 1.0 } else { dev(p)? / den };
        ratios.insert(*p, r);
    }
    Ok(ratios)
}

/// Decodes exact z-values: support, reference, noise up to gauge, ratios.
pub fn decode_exact<Z: ZTable + ?Sized>(
    z: &Z,
    povm: &Povm,
    options: &ExactOptions,
) -> Result<TomographyResult> {
    let support = find_support(z, options.tol)?;
    let reference = match options.reference {
        Some(r) if support.paulis.contains(&r) => r,
        Some(r) => return Err(Error::Domain(format!("reference {r} is not in the support"))),
        None => select_reference(z, &support)?,
    };
    let pivot = options.pivot.unwrap_or(support.pivot);
    let (noise, noise_residual) = recover_noise(z, &reference, povm, &support.rows)?;
    let ratios = recover_ratios(z, &reference, &support.paulis, pivot, options.tol)?;
    Ok(TomographyResult {
        n: z.num_qubits(),
        support: support.paulis,
        reference,
        pivot,
        ratios,
        noise,
        alpha: None,
        diagnostics: Diagnostics {
            active_rows: support.rows.len(),
            noise_residual,
            ..Diagnostics::default()
        },
    })
}

/// Checks the three sufficient conditions: `‖A‖_u > tol`, `‖ρ‖_m > tol`
/// and a linearly independent POVM.
pub fn check_conditions(rho: &DensityMatrix, a: &NoiseMatrix, povm: &Povm, tol: f64) -> Result<()> {
    let u = a.u_norm();
    if u <= tol {
        return Err(Error::Condition {
            number: 1,
            detail: format!("noise u-norm {u:e} vanishes (erasure channel)"),
        });
    }
    let m = rho.to_coefficients().m_norm();
    if m <= tol {
        return Err(Error::Condition {
            number: 2,
            detail: format!("state m-norm {m:e} vanishes"),
        });
    }
    let rank = povm.independence_rank();
    if rank != povm.num_outcomes() {
        return Err(Error::Condition {
            number: 3,
            detail: format!(
                "POVM rank {rank} below its {} outcomes",
                povm.num_outcomes()
            ),
        });
    }
    Ok(())
}

/// Full exact pipeline on a simulated device, checking the three sufficient
/// conditions first.
pub fn run_exact(
    rho: &DensityMatrix,
    a: &NoiseMatrix,
    povm: &Povm,
    options: &ExactOptions,
) -> Result<TomographyResult> {
    check_conditions(rho, a, povm, options.tol)?;
    let device = SimulatedDevice::new(rho.clone(), a.clone(), povm.clone())?;
    let plans = PlanCache::for_povm(povm);
    let z = compute_all_z(&device, &plans)?;
    decode_exact(&z, povm, options)
}

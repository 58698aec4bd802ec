use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Diagnostics, Pivot, ShotUsage, TomographyResult, ZTable};
use crate::eliminators::{hadamard_coefficient, EliminatorSpec, PlanCache};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::pauli::{enumerate_basis, BasisFamily, Circuit, PauliString};
use crate::sim::{multinomial, NoisyOracle, RngStream};

/// Slack factor on the support threshold `β ‖A‖_u`.
pub const SUPPORT_MARGIN: f64 = 1.005;

/// Shot counts for the three stages and the parameters behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotBudget {
    /// Total shots for the support scan over all traceless strings.
    pub support: u64,
    /// Shots for the noise estimate from the reference string.
    pub noise: u64,
    /// Shots for re-estimating the reference string to choose the pivot.
    pub pivot: u64,
    /// Shots per support string for the ratio estimates.
    pub ratio: u64,
    pub n: usize,
    pub beta: f64,
    pub epsilon_noise: f64,
    pub epsilon_ratio: f64,
    pub delta: f64,
    pub u_norm_lb: f64,
    pub c: f64,
}

fn ceil_count(x: f64) -> Result<u64> {
    if !x.is_finite() || x >= u64::MAX as f64 {
        return Err(Error::Budget(format!("shot count {x} overflows")));
    }
    Ok(x.ceil().max(1.0) as u64)
}

/// Budgets with `L = c n + ln(1/δ)`:
/// support `8^n L / (β² u²)`, noise `2^n L / ε_noise²`,
/// pivot `16 · 2^n L / (β² u²)`, ratio `2^n L / (ε_ratio² β² u²)`.
pub fn shot_budget(
    n: usize,
    beta: f64,
    epsilon_noise: f64,
    epsilon_ratio: f64,
    delta: f64,
    u_norm_lb: f64,
    c: f64,
) -> Result<ShotBudget> {
    let check = |name: &str, v: f64, lo: f64, hi: f64| -> Result<()> {
        if v.is_finite() && v > lo && v < hi {
            Ok(())
        } else {
            Err(Error::Budget(format!("{name} = {v} outside ({lo}, {hi})")))
        }
    };
    if n == 0 {
        return Err(Error::Budget("n must be positive".into()));
    }
    check("beta", beta, 0.0, 1.0)?;
    check("epsilon_noise", epsilon_noise, 0.0, f64::INFINITY)?;
    check("epsilon_ratio", epsilon_ratio, 0.0, f64::INFINITY)?;
    check("delta", delta, 0.0, 1.0)?;
    check("u_norm_lb", u_norm_lb, 0.0, f64::INFINITY)?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Budget(format!("c = {c} must be non-negative")));
    }
    let log_term = c * n as f64 + (1.0 / delta).ln();
    let dim = (1u64 << n) as f64;
    let signal = beta * beta * u_norm_lb * u_norm_lb;
    Ok(ShotBudget {
        support: ceil_count(dim.powi(3) * log_term / signal)?,
        noise: ceil_count(dim * log_term / (epsilon_noise * epsilon_noise))?,
        pivot: ceil_count(16.0 * dim * log_term / signal)?,
        ratio: ceil_count(dim * log_term / (epsilon_ratio * epsilon_ratio * signal))?,
        n,
        beta,
        epsilon_noise,
        epsilon_ratio,
        delta,
        u_norm_lb,
        c,
    })
}

/// Noisy oracle paired with the Clifford plans that define each estimator.
pub struct Sampler<'a, O: NoisyOracle + ?Sized> {
    oracle: &'a O,
    plans: PlanCache,
}

impl<'a, O: NoisyOracle + ?Sized> Sampler<'a, O> {
    /// Requires computational-basis readout, i.e. `2^n` outcomes.
    pub fn new(oracle: &'a O, n: usize) -> Result<Self> {
        if oracle.num_outcomes() != 1 << n {
            return Err(Error::Dimension(format!(
                "{} outcomes is not computational readout on {n} qubits",
                oracle.num_outcomes()
            )));
        }
        Ok(Sampler {
            oracle,
            plans: PlanCache::computational(n),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.plans.num_qubits()
    }

    /// Outcome counts from `shots` shots, each on a uniformly drawn circuit.
    fn sample_uniform(
        &self,
        circuits: &[Circuit],
        shots: u64,
        rng: &mut RngStream,
    ) -> Result<Vec<u64>> {
        let d = self.oracle.num_outcomes();
        let uniform = vec![1.0 / circuits.len() as f64; circuits.len()];
        let per_circuit = multinomial(&uniform, shots, rng);
        let mut counts = vec![0u64; d];
        for (u, &c) in circuits.iter().zip(&per_circuit) {
            if c == 0 {
                continue;
            }
            let y = self.oracle.noisy_distribution(u)?;
            for (acc, v) in counts.iter_mut().zip(multinomial(&y, c, rng)) {
                *acc += v;
            }
        }
        Ok(counts)
    }
}

fn frequencies(counts: &[u64], shots: u64) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / shots as f64).collect()
}

fn require_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        Err(Error::Budget("zero shots".into()))
    } else {
        Ok(())
    }
}

/// `ẑ^I`: frequencies over shots on uniformly random X-strings.
pub fn estimate_z_identity<O: NoisyOracle + ?Sized>(
    sampler: &Sampler<'_, O>,
    shots: u64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    require_shots(shots)?;
    let plan = sampler.plans.get(&EliminatorSpec::Identity)?;
    let circuits: Vec<Circuit> = plan.terms().iter().map(|t| t.circuit.clone()).collect();
    Ok(frequencies(&sampler.sample_uniform(&circuits, shots, rng)?, shots))
}

/// `ẑ^{PQ}`: frequencies over shots on `Q' U_PQ` with `Q'` a uniformly
/// random X-string commuting with `q`.
pub fn estimate_z_pq<O: NoisyOracle + ?Sized>(
    sampler: &Sampler<'_, O>,
    p: &PauliString,
    q: &PauliString,
    shots: u64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    require_shots(shots)?;
    let plan = sampler.plans.get(&EliminatorSpec::PauliMap { p: *p, q: *q })?;
    let circuits: Vec<Circuit> = plan.terms().iter().map(|t| t.circuit.clone()).collect();
    Ok(frequencies(&sampler.sample_uniform(&circuits, shots, rng)?, shots))
}

/// `ẑ^{P,i} = (1 - Σ_Q H_iQ) ẑ^I + Σ_Q H_iQ ẑ^{PQ}`, with `z_pq` ordered as
/// the non-identity Z-strings.
pub fn estimate_z_pi(
    z_identity: &[f64],
    z_pq: &[Vec<f64>],
    n: usize,
    i: usize,
) -> Result<Vec<f64>> {
    let zs = enumerate_basis(n, BasisFamily::ZStrings);
    if z_pq.len() + 1 != zs.len() || z_pq.iter().any(|z| z.len() != z_identity.len()) {
        return Err(Error::Dimension("missing or misshapen z^PQ estimates".into()));
    }
    let mut out = vec![0.0; z_identity.len()];
    let mut rest = 1.0;
    for (q, z) in zs.iter().skip(1).zip(z_pq) {
        let h = hadamard_coefficient(i, q)?;
        rest -= h;
        for (acc, v) in out.iter_mut().zip(z) {
            *acc += h * v;
        }
    }
    for (acc, v) in out.iter_mut().zip(z_identity) {
        *acc += rest * v;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
struct PauliEstimate {
    shots_per_q: u64,
    z_pq: Vec<Vec<f64>>,
    z_pi: Vec<Vec<f64>>,
}

/// Finite-shot estimates `ẑ^I`, `ẑ^{PQ}` and `ẑ^{P,i}` from one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ZEstimates {
    n: usize,
    d: usize,
    z_identity: Vec<f64>,
    identity_shots: u64,
    entries: BTreeMap<PauliString, PauliEstimate>,
}

impl ZEstimates {
    /// Shots spent on `ẑ^I`.
    pub fn identity_shots(&self) -> u64 {
        self.identity_shots
    }

    /// Shots spent on each `ẑ^{PQ}` for `p`.
    pub fn shots_per_q(&self, p: &PauliString) -> Option<u64> {
        self.entries.get(p).map(|e| e.shots_per_q)
    }

    /// All shots consumed by the batch.
    pub fn total_shots(&self) -> u64 {
        let per_p = (1u64 << self.n) - 1;
        self.identity_shots + self.entries.values().map(|e| e.shots_per_q * per_p).sum::<u64>()
    }

    /// `ẑ^{PQ}` for a non-identity Z-string `q`.
    pub fn z_pq(&self, p: &PauliString, q: &PauliString) -> Option<&[f64]> {
        if !q.is_z_string() || q.is_identity() {
            return None;
        }
        let slot = enumerate_basis(self.n, BasisFamily::ZStrings)
            .iter()
            .skip(1)
            .position(|z| z == q)?;
        self.entries.get(p).map(|e| e.z_pq[slot].as_slice())
    }

    /// Plug-in standard error of `ẑ^{P,i}_k - ẑ^I_k`.
    pub fn deviation_std_error(&self, p: &PauliString, i: usize, k: usize) -> Option<f64> {
        let e = self.entries.get(p)?;
        let var = |f: f64, shots: u64| f * (1.0 - f) / shots as f64;
        let mut total = 0.0;
        let mut h_sum = 0.0;
        for (q, z) in enumerate_basis(self.n, BasisFamily::ZStrings)
            .iter()
            .skip(1)
            .zip(&e.z_pq)
        {
            let h = hadamard_coefficient(i, q).ok()?;
            h_sum += h;
            total += h * h * var(z[k], e.shots_per_q);
        }
        total += h_sum * h_sum * var(self.z_identity[k], self.identity_shots);
        Some(total.sqrt())
    }
}

impl ZTable for ZEstimates {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn num_outcomes(&self) -> usize {
        self.d
    }

    fn z_identity(&self) -> &[f64] {
        &self.z_identity
    }

    fn z_pi(&self, p: &PauliString, i: usize) -> Option<Vec<f64>> {
        self.entries.get(p)?.z_pi.get(i).cloned()
    }

    fn paulis(&self) -> Vec<PauliString> {
        self.entries.keys().copied().collect()
    }
}

/// Splits `total` shots into `N'` per `(P, Q)` and `N'' = 2^n N'` for the
/// shared `ẑ^I`, then estimates every `ẑ^{P,i}` for `paulis`. Each string
/// draws from its own substream of `stream`.
pub fn estimate_batch<O: NoisyOracle + ?Sized>(
    sampler: &Sampler<'_, O>,
    paulis: &[PauliString],
    total: u64,
    stream: &RngStream,
) -> Result<ZEstimates> {
    let n = sampler.num_qubits();
    let dim = 1u64 << n;
    if paulis.is_empty() {
        return Err(Error::Budget("no strings to estimate".into()));
    }
    if let Some(p) = paulis.iter().find(|p| p.is_identity() || p.num_qubits() != n) {
        return Err(Error::Domain(format!("{p} is not a traceless {n}-qubit string")));
    }
    let units = paulis.len() as u64 * (dim - 1) + dim;
    let per_q = total / units;
    if per_q == 0 {
        return Err(Error::Budget(format!(
            "{total} shots cannot cover {units} estimator units"
        )));
    }
    let identity_shots = dim * per_q;
    let z_identity = estimate_z_identity(sampler, identity_shots, &mut stream.substream(0))?;
    let zs = enumerate_basis(n, BasisFamily::ZStrings);
    let entries = paulis
        .par_iter()
        .map(|p| {
            let mut rng = stream.substream(p.index() as u64 + 1);
            let z_pq = zs
                .iter()
                .skip(1)
                .map(|q| estimate_z_pq(sampler, p, q, per_q, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let z_pi = (0..dim as usize)
                .map(|i| estimate_z_pi(&z_identity, &z_pq, n, i))
                .collect::<Result<Vec<_>>>()?;
            Ok((
                *p,
                PauliEstimate {
                    shots_per_q: per_q,
                    z_pq,
                    z_pi,
                },
            ))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(ZEstimates {
        n,
        d: dim as usize,
        z_identity,
        identity_shots,
        entries,
    })
}

/// `Ĉ = {P : max_{i,k} |ẑ^{P,i}_k - ẑ^I_k| ≥ 1.005 β u}`.
pub fn support_threshold<Z: ZTable + ?Sized>(
    z: &Z,
    beta: f64,
    u_norm_lb: f64,
) -> Result<Vec<PauliString>> {
    let threshold = SUPPORT_MARGIN * beta * u_norm_lb;
    let rows: Vec<usize> = (0..z.num_outcomes()).collect();
    let support: Vec<PauliString> = z
        .paulis()
        .into_iter()
        .filter(|p| z.strongest(p, &rows).is_some_and(|(_, _, v)| v >= threshold))
        .collect();
    if support.is_empty() {
        Err(Error::SupportEstimate)
    } else {
        Ok(support)
    }
}

/// `Â'_{ki} = ẑ^{R,i}_k`.
pub fn noise_from_estimates<Z: ZTable + ?Sized>(z: &Z, reference: &PauliString) -> Result<RMatrix> {
    let d = z.num_outcomes();
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            z.z_pi(reference, i)
                .ok_or_else(|| Error::Domain(format!("no estimates for {reference}")))
        })
        .collect::<Result<_>>()?;
    Ok(RMatrix::from_fn(d, d, |k, i| columns[i][k]))
}

/// Ratio estimates with plug-in standard errors. Numerators come from
/// `numerators`, the reference deviation from `denominator`.
pub fn ratios_from_estimates(
    numerators: &ZEstimates,
    denominator: &ZEstimates,
    reference: &PauliString,
    support: &[PauliString],
    pivot: Pivot,
    beta: f64,
    u_norm_lb: f64,
) -> Result<(BTreeMap<PauliString, f64>, BTreeMap<PauliString, f64>)> {
    let missing = |p: &PauliString| Error::Domain(format!("no estimates for {p}"));
    let den = denominator
        .deviation(reference, pivot.i)
        .ok_or_else(|| missing(reference))?[pivot.k];
    let bound = beta * u_norm_lb / 2.0;
    if den.abs() < bound {
        return Err(Error::Conditioning { value: den, bound });
    }
    let den_se = denominator
        .deviation_std_error(reference, pivot.i, pivot.k)
        .unwrap_or(0.0);
    let mut ratios = BTreeMap::new();
    let mut errors = BTreeMap::new();
    for p in support {
        if p == reference {
            ratios.insert(*p, 1.0);
            errors.insert(*p, 0.0);
            continue;
        }
        let num = numerators.deviation(p, pivot.i).ok_or_else(|| missing(p))?[pivot.k];
        let num_se = numerators
            .deviation_std_error(p, pivot.i, pivot.k)
            .unwrap_or(0.0);
        let r = num / den;
        ratios.insert(*p, r);
        errors.insert(*p, (num_se * num_se + r * r * den_se * den_se).sqrt() / den.abs());
    }
    Ok((ratios, errors))
}

/// Parameters of the finite-shot pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedConfig {
    pub n: usize,
    pub beta: f64,
    pub u_norm_lb: f64,
    pub epsilon_noise: f64,
    pub epsilon_ratio: f64,
    pub delta: f64,
    pub c: f64,
    pub seed: u64,
    /// Reuse the support scan for the pivot and ratios instead of fresh shots.
    #[serde(default)]
    pub reuse_shots: bool,
    /// Overrides the computed budget.
    #[serde(default)]
    pub budget: Option<ShotBudget>,
    /// Forces the gauge reference.
    #[serde(default)]
    pub reference: Option<PauliString>,
}

impl RandomizedConfig {
    pub fn new(n: usize, beta: f64, u_norm_lb: f64, epsilon: f64, delta: f64, seed: u64) -> Self {
        RandomizedConfig {
            n,
            beta,
            u_norm_lb,
            epsilon_noise: epsilon,
            epsilon_ratio: epsilon,
            delta,
            c: 1.0,
            seed,
            reuse_shots: false,
            budget: None,
            reference: None,
        }
    }

    pub fn budget(&self) -> Result<ShotBudget> {
        match &self.budget {
            Some(b) => Ok(b.clone()),
            None => shot_budget(
                self.n,
                self.beta,
                self.epsilon_noise,
                self.epsilon_ratio,
                self.delta,
                self.u_norm_lb,
                self.c,
            ),
        }
    }
}

const SUPPORT_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const PIVOT_STREAM: u64 = 3;
const RATIO_STREAM: u64 = 4;

/// Full finite-shot pipeline: support scan, noise from a fresh batch on the
/// reference, pivot from another fresh batch, then joint ratio estimates.
/// Errors carry the step number that raised them.
pub fn run_randomized<O: NoisyOracle + ?Sized>(
    oracle: &O,
    config: &RandomizedConfig,
) -> Result<TomographyResult> {
    let budget = config.budget()?;
    let sampler = Sampler::new(oracle, config.n)?;
    let n = config.n;
    let all_rows: Vec<usize> = (0..1usize << n).collect();
    let traceless = enumerate_basis(n, BasisFamily::TracelessPauli);

    let scan = estimate_batch(
        &sampler,
        &traceless,
        budget.support,
        &RngStream::new(config.seed, SUPPORT_STREAM),
    )
    .map_err(|e| e.at_step(1))?;
    let support =
        support_threshold(&scan, config.beta, config.u_norm_lb).map_err(|e| e.at_step(1))?;
    let reference = match config.reference {
        Some(r) if support.contains(&r) => r,
        Some(r) => {
            return Err(Error::Domain(format!("reference {r} is not in the support")).at_step(1))
        }
        None => {
            let mut best: Option<(PauliString, f64)> = None;
            for p in &support {
                let v = scan.strongest(p, &all_rows).map_or(0.0, |s| s.2);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((*p, v));
                }
            }
            best.map(|b| b.0).ok_or(Error::SupportEstimate.at_step(1))?
        }
    };

    let noise_batch = estimate_batch(
        &sampler,
        &[reference],
        budget.noise,
        &RngStream::new(config.seed, NOISE_STREAM),
    )
    .map_err(|e| e.at_step(2))?;
    let noise = noise_from_estimates(&noise_batch, &reference).map_err(|e| e.at_step(2))?;

    let mut usage = ShotUsage {
        support: scan.total_shots(),
        noise: noise_batch.total_shots(),
        ..ShotUsage::default()
    };
    let step3 = |usage: &mut ShotUsage| -> Result<_> {
        let (pivot_batch, ratio_batch) = if config.reuse_shots {
            (scan.clone(), scan.clone())
        } else {
            let pivot_batch = estimate_batch(
                &sampler,
                &[reference],
                budget.pivot,
                &RngStream::new(config.seed, PIVOT_STREAM),
            )?;
            let total = budget
                .ratio
                .checked_mul(support.len() as u64)
                .ok_or_else(|| Error::Budget("ratio budget overflows".into()))?;
            let ratio_batch = estimate_batch(
                &sampler,
                &support,
                total,
                &RngStream::new(config.seed, RATIO_STREAM),
            )?;
            usage.pivot = pivot_batch.total_shots();
            usage.ratios = ratio_batch.total_shots();
            (pivot_batch, ratio_batch)
        };
        let (i, k, _) = pivot_batch
            .strongest(&reference, &all_rows)
            .ok_or(Error::SupportEstimate)?;
        let pivot = Pivot { i, k };
        let den_batch = if ratio_batch.shots_per_q(&reference) > pivot_batch.shots_per_q(&reference)
        {
            &ratio_batch
        } else {
            &pivot_batch
        };
        let (ratios, errors) = ratios_from_estimates(
            &ratio_batch,
            den_batch,
            &reference,
            &support,
            pivot,
            config.beta,
            config.u_norm_lb,
        )?;
        Ok((pivot, ratios, errors))
    };
    let (pivot, ratios, ratio_std_errors) = step3(&mut usage).map_err(|e| e.at_step(3))?;

    Ok(TomographyResult {
        n,
        support,
        reference,
        pivot,
        ratios,
        noise,
        alpha: None,
        diagnostics: Diagnostics {
            active_rows: 1 << n,
            noise_residual: 0.0,
            shots: Some(usage),
            ratio_std_errors,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{compute_all_z, ZValues};
    use crate::povm::computational_povm;
    use crate::sim::{DensityMatrix, NoiseMatrix, SimulatedDevice};

    fn label(s: &str) -> PauliString {
        PauliString::from_label(s).unwrap()
    }

    fn device(bits: &str, flips: &[f64]) -> SimulatedDevice {
        let n = bits.len();
        SimulatedDevice::new(
            DensityMatrix::basis_state(bits).unwrap(),
            NoiseMatrix::tensor_flip(flips).unwrap(),
            computational_povm(n).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn budget_formula() {
        let b = shot_budget(2, 0.25, 0.05, 0.05, 0.1, 0.5, 1.0).unwrap();
        let expected = (64.0 * (2.0 + 10f64.ln()) / (0.0625 * 0.25)).ceil() as u64;
        assert_eq!(b.support, expected);
        let half = shot_budget(2, 0.125, 0.05, 0.05, 0.1, 0.5, 1.0).unwrap();
        assert!((half.support as f64 / b.support as f64 - 4.0).abs() < 1e-3);
        assert!(shot_budget(2, 0.0, 0.05, 0.05, 0.1, 0.5, 1.0).is_err());
        assert!(shot_budget(2, 0.25, 0.05, 0.05, 1.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn single_shot_is_one_hot() {
        let dev = device("01", &[0.1, 0.2]);
        let sampler = Sampler::new(&dev, 2).unwrap();
        let z = estimate_z_identity(&sampler, 1, &mut RngStream::new(3, 0)).unwrap();
        assert_eq!(z.iter().filter(|&&v| v == 1.0).count(), 1);
        assert_eq!(z.iter().sum::<f64>(), 1.0);
        assert!(estimate_z_identity(&sampler, 0, &mut RngStream::new(3, 0)).is_err());
    }

    #[test]
    fn noiseless_zz_estimate() {
        let dev = device("0", &[0.0]);
        let sampler = Sampler::new(&dev, 1).unwrap();
        let z = estimate_z_pq(&sampler, &label("Z"), &label("Z"), 100, &mut RngStream::new(1, 1))
            .unwrap();
        assert_eq!(z, vec![1.0, 0.0]);
    }

    #[test]
    fn exact_inputs_reproduce_exact_z_pi() {
        let dev = device("01", &[0.1, 0.2]);
        let exact: ZValues = compute_all_z(&dev, &PlanCache::computational(2)).unwrap();
        let plans = PlanCache::computational(2);
        let p = label("ZI");
        let zpq: Vec<Vec<f64>> = enumerate_basis(2, BasisFamily::ZStrings)
            .iter()
            .skip(1)
            .map(|q| {
                crate::decoder::compute_z(
                    &dev,
                    &plans.get(&EliminatorSpec::PauliMap { p, q: *q }).unwrap(),
                )
                .unwrap()
            })
            .collect();
        for i in 0..4 {
            let z = estimate_z_pi(exact.z_identity(), &zpq, 2, i).unwrap();
            let want = exact.z_pi(&p, i).unwrap();
            for (a, b) in z.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(estimate_z_pi(exact.z_identity(), &zpq[..2], 2, 0).is_err());
    }

    #[test]
    fn batches_are_deterministic() {
        let dev = device("01", &[0.1, 0.2]);
        let sampler = Sampler::new(&dev, 2).unwrap();
        let paulis = enumerate_basis(2, BasisFamily::TracelessPauli);
        let a = estimate_batch(&sampler, &paulis, 10_000, &RngStream::new(9, 1)).unwrap();
        let b = estimate_batch(&sampler, &paulis, 10_000, &RngStream::new(9, 1)).unwrap();
        assert_eq!(a, b);
        assert!(a.total_shots() <= 10_000);
        assert_eq!(a.identity_shots(), 4 * a.shots_per_q(&paulis[0]).unwrap());
        assert!(estimate_batch(&sampler, &paulis, 10, &RngStream::new(9, 1)).is_err());
    }

    #[test]
    fn maximally_mixed_support_error() {
        let dev = SimulatedDevice::new(
            DensityMatrix::maximally_mixed(2).unwrap(),
            NoiseMatrix::identity(4),
            computational_povm(2).unwrap(),
        )
        .unwrap();
        let config = RandomizedConfig::new(2, 0.25, 0.9, 0.1, 0.1, 5);
        let err = run_randomized(&dev, &config).unwrap_err();
        assert_eq!(err.root(), &Error::SupportEstimate);
        assert!(matches!(err, Error::Step { step: 1, .. }));
    }

    #[test]
    fn zero_budget_is_rejected() {
        let dev = device("01", &[0.05, 0.05]);
        let mut config = RandomizedConfig::new(2, 0.25, 0.9, 0.1, 0.1, 5);
        let mut b = config.budget().unwrap();
        b.support = 0;
        config.budget = Some(b);
        assert!(matches!(
            run_randomized(&dev, &config).unwrap_err().root(),
            Error::Budget(_)
        ));
    }
}

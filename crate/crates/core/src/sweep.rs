//! Shot-count scaling experiments on two-qubit instance families: success
//! curves over a shot grid, logistic `N*` extraction, log-log slopes and
//! calibration of the budget constant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{
    estimate_batch, ratios_from_estimates, run_randomized, support_threshold, Pivot,
    RandomizedConfig, Sampler, ZTable,
};
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, CMatrix, RMatrix, C64};
use crate::pauli::{enumerate_basis, pauli_dense, BasisFamily, PauliString};
use crate::povm::computational_povm;
use crate::sim::{gauge_offset, DensityMatrix, NoiseMatrix, RngStream, SimulatedDevice};

/// Which parameter an instance family varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// `ρ = |01⟩⟨01|`, `A(τ) = ((1-τ)I + τX)^⊗2`, `β = 1/4`; sweeps `‖A‖_u`.
    Noise,
    /// `ρ(τ) = I/4 + τ(Y⊗I + Z⊗Z)`, `A = A(0.05)`, `β = τ`; sweeps `β`.
    Beta,
}

/// Which decoding stage a trial scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Estimated support equals the true support.
    Support,
    /// Every ratio within the relative error bound.
    Ratios,
}

impl Stage {
    pub fn id(self) -> u8 {
        match self {
            Stage::Support => 1,
            Stage::Ratios => 3,
        }
    }
}

/// A ground-truth instance with the parameters handed to the decoder.
pub struct Instance {
    pub device: SimulatedDevice,
    pub beta: f64,
    pub u_norm: f64,
    pub support: Vec<PauliString>,
    pub reference: PauliString,
    /// Value of the swept quantity (`‖A‖_u` or `β`).
    pub swept: f64,
}

impl Instance {
    pub fn new(rho: DensityMatrix, noise: NoiseMatrix, beta: f64, swept: f64) -> Result<Self> {
        let n = rho.num_qubits();
        let coeffs = rho.to_coefficients();
        let support = coeffs.support(1e-12);
        let reference = *support
            .iter()
            .fold(None, |best: Option<&PauliString>, p| match best {
                Some(b) if coeffs.get(b).abs() >= coeffs.get(p).abs() => Some(b),
                _ => Some(p),
            })
            .ok_or(Error::EmptySupport)?;
        let u_norm = noise.u_norm();
        let device = SimulatedDevice::new(rho, noise, computational_povm(n)?)?;
        Ok(Instance {
            device,
            beta,
            u_norm,
            support,
            reference,
            swept,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.device.num_qubits()
    }

    /// `s_P / s_R` for the true state.
    pub fn true_ratio(&self, p: &PauliString) -> f64 {
        let s = self.device.state().to_coefficients();
        s.get(p) / s.get(&self.reference)
    }

    /// `A'(s_R)` for the true pair.
    pub fn true_gauge_noise(&self, reference: &PauliString) -> RMatrix {
        let s = self.device.state().to_coefficients().get(reference);
        let a = self.device.noise().matrix();
        let d = gauge_offset(a, self.device.povm());
        RMatrix::from_fn(a.nrows(), a.ncols(), |k, j| s * a[(k, j)] + (1.0 - s) * d[k])
    }
}

/// `((1-τ)I + τX)^⊗2`.
pub fn flip_family(tau: f64) -> Result<NoiseMatrix> {
    NoiseMatrix::tensor_flip(&[tau, tau])
}

/// `I/4 + τ(Y⊗I + Z⊗Z)`, a state for `0 ≤ τ ≤ 1/8`.
pub fn mixed_family(tau: f64) -> Result<DensityMatrix> {
    let yi = pauli_dense(&PauliString::from_label("YI")?, false)?;
    let zz = pauli_dense(&PauliString::from_label("ZZ")?, false)?;
    let scale = C64::new(tau, 0.0);
    let m = CMatrix::identity(4, 4) * C64::new(0.25, 0.0) + (yi + zz) * scale;
    DensityMatrix::new(2, m)
}

/// Instance of `protocol` at parameter `tau`.
pub fn instance(protocol: Protocol, tau: f64) -> Result<Instance> {
    match protocol {
        Protocol::Noise => {
            let a = flip_family(tau)?;
            let u = a.u_norm();
            Instance::new(DensityMatrix::basis_state("01")?, a, 0.25, u)
        }
        Protocol::Beta => Instance::new(mixed_family(tau)?, flip_family(0.05)?, tau, tau),
    }
}

/// Scores one seeded trial of `stage` with `shots` total shots.
pub fn trial_success(
    inst: &Instance,
    stage: Stage,
    shots: u64,
    seed: u64,
    epsilon: f64,
) -> Result<bool> {
    let n = inst.num_qubits();
    let sampler = Sampler::new(&inst.device, n)?;
    let stream = RngStream::new(seed, stage.id() as u64);
    match stage {
        Stage::Support => {
            let all = enumerate_basis(n, BasisFamily::TracelessPauli);
            let batch = match estimate_batch(&sampler, &all, shots, &stream) {
                Ok(b) => b,
                Err(Error::Budget(_)) => return Ok(false),
                Err(e) => return Err(e),
            };
            Ok(support_threshold(&batch, inst.beta, inst.u_norm)
                .is_ok_and(|c| c == inst.support))
        }
        Stage::Ratios => {
            let batch = match estimate_batch(&sampler, &inst.support, shots, &stream) {
                Ok(b) => b,
                Err(Error::Budget(_)) => return Ok(false),
                Err(e) => return Err(e),
            };
            let rows: Vec<usize> = (0..1usize << n).collect();
            let (i, k, _) = batch
                .strongest(&inst.reference, &rows)
                .ok_or(Error::EmptySupport)?;
            let ratios = ratios_from_estimates(
                &batch,
                &batch,
                &inst.reference,
                &inst.support,
                Pivot { i, k },
                inst.beta,
                inst.u_norm,
            );
            Ok(match ratios {
                Ok((r, _)) => r.iter().all(|(p, v)| {
                    let t = inst.true_ratio(p);
                    (v - t).abs() <= epsilon * t.abs()
                }),
                Err(Error::Conditioning { .. }) => false,
                Err(e) => return Err(e),
            })
        }
    }
}

/// Successes over `trials` seeded trials at one shot count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub beta: f64,
    pub u_norm: f64,
    #[serde(rename = "N")]
    pub shots: u64,
    pub trials: u32,
    pub successes: u32,
    pub step_id: u8,
    pub seed_base: u64,
}

impl GridPoint {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Evaluates `shots` with trial seeds `seed_base + t`, shared across shot
/// counts so that curves use common random numbers.
pub fn evaluate_point(
    inst: &Instance,
    stage: Stage,
    shots: u64,
    trials: u32,
    seed_base: u64,
    epsilon: f64,
) -> Result<GridPoint> {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| trial_success(inst, stage, shots, seed_base.wrapping_add(t as u64), epsilon))
        .collect::<Result<Vec<bool>>>()?;
    Ok(GridPoint {
        n: inst.num_qubits(),
        beta: inst.beta,
        u_norm: inst.u_norm,
        shots,
        trials,
        successes: outcomes.iter().filter(|&&s| s).count() as u32,
        step_id: stage.id(),
        seed_base,
    })
}

/// Grid search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridOptions {
    pub start: u64,
    pub cap: u64,
    /// Rate at which the upward search stops.
    pub upper_rate: f64,
    /// Rate at which the downward search stops.
    pub lower_rate: f64,
    /// Points per doubling in the refined grid.
    pub density: u32,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            start: 1 << 12,
            cap: 1 << 34,
            upper_rate: 0.98,
            lower_rate: 0.3,
            density: 2,
        }
    }
}

/// Brackets the success transition by doubling and halving from
/// `options.start`, then refines geometrically between the brackets.
pub fn adaptive_grid(
    inst: &Instance,
    stage: Stage,
    trials: u32,
    seed_base: u64,
    epsilon: f64,
    options: &GridOptions,
) -> Result<Vec<GridPoint>> {
    if trials == 0 {
        return Err(Error::Budget("zero trials".into()));
    }
    let eval = |shots: u64| evaluate_point(inst, stage, shots, trials, seed_base, epsilon);
    let mut points = vec![eval(options.start)?];
    let mut hi = options.start;
    while points.last().expect("nonempty").rate() < options.upper_rate && hi < options.cap {
        hi = hi.saturating_mul(2).min(options.cap);
        points.push(eval(hi)?);
    }
    let mut lo = options.start;
    let mut low_rate = points[0].rate();
    while low_rate > options.lower_rate && lo > 64 {
        lo /= 2;
        let p = eval(lo)?;
        low_rate = p.rate();
        points.push(p);
    }
    let steps = ((hi as f64 / lo as f64).log2() * options.density as f64).round() as u32;
    for s in 1..steps {
        let shots = (lo as f64 * 2f64.powf(s as f64 / options.density as f64)).round() as u64;
        if points.iter().all(|p| p.shots != shots) {
            points.push(eval(shots)?);
        }
    }
    points.sort_by_key(|p| p.shots);
    Ok(points)
}

/// `P(success) = σ(a + b (ln N - center))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub intercept: f64,
    pub slope: f64,
    pub center: f64,
    pub iterations: u32,
}

impl LogisticFit {
    /// Shot count at which the fitted probability equals `p`.
    pub fn shots_at(&self, p: f64) -> f64 {
        let logit = (p / (1.0 - p)).ln();
        ((logit - self.intercept) / self.slope + self.center).exp()
    }
}

const MAX_LOGISTIC_SLOPE: f64 = 200.0;

/// Newton-iterated maximum-likelihood logistic fit of success on `ln N`.
/// Returns `None` when the fit diverges (e.g. perfectly separated data).
pub fn fit_logistic(points: &[GridPoint]) -> Option<LogisticFit> {
    if points.len() < 2 {
        return None;
    }
    let total: f64 = points.iter().map(|p| p.trials as f64).sum();
    let center = points
        .iter()
        .map(|p| p.trials as f64 * (p.shots as f64).ln())
        .sum::<f64>()
        / total;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for it in 1..=200 {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for p in points {
            let x = (p.shots as f64).ln() - center;
            let prob = 1.0 / (1.0 + (-(a + b * x)).exp());
            let t = p.trials as f64;
            let r = p.successes as f64 - t * prob;
            let w = t * prob * (1.0 - prob);
            ga += r;
            gb += r * x;
            haa += w;
            hab += w * x;
            hbb += w * x * x;
        }
        let det = haa * hbb - hab * hab;
        if det.abs() < 1e-300 || !det.is_finite() {
            return None;
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        a += da;
        b += db;
        if !a.is_finite() || !b.is_finite() || b.abs() > MAX_LOGISTIC_SLOPE {
            return None;
        }
        if da.abs() < 1e-10 && db.abs() < 1e-10 {
            return (b > 0.0).then_some(LogisticFit {
                intercept: a,
                slope: b,
                center,
                iterations: it,
            });
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NStarMethod {
    Logistic,
    Interpolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NStar {
    pub value: f64,
    pub method: NStarMethod,
}

/// Linear interpolation in `ln N` of the first upward crossing of `target`.
pub fn interpolate_crossing(points: &[GridPoint], target: f64) -> Option<f64> {
    let first = points.first()?;
    if first.rate() >= target {
        return Some(first.shots as f64);
    }
    points.windows(2).find_map(|w| {
        let (p, q) = (&w[0], &w[1]);
        (p.rate() < target && q.rate() >= target).then(|| {
            let (x0, x1) = ((p.shots as f64).ln(), (q.shots as f64).ln());
            let f = (target - p.rate()) / (q.rate() - p.rate());
            (x0 + f * (x1 - x0)).exp()
        })
    })
}

/// Shot count reaching success probability `target`, by logistic fit with
/// interpolation as the fallback.
pub fn n_star(points: &[GridPoint], target: f64) -> Result<NStar> {
    if let Some(fit) = fit_logistic(points) {
        let value = fit.shots_at(target);
        if value.is_finite() && value > 0.0 {
            return Ok(NStar {
                value,
                method: NStarMethod::Logistic,
            });
        }
    }
    interpolate_crossing(points, target)
        .map(|value| NStar {
            value,
            method: NStarMethod::Interpolation,
        })
        .ok_or_else(|| Error::Budget(format!("success rate never reaches {target}")))
}

/// Ordinary least-squares line through `(x, y)`: `(slope, intercept, r²)`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, my - slope * mx, r2))
}

/// A full sweep over `taus` for one protocol and stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub protocol: Protocol,
    pub stage: Stage,
    pub taus: Vec<f64>,
    pub trials: u32,
    pub seed_base: u64,
    /// Relative error bound for the ratio stage.
    pub epsilon: f64,
    /// Success probability defining `N*`.
    pub target: f64,
    #[serde(default)]
    pub grid: GridOptions,
}

impl SweepConfig {
    /// Defaults for `protocol` and `stage` at 50 trials.
    pub fn standard(protocol: Protocol, stage: Stage, seed_base: u64) -> Self {
        let taus = match protocol {
            Protocol::Noise => vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
            Protocol::Beta => vec![0.02, 0.03, 0.045, 0.065, 0.09, 0.12],
        };
        SweepConfig {
            protocol,
            stage,
            taus,
            trials: 50,
            seed_base,
            epsilon: 1.0 / 3.0,
            target: 0.9,
            grid: GridOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummaryRow {
    pub tau: f64,
    pub swept: f64,
    pub beta: f64,
    pub u_norm: f64,
    pub n_star: f64,
    pub method: NStarMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub points: Vec<GridPoint>,
    pub summary: Vec<SweepSummaryRow>,
    /// Slope of `ln N*` against `ln` of the swept quantity.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.trials == 0 {
        return Err(Error::Budget("zero trials".into()));
    }
    if config.taus.len() < 2 {
        return Err(Error::Budget("a sweep needs at least two parameter values".into()));
    }
    let mut points = Vec::new();
    let mut summary = Vec::new();
    for &tau in &config.taus {
        let inst = instance(config.protocol, tau)?;
        let curve = adaptive_grid(
            &inst,
            config.stage,
            config.trials,
            config.seed_base,
            config.epsilon,
            &config.grid,
        )?;
        let star = n_star(&curve, config.target)?;
        summary.push(SweepSummaryRow {
            tau,
            swept: inst.swept,
            beta: inst.beta,
            u_norm: inst.u_norm,
            n_star: star.value,
            method: star.method,
        });
        points.extend(curve);
    }
    let xs: Vec<f64> = summary.iter().map(|r| r.swept.ln()).collect();
    let ys: Vec<f64> = summary.iter().map(|r| r.n_star.ln()).collect();
    let (slope, intercept, r_squared) =
        ols(&xs, &ys).ok_or_else(|| Error::Domain("degenerate sweep values".into()))?;
    Ok(SweepReport {
        config: config.clone(),
        points,
        summary,
        slope,
        intercept,
        r_squared,
    })
}

/// Settings for searching the smallest budget constant that reaches the
/// target success rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    pub candidates: Vec<f64>,
    pub trials: u32,
    pub seed_base: u64,
    pub beta: f64,
    pub epsilon_noise: f64,
    pub epsilon_ratio: f64,
    pub delta: f64,
    pub target: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            candidates: vec![0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0],
            trials: 50,
            seed_base: 0,
            beta: 0.25,
            epsilon_noise: 0.05,
            epsilon_ratio: 1.0 / 3.0,
            delta: 0.1,
            target: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub c: f64,
    pub trials: u32,
    pub successes: u32,
    pub total_shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub rows: Vec<CalibrationRow>,
    /// Smallest candidate meeting the target, if any.
    pub recommended: Option<f64>,
    /// Candidate with the highest success rate.
    pub best: f64,
}

/// Outcome of one end-to-end finite-shot run against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialScore {
    pub support_exact: bool,
    pub noise_error: f64,
    pub ratio_error: f64,
    pub shots: u64,
}

impl TrialScore {
    pub fn passes(&self, epsilon_noise: f64, epsilon_ratio: f64) -> bool {
        self.support_exact && self.noise_error <= epsilon_noise && self.ratio_error <= epsilon_ratio
    }
}

/// Runs the finite-shot pipeline and scores it; a decoding error counts as
/// a failed trial.
pub fn score_randomized(inst: &Instance, config: &RandomizedConfig) -> TrialScore {
    match run_randomized(&inst.device, config) {
        Ok(result) => {
            let truth = inst.true_gauge_noise(&result.reference);
            let s = inst.device.state().to_coefficients();
            let sr = s.get(&result.reference);
            let ratio_error = result
                .ratios
                .iter()
                .map(|(p, r)| {
                    let t = s.get(p) / sr;
                    if t == 0.0 {
                        f64::INFINITY
                    } else {
                        ((r - t) / t).abs()
                    }
                })
                .fold(0.0, f64::max);
            TrialScore {
                support_exact: result.support == inst.support,
                noise_error: max_abs_diff(&result.noise, &truth),
                ratio_error,
                shots: result.diagnostics.shots.map_or(0, |s| s.total()),
            }
        }
        Err(_) => TrialScore {
            support_exact: false,
            noise_error: f64::INFINITY,
            ratio_error: f64::INFINITY,
            shots: 0,
        },
    }
}

/// Randomized configuration for `inst` with budget constant `c`.
pub fn instance_config(inst: &Instance, cal: &CalibrationConfig, c: f64, seed: u64) -> RandomizedConfig {
    RandomizedConfig {
        n: inst.num_qubits(),
        beta: cal.beta,
        u_norm_lb: inst.u_norm,
        epsilon_noise: cal.epsilon_noise,
        epsilon_ratio: cal.epsilon_ratio,
        delta: cal.delta,
        c,
        seed,
        reuse_shots: false,
        budget: None,
        reference: None,
    }
}

/// Success counts per candidate constant; stops at the first candidate
/// reaching the target.
pub fn calibrate(inst: &Instance, cal: &CalibrationConfig) -> Result<CalibrationReport> {
    if cal.trials == 0 {
        return Err(Error::Budget("zero trials".into()));
    }
    if cal.candidates.is_empty() {
        return Err(Error::Budget("no candidate constants".into()));
    }
    let mut rows = Vec::new();
    let mut recommended = None;
    for &c in &cal.candidates {
        instance_config(inst, cal, c, 0).budget()?;
        let scores: Vec<TrialScore> = (0..cal.trials)
            .into_par_iter()
            .map(|t| score_randomized(inst, &instance_config(inst, cal, c, cal.seed_base + t as u64)))
            .collect();
        let successes = scores
            .iter()
            .filter(|s| s.passes(cal.epsilon_noise, cal.epsilon_ratio))
            .count() as u32;
        rows.push(CalibrationRow {
            c,
            trials: cal.trials,
            successes,
            total_shots: scores.iter().map(|s| s.shots).max().unwrap_or(0),
        });
        if successes as f64 >= cal.target * cal.trials as f64 {
            recommended = Some(c);
            break;
        }
    }
    let best = rows
        .iter()
        .fold((f64::NAN, -1i64), |(bc, bs), r| {
            if r.successes as i64 > bs {
                (r.c, r.successes as i64)
            } else {
                (bc, bs)
            }
        })
        .0;
    Ok(CalibrationReport {
        rows,
        recommended,
        best,
    })
}

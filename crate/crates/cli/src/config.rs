//! Experiment configuration: parsing, validation with field paths, and
//! construction of the simulated ground truth.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spamtomo::gauge::{NoisePrior, StatePrior};
use spamtomo::linalg::RMatrix;
use spamtomo::povm::random_povm;
use spamtomo::sweep::{mixed_family, flip_family, CalibrationConfig, GridOptions, Protocol, Stage, SweepConfig};
use spamtomo::{
    computational_povm, DensityMatrix, Error, NoiseMatrix, PauliString, Povm, Result, RngStream,
    StateCoefficients,
};

const STATE_STREAM: u64 = 11;
const NOISE_STREAM: u64 = 12;
const POVM_STREAM: u64 = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Computational basis state, qubit 0 first.
    Basis { bits: String },
    /// `I/4 + τ(Y⊗I + Z⊗Z)`.
    MixedFamily { tau: f64 },
    MaximallyMixed,
    RandomPure,
    /// Mixture `w |ψ⟩⟨ψ| + (1 - w) I / 2^n` with random `ψ`.
    RandomMixed { weight: f64 },
    /// Normalized Pauli coefficients keyed by label; missing labels are zero.
    Coefficients { values: BTreeMap<String, f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    Identity,
    /// Independent bit flips, one probability per qubit.
    TensorFlip { flips: Vec<f64> },
    /// `((1-τ)I + τX)^⊗2`.
    FlipFamily { tau: f64 },
    /// Every column equal to `column`.
    Erasure { column: Vec<f64> },
    /// Random column-stochastic matrix with `‖A‖_u` at least `floor`.
    Random { floor: f64 },
    /// Explicit matrix, row-major.
    Matrix { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PovmSpec {
    Computational,
    Random { outcomes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeSpec {
    None,
    Purity { nu: f64 },
    /// Probe state given by basis bits; `measured` defaults to the simulated
    /// noisy distribution of the probe.
    Probe {
        bits: String,
        #[serde(default)]
        measured: Option<Vec<f64>>,
    },
    BlockIndependent { sizes: [usize; 2] },
    Given { alpha: f64 },
    LinearPrior {
        #[serde(default)]
        state_priors: Vec<StatePrior>,
        #[serde(default)]
        noise_priors: Vec<NoisePrior>,
    },
    Bsc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomizedSpec {
    pub beta: f64,
    pub epsilon_noise: f64,
    pub epsilon_ratio: f64,
    pub delta: f64,
    pub c: f64,
    /// Lower bound on `‖A‖_u`; defaults to the true value of the simulated noise.
    pub u_norm_lb: Option<f64>,
    pub reuse_shots: bool,
    /// Physicality slack when fixing the gauge of an estimated result.
    pub validity_tol: f64,
}

impl Default for RandomizedSpec {
    fn default() -> Self {
        RandomizedSpec {
            beta: 0.25,
            epsilon_noise: 0.05,
            epsilon_ratio: 1.0 / 3.0,
            delta: 0.1,
            c: 1.0,
            u_norm_lb: None,
            reuse_shots: false,
            validity_tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub protocol: Protocol,
    pub stage: Stage,
    #[serde(default)]
    pub taus: Option<Vec<f64>>,
    #[serde(default)]
    pub trials: Option<u32>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridOptions>,
}

impl SweepSpec {
    pub fn standard(protocol: Protocol, stage: Stage) -> Self {
        SweepSpec {
            protocol,
            stage,
            taus: None,
            trials: None,
            epsilon: None,
            target: None,
            grid: None,
        }
    }

    /// Sweep settings with the standard protocol filling unset fields.
    pub fn resolve(&self, seed: u64) -> SweepConfig {
        let mut c = SweepConfig::standard(self.protocol, self.stage, seed);
        if let Some(t) = &self.taus {
            c.taus = t.clone();
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        if let Some(e) = self.epsilon {
            c.epsilon = e;
        }
        if let Some(t) = self.target {
            c.target = t;
        }
        if let Some(g) = &self.grid {
            c.grid = g.clone();
        }
        c
    }

    pub fn file_stem(&self) -> String {
        let p = match self.protocol {
            Protocol::Noise => "noise",
            Protocol::Beta => "beta",
        };
        let s = match self.stage {
            Stage::Support => "support",
            Stage::Ratios => "ratios",
        };
        format!("{p}_{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub state: StateSpec,
    pub noise: NoiseSpec,
    pub povm: PovmSpec,
    pub mode: Mode,
    pub gauge: GaugeSpec,
    /// Forces the gauge reference string of the exact decoder.
    pub reference: Option<PauliString>,
    pub randomized: RandomizedSpec,
    pub sweeps: Vec<SweepSpec>,
    pub calibration: CalibrationConfig,
    pub seed: u64,
    pub out: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 2,
            state: StateSpec::Basis { bits: "01".into() },
            noise: NoiseSpec::TensorFlip {
                flips: vec![0.1, 0.1],
            },
            povm: PovmSpec::Computational,
            mode: Mode::Exact,
            gauge: GaugeSpec::Purity { nu: 1.0 },
            reference: None,
            randomized: RandomizedSpec::default(),
            sweeps: vec![
                SweepSpec::standard(Protocol::Noise, Stage::Support),
                SweepSpec::standard(Protocol::Noise, Stage::Ratios),
                SweepSpec::standard(Protocol::Beta, Stage::Support),
                SweepSpec::standard(Protocol::Beta, Stage::Ratios),
            ],
            calibration: CalibrationConfig::default(),
            seed: 0,
            out: "out".into(),
        }
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn check_probability(path: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(path, format!("{v} is not a probability")))
    }
}

fn check_open_unit(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("{v} must lie in (0, 1)")))
    }
}

fn check_bits(path: &str, bits: &str, n: usize) -> Result<()> {
    if bits.len() != n || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(invalid(path, format!("expected {n} characters from {{0, 1}}, got {bits:?}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(path.display().to_string(), e.to_string()))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let at = e.path().to_string();
            invalid(if at == "." { "<root>".into() } else { at }, e.inner().to_string())
        })
    }

    /// Checks every field that the library would otherwise reject later,
    /// reporting the offending field path.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || n > 3 {
            return Err(invalid("n", format!("{n} qubits; supported range is 1..=3")));
        }
        let dim = 1usize << n;
        match &self.state {
            StateSpec::Basis { bits } => check_bits("state.bits", bits, n)?,
            StateSpec::MixedFamily { tau } => {
                if n != 2 {
                    return Err(invalid("state.kind", "mixed_family is a 2-qubit state"));
                }
                if !(0.0..=0.125).contains(tau) {
                    return Err(invalid("state.tau", format!("{tau} outside [0, 1/8]")));
                }
            }
            StateSpec::RandomMixed { weight } => check_probability("state.weight", *weight)?,
            StateSpec::Coefficients { values } => {
                for label in values.keys() {
                    let p = PauliString::from_label(label)
                        .map_err(|e| invalid(format!("state.values.{label}"), e.to_string()))?;
                    if p.num_qubits() != n || p.is_identity() {
                        return Err(invalid(
                            format!("state.values.{label}"),
                            format!("expected a traceless {n}-qubit label"),
                        ));
                    }
                }
            }
            StateSpec::MaximallyMixed | StateSpec::RandomPure => {}
        }
        let outcomes = match &self.povm {
            PovmSpec::Computational => dim,
            PovmSpec::Random { outcomes } => {
                if *outcomes < 2 {
                    return Err(invalid("povm.outcomes", "at least two outcomes required"));
                }
                *outcomes
            }
        };
        match &self.noise {
            NoiseSpec::TensorFlip { flips } => {
                if flips.len() != n {
                    return Err(invalid("noise.flips", format!("expected {n} entries, got {}", flips.len())));
                }
                for (i, f) in flips.iter().enumerate() {
                    check_probability(&format!("noise.flips[{i}]"), *f)?;
                }
            }
            NoiseSpec::FlipFamily { tau } => {
                if n != 2 {
                    return Err(invalid("noise.kind", "flip_family is a 2-qubit channel"));
                }
                check_probability("noise.tau", *tau)?;
            }
            NoiseSpec::Erasure { column } => {
                if column.len() != outcomes {
                    return Err(invalid("noise.column", format!("expected {outcomes} entries")));
                }
            }
            NoiseSpec::Random { floor } => check_probability("noise.floor", *floor)?,
            NoiseSpec::Matrix { rows } => {
                if rows.len() != outcomes || rows.iter().any(|r| r.len() != outcomes) {
                    return Err(invalid("noise.rows", format!("expected a {outcomes} x {outcomes} matrix")));
                }
            }
            NoiseSpec::Identity => {}
        }
        if !matches!(self.povm, PovmSpec::Computational)
            && matches!(self.noise, NoiseSpec::TensorFlip { .. } | NoiseSpec::FlipFamily { .. })
            && outcomes != dim
        {
            return Err(invalid("noise.kind", "bit-flip noise needs 2^n outcomes"));
        }
        match &self.gauge {
            GaugeSpec::Purity { nu } => {
                if !(*nu > 0.0 && *nu <= 1.0) {
                    return Err(invalid("gauge.nu", format!("{nu} outside (0, 1]")));
                }
            }
            GaugeSpec::Probe { bits, measured } => {
                check_bits("gauge.bits", bits, n)?;
                if let Some(m) = measured {
                    if m.len() != outcomes {
                        return Err(invalid("gauge.measured", format!("expected {outcomes} entries")));
                    }
                }
            }
            GaugeSpec::BlockIndependent { sizes } => {
                if sizes[0] * sizes[1] != outcomes {
                    return Err(invalid("gauge.sizes", format!("product must equal {outcomes}")));
                }
            }
            GaugeSpec::Given { alpha } => {
                if *alpha == 0.0 || !alpha.is_finite() {
                    return Err(invalid("gauge.alpha", "must be finite and nonzero"));
                }
            }
            GaugeSpec::LinearPrior { state_priors, noise_priors } => {
                for (i, p) in state_priors.iter().enumerate() {
                    if p.weights.len() != dim * dim - 1 {
                        return Err(invalid(
                            format!("gauge.state_priors[{i}].weights"),
                            format!("expected {} entries", dim * dim - 1),
                        ));
                    }
                }
                for (i, p) in noise_priors.iter().enumerate() {
                    if p.input.len() != outcomes || p.output.len() != outcomes {
                        return Err(invalid(
                            format!("gauge.noise_priors[{i}]"),
                            format!("input and output need {outcomes} entries"),
                        ));
                    }
                }
            }
            GaugeSpec::None | GaugeSpec::Bsc => {}
        }
        if let Some(r) = &self.reference {
            if r.num_qubits() != n || r.is_identity() {
                return Err(invalid("reference", format!("expected a traceless {n}-qubit label")));
            }
        }
        let r = &self.randomized;
        check_open_unit("randomized.beta", r.beta)?;
        check_open_unit("randomized.epsilon_noise", r.epsilon_noise)?;
        check_open_unit("randomized.epsilon_ratio", r.epsilon_ratio)?;
        check_open_unit("randomized.delta", r.delta)?;
        if !(r.c >= 0.0 && r.c.is_finite()) {
            return Err(invalid("randomized.c", format!("{} must be a finite nonnegative number", r.c)));
        }
        if !(r.validity_tol >= 0.0 && r.validity_tol.is_finite()) {
            return Err(invalid("randomized.validity_tol", "must be a finite nonnegative number"));
        }
        if let Some(u) = r.u_norm_lb {
            if !(u > 0.0 && u <= 1.0) {
                return Err(invalid("randomized.u_norm_lb", format!("{u} outside (0, 1]")));
            }
        }
        self.validate_sweeps()?;
        self.validate_calibration()
    }

    fn validate_sweeps(&self) -> Result<()> {
        if self.sweeps.is_empty() {
            return Err(invalid("sweeps", "at least one sweep required"));
        }
        for (i, s) in self.sweeps.iter().enumerate() {
            let c = s.resolve(self.seed);
            let at = |f: &str| format!("sweeps[{i}].{f}");
            if c.trials < 20 {
                return Err(invalid(at("trials"), format!("{} trials; at least 20 required", c.trials)));
            }
            if c.taus.len() < 2 {
                return Err(invalid(at("taus"), "at least two values required"));
            }
            for (j, t) in c.taus.iter().enumerate() {
                let ok = match s.protocol {
                    Protocol::Noise => *t >= 0.0 && *t < 0.5,
                    Protocol::Beta => *t > 0.0 && *t <= 0.125,
                };
                if !ok {
                    return Err(invalid(at(&format!("taus[{j}]")), format!("{t} outside the family's range")));
                }
            }
            check_open_unit(&at("epsilon"), c.epsilon)?;
            check_open_unit(&at("target"), c.target)?;
            if c.grid.start == 0 || c.grid.cap < c.grid.start || c.grid.density == 0 {
                return Err(invalid(at("grid"), "need 0 < start <= cap and density >= 1"));
            }
        }
        Ok(())
    }

    fn validate_calibration(&self) -> Result<()> {
        let c = &self.calibration;
        if c.trials == 0 {
            return Err(invalid("calibration.trials", "zero trials"));
        }
        if c.candidates.is_empty() {
            return Err(invalid("calibration.candidates", "no candidate constants"));
        }
        for (i, v) in c.candidates.iter().enumerate() {
            if !(*v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("calibration.candidates[{i}]"), format!("{v} is not a nonnegative number")));
            }
        }
        check_open_unit("calibration.beta", c.beta)?;
        check_open_unit("calibration.target", c.target)?;
        Ok(())
    }

    pub fn build_state(&self) -> Result<DensityMatrix> {
        let mut rng = RngStream::new(self.seed, STATE_STREAM);
        let state = match &self.state {
            StateSpec::Basis { bits } => DensityMatrix::basis_state(bits),
            StateSpec::MixedFamily { tau } => mixed_family(*tau),
            StateSpec::MaximallyMixed => DensityMatrix::maximally_mixed(self.n),
            StateSpec::RandomPure => DensityMatrix::random_pure(self.n, &mut rng),
            StateSpec::RandomMixed { weight } => DensityMatrix::random_mixed(self.n, *weight, &mut rng),
            StateSpec::Coefficients { values } => {
                let mut s = StateCoefficients::zeros(self.n);
                for (label, v) in values {
                    s.set(&PauliString::from_label(label)?, *v);
                }
                DensityMatrix::from_coefficients(&s)
            }
        };
        state.map_err(|e| invalid("state", e.to_string()))
    }

    pub fn build_noise(&self) -> Result<NoiseMatrix> {
        let mut rng = RngStream::new(self.seed, NOISE_STREAM);
        let noise = match &self.noise {
            NoiseSpec::Identity => Ok(NoiseMatrix::identity(self.outcomes())),
            NoiseSpec::TensorFlip { flips } => NoiseMatrix::tensor_flip(flips),
            NoiseSpec::FlipFamily { tau } => flip_family(*tau),
            NoiseSpec::Erasure { column } => NoiseMatrix::erasure(column),
            NoiseSpec::Random { floor } => NoiseMatrix::random_with_floor(self.outcomes(), *floor, &mut rng),
            NoiseSpec::Matrix { rows } => {
                let d = rows.len();
                NoiseMatrix::new(RMatrix::from_fn(d, d, |r, c| rows[r][c]))
            }
        };
        noise.map_err(|e| invalid("noise", e.to_string()))
    }

    pub fn build_povm(&self) -> Result<Povm> {
        let mut rng = RngStream::new(self.seed, POVM_STREAM);
        let povm = match &self.povm {
            PovmSpec::Computational => computational_povm(self.n),
            PovmSpec::Random { outcomes } => random_povm(self.n, *outcomes, &mut rng),
        };
        povm.map_err(|e| invalid("povm", e.to_string()))
    }

    pub fn outcomes(&self) -> usize {
        match &self.povm {
            PovmSpec::Computational => 1 << self.n,
            PovmSpec::Random { outcomes } => *outcomes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn validation_reports_field_paths() {
        let mut c = ExperimentConfig::default();
        c.noise = NoiseSpec::TensorFlip { flips: vec![0.1, 1.5] };
        match c.validate().unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "noise.flips[1]"),
            e => panic!("unexpected {e}"),
        }
        let mut c = ExperimentConfig::default();
        c.sweeps[2].trials = Some(5);
        match c.validate().unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "sweeps[2].trials"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: std::result::Result<ExperimentConfig, _> = serde_json::from_str(r#"{"qubits": 2}"#);
        assert!(r.is_err());
    }
}

//! The four subcommands.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use spamtomo::decoder::{check_conditions, EXACT_TOL};
use spamtomo::gauge::{
    apply_gauge_solution_within, decode_bsc, decode_linear_prior, fix_block_independent, fix_probe,
    fix_purity_within, BscSolution, LinearPriorSolution, ProbeOptions, VALIDITY_TOL,
};
use spamtomo::linalg::{max_abs_diff, to_rows, CMatrix};
use spamtomo::running_example::{run_example, Mismatch, RunningExampleReport};
use spamtomo::sweep::{calibrate, run_sweep, CalibrationReport, Instance, NStarMethod, Protocol, Stage};
use spamtomo::{
    ideal_distribution, run_exact, run_randomized, Circuit, DensityMatrix,
    Error, ExactOptions, GaugeSolution, NoiseMatrix, RandomizedConfig, SimulatedDevice,
    TomographyResult,
};

use crate::config::{ExperimentConfig, GaugeSpec, Mode, PovmSpec};
use crate::output::{Meta, OutputDir};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("golden mismatch in {} entries", .0.len())]
    Golden(Vec<Mismatch>),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.root() {
                Error::Condition { .. } => 2,
                Error::Config { .. } => 4,
                _ => 1,
            },
            CliError::Golden(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct ExampleFile<'a> {
    report: &'a RunningExampleReport,
    passed: bool,
}

/// Runs the two-qubit worked example; writes files only when `out` is set.
pub fn cmd_run_example(config: &ExperimentConfig, out: Option<&Path>) -> CliResult<()> {
    let report = run_example()?;
    print!("{report}");
    if let Some(dir) = out {
        let mut files = OutputDir::create(dir, Meta::new("run-example", config))?;
        files.json(
            "run_example.json",
            &ExampleFile {
                report: &report,
                passed: report.passed(),
            },
        )?;
        files.text("run_example.txt", &report.to_string())?;
        announce(&files);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Golden(report.mismatches))
    }
}

#[derive(Serialize)]
struct ComplexRows {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn complex_rows(m: &CMatrix) -> ComplexRows {
    let part = |f: fn(&spamtomo::linalg::C64) -> f64| {
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
            .collect()
    };
    ComplexRows {
        re: part(|z| z.re),
        im: part(|z| z.im),
    }
}

#[derive(Serialize)]
struct Reconstruction {
    state: ComplexRows,
    noise: Vec<Vec<f64>>,
    /// Largest entrywise deviation from the simulated ground truth.
    state_error: f64,
    noise_error: f64,
}

impl Reconstruction {
    fn new(rho: &DensityMatrix, a: &NoiseMatrix, truth: &(DensityMatrix, NoiseMatrix)) -> Self {
        let diff = rho.matrix() - truth.0.matrix();
        Reconstruction {
            state: complex_rows(rho.matrix()),
            noise: to_rows(a.matrix()),
            state_error: diff.iter().fold(0.0f64, |m, z| m.max(z.norm())),
            noise_error: max_abs_diff(a.matrix(), truth.1.matrix()),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "decoder", rename_all = "snake_case")]
enum DecodeReport {
    Exact {
        result: TomographyResult,
        gauge: Option<GaugeSolution>,
        reconstruction: Option<Reconstruction>,
    },
    Randomized {
        config: RandomizedConfig,
        result: TomographyResult,
        gauge: Option<GaugeSolution>,
        reconstruction: Option<Reconstruction>,
    },
    Bsc {
        solution: BscSolution,
        reconstruction: Reconstruction,
    },
    LinearPrior {
        solution: LinearPriorSolution,
        reconstruction: Reconstruction,
    },
}

fn write_matrix(s: &mut String, title: &str, rows: &[Vec<f64>]) {
    let _ = writeln!(s, "{title}");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:9.5}")).collect();
        let _ = writeln!(s, "  {}", cells.join(" "));
    }
}

fn summarize_result(s: &mut String, result: &TomographyResult) {
    let labels: Vec<String> = result.support.iter().map(|p| p.label()).collect();
    let _ = writeln!(s, "support = {{{}}}", labels.join(", "));
    let _ = writeln!(
        s,
        "reference = {}, pivot (i, k) = ({}, {})",
        result.reference, result.pivot.i, result.pivot.k
    );
    for (p, r) in &result.ratios {
        let _ = writeln!(s, "s_{p} / s_{} = {r:.6}", result.reference);
    }
    write_matrix(s, &format!("A'(s_{})", result.reference), &to_rows(&result.noise));
}

fn summarize_reconstruction(s: &mut String, r: &Reconstruction) {
    write_matrix(s, "rho (real part)", &r.state.re);
    write_matrix(s, "rho (imaginary part)", &r.state.im);
    write_matrix(s, "A", &r.noise);
    let _ = writeln!(s, "max error vs ground truth: state {:.3e}, noise {:.3e}", r.state_error, r.noise_error);
}

fn randomized_config(config: &ExperimentConfig, a: &NoiseMatrix) -> RandomizedConfig {
    let r = &config.randomized;
    let mut c = RandomizedConfig::new(
        config.n,
        r.beta,
        r.u_norm_lb.unwrap_or_else(|| a.u_norm()),
        r.epsilon_noise,
        r.delta,
        config.seed,
    );
    c.epsilon_ratio = r.epsilon_ratio;
    c.c = r.c;
    c.reuse_shots = r.reuse_shots;
    c.reference = config.reference;
    c
}

fn fix_gauge(
    config: &ExperimentConfig,
    result: &TomographyResult,
    device: &SimulatedDevice,
    tol: f64,
) -> CliResult<Option<GaugeSolution>> {
    let povm = device.povm();
    let sol = match &config.gauge {
        GaugeSpec::None => return Ok(None),
        GaugeSpec::Purity { nu } => fix_purity_within(result, *nu, povm, tol)?,
        GaugeSpec::Probe { bits, measured } => {
            let probe = DensityMatrix::basis_state(bits)?;
            let measured = match measured {
                Some(m) => m.clone(),
                None => {
                    let y = ideal_distribution(&probe, &Circuit::identity(config.n), povm)?;
                    device.noise().apply(&y)?
                }
            };
            fix_probe(result, &probe, &measured, povm, &ProbeOptions::default())?
        }
        GaugeSpec::BlockIndependent { sizes } => fix_block_independent(result, (sizes[0], sizes[1]), povm)?,
        GaugeSpec::Given { alpha } => GaugeSolution::given(*alpha),
        GaugeSpec::LinearPrior { .. } | GaugeSpec::Bsc => unreachable!("handled as a separate decoder"),
    };
    Ok(Some(sol))
}

fn decode_report(config: &ExperimentConfig) -> CliResult<(DecodeReport, String)> {
    let rho = config.build_state()?;
    let a = config.build_noise()?;
    let povm = config.build_povm()?;
    check_conditions(&rho, &a, &povm, EXACT_TOL)?;
    let truth = (rho.clone(), a.clone());
    let device = SimulatedDevice::new(rho.clone(), a.clone(), povm.clone())?;
    let mut text = String::new();
    match &config.gauge {
        GaugeSpec::Bsc => {
            let solution = decode_bsc(&device, config.n, EXACT_TOL)?;
            let fixed = DensityMatrix::from_coefficients(&solution.state_coefficients(config.n))?;
            let rec = Reconstruction::new(&fixed, &solution.model.noise_matrix()?, &truth);
            let flips: Vec<String> = solution.model.flips.iter().map(|f| format!("{f:.6}")).collect();
            let _ = writeln!(text, "decoder: bit-flip model\nflip probabilities = [{}]", flips.join(", "));
            summarize_reconstruction(&mut text, &rec);
            return Ok((DecodeReport::Bsc { solution, reconstruction: rec }, text));
        }
        GaugeSpec::LinearPrior { state_priors, noise_priors } => {
            let solution = decode_linear_prior(&device, &povm, state_priors, noise_priors, EXACT_TOL)?;
            let fixed = DensityMatrix::from_coefficients(&solution.coefficients)?;
            let rec = Reconstruction::new(&fixed, &NoiseMatrix::new(solution.noise.clone())?, &truth);
            let _ = writeln!(text, "decoder: linear priors");
            summarize_reconstruction(&mut text, &rec);
            return Ok((DecodeReport::LinearPrior { solution, reconstruction: rec }, text));
        }
        _ => {}
    }
    let (result, rcfg) = match config.mode {
        Mode::Exact => {
            let options = ExactOptions {
                reference: config.reference,
                ..ExactOptions::default()
            };
            (run_exact(&rho, &a, &povm, &options)?, None)
        }
        Mode::Randomized => {
            if !matches!(config.povm, PovmSpec::Computational) {
                return Err(Error::Config {
                    path: "mode".into(),
                    message: "the randomized decoder needs computational readout".into(),
                }
                .into());
            }
            let rcfg = randomized_config(config, &a);
            (run_randomized(&device, &rcfg)?, Some(rcfg))
        }
    };
    let _ = writeln!(text, "decoder: {}", if rcfg.is_some() { "randomized" } else { "exact" });
    summarize_result(&mut text, &result);
    if let (Some(c), Some(u)) = (&rcfg, &result.diagnostics.shots) {
        let _ = writeln!(
            text,
            "shots: support {}, noise {}, pivot {}, ratios {} (c = {})",
            u.support, u.noise, u.pivot, u.ratios, c.c
        );
    }
    let tol = match config.mode {
        Mode::Exact => VALIDITY_TOL,
        Mode::Randomized => config.randomized.validity_tol,
    };
    let gauge = fix_gauge(config, &result, &device, tol)?;
    let reconstruction = match &gauge {
        Some(g) => {
            let (rho_hat, a_hat) = apply_gauge_solution_within(&result, g, &povm, tol)?;
            let _ = writeln!(text, "gauge: {:?}, s_{} = {:.6}", g.method, result.reference, g.alpha);
            let rec = Reconstruction::new(&rho_hat, &a_hat, &truth);
            summarize_reconstruction(&mut text, &rec);
            Some(rec)
        }
        None => {
            let _ = writeln!(text, "gauge: not fixed");
            None
        }
    };
    let report = match rcfg {
        None => DecodeReport::Exact {
            result,
            gauge,
            reconstruction,
        },
        Some(config) => DecodeReport::Randomized {
            config,
            result,
            gauge,
            reconstruction,
        },
    };
    Ok((report, text))
}

pub fn cmd_decode(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let (report, text) = decode_report(config)?;
    print!("{text}");
    let mut files = OutputDir::create(out, Meta::new("decode", config))?;
    files.json("decode.json", &report)?;
    files.text("decode.txt", &text)?;
    announce(&files);
    Ok(())
}

#[derive(Serialize)]
struct SummaryCsvRow {
    protocol: Protocol,
    stage: Stage,
    tau: f64,
    swept: f64,
    beta: f64,
    u_norm: f64,
    n_star: f64,
    method: NStarMethod,
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

pub fn cmd_scaling(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let mut files = OutputDir::create(out, Meta::new("scaling", config))?;
    for spec in &config.sweeps {
        let sweep = spec.resolve(config.seed);
        let report = run_sweep(&sweep)?;
        let stem = spec.file_stem();
        files.csv(&format!("scaling_{stem}.csv"), &report.points)?;
        let rows: Vec<SummaryCsvRow> = report
            .summary
            .iter()
            .map(|r| SummaryCsvRow {
                protocol: sweep.protocol,
                stage: sweep.stage,
                tau: r.tau,
                swept: r.swept,
                beta: r.beta,
                u_norm: r.u_norm,
                n_star: r.n_star,
                method: r.method,
                slope: report.slope,
                intercept: report.intercept,
                r_squared: report.r_squared,
            })
            .collect();
        files.csv(&format!("scaling_{stem}_summary.csv"), &rows)?;
        let fallbacks = rows.iter().filter(|r| r.method == NStarMethod::Interpolation).count();
        println!(
            "{stem}: slope {:.3} (r^2 {:.3}) over {} points, {} interpolated",
            report.slope,
            report.r_squared,
            rows.len(),
            fallbacks
        );
    }
    announce(&files);
    Ok(())
}

#[derive(Serialize)]
struct CalibrationFile<'a> {
    settings: &'a spamtomo::sweep::CalibrationConfig,
    u_norm: f64,
    report: &'a CalibrationReport,
}

pub fn cmd_calibrate(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    if !matches!(config.povm, PovmSpec::Computational) {
        return Err(Error::Config {
            path: "povm".into(),
            message: "calibration runs the randomized decoder, which needs computational readout".into(),
        }
        .into());
    }
    let rho = config.build_state()?;
    let a = config.build_noise()?;
    check_conditions(&rho, &a, &spamtomo::computational_povm(config.n)?, EXACT_TOL)?;
    let mut settings = config.calibration.clone();
    settings.seed_base = config.seed;
    let u = a.u_norm();
    let inst = Instance::new(rho, a, settings.beta, u)?;
    let report = calibrate(&inst, &settings)?;
    for r in &report.rows {
        println!("c = {:5}: {}/{} trials passed, {} shots", r.c, r.successes, r.trials, r.total_shots);
    }
    match report.recommended {
        Some(c) => println!("recommended c = {c}"),
        None => println!("no candidate reached the target; best c = {}", report.best),
    }
    let mut files = OutputDir::create(out, Meta::new("calibrate", config))?;
    files.json(
        "calibration.json",
        &CalibrationFile {
            settings: &settings,
            u_norm: u,
            report: &report,
        },
    )?;
    announce(&files);
    Ok(())
}

fn announce(files: &OutputDir) {
    for p in files.written() {
        eprintln!("wrote {}", p.display());
    }
}

//! Two-qubit worked example: `ρ = |01⟩⟨01|` under `A = (0.9 I + 0.1 X)^⊗2`
//! with computational readout, checked against its published two-decimal values.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decoder::{compute_all_z, run_exact, ExactOptions, TomographyResult, ZTable};
use crate::eliminators::PlanCache;
use crate::error::Result;
use crate::gauge::{apply_gauge_solution, fix_purity, GaugeSolution};
use crate::linalg::to_rows;
use crate::pauli::PauliString;
use crate::povm::computational_povm;
use crate::sim::{DensityMatrix, NoiseMatrix, SimulatedDevice};

/// Largest accepted deviation from a printed two-decimal value.
pub const GOLDEN_TOL: f64 = 0.005;

pub const EXPECTED_Z_IDENTITY: [f64; 4] = [0.25; 4];

pub const EXPECTED_Z_ZI: [[f64; 4]; 4] = [
    [0.53, 0.17, 0.17, 0.13],
    [0.17, 0.53, 0.13, 0.17],
    [0.17, 0.13, 0.53, 0.17],
    [0.13, 0.17, 0.17, 0.53],
];

/// Shared by `z^{IZ}` and `z^{ZZ}`.
pub const EXPECTED_Z_IZ: [[f64; 4]; 4] = [
    [-0.03, 0.33, 0.33, 0.37],
    [0.33, -0.03, 0.37, 0.33],
    [0.33, 0.37, -0.03, 0.33],
    [0.37, 0.33, 0.33, -0.03],
];

pub const EXPECTED_RATIOS: [(&str, f64); 2] = [("IZ", -1.0), ("ZZ", -1.0)];

/// One entry outside [`GOLDEN_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub quantity: String,
    pub row: usize,
    pub col: usize,
    pub expected: f64,
    pub actual: f64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}][{}]: expected {:.4}, got {:.6}",
            self.quantity, self.row, self.col, self.expected, self.actual
        )
    }
}

/// Tables are indexed `[k][i]` (row = outcome `k`, column = input `i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningExampleReport {
    pub z_identity: Vec<f64>,
    pub z_zi: Vec<Vec<f64>>,
    pub z_iz: Vec<Vec<f64>>,
    pub z_zz: Vec<Vec<f64>>,
    pub result: TomographyResult,
    pub gauge: GaugeSolution,
    pub rho_real: Vec<Vec<f64>>,
    pub noise_fixed: Vec<Vec<f64>>,
    pub mismatches: Vec<Mismatch>,
}

impl RunningExampleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn table<Z: ZTable>(z: &Z, label: &str) -> Result<Vec<Vec<f64>>> {
    let p = PauliString::from_label(label)?;
    let columns: Vec<Vec<f64>> = (0..4)
        .map(|i| z.z_pi(&p, i).expect("traceless two-qubit string"))
        .collect();
    Ok((0..4).map(|k| columns.iter().map(|c| c[k]).collect()).collect())
}

fn compare(out: &mut Vec<Mismatch>, quantity: &str, expected: &[Vec<f64>], actual: &[Vec<f64>]) {
    for (row, (e, a)) in expected.iter().zip(actual).enumerate() {
        for (col, (&e, &a)) in e.iter().zip(a).enumerate() {
            if (e - a).abs() > GOLDEN_TOL {
                out.push(Mismatch {
                    quantity: quantity.into(),
                    row,
                    col,
                    expected: e,
                    actual: a,
                });
            }
        }
    }
}

fn rows(m: &[[f64; 4]]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

/// Ground truth of the example.
pub fn example_pair() -> Result<(DensityMatrix, NoiseMatrix)> {
    Ok((
        DensityMatrix::basis_state("01")?,
        NoiseMatrix::tensor_flip(&[0.1, 0.1])?,
    ))
}

/// Runs the exact pipeline with reference `ZI`, fixes the gauge from purity 1
/// and lists every entry outside the golden tolerance.
pub fn run_example() -> Result<RunningExampleReport> {
    let (rho, a) = example_pair()?;
    let povm = computational_povm(2)?;
    let device = SimulatedDevice::new(rho.clone(), a.clone(), povm.clone())?;
    let z = compute_all_z(&device, &PlanCache::computational(2))?;
    let options = ExactOptions {
        reference: Some(PauliString::from_label("ZI")?),
        ..ExactOptions::default()
    };
    let result = run_exact(&rho, &a, &povm, &options)?;
    let gauge = fix_purity(&result, 1.0, &povm)?;
    let (rho_fixed, a_fixed) = apply_gauge_solution(&result, &gauge, &povm)?;

    let z_zi = table(&z, "ZI")?;
    let z_iz = table(&z, "IZ")?;
    let z_zz = table(&z, "ZZ")?;
    let noise = to_rows(&result.noise);
    let rho_real: Vec<Vec<f64>> = (0..4)
        .map(|r| (0..4).map(|c| rho_fixed.matrix()[(r, c)].re).collect())
        .collect();
    let noise_fixed = to_rows(a_fixed.matrix());

    let mut mismatches = Vec::new();
    compare(
        &mut mismatches,
        "z_I",
        &[EXPECTED_Z_IDENTITY.to_vec()],
        &[z.z_identity().to_vec()],
    );
    compare(&mut mismatches, "z_ZI", &rows(&EXPECTED_Z_ZI), &z_zi);
    compare(&mut mismatches, "z_IZ", &rows(&EXPECTED_Z_IZ), &z_iz);
    compare(&mut mismatches, "z_ZZ", &rows(&EXPECTED_Z_IZ), &z_zz);
    compare(&mut mismatches, "A'(s_ZI)", &rows(&EXPECTED_Z_ZI), &noise);
    let expected_ratios: Vec<f64> = EXPECTED_RATIOS.iter().map(|(_, v)| *v).collect();
    let actual_ratios = EXPECTED_RATIOS
        .iter()
        .map(|(l, _)| Ok(result.ratio(&PauliString::from_label(l)?).unwrap_or(f64::NAN)))
        .collect::<Result<Vec<f64>>>()?;
    compare(&mut mismatches, "ratios", &[expected_ratios], &[actual_ratios.clone()]);
    if actual_ratios.iter().any(|r| r.is_nan()) {
        mismatches.push(Mismatch {
            quantity: "ratios".into(),
            row: 0,
            col: 0,
            expected: -1.0,
            actual: f64::NAN,
        });
    }
    let true_rho: Vec<Vec<f64>> = (0..4)
        .map(|r| (0..4).map(|c| rho.matrix()[(r, c)].re).collect())
        .collect();
    compare(&mut mismatches, "rho", &true_rho, &rho_real);
    compare(&mut mismatches, "A", &to_rows(a.matrix()), &noise_fixed);

    Ok(RunningExampleReport {
        z_identity: z.z_identity().to_vec(),
        z_zi,
        z_iz,
        z_zz,
        result,
        gauge,
        rho_real,
        noise_fixed,
        mismatches,
    })
}

fn write_matrix(f: &mut fmt::Formatter<'_>, title: &str, m: &[Vec<f64>]) -> fmt::Result {
    writeln!(f, "{title}")?;
    for row in m {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:7.4}")).collect();
        writeln!(f, "  {}", cells.join(" "))?;
    }
    Ok(())
}

impl fmt::Display for RunningExampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zi: Vec<String> = self.z_identity.iter().map(|v| format!("{v:.4}")).collect();
        writeln!(f, "z^I = [{}]", zi.join(", "))?;
        write_matrix(f, "z^{ZI} [k][i]", &self.z_zi)?;
        write_matrix(f, "z^{IZ} [k][i]", &self.z_iz)?;
        write_matrix(f, "z^{ZZ} [k][i]", &self.z_zz)?;
        let labels: Vec<String> = self.result.support.iter().map(|p| p.label()).collect();
        writeln!(f, "support = {{{}}}", labels.join(", "))?;
        writeln!(
            f,
            "reference = {}, pivot (i, k) = ({}, {})",
            self.result.reference, self.result.pivot.i, self.result.pivot.k
        )?;
        write_matrix(f, "A'(s_ZI)", &to_rows(&self.result.noise))?;
        for (p, r) in &self.result.ratios {
            writeln!(f, "s_{p} / s_{} = {r:.4}", self.result.reference)?;
        }
        writeln!(f, "purity gauge: s_{} = {:.4}", self.result.reference, self.gauge.alpha)?;
        write_matrix(f, "rho (real part)", &self.rho_real)?;
        write_matrix(f, "A", &self.noise_fixed)?;
        if self.passed() {
            writeln!(f, "golden check: PASS (tolerance {GOLDEN_TOL})")
        } else {
            writeln!(f, "golden check: FAIL")?;
            for m in &self.mismatches {
                writeln!(f, "  {m}")?;
            }
            Ok(())
        }
    }
}

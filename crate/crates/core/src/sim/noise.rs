use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::RMatrix;

pub const NOISE_TOL: f64 = 1e-10;

/// Column-stochastic readout noise: observed `ỹ = A y`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMatrix {
    a: RMatrix,
}

impl NoiseMatrix {
    pub fn new(a: RMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "noise matrix is {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if let Some(v) = a.iter().find(|v| **v < -NOISE_TOL || **v > 1.0 + NOISE_TOL) {
            return Err(Error::InvalidNoise(format!("entry {v} outside [0, 1]")));
        }
        for (c, col) in a.column_iter().enumerate() {
            let s = col.sum();
            if (s - 1.0).abs() > NOISE_TOL {
                return Err(Error::InvalidNoise(format!("column {c} sums to {s}")));
            }
        }
        Ok(NoiseMatrix { a })
    }

    pub fn identity(d: usize) -> Self {
        NoiseMatrix {
            a: RMatrix::identity(d, d),
        }
    }

    /// `⊗_i [[1-p_i, p_i], [p_i, 1-p_i]]`, qubit 0 as the left factor.
    pub fn tensor_flip(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidNoise("no flip probabilities".into()));
        }
        let mut a = RMatrix::identity(1, 1);
        for &p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("flip probability {p}")));
            }
            let f = RMatrix::from_row_slice(2, 2, &[1.0 - p, p, p, 1.0 - p]);
            a = a.kronecker(&f);
        }
        Ok(NoiseMatrix { a })
    }

    /// Every column equal to `column`; the output ignores the input.
    pub fn erasure(column: &[f64]) -> Result<Self> {
        let d = column.len();
        NoiseMatrix::new(RMatrix::from_fn(d, d, |r, _| column[r]))
    }

    /// `(1 - w) I + w R` with `R` a random column-stochastic matrix.
    pub fn random<R: Rng + ?Sized>(d: usize, w: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Domain(format!("noise strength {w} outside [0, 1]")));
        }
        let mut r = RMatrix::from_fn(d, d, |_, _| rng.random::<f64>());
        for mut col in r.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        NoiseMatrix::new(RMatrix::identity(d, d) * (1.0 - w) + r * w)
    }

    /// Random noise with `u_norm >= floor`, resampling the strength as needed.
    pub fn random_with_floor<R: Rng + ?Sized>(d: usize, floor: f64, rng: &mut R) -> Result<Self> {
        for _ in 0..1000 {
            let w = rng.random::<f64>();
            let a = NoiseMatrix::random(d, w, rng)?;
            if a.u_norm() >= floor {
                return Ok(a);
            }
        }
        Err(Error::Domain(format!("could not reach u_norm {floor}")))
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.a
    }

    pub fn into_matrix(self) -> RMatrix {
        self.a
    }

    /// `max_{k,k'} |A_kk' - mean_i A_ki|`; zero exactly for erasure channels.
    pub fn u_norm(&self) -> f64 {
        u_norm_of(&self.a)
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        apply_noise(y, self)
    }

    pub fn kron(&self, other: &NoiseMatrix) -> NoiseMatrix {
        NoiseMatrix {
            a: self.a.kronecker(&other.a),
        }
    }
}

pub(crate) fn u_norm_of(a: &RMatrix) -> f64 {
    let d = a.ncols() as f64;
    let mut worst = 0.0f64;
    for row in a.row_iter() {
        let mean = row.sum() / d;
        for v in row.iter() {
            worst = worst.max((v - mean).abs());
        }
    }
    worst
}

pub fn u_norm(a: &NoiseMatrix) -> f64 {
    a.u_norm()
}

/// `ỹ_k = Σ_k' A_kk' y_k'`.
pub fn apply_noise(y: &[f64], a: &NoiseMatrix) -> Result<Vec<f64>> {
    if y.len() != a.dim() {
        return Err(Error::Dimension(format!(
            "distribution of length {} for a {}-outcome noise matrix",
            y.len(),
            a.dim()
        )));
    }
    Ok((0..a.dim())
        .map(|k| (0..a.dim()).map(|j| a.a[(k, j)] * y[j]).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn running_example_noise() {
        let a = NoiseMatrix::tensor_flip(&[0.1, 0.1]).unwrap();
        let y = a.apply(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        let expect = [0.09, 0.81, 0.01, 0.09];
        for (v, e) in y.iter().zip(expect) {
            assert!((v - e).abs() < 1e-15);
        }
        assert!((a.u_norm() - 0.56).abs() < 1e-14);
    }

    #[test]
    fn erasure_ignores_input() {
        let a = NoiseMatrix::erasure(&[0.3, 0.7]).unwrap();
        let y1 = a.apply(&[1.0, 0.0]).unwrap();
        let y2 = a.apply(&[0.2, 0.8]).unwrap();
        assert!((y1[0] - y2[0]).abs() < 1e-15);
        assert_eq!(a.u_norm(), 0.0);
    }

    #[test]
    fn identity_is_noiseless() {
        let a = NoiseMatrix::identity(3);
        assert_eq!(a.apply(&[0.2, 0.3, 0.5]).unwrap(), vec![0.2, 0.3, 0.5]);
    }

    #[test]
    fn random_noise_is_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = NoiseMatrix::random_with_floor(8, 0.05, &mut rng).unwrap();
        assert!(a.u_norm() >= 0.05);
        assert!(NoiseMatrix::new(a.matrix().clone()).is_ok());
    }

    #[test]
    fn rejects_non_stochastic() {
        let m = RMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.4, 0.5]);
        assert!(matches!(NoiseMatrix::new(m), Err(Error::InvalidNoise(_))));
        assert!(apply_noise(&[1.0], &NoiseMatrix::identity(2)).is_err());
    }
}

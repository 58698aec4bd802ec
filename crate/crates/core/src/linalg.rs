//! Small dense linear-algebra helpers shared by the modules.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest deviation from Hermiticity, `max |m_ij - conj(m_ji)|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// `Re Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().copied().sum()
}

/// Inverse square root of a positive-definite Hermitian matrix.
pub fn inv_sqrt_hermitian(m: &CMatrix) -> CMatrix {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let d = eig.eigenvalues.map(|v| C64::new(1.0 / v.sqrt(), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

/// Thin SVD `(U, σ, V)` with `m = U diag(σ) Vᵀ`, σ descending.
pub fn thin_svd(m: &RMatrix) -> (RMatrix, Vec<f64>, RMatrix) {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return (RMatrix::zeros(r, 0), Vec::new(), RMatrix::zeros(c, 0));
    }
    let f = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)]);
    let svd = f.thin_svd().expect("SVD of a finite matrix");
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    (
        RMatrix::from_fn(r, k, |i, j| u[(i, j)]),
        (0..k).map(|i| s[i]).collect(),
        RMatrix::from_fn(c, k, |i, j| v[(i, j)]),
    )
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &RMatrix, rel_tol: f64) -> usize {
    let (_, sv, _) = thin_svd(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &RMatrix, rel_tol: f64) -> RMatrix {
    let (u, sv, _) = thin_svd(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..sv.len())
        .filter(|&i| max > 0.0 && sv[i] > rel_tol * max)
        .collect();
    RMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Minimum-norm least-squares solution of `a x = b` and the max-abs residual.
pub fn least_squares(a: &RMatrix, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let (u, sv, v) = thin_svd(a);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let eps = (1e-12 * max).max(f64::MIN_POSITIVE);
    let ub = u.transpose() * b;
    let scaled = DVector::from_fn(sv.len(), |i, _| if sv[i] > eps { ub[i] / sv[i] } else { 0.0 });
    let x = v * scaled;
    let r = a * &x - b;
    let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (x, res)
}

pub fn max_abs(m: &RMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_diff(a: &RMatrix, b: &RMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Row-major nested vectors, used for serialization.
pub fn to_rows(m: &RMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Option<RMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(RMatrix::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

/// Serde adapter storing a real matrix as row-major nested arrays.
pub mod serde_rows {
    use super::{from_rows, to_rows, RMatrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &RMatrix, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RMatrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_duplicated_rows() {
        let m = RMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(numerical_rank(&m, 1e-9), 2);
    }

    #[test]
    fn inverse_sqrt_roundtrip() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(2.0, 0.0), C64::new(0.5, 0.3), C64::new(0.5, -0.3), C64::new(1.0, 0.0)],
        );
        let s = inv_sqrt_hermitian(&m);
        let back = &s * &m * &s;
        assert!((back - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn least_squares_exact_system() {
        let a = RMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, -1.0, 2.0, 0.0]);
        let b = DVector::from_vec(vec![3.0, -1.0, 2.0]);
        let (x, res) = least_squares(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn rank_one_with_opposite_columns() {
        let m = RMatrix::from_row_slice(
            4,
            2,
            &[0.0, 0.0, 0.3042, -0.3042, 0.0471, -0.0471, 0.0261, -0.0261],
        );
        let (u, sv, v) = thin_svd(&m);
        let back = &u * RMatrix::from_diagonal(&DVector::from_vec(sv)) * v.transpose();
        assert!((back - &m).amax() < 1e-14);
        let b = column_space(&m, 1e-9);
        assert_eq!(b.ncols(), 1);
        assert!(b[(0, 0)].abs() < 1e-14);
        let col = m.column(0) / m.column(0).norm();
        assert!((b.column(0).dot(&col).abs() - 1.0).abs() < 1e-12);
    }
}

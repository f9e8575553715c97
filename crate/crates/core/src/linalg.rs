//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

pub type CMatrix = DMatrix<C64>;

/// Relative singular-value threshold used for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of the right nullspace of `h` (n_rows x n_cols), as the
/// right-singular vectors whose singular values fall below
/// `RANK_TOL * sigma_max`. Returns the basis (n_cols x (n_cols - r)) and the
/// rank `r`. The basis has zero columns when `h` has full column rank.
pub fn nullspace_basis(h: &CMatrix) -> (CMatrix, usize) {
    let (rows, cols) = h.shape();
    // Pad wide matrices to square so the decomposition returns the full V.
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(h);
        p
    } else {
        h.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = sigma_max * RANK_TOL;

    let null_rows: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| sigma_max == 0.0 || **s <= tol)
        .map(|(i, _)| i)
        .collect();
    let rank = cols - null_rows.len();
    let mut basis = CMatrix::zeros(cols, null_rows.len());
    for (c, &i) in null_rows.iter().enumerate() {
        for k in 0..cols {
            basis[(k, c)] = v_t[(i, k)].conj();
        }
    }
    (basis, rank)
}

/// `c^{-1/2}` for a Hermitian positive-definite matrix, through the
/// eigendecomposition. Eigenvalues are floored at `1e-12 * trace`.
pub fn hermitian_inv_sqrt(c: &CMatrix) -> Result<CMatrix> {
    if !c.is_square() {
        return Err(Error::Linalg("covariance is not square".into()));
    }
    let trace: f64 = (0..c.nrows()).map(|i| c[(i, i)].re).sum();
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(Error::Linalg(format!("covariance trace {trace} is not positive")));
    }
    let eig = c.clone().symmetric_eigen();
    let floor = 1e-12 * trace;
    if eig.eigenvalues.iter().any(|&l| l < -floor) {
        return Err(Error::Linalg("covariance is not positive definite".into()));
    }
    let q = &eig.eigenvectors;
    let inv_sqrt = eig.eigenvalues.map(|l| C64::new(1.0 / l.max(floor).sqrt(), 0.0));
    Ok(q * CMatrix::from_diagonal(&inv_sqrt) * q.adjoint())
}

/// Frobenius norm.
pub fn fro(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn explicit_nullspace() {
        let h = CMatrix::from_row_slice(2, 3, &[c(1.0), c(0.0), c(0.0), c(0.0), c(1.0), c(0.0)]);
        let (basis, rank) = nullspace_basis(&h);
        assert_eq!(rank, 2);
        assert_eq!(basis.ncols(), 1);
        assert!(fro(&(&h * &basis)) < 1e-12);
        assert!((basis[(2, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_rank_square_has_empty_basis() {
        let h = CMatrix::from_row_slice(2, 2, &[c(2.0), c(1.0), c(0.5), c(3.0)]);
        let (basis, rank) = nullspace_basis(&h);
        assert_eq!(rank, 2);
        assert_eq!(basis.ncols(), 0);
    }

    #[test]
    fn zero_matrix_nullspace_is_everything() {
        let h = CMatrix::zeros(1, 3);
        let (basis, rank) = nullspace_basis(&h);
        assert_eq!(rank, 0);
        assert_eq!(basis.ncols(), 3);
    }

    #[test]
    fn rank_deficient_rows() {
        // two identical rows: rank 1, nullspace of dimension 2
        let h = CMatrix::from_row_slice(2, 3, &[c(1.0), c(2.0), c(3.0), c(1.0), c(2.0), c(3.0)]);
        let (basis, rank) = nullspace_basis(&h);
        assert_eq!(rank, 1);
        assert_eq!(basis.ncols(), 2);
        assert!(fro(&(&h * &basis)) < 1e-12);
    }

    #[test]
    fn inv_sqrt_squares_to_inverse() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0), C64::new(0.5, 0.3), C64::new(0.5, -0.3), c(1.0)]);
        let s = hermitian_inv_sqrt(&a).unwrap();
        let prod = &s * &a * &s;
        assert!(fro(&(prod - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        assert!(hermitian_inv_sqrt(&a).is_err());
    }
}

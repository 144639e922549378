//! Projection and least squares through the Gram matrix.

use num_complex::Complex64;

use super::eig::hermitian_eig;
use super::{CMatrix, CONDITION_LIMIT};
use crate::error::{Error, Result};

/// Inverse of the Gram matrix `A^H A` with a condition-number guard on `A`.
fn gram_inverse(a: &CMatrix) -> Result<CMatrix> {
    let gram = a.hermitian_transpose().matmul(a)?;
    let eig = hermitian_eig(&gram)?;
    let lam_max = eig.eigenvalues[0];
    let lam_min = *eig.eigenvalues.last().unwrap();
    // kappa(A) = sqrt(lambda_max / lambda_min) of the Gram matrix.
    let cond = if lam_min <= 0.0 {
        f64::INFINITY
    } else {
        (lam_max / lam_min).sqrt()
    };
    if !cond.is_finite() || cond >= CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    let m = gram.rows();
    let v = &eig.eigenvectors;
    Ok(CMatrix::from_fn(m, m, |i, j| {
        (0..m)
            .map(|k| v[(i, k)] * (1.0 / eig.eigenvalues[k]) * v[(j, k)].conj())
            .sum()
    }))
}

/// Orthogonal projector `P = A (A^H A)^{-1} A^H` onto the column span of `A`.
///
/// Fails with a conditioning error when the columns are not numerically
/// independent.
pub fn projector(columns: &CMatrix) -> Result<CMatrix> {
    let ginv = gram_inverse(columns)?;
    columns
        .matmul(&ginv)?
        .matmul(&columns.hermitian_transpose())
}

/// Solves `argmin_s ||y - A s||^2` for full-column-rank `A`.
pub fn least_squares(a: &CMatrix, y: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: format!("least_squares: {} rows vs len {}", a.rows(), y.len()),
        });
    }
    let ginv = gram_inverse(a)?;
    let ahy = a.hermitian_transpose().mul_vec(y)?;
    ginv.mul_vec(&ahy)
}

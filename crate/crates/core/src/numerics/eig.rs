//! Hermitian eigendecomposition via cyclic Jacobi rotations.

use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

/// Tolerance for the Hermitian-input precondition, relative to the largest
/// entry magnitude.
const HERMITIAN_TOL: f64 = 1e-10;

/// Sweep cap; Jacobi converges quadratically, well under this for n <= 16.
const MAX_SWEEPS: usize = 64;

/// Eigenvalues (sorted descending) and the matching orthonormal
/// eigenvector columns of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// Reconstructs `V diag(lambda) V^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)].conj())
                .sum()
        })
    }
}

/// Diagonalizes a Hermitian matrix with cyclic Jacobi rotations.
///
/// Eigenvalues come back sorted descending; eigenvector columns are
/// orthonormal and ordered to match.
pub fn hermitian_eig(a: &CMatrix) -> Result<EigenDecomposition> {
    if a.rows() != a.cols() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let tol = HERMITIAN_TOL * a.max_abs().max(1.0);
    let dev = a.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian { max_dev: dev, tol });
    }

    let n = a.rows();
    // Symmetrize so rounding in the input cannot bias the iteration.
    let mut w = CMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);

    let scale = w.frobenius_norm().max(f64::MIN_POSITIVE);
    let target = 1e-14 * scale;

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let off = off_diagonal_norm(&w);
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&w) > target {
        return Err(Error::EigNoConvergence {
            sweeps,
            off_diag: off_diagonal_norm(&w),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation zeroing `w[(p, q)]`, accumulated into `v`.
fn rotate(w: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    // Smaller-magnitude root of t^2 - 2*tau*t - 1 = 0.
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Unitary U differs from identity in the (p, q) block:
    //   U[p][p] = c          U[p][q] = -s * phase
    //   U[q][p] = s * conj(phase)   U[q][q] = c
    let n = w.rows();
    let sp = s * phase;
    let spc = s * phase.conj();

    // W <- W * U
    for i in 0..n {
        let wip = w[(i, p)];
        let wiq = w[(i, q)];
        w[(i, p)] = wip * c + wiq * spc;
        w[(i, q)] = wiq * c - wip * sp;
    }
    // W <- U^H * W
    for j in 0..n {
        let wpj = w[(p, j)];
        let wqj = w[(q, j)];
        w[(p, j)] = wpj * c + wqj * sp;
        w[(q, j)] = wqj * c - wpj * spc;
    }
    // Clean up rounding on the eliminated pair.
    w[(p, q)] = Complex64::ZERO;
    w[(q, p)] = Complex64::ZERO;
    let dpp = w[(p, p)];
    let dqq = w[(q, q)];
    w[(p, p)] = Complex64::new(dpp.re, 0.0);
    w[(q, q)] = Complex64::new(dqq.re, 0.0);

    // V <- V * U
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * c + viq * spc;
        v[(i, q)] = viq * c - vip * sp;
    }
}

//! Deterministic single-snapshot Cramer-Rao lower bound on the angle
//! estimates.
//!
//! For fixed complex gains `s` and per-element noise variance `sigma^2`,
//! the Fisher information of the angles is
//! `F = (2 / sigma^2) * Re[(D^H P_A^perp D) .* (s s^H)^T]`, with `D` the
//! matrix of steering-vector derivatives and `P_A^perp` the projector onto
//! the complement of the steering span; the bound is the diagonal of
//! `F^{-1}`.

use num_complex::Complex64;

use crate::array_model::{noise_variance, steering_vector, ArrayGeometry, SourceScene};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, projector, CMatrix};

/// Derivative of the steering vector with respect to the angle in radians.
fn steering_derivative(geometry: &ArrayGeometry, theta_deg: f64) -> Result<Vec<Complex64>> {
    let a = steering_vector(geometry, theta_deg)?;
    let cos_t = theta_deg.to_radians().cos();
    let k = 2.0 * std::f64::consts::PI / geometry.wavelength();
    Ok(geometry
        .positions()
        .iter()
        .zip(a)
        .map(|(&x, an)| Complex64::new(0.0, k * x * cos_t) * an)
        .collect())
}

/// Per-source standard-deviation bound in degrees for the given scene and
/// SNR. Fails with a degeneracy error when sources merge (singular Fisher
/// information).
pub fn crlb(scene: &SourceScene, geometry: &ArrayGeometry, snr_db: f64) -> Result<Vec<f64>> {
    let m = scene.source_count();
    let n = geometry.element_count();
    let sigma2 = noise_variance(snr_db);

    let a_cols: Vec<Vec<Complex64>> = scene
        .angles_deg
        .iter()
        .map(|&t| steering_vector(geometry, t))
        .collect::<Result<_>>()?;
    let d_cols: Vec<Vec<Complex64>> = scene
        .angles_deg
        .iter()
        .map(|&t| steering_derivative(geometry, t))
        .collect::<Result<_>>()?;
    let a = CMatrix::from_columns(&a_cols)?;
    let d = CMatrix::from_columns(&d_cols)?;

    let p = projector(&a).map_err(|e| match e {
        Error::IllConditioned { cond, .. } => Error::DegenerateInput(format!(
            "steering matrix nearly rank-deficient (condition {cond:.3e}); sources merged?"
        )),
        other => other,
    })?;
    let p_perp = CMatrix::identity(n).sub(&p)?;
    let h = d.hermitian_transpose().matmul(&p_perp)?.matmul(&d)?;

    // F_{mk} = (2 / sigma^2) Re[ H_{mk} * s_k * conj(s_m) ].
    let mut fisher = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let v = h[(i, j)] * scene.gains[j] * scene.gains[i].conj();
            fisher[(i, j)] = Complex64::new(2.0 / sigma2 * v.re, 0.0);
        }
    }
    // Symmetrize rounding noise before the eigensolve.
    let fisher = fisher
        .add(&fisher.hermitian_transpose())?
        .scaled(Complex64::new(0.5, 0.0));

    let eig = hermitian_eig(&fisher)?;
    let lam_max = eig.eigenvalues[0];
    let lam_min = *eig.eigenvalues.last().unwrap();
    if !(lam_min > 1e-12 * lam_max.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateInput(format!(
            "singular Fisher information (eigenvalues {lam_min:.3e}..{lam_max:.3e}); sources merged?"
        )));
    }

    let v = &eig.eigenvectors;
    Ok((0..m)
        .map(|i| {
            let var: f64 = (0..m)
                .map(|k| v[(i, k)].norm_sqr() / eig.eigenvalues[k])
                .sum();
            var.sqrt().to_degrees()
        })
        .collect())
}

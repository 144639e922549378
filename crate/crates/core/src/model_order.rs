//! MDL and AIC source-count estimation from the spatially smoothed
//! covariance (Wax-Kailath criteria).
//!
//! Both criteria score every candidate order `k` by the sphericity of the
//! trailing eigenvalues — the log of the geometric-to-arithmetic mean
//! ratio — plus a parameter-count penalty, using the subarray count as the
//! effective number of snapshots.

use serde::{Deserialize, Serialize};

use crate::classical::SmoothedCovariance;
use crate::error::{Error, Result};
use crate::numerics::hermitian_eig;

/// Floor applied to eigenvalues before taking logs.
const EIGENVALUE_FLOOR: f64 = 1e-15;

/// Estimated source counts are clamped to this range.
pub const ORDER_RANGE: (usize, usize) = (1, 4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderCriterion {
    Mdl,
    Aic,
}

impl OrderCriterion {
    pub fn name(&self) -> &'static str {
        match self {
            OrderCriterion::Mdl => "mdl",
            OrderCriterion::Aic => "aic",
        }
    }
}

/// Criterion values over every candidate order plus the selected and
/// clamped decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderCriterionTrace {
    pub criterion: OrderCriterion,
    /// Criterion value at each candidate order `k = 0..Q-1`.
    pub values: Vec<f64>,
    /// `argmin` of `values` (ties toward smaller k).
    pub selected: usize,
    /// `selected` clamped to [`ORDER_RANGE`].
    pub clamped: usize,
}

fn criterion_trace(cov: &SmoothedCovariance, criterion: OrderCriterion) -> Result<OrderCriterionTrace> {
    let q = cov.subarray_size;
    let l = cov.subarray_count as f64;
    let eig = hermitian_eig(&cov.matrix)?;
    if eig.eigenvalues.iter().all(|&v| v < EIGENVALUE_FLOOR) {
        return Err(Error::DegenerateInput(format!(
            "all eigenvalues below {EIGENVALUE_FLOOR}"
        )));
    }
    let lambda: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&v| v.max(EIGENVALUE_FLOOR))
        .collect();

    let mut values = Vec::with_capacity(q);
    for k in 0..q {
        let tail = &lambda[k..];
        let p = tail.len() as f64;
        let log_geo = tail.iter().map(|v| v.ln()).sum::<f64>() / p;
        let log_arith = (tail.iter().sum::<f64>() / p).ln();
        // <= 0 by AM-GM; zero when the tail is spherical.
        let log_ratio = log_geo - log_arith;
        let free_params = (k * (2 * q - k)) as f64;
        let value = match criterion {
            OrderCriterion::Mdl => -l * p * log_ratio + 0.5 * free_params * l.ln(),
            OrderCriterion::Aic => -2.0 * l * p * log_ratio + 2.0 * free_params,
        };
        values.push(value);
    }

    let selected = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap();
    let clamped = selected.clamp(ORDER_RANGE.0, ORDER_RANGE.1);
    Ok(OrderCriterionTrace {
        criterion,
        values,
        selected,
        clamped,
    })
}

/// Minimum-description-length order estimate.
pub fn mdl_order(cov: &SmoothedCovariance) -> Result<OrderCriterionTrace> {
    criterion_trace(cov, OrderCriterion::Mdl)
}

/// Akaike information criterion order estimate.
pub fn aic_order(cov: &SmoothedCovariance) -> Result<OrderCriterionTrace> {
    criterion_trace(cov, OrderCriterion::Aic)
}

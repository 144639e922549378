//! Complexity accounting: closed-form operation counts for the ML, AP,
//! and DNN estimators, plus best-effort measured wall-clock per estimate.

use num_complex::Complex64;

use super::MethodTag;
use crate::array_model::{synthesize_snapshot, ArrayGeometry, SourceScene};
use crate::classical::{ap_estimate, ml_estimate, ml_operation_count, GridSpec};
use crate::error::{Error, Result};
use crate::net::{self, NetworkSpec};

/// One line of the complexity table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub method: String,
    /// Human-readable formula with the parameters substituted.
    pub formula: String,
    /// Closed-form operation count.
    pub operations: f64,
    /// Wall-clock of one estimate, where feasible to measure.
    pub measured_seconds: Option<f64>,
}

/// Operation-count budget below which the ML search is actually timed.
const ML_MEASURE_BUDGET: f64 = 5e9;

/// Evaluates the complexity formulas — ML `(N^2 + M^3) P^M`, AP
/// `N^2 P K`, DNN `peak_width^2` — for the given parameters, and times one
/// estimate per method where that is feasible (the exhaustive ML search is
/// only run when its operation count is small enough).
pub fn complexity_report(
    geometry: &ArrayGeometry,
    methods: &[MethodTag],
    grid: &GridSpec,
    m: usize,
    ap_passes: usize,
    peak_width: usize,
) -> Result<Vec<ComplexityRow>> {
    grid.validate()?;
    let n = geometry.element_count();
    let p = grid.point_count();

    // One fixed probe snapshot for the timed runs.
    let fov = grid.fov_deg;
    let span = fov.1 - fov.0;
    let angles: Vec<f64> = (0..m)
        .map(|i| fov.0 + span * (i as f64 + 1.0) / (m as f64 + 1.0))
        .collect();
    let scene = SourceScene::new(angles, vec![Complex64::ONE; m])?;
    let snapshot = synthesize_snapshot(
        geometry,
        &scene,
        Some(20.0),
        0,
        &mut crate::numerics::seeded_rng(0),
    )?;

    let mut rows = Vec::new();
    for &method in methods {
        let row = match method {
            MethodTag::Ml => {
                let ops = ml_operation_count(n, m, p);
                let measured = (m <= 3 && ops <= ML_MEASURE_BUDGET)
                    .then(|| {
                        let start = std::time::Instant::now();
                        ml_estimate(geometry, &snapshot, m, grid)
                            .ok()
                            .map(|_| start.elapsed().as_secs_f64())
                    })
                    .flatten();
                ComplexityRow {
                    method: "ml".into(),
                    formula: format!("(N^2 + M^3) * P^M = ({n}^2 + {m}^3) * {p}^{m}"),
                    operations: ops,
                    measured_seconds: measured,
                }
            }
            MethodTag::Ap => {
                let ops = (n * n * p * ap_passes) as f64;
                let start = std::time::Instant::now();
                let measured = ap_estimate(geometry, &snapshot, m, grid, ap_passes)
                    .ok()
                    .map(|_| start.elapsed().as_secs_f64());
                ComplexityRow {
                    method: "ap".into(),
                    formula: format!("N^2 * P * K = {n}^2 * {p} * {ap_passes}"),
                    operations: ops,
                    measured_seconds: measured,
                }
            }
            MethodTag::Dnn => {
                let ops = (peak_width * peak_width) as f64;
                // Time inference through an initialized network whose
                // widest layer matches the requested peak width.
                let spec = if peak_width == 2048 {
                    NetworkSpec::full_scale(2 * n, span / 2.0)
                } else {
                    NetworkSpec {
                        input_dim: 2 * n,
                        hidden_widths: vec![peak_width, peak_width],
                        dense_connectivity: false,
                        fov_half_width_deg: span / 2.0,
                    }
                };
                let measured = net::init(&spec, 0).ok().and_then(|params| {
                    let start = std::time::Instant::now();
                    net::predict(&params, &snapshot)
                        .ok()
                        .map(|_| start.elapsed().as_secs_f64())
                });
                ComplexityRow {
                    method: "dnn".into(),
                    formula: format!("peak_width^2 = {peak_width}^2"),
                    operations: ops,
                    measured_seconds: measured,
                }
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "no complexity formula for method '{}'",
                    other.name()
                )))
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Renders the table as aligned text.
pub fn format_report(rows: &[ComplexityRow]) -> String {
    let mut out = String::from("method   operations      formula                              measured_s\n");
    for r in rows {
        let measured = r
            .measured_seconds
            .map(|s| format!("{s:.6}"))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<8} {:<15.4e} {:<36} {}\n",
            r.method, r.operations, r.formula, measured
        ));
    }
    out
}

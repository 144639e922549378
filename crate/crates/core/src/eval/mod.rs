//! Monte-Carlo benchmark harness: RMSE-vs-SNR sweeps with paired trials
//! across methods, source-count accuracy sweeps, CRLB reference values,
//! and complexity accounting.

mod complexity;
mod crlb;

pub use complexity::{complexity_report, format_report, ComplexityRow};
pub use crlb::crlb;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_model::{
    apply_impairment, realize_impairment, sample_scene, synthesize_snapshot, ArrayGeometry,
    SceneDistribution, Snapshot, SourceScene,
};
use crate::classical::{
    ap_estimate, bartlett_estimate, ml_estimate, music_estimate, omp_estimate, spatial_smooth,
    EstimateResult, GridSpec,
};
use crate::error::{Error, Result};
use crate::model_order::{aic_order, mdl_order};
use crate::net::{self, NetworkParameters};
use crate::numerics::derive_seed;

/// Estimation methods addressable by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodTag {
    Bartlett,
    Ml,
    Ap,
    Omp,
    Music,
    Dnn,
    Mdl,
    Aic,
}

impl MethodTag {
    pub fn name(&self) -> &'static str {
        match self {
            MethodTag::Bartlett => "bartlett",
            MethodTag::Ml => "ml",
            MethodTag::Ap => "ap",
            MethodTag::Omp => "omp",
            MethodTag::Music => "music",
            MethodTag::Dnn => "dnn",
            MethodTag::Mdl => "mdl",
            MethodTag::Aic => "aic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "bartlett" => MethodTag::Bartlett,
            "ml" => MethodTag::Ml,
            "ap" => MethodTag::Ap,
            "omp" => MethodTag::Omp,
            "music" => MethodTag::Music,
            "dnn" => MethodTag::Dnn,
            "mdl" => MethodTag::Mdl,
            "aic" => MethodTag::Aic,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown method tag '{other}'"
                )))
            }
        })
    }

    fn is_order_method(&self) -> bool {
        matches!(self, MethodTag::Dnn | MethodTag::Mdl | MethodTag::Aic)
    }
}

/// Impairment level applied to every snapshot of a sweep; the matrix is
/// realized once from the seed and held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentParams {
    pub phase_sigma_deg: f64,
    pub crosstalk_gamma_db: Option<f64>,
    pub seed: u64,
}

/// Sweep description: methods, SNR grid, trial budget, scene statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub geometry: ArrayGeometry,
    pub methods: Vec<MethodTag>,
    pub snr_points_db: Vec<f64>,
    pub trials_per_point: usize,
    pub scene_distribution: SceneDistribution,
    pub impairment: Option<ImpairmentParams>,
    pub grid: GridSpec,
    pub seed: u64,
    /// Spatial smoothing subarray size for MUSIC / MDL / AIC.
    pub subarray_size: usize,
    /// Alternating-projection pass budget.
    pub ap_passes: usize,
    /// Checkpoint backing the `dnn` method, when requested.
    pub checkpoint: Option<PathBuf>,
    /// When false, trials are synthesized without noise (the SNR points
    /// only label the output rows).
    pub noise_enabled: bool,
    /// Record wall-clock per estimate. Off by default so that identical
    /// config and seed reproduce the CSV byte for byte.
    pub measure_runtime: bool,
}

impl SweepConfig {
    pub fn new(geometry: ArrayGeometry, dist: SceneDistribution, grid: GridSpec) -> Self {
        Self {
            geometry,
            methods: vec![MethodTag::Ap],
            snr_points_db: (0..=30).step_by(5).map(|v| v as f64).collect(),
            trials_per_point: 100,
            scene_distribution: dist,
            impairment: None,
            grid,
            seed: 0,
            subarray_size: 8,
            ap_passes: 10,
            checkpoint: None,
            noise_enabled: true,
            measure_runtime: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods requested".into()));
        }
        if self.snr_points_db.is_empty() || self.trials_per_point == 0 {
            return Err(Error::InvalidParameter(
                "sweep needs SNR points and at least one trial".into(),
            ));
        }
        self.grid.validate()?;
        self.scene_distribution.validate()
    }
}

/// One aggregated curve point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub method: String,
    pub snr_db: f64,
    /// Chamfer RMSE in degrees; `None` for order-accuracy sweeps.
    pub rmse_deg: Option<f64>,
    pub rmse_stderr: Option<f64>,
    /// Exact-order accuracy where applicable.
    pub accuracy: Option<f64>,
    pub mean_runtime_s: f64,
    pub trials: usize,
}

/// All curve points of a sweep plus the config that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Plot-ready CSV, one row per (method, snr) point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,snr_db,rmse_deg,rmse_stderr,accuracy,mean_runtime_s,trials\n");
        for p in &self.points {
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.method,
                p.snr_db,
                fmt(p.rmse_deg),
                fmt(p.rmse_stderr),
                fmt(p.accuracy),
                p.mean_runtime_s,
                p.trials
            ));
        }
        out
    }

    /// Writes the CSV plus a JSON sidecar with the full config.
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        std::fs::write(csv_path, self.to_csv())?;
        let mut sidecar = csv_path.as_os_str().to_owned();
        sidecar.push(".json");
        std::fs::write(
            std::path::PathBuf::from(sidecar),
            serde_json::to_vec_pretty(&self.config)?,
        )?;
        Ok(())
    }

    pub fn point(&self, method: MethodTag, snr_db: f64) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.method == method.name() && p.snr_db == snr_db)
    }
}

/// Monte-Carlo chamfer RMSE in degrees over paired (truth, estimate)
/// lists: the square root of the trial-averaged per-true-angle minimum
/// squared error.
pub fn rmse_metric(true_scenes: &[SourceScene], estimates: &[EstimateResult]) -> f64 {
    assert_eq!(
        true_scenes.len(),
        estimates.len(),
        "paired lists required"
    );
    assert!(!true_scenes.is_empty(), "at least one trial required");
    let mean: f64 = true_scenes
        .iter()
        .zip(estimates)
        .map(|(scene, est)| per_trial_sq(scene, &est.angles_deg))
        .sum::<f64>()
        / true_scenes.len() as f64;
    mean.sqrt()
}

/// Per-trial mean over true angles of the squared distance to the nearest
/// estimate (degrees squared).
fn per_trial_sq(scene: &SourceScene, est_angles: &[f64]) -> f64 {
    let sum: f64 = scene
        .angles_deg
        .iter()
        .map(|t| {
            est_angles
                .iter()
                .map(|e| (e - t) * (e - t))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    sum / scene.source_count() as f64
}

struct Trial {
    snapshot: Snapshot,
}

fn synthesize_trials(
    config: &SweepConfig,
    snr_db: f64,
    point_index: usize,
) -> Result<Vec<Trial>> {
    let impairment = config
        .impairment
        .map(|p| {
            realize_impairment(
                p.phase_sigma_deg,
                p.crosstalk_gamma_db,
                config.geometry.element_count(),
                p.seed,
            )
        })
        .transpose()?;
    let point_seed = derive_seed(config.seed, point_index as u64);
    (0..config.trials_per_point)
        .into_par_iter()
        .map(|t| {
            let trial_seed = derive_seed(point_seed, t as u64);
            let mut rng = crate::numerics::seeded_rng(trial_seed);
            let scene = sample_scene(&config.scene_distribution, &mut rng)?;
            let snr = config.noise_enabled.then_some(snr_db);
            let snap = synthesize_snapshot(&config.geometry, &scene, snr, trial_seed, &mut rng)?;
            let snap = match &impairment {
                Some(h) => apply_impairment(h, &snap)?,
                None => snap,
            };
            Ok(Trial { snapshot: snap })
        })
        .collect()
}

fn load_dnn(config: &SweepConfig) -> Result<Option<NetworkParameters>> {
    if !config.methods.contains(&MethodTag::Dnn) {
        return Ok(None);
    }
    let path = config.checkpoint.as_ref().ok_or_else(|| {
        Error::InvalidParameter("dnn method requested without a checkpoint path".into())
    })?;
    Ok(Some(net::load(path)?.params))
}

fn run_method(
    config: &SweepConfig,
    method: MethodTag,
    dnn: Option<&NetworkParameters>,
    snapshot: &Snapshot,
) -> Result<EstimateResult> {
    let m = snapshot.scene.source_count();
    match method {
        MethodTag::Bartlett => bartlett_estimate(&config.geometry, snapshot, m, &config.grid),
        MethodTag::Ml => ml_estimate(&config.geometry, snapshot, m, &config.grid),
        MethodTag::Ap => ap_estimate(&config.geometry, snapshot, m, &config.grid, config.ap_passes),
        MethodTag::Omp => omp_estimate(&config.geometry, snapshot, m, &config.grid),
        MethodTag::Music => {
            let cov = spatial_smooth(&config.geometry, snapshot, config.subarray_size)?;
            music_estimate(&cov, m, &config.grid)
        }
        MethodTag::Dnn => net::predict_with_order(dnn.unwrap(), snapshot, m),
        MethodTag::Mdl | MethodTag::Aic => Err(Error::InvalidParameter(format!(
            "{} is an order-selection method; use order_accuracy_sweep",
            method.name()
        ))),
    }
}

/// Angle-accuracy sweep with the paired-trial protocol: every method sees
/// the identical snapshot at each (SNR, trial) cell, and known-order
/// methods receive the true source count.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    if let Some(bad) = config
        .methods
        .iter()
        .find(|m| matches!(m, MethodTag::Mdl | MethodTag::Aic))
    {
        return Err(Error::InvalidParameter(format!(
            "{} is not an angle estimator",
            bad.name()
        )));
    }
    let dnn = load_dnn(config)?;
    let mut points = Vec::new();
    let mut failures: Vec<usize> = vec![0; config.methods.len()];

    for (pi, &snr) in config.snr_points_db.iter().enumerate() {
        let trials = synthesize_trials(config, snr, pi)?;
        for (mi, &method) in config.methods.iter().enumerate() {
            let outcomes: Vec<Option<(f64, f64, Option<bool>)>> = trials
                .par_iter()
                .map(|trial| {
                    let est = run_method(config, method, dnn.as_ref(), &trial.snapshot).ok()?;
                    let sq = per_trial_sq(&trial.snapshot.scene, &est.angles_deg);
                    // For the DNN also track classifier correctness.
                    let correct = (method == MethodTag::Dnn)
                        .then(|| {
                            net::predict(dnn.as_ref().unwrap(), &trial.snapshot)
                                .map(|full| full.order == trial.snapshot.scene.source_count())
                                .ok()
                        })
                        .flatten();
                    let runtime = if config.measure_runtime {
                        est.runtime_seconds
                    } else {
                        0.0
                    };
                    Some((sq, runtime, correct))
                })
                .collect();

            let ok: Vec<&(f64, f64, Option<bool>)> =
                outcomes.iter().flatten().collect();
            failures[mi] += outcomes.len() - ok.len();
            if ok.is_empty() {
                points.push(SweepPoint {
                    method: method.name().into(),
                    snr_db: snr,
                    rmse_deg: None,
                    rmse_stderr: None,
                    accuracy: None,
                    mean_runtime_s: 0.0,
                    trials: 0,
                });
                continue;
            }
            let n = ok.len() as f64;
            let mean_sq = ok.iter().map(|v| v.0).sum::<f64>() / n;
            let rmse = mean_sq.sqrt();
            let var_sq = ok.iter().map(|v| (v.0 - mean_sq).powi(2)).sum::<f64>()
                / (n - 1.0).max(1.0);
            let stderr = if rmse > 0.0 {
                (var_sq / n).sqrt() / (2.0 * rmse)
            } else {
                0.0
            };
            let mean_runtime = ok.iter().map(|v| v.1).sum::<f64>() / n;
            let accuracy = if method == MethodTag::Dnn {
                let hits = ok.iter().filter(|v| v.2 == Some(true)).count();
                Some(hits as f64 / n)
            } else {
                None
            };
            points.push(SweepPoint {
                method: method.name().into(),
                snr_db: snr,
                rmse_deg: Some(rmse),
                rmse_stderr: Some(stderr),
                accuracy,
                mean_runtime_s: mean_runtime,
                trials: ok.len(),
            });
        }
    }

    check_failures(config, &failures)?;
    Ok(SweepResult {
        config: config.clone(),
        points,
    })
}

/// Probability of exact source-count recovery per SNR point for the
/// order-selection methods (DNN classifier, MDL, AIC), on shared trials.
pub fn order_accuracy_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    if let Some(bad) = config.methods.iter().find(|m| !m.is_order_method()) {
        return Err(Error::InvalidParameter(format!(
            "{} does not estimate the source count",
            bad.name()
        )));
    }
    let dnn = load_dnn(config)?;
    let mut points = Vec::new();
    let mut failures: Vec<usize> = vec![0; config.methods.len()];

    for (pi, &snr) in config.snr_points_db.iter().enumerate() {
        let trials = synthesize_trials(config, snr, pi)?;
        for (mi, &method) in config.methods.iter().enumerate() {
            let outcomes: Vec<Option<(bool, f64)>> = trials
                .par_iter()
                .map(|trial| {
                    let truth = trial.snapshot.scene.source_count();
                    let start = std::time::Instant::now();
                    let order = match method {
                        MethodTag::Dnn => net::predict(dnn.as_ref().unwrap(), &trial.snapshot)
                            .ok()?
                            .order,
                        MethodTag::Mdl => {
                            let cov = spatial_smooth(
                                &config.geometry,
                                &trial.snapshot,
                                config.subarray_size,
                            )
                            .ok()?;
                            mdl_order(&cov).ok()?.clamped
                        }
                        MethodTag::Aic => {
                            let cov = spatial_smooth(
                                &config.geometry,
                                &trial.snapshot,
                                config.subarray_size,
                            )
                            .ok()?;
                            aic_order(&cov).ok()?.clamped
                        }
                        _ => unreachable!(),
                    };
                    let runtime = if config.measure_runtime {
                        start.elapsed().as_secs_f64()
                    } else {
                        0.0
                    };
                    Some((order == truth, runtime))
                })
                .collect();

            let ok: Vec<&(bool, f64)> = outcomes.iter().flatten().collect();
            failures[mi] += outcomes.len() - ok.len();
            let n = ok.len().max(1) as f64;
            points.push(SweepPoint {
                method: method.name().into(),
                snr_db: snr,
                rmse_deg: None,
                rmse_stderr: None,
                accuracy: Some(ok.iter().filter(|v| v.0).count() as f64 / n),
                mean_runtime_s: ok.iter().map(|v| v.1).sum::<f64>() / n,
                trials: ok.len(),
            });
        }
    }

    check_failures(config, &failures)?;
    Ok(SweepResult {
        config: config.clone(),
        points,
    })
}

fn check_failures(config: &SweepConfig, failures: &[usize]) -> Result<()> {
    let total = config.snr_points_db.len() * config.trials_per_point;
    for (mi, &method) in config.methods.iter().enumerate() {
        if failures[mi] * 100 > total {
            return Err(Error::MethodFailing {
                method: method.name().into(),
                failures: failures[mi],
                trials: total,
            });
        }
    }
    Ok(())
}

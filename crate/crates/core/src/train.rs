//! Training loop: streamed synthetic batches, SGD with momentum, step
//! learning-rate decay, periodic validation and checkpointing.
//!
//! Every batch is freshly synthesized from the scene distribution with a
//! seed derived from the config seed and the iteration index, so training
//! is reproducible bit for bit and resuming from a checkpoint replays the
//! identical stream.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_model::{
    sample_scene, synthesize_snapshot, ArrayGeometry, SceneDistribution, Snapshot, SourceScene,
};
use crate::error::{Error, Result};
use crate::net::{
    self, apply_running_update, backward, chamfer_rmse, forward_infer, forward_train, loss,
    snapshot_input, softmax, Checkpoint, NetworkParameters, NetworkSpec, Velocity,
};
use crate::numerics::{derive_seed, seeded_rng};

/// Reserved seed streams (batch iteration `i` uses stream `i`).
const STREAM_VALIDATION: u64 = u64::MAX;
const STREAM_INIT: u64 = u64::MAX - 1;

/// Training hyperparameters and data configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub geometry: ArrayGeometry,
    pub network: NetworkSpec,
    pub scene_distribution: SceneDistribution,
    pub batch_size: usize,
    pub iterations: u64,
    pub lr: f64,
    pub momentum: f64,
    pub lr_decay_factor: f64,
    pub lr_decay_every: u64,
    /// Weight of the angle term against the cross entropy.
    pub loss_weight: f64,
    pub seed: u64,
    pub validation_size: usize,
    /// Validation/checkpoint cadence in iterations.
    pub checkpoint_every: u64,
    /// When false, snapshots are synthesized without noise.
    pub noise_enabled: bool,
    /// Debug/oracle hook: train on these exact scenes (cycled to the batch
    /// size, noiseless) instead of sampling the distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_scenes: Option<Vec<SourceScene>>,
}

impl TrainConfig {
    /// Defaults mirroring the training regime: batch of 4000 fresh
    /// realizations per iteration, momentum 0.9, step decay.
    pub fn new(
        geometry: ArrayGeometry,
        network: NetworkSpec,
        scene_distribution: SceneDistribution,
    ) -> Self {
        Self {
            geometry,
            network,
            scene_distribution,
            batch_size: 4000,
            iterations: 100_000,
            lr: 0.01,
            momentum: 0.9,
            lr_decay_factor: 0.5,
            lr_decay_every: 20_000,
            loss_weight: 1.0,
            seed: 0,
            validation_size: 2000,
            checkpoint_every: 5000,
            noise_enabled: true,
            fixed_scenes: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidParameter(
                "batch_size must be at least 2".into(),
            ));
        }
        if !(self.lr > 0.0) {
            return Err(Error::InvalidParameter("lr must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParameter("momentum must be in [0, 1)".into()));
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return Err(Error::InvalidParameter(
                "lr_decay_factor must be in (0, 1]".into(),
            ));
        }
        if self.lr_decay_every == 0 || self.checkpoint_every == 0 {
            return Err(Error::InvalidParameter(
                "decay and checkpoint cadences must be positive".into(),
            ));
        }
        if self.network.input_dim != 2 * self.geometry.element_count() {
            return Err(Error::InvalidParameter(format!(
                "network input_dim {} must equal 2N = {}",
                self.network.input_dim,
                2 * self.geometry.element_count()
            )));
        }
        self.network.validate()?;
        self.scene_distribution.validate()
    }

    /// Learning rate at iteration `i` under the step-decay schedule.
    pub fn lr_at(&self, iteration: u64) -> f64 {
        self.lr
            * self
                .lr_decay_factor
                .powi((iteration / self.lr_decay_every) as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u64,
    pub total: f64,
    pub cross_entropy: f64,
    pub angle_rmse: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub iteration: u64,
    /// Validation loss under the training objective (inference-mode
    /// forward).
    pub loss: f64,
    pub accuracy: f64,
    /// Chamfer RMSE in degrees per true source count (absent counts are
    /// `None`).
    pub rmse_deg_per_count: [Option<f64>; 4],
}

/// Per-iteration and per-validation records of one training run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub iterations: Vec<IterationRecord>,
    pub validations: Vec<ValidationRecord>,
}

impl TrainingLog {
    /// CSV of the per-iteration records: `iteration,loss,ce,rmse,lr`.
    pub fn training_csv(&self) -> String {
        let mut out = String::from("iteration,loss,ce,rmse,lr\n");
        for r in &self.iterations {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.iteration, r.total, r.cross_entropy, r.angle_rmse, r.lr
            ));
        }
        out
    }

    /// CSV of the validation records:
    /// `iteration,loss,accuracy,rmse_m1,rmse_m2,rmse_m3,rmse_m4`.
    pub fn validation_csv(&self) -> String {
        let mut out = String::from("iteration,loss,accuracy,rmse_m1,rmse_m2,rmse_m3,rmse_m4\n");
        for r in &self.validations {
            let cells: Vec<String> = r
                .rmse_deg_per_count
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
                .collect();
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.iteration,
                r.loss,
                r.accuracy,
                cells.join(",")
            ));
        }
        out
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetworkParameters,
    pub log: TrainingLog,
    /// Last validation record (also the final one).
    pub final_validation: ValidationRecord,
    pub best_validation_loss: f64,
    /// Paths written when an output directory was given.
    pub final_checkpoint: Option<PathBuf>,
    pub best_checkpoint: Option<PathBuf>,
}

struct BatchData {
    inputs: Array2<f64>,
    scenes: Vec<SourceScene>,
}

fn synthesize_batch(config: &TrainConfig, iteration: u64) -> Result<BatchData> {
    let batch_seed = derive_seed(config.seed, iteration);
    let n2 = config.network.input_dim;
    let rows: Vec<(Vec<f64>, SourceScene)> = if let Some(fixed) = &config.fixed_scenes {
        (0..config.batch_size)
            .map(|j| {
                let scene = fixed[j % fixed.len()].clone();
                let snap = synthesize_snapshot(
                    &config.geometry,
                    &scene,
                    None,
                    batch_seed,
                    &mut seeded_rng(batch_seed),
                )?;
                Ok((snapshot_input(&snap.observation), scene))
            })
            .collect::<Result<_>>()?
    } else {
        (0..config.batch_size)
            .into_par_iter()
            .map(|j| {
                let example_seed = derive_seed(batch_seed, j as u64);
                let mut rng = seeded_rng(example_seed);
                let scene = sample_scene(&config.scene_distribution, &mut rng)?;
                let snr = config
                    .noise_enabled
                    .then(|| config.scene_distribution.sample_snr_db(&mut rng));
                let snap =
                    synthesize_snapshot(&config.geometry, &scene, snr, example_seed, &mut rng)?;
                Ok((snapshot_input(&snap.observation), scene))
            })
            .collect::<Result<_>>()?
    };

    let mut inputs = Array2::<f64>::zeros((rows.len(), n2));
    let mut scenes = Vec::with_capacity(rows.len());
    for (i, (x, scene)) in rows.into_iter().enumerate() {
        inputs.row_mut(i).assign(&ndarray::ArrayView1::from(&x));
        scenes.push(scene);
    }
    Ok(BatchData { inputs, scenes })
}

/// The seed-pinned validation set of a config.
pub fn validation_set(config: &TrainConfig) -> Result<Vec<Snapshot>> {
    let base = derive_seed(config.seed, STREAM_VALIDATION);
    (0..config.validation_size)
        .into_par_iter()
        .map(|j| {
            let seed = derive_seed(base, j as u64);
            let mut rng = seeded_rng(seed);
            let scene = sample_scene(&config.scene_distribution, &mut rng)?;
            let snr = config
                .noise_enabled
                .then(|| config.scene_distribution.sample_snr_db(&mut rng));
            synthesize_snapshot(&config.geometry, &scene, snr, seed, &mut rng)
        })
        .collect()
}

/// Classification accuracy, per-count chamfer RMSE (degrees, known-order
/// readout), and the validation loss on a fixed snapshot set.
pub fn validate(
    params: &NetworkParameters,
    set: &[Snapshot],
    loss_weight: f64,
    iteration: u64,
) -> Result<ValidationRecord> {
    if set.is_empty() {
        return Err(Error::InvalidParameter("empty validation set".into()));
    }
    let n2 = params.spec.input_dim;
    let mut inputs = Array2::<f64>::zeros((set.len(), n2));
    for (i, snap) in set.iter().enumerate() {
        let x = snapshot_input(&snap.observation);
        inputs.row_mut(i).assign(&ndarray::ArrayView1::from(&x));
    }
    let out = forward_infer(params, inputs.view())?;

    let fov_half = params.spec.fov_half_width_deg;
    let mut hits = 0usize;
    let mut ce = 0.0;
    let mut chamfer_norm_sum = 0.0;
    let mut sq_per_count = [0.0f64; 4];
    let mut n_angles_per_count = [0usize; 4];
    let mut seen_per_count = [false; 4];

    for (i, snap) in set.iter().enumerate() {
        let m = snap.scene.source_count();
        let probs = softmax(out.class_logits.row(i).as_slice().unwrap());
        let predicted = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .map(|(c, _)| c + 1)
            .unwrap();
        if predicted == m {
            hits += 1;
        }
        ce += -(probs[m - 1].max(f64::MIN_POSITIVE)).ln();

        let est_deg: Vec<f64> = out.angle_outputs[m - 1]
            .row(i)
            .iter()
            .map(|v| v * fov_half)
            .collect();
        chamfer_norm_sum += chamfer_rmse(
            &snap
                .scene
                .angles_deg
                .iter()
                .map(|t| t / fov_half)
                .collect::<Vec<_>>(),
            &out.angle_outputs[m - 1].row(i).to_vec(),
        );
        for t in &snap.scene.angles_deg {
            let d = est_deg
                .iter()
                .map(|e| (e - t) * (e - t))
                .fold(f64::INFINITY, f64::min);
            sq_per_count[m - 1] += d;
        }
        n_angles_per_count[m - 1] += m;
        seen_per_count[m - 1] = true;
    }

    let b = set.len() as f64;
    let mut rmse_deg_per_count = [None; 4];
    for c in 0..4 {
        if seen_per_count[c] {
            rmse_deg_per_count[c] = Some((sq_per_count[c] / n_angles_per_count[c] as f64).sqrt());
        }
    }
    Ok(ValidationRecord {
        iteration,
        loss: ce / b + loss_weight * chamfer_norm_sum / b,
        accuracy: hits as f64 / b,
        rmse_deg_per_count,
    })
}

/// Trains from scratch. With an output directory, writes `latest.ckpt` at
/// each checkpoint event plus `best.ckpt` (lowest validation loss) and
/// `final.ckpt`.
pub fn train(config: &TrainConfig, out_dir: Option<&Path>) -> Result<TrainOutcome> {
    config.validate()?;
    let params = net::init(&config.network, derive_seed(config.seed, STREAM_INIT))?;
    let velocity = Velocity::zeros(&params);
    run(config, params, velocity, 0, out_dir)
}

/// Resumes a checkpointed run; the continuation is bit-identical to an
/// uninterrupted run of the same config.
pub fn resume(
    config: &TrainConfig,
    checkpoint_path: &Path,
    out_dir: Option<&Path>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let ckpt = net::load_compatible(checkpoint_path, &config.network)?;
    let velocity = ckpt
        .velocity
        .clone()
        .unwrap_or_else(|| Velocity::zeros(&ckpt.params));
    run(config, ckpt.params, velocity, ckpt.iteration, out_dir)
}

fn run(
    config: &TrainConfig,
    mut params: NetworkParameters,
    mut velocity: Velocity,
    start_iteration: u64,
    out_dir: Option<&Path>,
) -> Result<TrainOutcome> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let val_set = validation_set(config)?;
    let mut log = TrainingLog::default();
    let mut best_loss = f64::INFINITY;
    let mut best_path = None;
    let mut final_path = None;

    let checkpoint_event =
        |params: &NetworkParameters,
         velocity: &Velocity,
         iteration: u64,
         log: &mut TrainingLog,
         best_loss: &mut f64,
         best_path: &mut Option<PathBuf>|
         -> Result<ValidationRecord> {
            let record = validate(params, &val_set, config.loss_weight, iteration)?;
            log.validations.push(record);
            if let Some(dir) = out_dir {
                let ckpt = Checkpoint {
                    params: params.clone(),
                    seed: config.seed,
                    iteration,
                    velocity: Some(velocity.clone()),
                };
                net::save(&ckpt, &dir.join("latest.ckpt"))?;
                if record.loss < *best_loss {
                    net::save(&ckpt, &dir.join("best.ckpt"))?;
                    *best_path = Some(dir.join("best.ckpt"));
                }
            }
            if record.loss < *best_loss {
                *best_loss = record.loss;
            }
            Ok(record)
        };

    for i in start_iteration..config.iterations {
        let lr = config.lr_at(i);
        let batch = synthesize_batch(config, i)?;
        let (trace, stats) = forward_train(&params, batch.inputs.view())?;
        let breakdown = loss(
            &trace,
            &batch.scenes,
            config.network.fov_half_width_deg,
            config.loss_weight,
        )?;
        if !breakdown.total.is_finite() {
            return Err(Error::TrainDiverged {
                iteration: i as usize,
            });
        }
        let grads = backward(&params, &trace, &batch.scenes, config.loss_weight)?;
        net::sgd_momentum_step(&mut params, &grads, lr, config.momentum, &mut velocity)?;
        apply_running_update(&mut params, &stats);

        log.iterations.push(IterationRecord {
            iteration: i,
            total: breakdown.total,
            cross_entropy: breakdown.cross_entropy,
            angle_rmse: breakdown.angle_rmse,
            lr,
        });

        if (i + 1) % config.checkpoint_every == 0 && i + 1 != config.iterations {
            checkpoint_event(
                &params,
                &velocity,
                i + 1,
                &mut log,
                &mut best_loss,
                &mut best_path,
            )?;
        }
    }

    let final_record = checkpoint_event(
        &params,
        &velocity,
        config.iterations,
        &mut log,
        &mut best_loss,
        &mut best_path,
    )?;
    if let Some(dir) = out_dir {
        let ckpt = Checkpoint {
            params: params.clone(),
            seed: config.seed,
            iteration: config.iterations,
            velocity: Some(velocity.clone()),
        };
        let p = dir.join("final.ckpt");
        net::save(&ckpt, &p)?;
        final_path = Some(p);
        std::fs::write(dir.join("training_log.csv"), log.training_csv())?;
        std::fs::write(dir.join("validation_log.csv"), log.validation_csv())?;
    }

    Ok(TrainOutcome {
        params,
        log,
        final_validation: final_record,
        best_validation_loss: best_loss,
        final_checkpoint: final_path,
        best_checkpoint: best_path,
    })
}

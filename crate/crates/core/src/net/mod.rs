//! Fully connected AOA network: a BN+ReLU trunk with a 4-way source-count
//! head and four angle-regression heads (1..4 outputs, 14 outputs total).
//!
//! Inputs are the `2N` real and imaginary components of a snapshot; angle
//! outputs live in normalized units (degrees divided by the FOV
//! half-width). Forward and backward passes are explicit; see [`loss`]
//! for the joint cross-entropy + chamfer-RMSE objective.

mod batch;
mod checkpoint;
mod loss;
mod optim;

pub use checkpoint::{load, load_compatible, save, Checkpoint};
pub use loss::{backward, chamfer_rmse, loss, GradientSet, HeadGradient, LayerGradient, LossBreakdown};
pub use optim::{sgd_momentum_step, Velocity};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array_model::Snapshot;
use crate::classical::EstimateResult;
use crate::error::{Error, Result};
use batch::par_matmul;

/// Number of source-count classes.
pub const HEAD_CLASSES: usize = 4;
/// Output widths of the per-count angle heads.
pub const HEAD_REGRESSION_SIZES: [usize; 4] = [1, 2, 3, 4];
/// Total network outputs: 4 class logits + 1+2+3+4 angle outputs.
pub const TOTAL_OUTPUTS: usize = 14;

/// Batch-norm epsilon inside the normalization denominator.
pub const BN_EPSILON: f64 = 1e-5;
/// Exponential decay of the batch-norm running statistics.
pub const BN_RUNNING_DECAY: f64 = 0.99;

/// Architecture description. Hidden widths and the dense-connectivity
/// switch cover the ablation variants; the head structure is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Input dimension, `2N` for an N-element array.
    pub input_dim: usize,
    pub hidden_widths: Vec<usize>,
    /// When set, each hidden layer receives the concatenation of the raw
    /// input and every previous layer's output.
    #[serde(default)]
    pub dense_connectivity: bool,
    /// FOV half-width in degrees; angle outputs are `theta / half_width`.
    pub fov_half_width_deg: f64,
}

impl NetworkSpec {
    /// Paper-scale default: 8 hidden layers peaking at 2048 units.
    pub fn full_scale(input_dim: usize, fov_half_width_deg: f64) -> Self {
        Self {
            input_dim,
            hidden_widths: vec![256, 512, 1024, 2048, 2048, 1024, 512, 256],
            dense_connectivity: false,
            fov_half_width_deg,
        }
    }

    /// Ablation variant: 6 hidden layers.
    pub fn six_layer(input_dim: usize, fov_half_width_deg: f64) -> Self {
        Self {
            hidden_widths: vec![256, 512, 1024, 1024, 512, 256],
            ..Self::full_scale(input_dim, fov_half_width_deg)
        }
    }

    /// Ablation variant: widths capped at 400 channels.
    pub fn width_capped(input_dim: usize, fov_half_width_deg: f64) -> Self {
        let mut spec = Self::full_scale(input_dim, fov_half_width_deg);
        for w in &mut spec.hidden_widths {
            *w = (*w).min(400);
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidParameter("input_dim must be positive".into()));
        }
        if self.hidden_widths.is_empty() || self.hidden_widths.contains(&0) {
            return Err(Error::InvalidParameter(
                "hidden_widths must be nonempty and positive".into(),
            ));
        }
        if !(self.fov_half_width_deg > 0.0) {
            return Err(Error::InvalidParameter(
                "fov_half_width_deg must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Input width of hidden layer `l`.
    fn fan_in(&self, l: usize) -> usize {
        if self.dense_connectivity {
            self.input_dim + self.hidden_widths[..l].iter().sum::<usize>()
        } else if l == 0 {
            self.input_dim
        } else {
            self.hidden_widths[l - 1]
        }
    }

    fn last_width(&self) -> usize {
        *self.hidden_widths.last().unwrap()
    }

    /// Trainable parameter count: weights, biases, and the batch-norm
    /// scale/shift pairs.
    pub fn trainable_param_count(&self) -> usize {
        let mut count = 0;
        for (l, &w) in self.hidden_widths.iter().enumerate() {
            count += self.fan_in(l) * w + w; // weight + bias
            count += 2 * w; // gamma + beta
        }
        let h = self.last_width();
        count += h * HEAD_CLASSES + HEAD_CLASSES;
        for k in HEAD_REGRESSION_SIZES {
            count += h * k + k;
        }
        count
    }

    /// Multiply count of the widest layer, the dominant per-example
    /// inference cost.
    pub fn peak_layer_multiplies(&self) -> usize {
        (0..self.hidden_widths.len())
            .map(|l| self.fan_in(l) * self.hidden_widths[l])
            .max()
            .unwrap_or(0)
    }
}

/// One hidden layer: affine weights plus batch-norm parameters and
/// running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// `(fan_in, width)`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

/// Affine output head `(last_width, outputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

/// All trainable state of the network, together with its spec.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParameters {
    pub spec: NetworkSpec,
    pub layers: Vec<LayerParams>,
    pub class_head: HeadParams,
    pub angle_heads: Vec<HeadParams>,
}

/// He-normal initialization: weights `N(0, 2/fan_in)`, zero biases,
/// identity batch-norm, running stats `(0, 1)`. Deterministic in the seed.
pub fn init(spec: &NetworkSpec, seed: u64) -> Result<NetworkParameters> {
    spec.validate()?;
    let mut rng = crate::numerics::seeded_rng(seed);
    let mut gaussian_matrix = |rows: usize, cols: usize, std: f64| -> Array2<f64> {
        let mut m = Array2::<f64>::zeros((rows, cols));
        for v in m.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z * std;
        }
        m
    };

    let layers = (0..spec.hidden_widths.len())
        .map(|l| {
            let fan_in = spec.fan_in(l);
            let width = spec.hidden_widths[l];
            let std = (2.0 / fan_in as f64).sqrt();
            LayerParams {
                weight: gaussian_matrix(fan_in, width, std),
                bias: Array1::zeros(width),
                gamma: Array1::ones(width),
                beta: Array1::zeros(width),
                running_mean: Array1::zeros(width),
                running_var: Array1::ones(width),
            }
        })
        .collect();

    let h = spec.last_width();
    let head_std = (2.0 / h as f64).sqrt();
    let class_head = HeadParams {
        weight: gaussian_matrix(h, HEAD_CLASSES, head_std),
        bias: Array1::zeros(HEAD_CLASSES),
    };
    let angle_heads = HEAD_REGRESSION_SIZES
        .iter()
        .map(|&k| HeadParams {
            weight: gaussian_matrix(h, k, head_std),
            bias: Array1::zeros(k),
        })
        .collect();

    Ok(NetworkParameters {
        spec: spec.clone(),
        layers,
        class_head,
        angle_heads,
    })
}

/// Per-layer caches populated by the training-mode forward pass.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    /// Layer input (after dense concatenation when enabled).
    pub input: Array2<f64>,
    /// Normalized pre-activations `(z - mu) / sqrt(var + eps)`.
    pub xhat: Array2<f64>,
    /// `sqrt(var + eps)` per feature.
    pub std: Array1<f64>,
    /// Batch-norm output `gamma * xhat + beta` (pre-ReLU).
    pub bn_out: Array2<f64>,
    /// Post-ReLU activations.
    pub post: Array2<f64>,
}

/// Full forward cache for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub layers: Vec<LayerTrace>,
    pub class_logits: Array2<f64>,
    /// Angle head outputs in normalized units, indexed by `m - 1`.
    pub angle_outputs: Vec<Array2<f64>>,
}

/// Batch-norm statistics of one forward pass, for the running-stat update.
#[derive(Debug, Clone)]
pub struct BatchStats {
    pub per_layer: Vec<(Array1<f64>, Array1<f64>)>,
}

/// Inference outputs for a batch.
#[derive(Debug, Clone)]
pub struct InferOutputs {
    pub class_logits: Array2<f64>,
    pub angle_outputs: Vec<Array2<f64>>,
}

fn check_finite(name: &str, layer: usize, a: ArrayView2<'_, f64>) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            context: format!("{name} of hidden layer {layer}"),
        })
    }
}

fn dense_input(
    spec: &NetworkSpec,
    x: &Array2<f64>,
    posts: &[Array2<f64>],
    l: usize,
) -> Array2<f64> {
    if !spec.dense_connectivity {
        return if l == 0 {
            x.clone()
        } else {
            posts[l - 1].clone()
        };
    }
    let batch = x.nrows();
    let mut out = Array2::<f64>::zeros((batch, spec.fan_in(l)));
    let mut col = 0;
    for part in std::iter::once(x).chain(posts[..l].iter()) {
        out.slice_mut(ndarray::s![.., col..col + part.ncols()])
            .assign(part);
        col += part.ncols();
    }
    out
}

/// Training-mode forward pass over a batch (rows are examples). Batch
/// statistics normalize each layer; the running-stat update is returned
/// separately so callers decide when to apply it.
pub fn forward_train(
    params: &NetworkParameters,
    x: ArrayView2<'_, f64>,
) -> Result<(ForwardTrace, BatchStats)> {
    let spec = &params.spec;
    if x.ncols() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: format!("input dim {} vs spec {}", x.ncols(), spec.input_dim),
        });
    }
    if x.nrows() < 2 {
        return Err(Error::InvalidParameter(
            "training-mode forward needs a batch of at least 2 examples".into(),
        ));
    }
    let batch = x.nrows() as f64;
    let x_owned = x.to_owned();
    let mut layers = Vec::with_capacity(params.layers.len());
    let mut posts: Vec<Array2<f64>> = Vec::with_capacity(params.layers.len());
    let mut stats = Vec::with_capacity(params.layers.len());

    for (l, layer) in params.layers.iter().enumerate() {
        let input = dense_input(spec, &x_owned, &posts, l);
        let mut z = par_matmul(input.view(), layer.weight.view());
        z += &layer.bias;

        let mean = z.sum_axis(Axis(0)) / batch;
        let mut var = Array1::<f64>::zeros(z.ncols());
        for row in z.rows() {
            for (j, &v) in row.iter().enumerate() {
                let d = v - mean[j];
                var[j] += d * d;
            }
        }
        var /= batch;
        let std = var.mapv(|v| (v + BN_EPSILON).sqrt());

        let mut xhat = z;
        for mut row in xhat.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - mean[j]) / std[j];
            }
        }
        let mut bn_out = xhat.clone();
        for mut row in bn_out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = layer.gamma[j] * *v + layer.beta[j];
            }
        }
        let post = bn_out.mapv(|v| v.max(0.0));
        check_finite("activations", l, post.view())?;

        stats.push((mean, var));
        layers.push(LayerTrace {
            input,
            xhat,
            std,
            bn_out,
            post: post.clone(),
        });
        posts.push(post);
    }

    let last = posts.last().unwrap();
    let mut class_logits = par_matmul(last.view(), params.class_head.weight.view());
    class_logits += &params.class_head.bias;
    let angle_outputs = params
        .angle_heads
        .iter()
        .map(|head| {
            let mut out = par_matmul(last.view(), head.weight.view());
            out += &head.bias;
            out
        })
        .collect();

    Ok((
        ForwardTrace {
            layers,
            class_logits,
            angle_outputs,
        },
        BatchStats { per_layer: stats },
    ))
}

/// Folds one batch's statistics into the running mean and variance.
pub fn apply_running_update(params: &mut NetworkParameters, stats: &BatchStats) {
    for (layer, (mean, var)) in params.layers.iter_mut().zip(&stats.per_layer) {
        layer.running_mean =
            &layer.running_mean * BN_RUNNING_DECAY + &(mean * (1.0 - BN_RUNNING_DECAY));
        layer.running_var =
            &layer.running_var * BN_RUNNING_DECAY + &(var * (1.0 - BN_RUNNING_DECAY));
    }
}

/// Inference-mode forward pass: batch-norm uses the running statistics,
/// so the output is a pure function of `(params, x)`.
pub fn forward_infer(params: &NetworkParameters, x: ArrayView2<'_, f64>) -> Result<InferOutputs> {
    let spec = &params.spec;
    if x.ncols() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: format!("input dim {} vs spec {}", x.ncols(), spec.input_dim),
        });
    }
    let x_owned = x.to_owned();
    let mut posts: Vec<Array2<f64>> = Vec::with_capacity(params.layers.len());
    for (l, layer) in params.layers.iter().enumerate() {
        let input = dense_input(spec, &x_owned, &posts, l);
        let mut z = par_matmul(input.view(), layer.weight.view());
        z += &layer.bias;
        for mut row in z.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let denom = (layer.running_var[j] + BN_EPSILON).sqrt();
                let xh = (*v - layer.running_mean[j]) / denom;
                *v = (layer.gamma[j] * xh + layer.beta[j]).max(0.0);
            }
        }
        check_finite("activations", l, z.view())?;
        posts.push(z);
    }
    let last = posts.last().unwrap();
    let mut class_logits = par_matmul(last.view(), params.class_head.weight.view());
    class_logits += &params.class_head.bias;
    let angle_outputs = params
        .angle_heads
        .iter()
        .map(|head| {
            let mut out = par_matmul(last.view(), head.weight.view());
            out += &head.bias;
            out
        })
        .collect();
    Ok(InferOutputs {
        class_logits,
        angle_outputs,
    })
}

/// Numerically stable softmax of one logit row.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|v| v / sum).collect()
}

/// Builds the `2N` network input (real parts then imaginary parts) from an
/// observation.
pub fn snapshot_input(observation: &[num_complex::Complex64]) -> Vec<f64> {
    observation
        .iter()
        .map(|z| z.re)
        .chain(observation.iter().map(|z| z.im))
        .collect()
}

fn infer_single(params: &NetworkParameters, input: &[f64]) -> Result<InferOutputs> {
    let x = Array2::from_shape_vec((1, input.len()), input.to_vec())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    forward_infer(params, x.view())
}

/// Full prediction: source count by the maximal class probability, angles
/// from the matching head, denormalized to degrees and sorted ascending.
pub fn predict(params: &NetworkParameters, snapshot: &Snapshot) -> Result<EstimateResult> {
    let start = std::time::Instant::now();
    let out = infer_single(params, &snapshot_input(&snapshot.observation))?;
    let probs = softmax(out.class_logits.row(0).as_slice().unwrap());
    let class = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap();
    let m = class + 1;
    let mut angles: Vec<f64> = out.angle_outputs[class]
        .row(0)
        .iter()
        .map(|&v| v * params.spec.fov_half_width_deg)
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut result = EstimateResult {
        method: "dnn".into(),
        order: m,
        angles_deg: angles,
        objective: probs[class],
        iterations: 1,
        runtime_seconds: 0.0,
    };
    result.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Prediction with the source count given: reads the `m`-th angle head
/// directly, matching the known-order evaluation protocol.
pub fn predict_with_order(
    params: &NetworkParameters,
    snapshot: &Snapshot,
    m: usize,
) -> Result<EstimateResult> {
    if m == 0 || m > HEAD_CLASSES {
        return Err(Error::InvalidParameter(format!(
            "known order {m} outside 1..={HEAD_CLASSES}"
        )));
    }
    let start = std::time::Instant::now();
    let out = infer_single(params, &snapshot_input(&snapshot.observation))?;
    let mut angles: Vec<f64> = out.angle_outputs[m - 1]
        .row(0)
        .iter()
        .map(|&v| v * params.spec.fov_half_width_deg)
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let probs = softmax(out.class_logits.row(0).as_slice().unwrap());
    let mut result = EstimateResult {
        method: "dnn".into(),
        order: m,
        angles_deg: angles,
        objective: probs[m - 1],
        iterations: 1,
        runtime_seconds: 0.0,
    };
    result.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(result)
}

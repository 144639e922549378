//! Joint loss and backpropagation: softmax cross entropy on the count
//! head plus the chamfer RMSE of the true-count angle head, every other
//! head masked to zero loss and zero gradient.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{softmax, ForwardTrace, NetworkParameters, HEAD_CLASSES};
use crate::array_model::SourceScene;
use crate::error::{Error, Result};
use crate::net::batch::par_matmul;

/// Loss components of one batch. `total = cross_entropy + weight * angle_rmse`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub cross_entropy: f64,
    /// Mean per-example chamfer RMSE in normalized angle units.
    pub angle_rmse: f64,
    pub total: f64,
    pub weight: f64,
}

/// Chamfer RMSE between true angles and estimates:
/// `sqrt(mean_m min_k (est_k - true_m)^2)`. Each true angle is charged its
/// squared distance to the nearest estimate; units follow the inputs.
pub fn chamfer_rmse(true_angles: &[f64], est_angles: &[f64]) -> f64 {
    assert!(
        !true_angles.is_empty() && !est_angles.is_empty(),
        "chamfer_rmse needs nonempty inputs"
    );
    let sum: f64 = true_angles
        .iter()
        .map(|t| {
            est_angles
                .iter()
                .map(|e| (e - t) * (e - t))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    (sum / true_angles.len() as f64).sqrt()
}

/// Index of the estimate nearest to `target`, first (lowest-index) winner
/// on exact ties.
fn nearest_estimate(estimates: &[f64], target: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, e) in estimates.iter().enumerate() {
        let d = (e - target) * (e - target);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

fn check_batch(trace: &ForwardTrace, scenes: &[SourceScene]) -> Result<()> {
    if trace.class_logits.nrows() != scenes.len() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "trace batch {} vs {} scenes",
                trace.class_logits.nrows(),
                scenes.len()
            ),
        });
    }
    if scenes.iter().any(|s| s.source_count() > HEAD_CLASSES) {
        return Err(Error::InvalidParameter(
            "scene source count exceeds the class heads".into(),
        ));
    }
    Ok(())
}

/// Batch loss: mean cross entropy of the true class plus `weight` times
/// the mean per-example chamfer RMSE of the true-count head, in
/// normalized units.
pub fn loss(
    trace: &ForwardTrace,
    scenes: &[SourceScene],
    fov_half_width_deg: f64,
    weight: f64,
) -> Result<LossBreakdown> {
    check_batch(trace, scenes)?;
    let b = scenes.len() as f64;
    let mut ce = 0.0;
    let mut angle = 0.0;
    for (i, scene) in scenes.iter().enumerate() {
        let m = scene.source_count();
        let probs = softmax(trace.class_logits.row(i).as_slice().unwrap());
        ce += -(probs[m - 1].max(f64::MIN_POSITIVE)).ln();
        let est: Vec<f64> = trace.angle_outputs[m - 1].row(i).to_vec();
        let truth: Vec<f64> = scene
            .angles_deg
            .iter()
            .map(|t| t / fov_half_width_deg)
            .collect();
        angle += chamfer_rmse(&truth, &est);
    }
    let cross_entropy = ce / b;
    let angle_rmse = angle / b;
    Ok(LossBreakdown {
        cross_entropy,
        angle_rmse,
        total: cross_entropy + weight * angle_rmse,
        weight,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadGradient {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Gradients for every trainable tensor, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerGradient>,
    pub class_head: HeadGradient,
    pub angle_heads: Vec<HeadGradient>,
}

/// Backpropagates the batch loss of [`loss`] through the heads, batch
/// norm, ReLU, and the (optionally dense) trunk. The chamfer min-selection
/// is treated as a locally constant assignment; exact-zero per-example
/// chamfer contributes zero gradient.
pub fn backward(
    params: &NetworkParameters,
    trace: &ForwardTrace,
    scenes: &[SourceScene],
    weight: f64,
) -> Result<GradientSet> {
    check_batch(trace, scenes)?;
    let spec = &params.spec;
    let batch = scenes.len();
    let b = batch as f64;
    let fov_half = spec.fov_half_width_deg;

    // Head output gradients.
    let mut d_logits = Array2::<f64>::zeros(trace.class_logits.dim());
    let mut d_angles: Vec<Array2<f64>> = trace
        .angle_outputs
        .iter()
        .map(|o| Array2::<f64>::zeros(o.dim()))
        .collect();

    for (i, scene) in scenes.iter().enumerate() {
        let m = scene.source_count();
        let probs = softmax(trace.class_logits.row(i).as_slice().unwrap());
        for c in 0..HEAD_CLASSES {
            let onehot = if c == m - 1 { 1.0 } else { 0.0 };
            d_logits[(i, c)] = (probs[c] - onehot) / b;
        }

        let est: Vec<f64> = trace.angle_outputs[m - 1].row(i).to_vec();
        let truth: Vec<f64> = scene.angles_deg.iter().map(|t| t / fov_half).collect();
        let c_i = chamfer_rmse(&truth, &est);
        if c_i > 0.0 {
            let scale = weight / (b * (m as f64) * c_i);
            for &t in &truth {
                let k = nearest_estimate(&est, t);
                d_angles[m - 1][(i, k)] += scale * (est[k] - t);
            }
        }
    }

    // Head parameter gradients and the gradient into the last hidden layer.
    let last_post = &trace.layers.last().unwrap().post;
    let class_head = HeadGradient {
        weight: par_matmul(last_post.t(), d_logits.view()),
        bias: d_logits.sum_axis(Axis(0)),
    };
    let angle_heads: Vec<HeadGradient> = d_angles
        .iter()
        .map(|d| HeadGradient {
            weight: par_matmul(last_post.t(), d.view()),
            bias: d.sum_axis(Axis(0)),
        })
        .collect();

    let mut d_last = par_matmul(d_logits.view(), params.class_head.weight.t());
    for (d, head) in d_angles.iter().zip(&params.angle_heads) {
        d_last += &par_matmul(d.view(), head.weight.t());
    }

    // Trunk backprop. grad_posts[l] accumulates the gradient w.r.t. the
    // post-ReLU output of layer l (heads feed the last one; dense
    // connections feed earlier ones).
    let layer_count = params.layers.len();
    let mut grad_posts: Vec<Array2<f64>> = trace
        .layers
        .iter()
        .map(|t| Array2::<f64>::zeros(t.post.dim()))
        .collect();
    grad_posts[layer_count - 1] = d_last;
    let mut layer_grads: Vec<Option<LayerGradient>> = (0..layer_count).map(|_| None).collect();

    for l in (0..layer_count).rev() {
        let t = &trace.layers[l];
        let layer = &params.layers[l];
        let g_post = &grad_posts[l];

        // ReLU.
        let mut d_bn = g_post.clone();
        for (d, &pre) in d_bn.iter_mut().zip(t.bn_out.iter()) {
            if pre <= 0.0 {
                *d = 0.0;
            }
        }

        // Batch-norm scale/shift.
        let d_beta = d_bn.sum_axis(Axis(0));
        let d_gamma = (&d_bn * &t.xhat).sum_axis(Axis(0));

        // Through the normalization (biased batch variance).
        let mut d_xhat = d_bn;
        for mut row in d_xhat.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= layer.gamma[j];
            }
        }
        let mean_dxhat = d_xhat.sum_axis(Axis(0)) / b;
        let mean_dxhat_xhat = (&d_xhat * &t.xhat).sum_axis(Axis(0)) / b;
        let mut d_z = d_xhat;
        for (mut row, xrow) in d_z.rows_mut().into_iter().zip(t.xhat.rows()) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - mean_dxhat[j] - xrow[j] * mean_dxhat_xhat[j]) / t.std[j];
            }
        }

        // Affine.
        let d_weight = par_matmul(t.input.t(), d_z.view());
        let d_bias = d_z.sum_axis(Axis(0));
        let d_input = par_matmul(d_z.view(), layer.weight.t());

        layer_grads[l] = Some(LayerGradient {
            weight: d_weight,
            bias: d_bias,
            gamma: d_gamma,
            beta: d_beta,
        });

        // Distribute the input gradient to upstream producers.
        if spec.dense_connectivity {
            let mut col = spec.input_dim; // gradient w.r.t. raw input is unused
            for k in 0..l {
                let w = trace.layers[k].post.ncols();
                let slice = d_input.slice(ndarray::s![.., col..col + w]);
                grad_posts[k] += &slice;
                col += w;
            }
        } else if l > 0 {
            grad_posts[l - 1] += &d_input;
        }
    }

    Ok(GradientSet {
        layers: layer_grads.into_iter().map(Option::unwrap).collect(),
        class_head,
        angle_heads,
    })
}

//! SGD with momentum and flat parameter views.

use ndarray::{Array1, Array2};

use super::loss::GradientSet;
use super::{NetworkParameters, HEAD_CLASSES, HEAD_REGRESSION_SIZES};
use crate::error::{Error, Result};

/// Momentum buffers, one per trainable tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity {
    pub layers: Vec<(Array2<f64>, Array1<f64>, Array1<f64>, Array1<f64>)>,
    pub class_head: (Array2<f64>, Array1<f64>),
    pub angle_heads: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Velocity {
    /// All-zero buffers matching the parameter shapes.
    pub fn zeros(params: &NetworkParameters) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| {
                    (
                        Array2::zeros(l.weight.dim()),
                        Array1::zeros(l.bias.len()),
                        Array1::zeros(l.gamma.len()),
                        Array1::zeros(l.beta.len()),
                    )
                })
                .collect(),
            class_head: (
                Array2::zeros(params.class_head.weight.dim()),
                Array1::zeros(HEAD_CLASSES),
            ),
            angle_heads: params
                .angle_heads
                .iter()
                .zip(HEAD_REGRESSION_SIZES)
                .map(|(h, k)| (Array2::zeros(h.weight.dim()), Array1::zeros(k)))
                .collect(),
        }
    }
}

macro_rules! momentum_update {
    ($vel:expr, $grad:expr, $param:expr, $lr:expr, $momentum:expr) => {{
        $vel.zip_mut_with($grad, |v, &g| *v = $momentum * *v + g);
        $param.zip_mut_with(&$vel, |p, &v| *p -= $lr * v);
    }};
}

/// One heavy-ball step: `v <- momentum * v + g`, `p <- p - lr * v`.
/// Batch-norm running statistics are not touched; forward passes own them.
pub fn sgd_momentum_step(
    params: &mut NetworkParameters,
    grads: &GradientSet,
    lr: f64,
    momentum: f64,
    velocity: &mut Velocity,
) -> Result<()> {
    if !(lr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "learning rate must be positive, got {lr}"
        )));
    }
    if !(0.0..1.0).contains(&momentum) {
        return Err(Error::InvalidParameter(format!(
            "momentum must be in [0, 1), got {momentum}"
        )));
    }
    for ((layer, grad), vel) in params
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut velocity.layers)
    {
        momentum_update!(vel.0, &grad.weight, layer.weight, lr, momentum);
        momentum_update!(vel.1, &grad.bias, layer.bias, lr, momentum);
        momentum_update!(vel.2, &grad.gamma, layer.gamma, lr, momentum);
        momentum_update!(vel.3, &grad.beta, layer.beta, lr, momentum);
    }
    momentum_update!(
        velocity.class_head.0,
        &grads.class_head.weight,
        params.class_head.weight,
        lr,
        momentum
    );
    momentum_update!(
        velocity.class_head.1,
        &grads.class_head.bias,
        params.class_head.bias,
        lr,
        momentum
    );
    for ((head, grad), vel) in params
        .angle_heads
        .iter_mut()
        .zip(&grads.angle_heads)
        .zip(&mut velocity.angle_heads)
    {
        momentum_update!(vel.0, &grad.weight, head.weight, lr, momentum);
        momentum_update!(vel.1, &grad.bias, head.bias, lr, momentum);
    }
    Ok(())
}

impl NetworkParameters {
    /// Flat copy of every trainable value (weights, biases, batch-norm
    /// scale and shift; running statistics excluded), in a fixed order.
    pub fn trainable_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
            out.extend(l.gamma.iter());
            out.extend(l.beta.iter());
        }
        out.extend(self.class_head.weight.iter());
        out.extend(self.class_head.bias.iter());
        for h in &self.angle_heads {
            out.extend(h.weight.iter());
            out.extend(h.bias.iter());
        }
        out
    }

    /// Writes back a flat vector produced by [`Self::trainable_values`].
    pub fn set_trainable_values(&mut self, values: &[f64]) {
        let mut it = values.iter();
        let mut fill = |target: &mut [f64]| {
            for v in target {
                *v = *it.next().expect("trainable value vector too short");
            }
        };
        for l in &mut self.layers {
            fill(l.weight.as_slice_mut().unwrap());
            fill(l.bias.as_slice_mut().unwrap());
            fill(l.gamma.as_slice_mut().unwrap());
            fill(l.beta.as_slice_mut().unwrap());
        }
        fill(self.class_head.weight.as_slice_mut().unwrap());
        fill(self.class_head.bias.as_slice_mut().unwrap());
        for h in &mut self.angle_heads {
            fill(h.weight.as_slice_mut().unwrap());
            fill(h.bias.as_slice_mut().unwrap());
        }
        assert!(it.next().is_none(), "trainable value vector too long");
    }
}

impl GradientSet {
    /// Flat copy in the same order as
    /// [`NetworkParameters::trainable_values`].
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
            out.extend(l.gamma.iter());
            out.extend(l.beta.iter());
        }
        out.extend(self.class_head.weight.iter());
        out.extend(self.class_head.bias.iter());
        for h in &self.angle_heads {
            out.extend(h.weight.iter());
            out.extend(h.bias.iter());
        }
        out
    }
}

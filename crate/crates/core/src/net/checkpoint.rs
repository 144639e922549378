//! Checkpoint container: JSON manifest plus a little-endian f64 tensor
//! blob with an offset table. Round-trips are bit-exact.
//!
//! ```text
//! magic "AOAC" | version u32 | manifest_len u64 | manifest JSON | blob
//! ```

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::optim::Velocity;
use super::{HeadParams, LayerParams, NetworkParameters, NetworkSpec};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AOAC";
const VERSION: u32 = 1;

/// Network parameters plus the training state needed to resume.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: NetworkParameters,
    pub seed: u64,
    /// Training iterations completed when the checkpoint was written.
    pub iteration: u64,
    pub velocity: Option<Velocity>,
}

impl Checkpoint {
    pub fn of_params(params: NetworkParameters) -> Self {
        Self {
            params,
            seed: 0,
            iteration: 0,
            velocity: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    /// Offset into the blob, in f64 elements.
    offset: u64,
    len: u64,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u32,
    spec: NetworkSpec,
    seed: u64,
    iteration: u64,
    has_velocity: bool,
    tensors: Vec<TensorEntry>,
}

struct BlobWriter {
    data: Vec<f64>,
    tensors: Vec<TensorEntry>,
}

impl BlobWriter {
    fn new() -> Self {
        Self {
            data: Vec::new(),
            tensors: Vec::new(),
        }
    }

    fn push(&mut self, name: String, values: impl Iterator<Item = f64>) {
        let offset = self.data.len() as u64;
        self.data.extend(values);
        self.tensors.push(TensorEntry {
            name,
            offset,
            len: self.data.len() as u64 - offset,
        });
    }
}

fn push_params(w: &mut BlobWriter, prefix: &str, params: &NetworkParameters) {
    for (l, layer) in params.layers.iter().enumerate() {
        w.push(format!("{prefix}layers.{l}.weight"), layer.weight.iter().cloned());
        w.push(format!("{prefix}layers.{l}.bias"), layer.bias.iter().cloned());
        w.push(format!("{prefix}layers.{l}.gamma"), layer.gamma.iter().cloned());
        w.push(format!("{prefix}layers.{l}.beta"), layer.beta.iter().cloned());
        w.push(
            format!("{prefix}layers.{l}.running_mean"),
            layer.running_mean.iter().cloned(),
        );
        w.push(
            format!("{prefix}layers.{l}.running_var"),
            layer.running_var.iter().cloned(),
        );
    }
    w.push(
        format!("{prefix}heads.class.weight"),
        params.class_head.weight.iter().cloned(),
    );
    w.push(
        format!("{prefix}heads.class.bias"),
        params.class_head.bias.iter().cloned(),
    );
    for (k, head) in params.angle_heads.iter().enumerate() {
        w.push(
            format!("{prefix}heads.angle{}.weight", k + 1),
            head.weight.iter().cloned(),
        );
        w.push(
            format!("{prefix}heads.angle{}.bias", k + 1),
            head.bias.iter().cloned(),
        );
    }
}

/// Writes a checkpoint (parameters plus optional momentum state).
pub fn save(checkpoint: &Checkpoint, path: &Path) -> Result<()> {
    let mut w = BlobWriter::new();
    push_params(&mut w, "", &checkpoint.params);
    if let Some(vel) = &checkpoint.velocity {
        for (l, (wt, b, g, bt)) in vel.layers.iter().enumerate() {
            w.push(format!("velocity.layers.{l}.weight"), wt.iter().cloned());
            w.push(format!("velocity.layers.{l}.bias"), b.iter().cloned());
            w.push(format!("velocity.layers.{l}.gamma"), g.iter().cloned());
            w.push(format!("velocity.layers.{l}.beta"), bt.iter().cloned());
        }
        w.push(
            "velocity.heads.class.weight".into(),
            vel.class_head.0.iter().cloned(),
        );
        w.push(
            "velocity.heads.class.bias".into(),
            vel.class_head.1.iter().cloned(),
        );
        for (k, (wt, b)) in vel.angle_heads.iter().enumerate() {
            w.push(
                format!("velocity.heads.angle{}.weight", k + 1),
                wt.iter().cloned(),
            );
            w.push(
                format!("velocity.heads.angle{}.bias", k + 1),
                b.iter().cloned(),
            );
        }
    }

    let manifest = Manifest {
        version: VERSION,
        spec: checkpoint.params.spec.clone(),
        seed: checkpoint.seed,
        iteration: checkpoint.iteration,
        has_velocity: checkpoint.velocity.is_some(),
        tensors: w.tensors,
    };
    let manifest_bytes = serde_json::to_vec(&manifest)?;

    let mut out =
        Vec::with_capacity(4 + 4 + 8 + manifest_bytes.len() + 8 * w.data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(manifest_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&manifest_bytes);
    for v in &w.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, out)?;
    Ok(())
}

struct TensorReader<'a> {
    blob: &'a [f64],
    tensors: &'a [TensorEntry],
    cursor: usize,
}

impl<'a> TensorReader<'a> {
    fn take(&mut self, name: &str) -> Result<&'a [f64]> {
        let entry = self.tensors.get(self.cursor).ok_or_else(|| {
            Error::CorruptFile(format!("tensor table ended before {name}"))
        })?;
        if entry.name != name {
            return Err(Error::CorruptFile(format!(
                "expected tensor {name}, found {}",
                entry.name
            )));
        }
        self.cursor += 1;
        let start = entry.offset as usize;
        let end = start + entry.len as usize;
        self.blob
            .get(start..end)
            .ok_or_else(|| Error::CorruptFile(format!("tensor {name} exceeds blob")))
    }

    fn array1(&mut self, name: &str, len: usize) -> Result<Array1<f64>> {
        let data = self.take(name)?;
        if data.len() != len {
            return Err(Error::CorruptFile(format!(
                "tensor {name}: expected {len} values, found {}",
                data.len()
            )));
        }
        Ok(Array1::from_vec(data.to_vec()))
    }

    fn array2(&mut self, name: &str, dim: (usize, usize)) -> Result<Array2<f64>> {
        let data = self.take(name)?;
        if data.len() != dim.0 * dim.1 {
            return Err(Error::CorruptFile(format!(
                "tensor {name}: expected {}x{} values, found {}",
                dim.0,
                dim.1,
                data.len()
            )));
        }
        Array2::from_shape_vec(dim, data.to_vec())
            .map_err(|e| Error::CorruptFile(e.to_string()))
    }
}

/// Reads a checkpoint written by [`save`].
pub fn load(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(Error::CorruptFile(format!(
            "not a checkpoint file: {}",
            path.display()
        )));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::CheckpointVersion {
            found: version,
            expected: VERSION,
        });
    }
    let manifest_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let blob_start = 16 + manifest_len;
    if bytes.len() < blob_start {
        return Err(Error::CorruptFile("truncated manifest".into()));
    }
    let manifest: Manifest = serde_json::from_slice(&bytes[16..blob_start])
        .map_err(|e| Error::CorruptFile(format!("bad manifest: {e}")))?;
    let blob_bytes = &bytes[blob_start..];
    if blob_bytes.len() % 8 != 0 {
        return Err(Error::CorruptFile("blob length not a multiple of 8".into()));
    }
    let blob: Vec<f64> = blob_bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let expected: u64 = manifest.tensors.iter().map(|t| t.len).sum();
    if blob.len() as u64 != expected {
        return Err(Error::CorruptFile(format!(
            "blob holds {} values, manifest expects {expected}",
            blob.len()
        )));
    }

    let spec = manifest.spec.clone();
    spec.validate()?;
    let mut r = TensorReader {
        blob: &blob,
        tensors: &manifest.tensors,
        cursor: 0,
    };

    let mut layers = Vec::with_capacity(spec.hidden_widths.len());
    for l in 0..spec.hidden_widths.len() {
        let fan_in = spec.fan_in(l);
        let width = spec.hidden_widths[l];
        layers.push(LayerParams {
            weight: r.array2(&format!("layers.{l}.weight"), (fan_in, width))?,
            bias: r.array1(&format!("layers.{l}.bias"), width)?,
            gamma: r.array1(&format!("layers.{l}.gamma"), width)?,
            beta: r.array1(&format!("layers.{l}.beta"), width)?,
            running_mean: r.array1(&format!("layers.{l}.running_mean"), width)?,
            running_var: r.array1(&format!("layers.{l}.running_var"), width)?,
        });
    }
    let h = spec.last_width();
    let class_head = HeadParams {
        weight: r.array2("heads.class.weight", (h, super::HEAD_CLASSES))?,
        bias: r.array1("heads.class.bias", super::HEAD_CLASSES)?,
    };
    let mut angle_heads = Vec::with_capacity(4);
    for (k, &size) in super::HEAD_REGRESSION_SIZES.iter().enumerate() {
        angle_heads.push(HeadParams {
            weight: r.array2(&format!("heads.angle{}.weight", k + 1), (h, size))?,
            bias: r.array1(&format!("heads.angle{}.bias", k + 1), size)?,
        });
    }
    let params = NetworkParameters {
        spec: spec.clone(),
        layers,
        class_head,
        angle_heads,
    };

    let velocity = if manifest.has_velocity {
        let mut v = Velocity::zeros(&params);
        for (l, bufs) in v.layers.iter_mut().enumerate() {
            let fan_in = spec.fan_in(l);
            let width = spec.hidden_widths[l];
            bufs.0 = r.array2(&format!("velocity.layers.{l}.weight"), (fan_in, width))?;
            bufs.1 = r.array1(&format!("velocity.layers.{l}.bias"), width)?;
            bufs.2 = r.array1(&format!("velocity.layers.{l}.gamma"), width)?;
            bufs.3 = r.array1(&format!("velocity.layers.{l}.beta"), width)?;
        }
        v.class_head.0 = r.array2("velocity.heads.class.weight", (h, super::HEAD_CLASSES))?;
        v.class_head.1 = r.array1("velocity.heads.class.bias", super::HEAD_CLASSES)?;
        for (k, bufs) in v.angle_heads.iter_mut().enumerate() {
            let size = super::HEAD_REGRESSION_SIZES[k];
            bufs.0 = r.array2(&format!("velocity.heads.angle{}.weight", k + 1), (h, size))?;
            bufs.1 = r.array1(&format!("velocity.heads.angle{}.bias", k + 1), size)?;
        }
        Some(v)
    } else {
        None
    };

    Ok(Checkpoint {
        params,
        seed: manifest.seed,
        iteration: manifest.iteration,
        velocity,
    })
}

/// Loads a checkpoint and verifies it was built for `expected_spec`.
pub fn load_compatible(path: &Path, expected_spec: &NetworkSpec) -> Result<Checkpoint> {
    let ckpt = load(path)?;
    if &ckpt.params.spec != expected_spec {
        return Err(Error::SpecMismatch(format!(
            "checkpoint spec {:?} differs from expected {:?}",
            ckpt.params.spec, expected_spec
        )));
    }
    Ok(ckpt)
}

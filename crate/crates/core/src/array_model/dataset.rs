//! Binary snapshot dataset container with a JSON reproducibility sidecar.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic "AOA1" | version u32 | element_count u32 | wavelength f64
//! positions f64 x N
//! fov_min f64 | fov_max f64 | law_tag u8 | law_lo u8 | law_hi u8
//! amp_lo f64 | amp_hi f64 | phase_lo f64 | phase_hi f64
//! snr_lo f64 | snr_hi f64 | min_sep f64 | noise_enabled u8
//! seed u64 | record_count u64
//! records: M u8 | angles f64 x M | gains f64 x 2M | snr_db f64 | y f64 x 2N
//! ```
//!
//! When noise is disabled the per-record `snr_db` field is written as 0;
//! the header flag is authoritative.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    sample_scene, synthesize_snapshot, ArrayGeometry, SceneDistribution, Snapshot,
    SourceCountLaw,
};
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, seeded_rng};

const MAGIC: &[u8; 4] = b"AOA1";
const VERSION: u32 = 1;

/// Everything needed to regenerate a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub geometry: ArrayGeometry,
    pub distribution: SceneDistribution,
    pub record_count: u64,
    pub seed: u64,
    pub noise_enabled: bool,
}

/// In-memory dataset: config plus the generated snapshots.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub config: DatasetConfig,
    pub snapshots: Vec<Snapshot>,
}

/// Generates `config.record_count` snapshots. Each record derives its own
/// seed from the dataset seed, so generation parallelizes without
/// affecting the output.
pub fn generate(config: &DatasetConfig) -> Result<Dataset> {
    config.distribution.validate()?;
    let snapshots: Vec<Snapshot> = (0..config.record_count)
        .into_par_iter()
        .map(|i| {
            let record_seed = derive_seed(config.seed, i);
            let mut rng = seeded_rng(record_seed);
            let scene = sample_scene(&config.distribution, &mut rng)?;
            let snr = if config.noise_enabled {
                Some(config.distribution.sample_snr_db(&mut rng))
            } else {
                None
            };
            synthesize_snapshot(&config.geometry, &scene, snr, record_seed, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(Dataset {
        config: config.clone(),
        snapshots,
    })
}

/// Writes the binary dataset to `path` and the JSON sidecar to
/// `path` + ".json".
pub fn write(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    let cfg = &dataset.config;
    let n = cfg.geometry.element_count();

    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.extend_from_slice(&cfg.geometry.wavelength().to_le_bytes());
    for &p in cfg.geometry.positions() {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    let d = &cfg.distribution;
    buf.extend_from_slice(&d.fov_deg.0.to_le_bytes());
    buf.extend_from_slice(&d.fov_deg.1.to_le_bytes());
    let (tag, lo, hi) = match d.source_count_law {
        SourceCountLaw::Fixed { m } => (0u8, m as u8, m as u8),
        SourceCountLaw::Uniform { lo, hi } => (1u8, lo as u8, hi as u8),
    };
    buf.push(tag);
    buf.push(lo);
    buf.push(hi);
    for v in [
        d.amplitude_range.0,
        d.amplitude_range.1,
        d.phase_range.0,
        d.phase_range.1,
        d.snr_range_db.0,
        d.snr_range_db.1,
        d.min_separation_deg,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.push(cfg.noise_enabled as u8);
    buf.extend_from_slice(&cfg.seed.to_le_bytes());
    buf.extend_from_slice(&(dataset.snapshots.len() as u64).to_le_bytes());

    for snap in &dataset.snapshots {
        let m = snap.scene.source_count();
        buf.push(m as u8);
        for &a in &snap.scene.angles_deg {
            buf.extend_from_slice(&a.to_le_bytes());
        }
        for g in &snap.scene.gains {
            buf.extend_from_slice(&g.re.to_le_bytes());
            buf.extend_from_slice(&g.im.to_le_bytes());
        }
        buf.extend_from_slice(&snap.snr_db.unwrap_or(0.0).to_le_bytes());
        for z in &snap.observation {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }

    std::fs::write(path, &buf)?;
    let sidecar = serde_json::to_vec_pretty(cfg)?;
    std::fs::write(sidecar_path(path), sidecar)?;
    Ok(())
}

/// Path of the JSON sidecar belonging to a dataset file.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}

/// Reads a dataset written by [`write`].
pub fn read(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path)?;
    let mut r = Cursor::new(&bytes);

    let magic = r.take_bytes(4)?;
    if magic != MAGIC {
        return Err(Error::CorruptFile(format!(
            "bad magic {magic:?} in {}",
            path.display()
        )));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::CheckpointVersion {
            found: version,
            expected: VERSION,
        });
    }
    let n = r.u32()? as usize;
    let wavelength = r.f64()?;
    let positions: Vec<f64> = (0..n).map(|_| r.f64()).collect::<Result<_>>()?;
    let geometry = ArrayGeometry::new(positions, wavelength)?;

    let fov = (r.f64()?, r.f64()?);
    let tag = r.u8()?;
    let lo = r.u8()? as usize;
    let hi = r.u8()? as usize;
    let law = match tag {
        0 => SourceCountLaw::Fixed { m: lo },
        1 => SourceCountLaw::Uniform { lo, hi },
        t => return Err(Error::CorruptFile(format!("unknown source-count law tag {t}"))),
    };
    let amplitude_range = (r.f64()?, r.f64()?);
    let phase_range = (r.f64()?, r.f64()?);
    let snr_range_db = (r.f64()?, r.f64()?);
    let min_separation_deg = r.f64()?;
    let noise_enabled = r.u8()? != 0;
    let seed = r.u64()?;
    let record_count = r.u64()?;

    let distribution = SceneDistribution {
        fov_deg: fov,
        source_count_law: law,
        amplitude_range,
        phase_range,
        snr_range_db,
        min_separation_deg,
    };

    let mut snapshots = Vec::with_capacity(record_count as usize);
    for i in 0..record_count {
        let m = r.u8()? as usize;
        if m == 0 || m > super::MAX_SOURCES {
            return Err(Error::CorruptFile(format!("record {i}: bad source count {m}")));
        }
        let angles: Vec<f64> = (0..m).map(|_| r.f64()).collect::<Result<_>>()?;
        let gains: Vec<Complex64> = (0..m)
            .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
            .collect::<Result<_>>()?;
        let snr = r.f64()?;
        let observation: Vec<Complex64> = (0..n)
            .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
            .collect::<Result<_>>()?;
        snapshots.push(Snapshot {
            observation,
            scene: super::SourceScene::new(angles, gains)?,
            snr_db: noise_enabled.then_some(snr),
            seed: derive_seed(seed, i),
            impairment_id: None,
        });
    }
    if r.remaining() != 0 {
        return Err(Error::CorruptFile(format!(
            "{} trailing bytes after last record",
            r.remaining()
        )));
    }

    Ok(Dataset {
        config: DatasetConfig {
            geometry,
            distribution,
            record_count,
            seed,
            noise_enabled,
        },
        snapshots,
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take_bytes(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.remaining() < k {
            return Err(Error::CorruptFile("unexpected end of file".into()));
        }
        let out = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take_bytes(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take_bytes(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take_bytes(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take_bytes(8)?.try_into().unwrap()))
    }
}

//! JSON run configuration: every field optional with declared defaults,
//! unknown keys rejected, resolved into the library config types.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use aoa_lab::array_model::{ArrayGeometry, SceneDistribution, SourceCountLaw};
use aoa_lab::classical::GridSpec;
use aoa_lab::eval::{ImpairmentParams, MethodTag, SweepConfig};
use aoa_lab::net::NetworkSpec;
use aoa_lab::train::TrainConfig;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub geometry: GeometrySection,
    pub scene_distribution: SceneSection,
    pub grid: GridSection,
    pub network: NetworkSection,
    pub training: TrainingSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    /// Explicit element positions (wavelengths); overrides the ULA fields.
    pub positions: Option<Vec<f64>>,
    pub elements: usize,
    pub spacing_wavelengths: f64,
    pub wavelength: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            positions: None,
            elements: 16,
            spacing_wavelengths: 0.5,
            wavelength: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSection {
    pub fov_deg: (f64, f64),
    pub source_count: SourceCountLaw,
    pub amplitude_range: (f64, f64),
    /// Phase range in radians.
    pub phase_range: (f64, f64),
    pub snr_range_db: (f64, f64),
    pub min_separation_deg: f64,
    pub noise: bool,
}

impl Default for SceneSection {
    fn default() -> Self {
        let d = SceneDistribution::default();
        Self {
            fov_deg: d.fov_deg,
            source_count: d.source_count_law,
            amplitude_range: d.amplitude_range,
            phase_range: d.phase_range,
            snr_range_db: d.snr_range_db,
            min_separation_deg: d.min_separation_deg,
            noise: true,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Defaults to the scene FOV.
    pub fov_deg: Option<(f64, f64)>,
    pub step_deg: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub hidden_widths: Vec<usize>,
    pub dense_connectivity: bool,
    /// Defaults to half the scene FOV width.
    pub fov_half_width_deg: Option<f64>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            hidden_widths: vec![256, 512, 1024, 2048, 2048, 1024, 512, 256],
            dense_connectivity: false,
            fov_half_width_deg: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub batch_size: usize,
    pub iterations: u64,
    pub lr: f64,
    pub momentum: f64,
    pub lr_decay_factor: f64,
    pub lr_decay_every: u64,
    pub loss_weight: f64,
    pub validation_size: usize,
    pub checkpoint_every: u64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            batch_size: 4000,
            iterations: 100_000,
            lr: 0.01,
            momentum: 0.9,
            lr_decay_factor: 0.5,
            lr_decay_every: 20_000,
            loss_weight: 1.0,
            validation_size: 2000,
            checkpoint_every: 5000,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub methods: Vec<String>,
    pub snr_points_db: Vec<f64>,
    pub trials_per_point: usize,
    pub subarray_size: usize,
    pub ap_passes: usize,
    pub impairment: Option<ImpairmentSection>,
    pub measure_runtime: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            methods: vec!["ap".into()],
            snr_points_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials_per_point: 100,
            subarray_size: 8,
            ap_passes: 10,
            impairment: None,
            measure_runtime: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ImpairmentSection {
    pub phase_sigma_deg: f64,
    #[serde(default)]
    pub crosstalk_gamma_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::MissingArtifact(format!("config {}: {e}", path.display())))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self, override_seed: Option<u64>) -> u64 {
        override_seed.or(self.seed).unwrap_or(0)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry, CliError> {
        let g = &self.geometry;
        let geom = match &g.positions {
            Some(p) => ArrayGeometry::new(p.clone(), g.wavelength),
            None => ArrayGeometry::ula(g.elements, g.spacing_wavelengths),
        };
        geom.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn scene_distribution(&self) -> Result<SceneDistribution, CliError> {
        let s = &self.scene_distribution;
        let dist = SceneDistribution {
            fov_deg: s.fov_deg,
            source_count_law: s.source_count,
            amplitude_range: s.amplitude_range,
            phase_range: s.phase_range,
            snr_range_db: s.snr_range_db,
            min_separation_deg: s.min_separation_deg,
        };
        dist.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(dist)
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let fov = self.grid.fov_deg.unwrap_or(self.scene_distribution.fov_deg);
        let step = self.grid.step_deg.unwrap_or(0.1);
        GridSpec::new(fov, step).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn network(&self, geometry: &ArrayGeometry) -> Result<NetworkSpec, CliError> {
        let fov = &self.scene_distribution.fov_deg;
        let half_width = self
            .network
            .fov_half_width_deg
            .unwrap_or((fov.1 - fov.0) / 2.0);
        let spec = NetworkSpec {
            input_dim: 2 * geometry.element_count(),
            hidden_widths: self.network.hidden_widths.clone(),
            dense_connectivity: self.network.dense_connectivity,
            fov_half_width_deg: half_width,
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig, CliError> {
        let geometry = self.geometry()?;
        let network = self.network(&geometry)?;
        let dist = self.scene_distribution()?;
        let t = &self.training;
        let cfg = TrainConfig {
            geometry,
            network,
            scene_distribution: dist,
            batch_size: t.batch_size,
            iterations: t.iterations,
            lr: t.lr,
            momentum: t.momentum,
            lr_decay_factor: t.lr_decay_factor,
            lr_decay_every: t.lr_decay_every,
            loss_weight: t.loss_weight,
            seed,
            validation_size: t.validation_size,
            checkpoint_every: t.checkpoint_every,
            noise_enabled: self.scene_distribution.noise,
            fixed_scenes: None,
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn sweep_config(
        &self,
        seed: u64,
        checkpoint: Option<PathBuf>,
    ) -> Result<SweepConfig, CliError> {
        let geometry = self.geometry()?;
        let dist = self.scene_distribution()?;
        let grid = self.grid()?;
        let s = &self.sweep;
        let methods = s
            .methods
            .iter()
            .map(|name| MethodTag::parse(name))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let cfg = SweepConfig {
            geometry,
            methods,
            snr_points_db: s.snr_points_db.clone(),
            trials_per_point: s.trials_per_point,
            scene_distribution: dist,
            impairment: s.impairment.map(|i| ImpairmentParams {
                phase_sigma_deg: i.phase_sigma_deg,
                crosstalk_gamma_db: i.crosstalk_gamma_db,
                seed: i.seed,
            }),
            grid,
            seed,
            subarray_size: s.subarray_size,
            ap_passes: s.ap_passes,
            checkpoint,
            noise_enabled: self.scene_distribution.noise,
            measure_runtime: s.measure_runtime,
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

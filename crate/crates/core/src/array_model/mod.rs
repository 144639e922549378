//! Physical signal model: array geometry, steering vectors, snapshot
//! synthesis with noise and hardware impairments, and scene sampling for
//! dataset generation.

pub mod dataset;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sample_complex_gaussian, CMatrix};

/// Maximum number of simultaneous sources the model supports.
pub const MAX_SOURCES: usize = 4;

/// Linear array of antenna elements.
///
/// Positions are element coordinates in units of wavelength, measured from
/// the array center, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    positions: Vec<f64>,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<f64>, wavelength: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParameter("empty element positions".into()));
        }
        if !(wavelength > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "element positions must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            positions,
            wavelength,
        })
    }

    /// Uniform linear array of `n` elements with the given spacing in
    /// wavelengths, centered on the origin, unit wavelength.
    pub fn ula(n: usize, spacing_wavelengths: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("ULA needs at least 1 element".into()));
        }
        let center = (n as f64 - 1.0) / 2.0;
        let positions = (0..n)
            .map(|i| (i as f64 - center) * spacing_wavelengths)
            .collect();
        Self::new(positions, 1.0)
    }

    /// The paper's default array: 16 elements at half-wavelength spacing.
    pub fn default_ula16() -> Self {
        Self::ula(16, 0.5).expect("valid default array")
    }

    pub fn element_count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Geometry of the leading `q`-element subarray (used by spatial
    /// smoothing and MUSIC).
    pub fn leading_subarray(&self, q: usize) -> Result<Self> {
        if q == 0 || q > self.positions.len() {
            return Err(Error::InvalidParameter(format!(
                "subarray size {q} out of range 1..={}",
                self.positions.len()
            )));
        }
        Self::new(self.positions[..q].to_vec(), self.wavelength)
    }
}

/// Phase response of the array to a unit far-field source at `theta_deg`:
/// element n is `exp(j 2 pi x_n sin(theta) / lambda)`.
pub fn steering_vector(geometry: &ArrayGeometry, theta_deg: f64) -> Result<Vec<Complex64>> {
    if !(theta_deg.abs() < 90.0) {
        return Err(Error::AngleOutOfDomain { theta_deg });
    }
    let sin_t = theta_deg.to_radians().sin();
    let k = 2.0 * PI * sin_t / geometry.wavelength;
    Ok(geometry
        .positions
        .iter()
        .map(|&x| Complex64::from_polar(1.0, k * x))
        .collect())
}

/// Ground truth for one snapshot: source angles (degrees) and complex gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceScene {
    pub angles_deg: Vec<f64>,
    pub gains: Vec<Complex64>,
}

impl SourceScene {
    pub fn new(angles_deg: Vec<f64>, gains: Vec<Complex64>) -> Result<Self> {
        if angles_deg.is_empty() || angles_deg.len() > MAX_SOURCES {
            return Err(Error::InvalidParameter(format!(
                "source count {} outside 1..={MAX_SOURCES}",
                angles_deg.len()
            )));
        }
        if angles_deg.len() != gains.len() {
            return Err(Error::DimensionMismatch {
                context: "angles and gains length differ".into(),
            });
        }
        if gains.iter().any(|g| g.norm() == 0.0) {
            return Err(Error::InvalidParameter("source gains must be nonzero".into()));
        }
        Ok(Self { angles_deg, gains })
    }

    pub fn source_count(&self) -> usize {
        self.angles_deg.len()
    }
}

/// One complex array observation plus its generation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub observation: Vec<Complex64>,
    pub scene: SourceScene,
    /// SNR in dB; `None` means noise was disabled.
    pub snr_db: Option<f64>,
    pub seed: u64,
    /// Seed of the impairment matrix applied to the observation, if any.
    pub impairment_id: Option<u64>,
}

/// Per-element complex noise variance for an SNR (dB) against a nominal
/// unit-amplitude source.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Synthesizes `y = sum_m a(theta_m) s_m + v` with circularly symmetric
/// Gaussian noise of per-element variance `10^(-snr/10)`; `snr_db = None`
/// disables noise entirely.
pub fn synthesize_snapshot(
    geometry: &ArrayGeometry,
    scene: &SourceScene,
    snr_db: Option<f64>,
    seed: u64,
    rng: &mut impl Rng,
) -> Result<Snapshot> {
    let n = geometry.element_count();
    let mut y = vec![Complex64::ZERO; n];
    for (theta, gain) in scene.angles_deg.iter().zip(&scene.gains) {
        let a = steering_vector(geometry, *theta)?;
        for (yi, ai) in y.iter_mut().zip(a) {
            *yi += ai * gain;
        }
    }
    if let Some(snr) = snr_db {
        let noise = sample_complex_gaussian(n, noise_variance(snr), rng)?;
        for (yi, vi) in y.iter_mut().zip(noise) {
            *yi += vi;
        }
    }
    Ok(Snapshot {
        observation: y,
        scene: scene.clone(),
        snr_db,
        seed,
        impairment_id: None,
    })
}

/// Fixed hardware mismatch: unit-amplitude diagonal with Gaussian phase
/// offsets, complex Gaussian cross-talk on the off-diagonal.
#[derive(Debug, Clone)]
pub struct ImpairmentSpec {
    pub phase_sigma_deg: f64,
    /// Cross-talk attenuation in dB below unity; `None` disables cross-talk.
    pub crosstalk_gamma_db: Option<f64>,
    pub seed: u64,
    pub matrix: CMatrix,
}

/// Realizes an impairment matrix `H`. The matrix is drawn once and then
/// held fixed for a whole evaluation run.
pub fn realize_impairment(
    phase_sigma_deg: f64,
    crosstalk_gamma_db: Option<f64>,
    n: usize,
    seed: u64,
) -> Result<ImpairmentSpec> {
    if phase_sigma_deg < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "phase sigma must be >= 0, got {phase_sigma_deg}"
        )));
    }
    if let Some(g) = crosstalk_gamma_db {
        if !(g > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cross-talk attenuation must be > 0 dB, got {g}"
            )));
        }
    }
    let mut rng = crate::numerics::seeded_rng(seed);
    let mut h = CMatrix::zeros(n, n);
    // Diagonal phases first, then off-diagonal entries row-major: the draw
    // order is part of the determinism contract.
    for i in 0..n {
        let phi_deg: f64 = if phase_sigma_deg > 0.0 {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            z * phase_sigma_deg
        } else {
            0.0
        };
        h[(i, i)] = Complex64::from_polar(1.0, phi_deg.to_radians());
    }
    if let Some(gamma_db) = crosstalk_gamma_db {
        let var = 10f64.powf(-gamma_db / 10.0);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    h[(i, j)] = sample_complex_gaussian(1, var, &mut rng)?[0];
                }
            }
        }
    }
    Ok(ImpairmentSpec {
        phase_sigma_deg,
        crosstalk_gamma_db,
        seed,
        matrix: h,
    })
}

/// Replaces the observation with `H y`; ground-truth metadata is untouched.
pub fn apply_impairment(impairment: &ImpairmentSpec, snapshot: &Snapshot) -> Result<Snapshot> {
    if impairment.matrix.cols() != snapshot.observation.len() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "impairment {}x{} vs observation len {}",
                impairment.matrix.rows(),
                impairment.matrix.cols(),
                snapshot.observation.len()
            ),
        });
    }
    Ok(Snapshot {
        observation: impairment.matrix.mul_vec(&snapshot.observation)?,
        scene: snapshot.scene.clone(),
        snr_db: snapshot.snr_db,
        seed: snapshot.seed,
        impairment_id: Some(impairment.seed),
    })
}

/// How many sources a sampled scene contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceCountLaw {
    Fixed { m: usize },
    /// Uniform over `lo..=hi`.
    Uniform { lo: usize, hi: usize },
}

impl SourceCountLaw {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = match *self {
            SourceCountLaw::Fixed { m } => (m, m),
            SourceCountLaw::Uniform { lo, hi } => (lo, hi),
        };
        if lo == 0 || hi > MAX_SOURCES || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "source count law out of range 1..={MAX_SOURCES}: {self:?}"
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        match *self {
            SourceCountLaw::Fixed { m } => m,
            SourceCountLaw::Uniform { lo, hi } => rng.random_range(lo..=hi),
        }
    }
}

/// Distribution of random scenes used for training and benchmarking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDistribution {
    /// Field of view (min, max) in degrees.
    pub fov_deg: (f64, f64),
    pub source_count_law: SourceCountLaw,
    pub amplitude_range: (f64, f64),
    /// Phase range in radians.
    pub phase_range: (f64, f64),
    pub snr_range_db: (f64, f64),
    pub min_separation_deg: f64,
}

impl Default for SceneDistribution {
    fn default() -> Self {
        Self {
            fov_deg: (-25.0, 25.0),
            source_count_law: SourceCountLaw::Uniform { lo: 1, hi: 4 },
            amplitude_range: (0.5, 1.5),
            phase_range: (0.0, 2.0 * PI),
            snr_range_db: (-10.0, 30.0),
            min_separation_deg: 0.0,
        }
    }
}

impl SceneDistribution {
    pub fn validate(&self) -> Result<()> {
        if self.fov_deg.0 >= self.fov_deg.1 {
            return Err(Error::InvalidParameter(format!(
                "FOV min {} must be below max {}",
                self.fov_deg.0, self.fov_deg.1
            )));
        }
        if self.fov_deg.0 <= -90.0 || self.fov_deg.1 >= 90.0 {
            return Err(Error::InvalidParameter(
                "FOV must sit inside (-90, 90) degrees".into(),
            ));
        }
        if !(self.amplitude_range.0 > 0.0) || self.amplitude_range.0 > self.amplitude_range.1 {
            return Err(Error::InvalidParameter(
                "amplitude range must be positive and ordered".into(),
            ));
        }
        if self.snr_range_db.0 > self.snr_range_db.1 {
            return Err(Error::InvalidParameter("SNR range must be ordered".into()));
        }
        if self.min_separation_deg < 0.0 {
            return Err(Error::InvalidParameter(
                "min separation must be >= 0".into(),
            ));
        }
        self.source_count_law.validate()
    }

    /// Centered FOV of the given width in degrees.
    pub fn with_fov_width(mut self, width_deg: f64) -> Self {
        self.fov_deg = (-width_deg / 2.0, width_deg / 2.0);
        self
    }

    pub fn sample_snr_db(&self, rng: &mut impl Rng) -> f64 {
        if self.snr_range_db.0 == self.snr_range_db.1 {
            self.snr_range_db.0
        } else {
            rng.random_range(self.snr_range_db.0..self.snr_range_db.1)
        }
    }
}

const MAX_REJECTION_ATTEMPTS: usize = 10_000;

/// Draws a random scene: source count per the law, angles i.i.d. uniform
/// over the FOV (rejection-sampled against `min_separation_deg`),
/// amplitudes and phases uniform over their ranges.
pub fn sample_scene(dist: &SceneDistribution, rng: &mut impl Rng) -> Result<SourceScene> {
    dist.validate()?;
    let m = dist.source_count_law.sample(rng);
    let mut angles = Vec::with_capacity(m);
    let mut attempts = 0;
    while angles.len() < m {
        attempts += 1;
        if attempts > MAX_REJECTION_ATTEMPTS {
            return Err(Error::SeparationInfeasible {
                attempts: MAX_REJECTION_ATTEMPTS,
                min_separation_deg: dist.min_separation_deg,
            });
        }
        let theta = rng.random_range(dist.fov_deg.0..dist.fov_deg.1);
        let ok = dist.min_separation_deg == 0.0
            || angles
                .iter()
                .all(|&a: &f64| (a - theta).abs() >= dist.min_separation_deg);
        if ok {
            angles.push(theta);
        }
    }
    let gains = (0..m)
        .map(|_| {
            let amp = if dist.amplitude_range.0 == dist.amplitude_range.1 {
                dist.amplitude_range.0
            } else {
                rng.random_range(dist.amplitude_range.0..dist.amplitude_range.1)
            };
            let phase = if dist.phase_range.0 == dist.phase_range.1 {
                dist.phase_range.0
            } else {
                rng.random_range(dist.phase_range.0..dist.phase_range.1)
            };
            Complex64::from_polar(amp, phase)
        })
        .collect();
    SourceScene::new(angles, gains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_rng;

    #[test]
    fn ula_positions_symmetric() {
        let g = ArrayGeometry::default_ula16();
        assert_eq!(g.element_count(), 16);
        let p = g.positions();
        assert_eq!(p[0], -3.75);
        assert_eq!(p[15], 3.75);
        for i in 0..8 {
            assert_eq!(p[i], -p[15 - i]);
        }
    }

    #[test]
    fn steering_broadside_all_ones() {
        let g = ArrayGeometry::default_ula16();
        let a = steering_vector(&g, 0.0).unwrap();
        for z in a {
            assert!((z - Complex64::ONE).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_endfire_limit_two_elements() {
        let g = ArrayGeometry::ula(2, 0.5).unwrap();
        // Positions are (-1/4, +1/4) wavelengths; at theta -> 90 the
        // entries approach (e^{-j pi/2}, e^{+j pi/2}) = (-j, +j).
        let a = steering_vector(&g, 90.0 - 1e-7).unwrap();
        assert!((a[0] - Complex64::new(0.0, -1.0)).norm() < 1e-6);
        assert!((a[1] - Complex64::new(0.0, 1.0)).norm() < 1e-6);
    }

    #[test]
    fn steering_unit_power() {
        let g = ArrayGeometry::default_ula16();
        for theta in [-60.0, -12.3, 0.0, 7.7, 45.0] {
            let a = steering_vector(&g, theta).unwrap();
            let p: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            assert!((p - 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn steering_rejects_out_of_domain() {
        let g = ArrayGeometry::default_ula16();
        assert!(steering_vector(&g, 90.0).is_err());
        assert!(steering_vector(&g, -95.0).is_err());
    }

    #[test]
    fn steering_conjugate_symmetry() {
        let g = ArrayGeometry::default_ula16();
        for theta in [3.0, 17.5, 42.0] {
            let plus = steering_vector(&g, theta).unwrap();
            let minus = steering_vector(&g, -theta).unwrap();
            for (p, m) in plus.iter().zip(minus) {
                assert!((p.conj() - m).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn noiseless_single_source_broadside() {
        let g = ArrayGeometry::default_ula16();
        let scene = SourceScene::new(vec![0.0], vec![Complex64::ONE]).unwrap();
        let snap = synthesize_snapshot(&g, &scene, None, 0, &mut seeded_rng(0)).unwrap();
        for z in snap.observation {
            assert!((z - Complex64::ONE).norm() < 1e-15);
        }
    }

    #[test]
    fn noiseless_two_source_matches_direct_sum() {
        let g = ArrayGeometry::default_ula16();
        let s0 = Complex64::new(0.8, -0.3);
        let s1 = Complex64::new(-0.2, 1.1);
        let scene = SourceScene::new(vec![-7.0, 12.0], vec![s0, s1]).unwrap();
        let snap = synthesize_snapshot(&g, &scene, None, 0, &mut seeded_rng(0)).unwrap();
        let a0 = steering_vector(&g, -7.0).unwrap();
        let a1 = steering_vector(&g, 12.0).unwrap();
        for i in 0..16 {
            let expect = a0[i] * s0 + a1[i] * s1;
            assert!((snap.observation[i] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn snapshot_linearity_in_scenes() {
        let g = ArrayGeometry::default_ula16();
        let sc1 = SourceScene::new(vec![-3.0], vec![Complex64::new(1.0, 0.5)]).unwrap();
        let sc2 = SourceScene::new(vec![9.0], vec![Complex64::new(-0.7, 0.2)]).unwrap();
        let joint = SourceScene::new(
            vec![-3.0, 9.0],
            vec![Complex64::new(1.0, 0.5), Complex64::new(-0.7, 0.2)],
        )
        .unwrap();
        let y1 = synthesize_snapshot(&g, &sc1, None, 0, &mut seeded_rng(0)).unwrap();
        let y2 = synthesize_snapshot(&g, &sc2, None, 0, &mut seeded_rng(0)).unwrap();
        let y12 = synthesize_snapshot(&g, &joint, None, 0, &mut seeded_rng(0)).unwrap();
        for i in 0..16 {
            let sum = y1.observation[i] + y2.observation[i];
            assert!((y12.observation[i] - sum).norm() < 1e-12);
        }
    }

    #[test]
    fn snr_zero_noise_power_calibrated() {
        let g = ArrayGeometry::default_ula16();
        let scene = SourceScene::new(vec![0.0], vec![Complex64::ONE]).unwrap();
        let clean = synthesize_snapshot(&g, &scene, None, 0, &mut seeded_rng(0)).unwrap();
        let trials = 10_000;
        let mut rng = seeded_rng(99);
        let mut power = 0.0;
        for seed in 0..trials {
            let snap = synthesize_snapshot(&g, &scene, Some(0.0), seed, &mut rng).unwrap();
            power += snap
                .observation
                .iter()
                .zip(&clean.observation)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>();
        }
        let per_element = power / (trials as f64 * 16.0);
        assert!(
            (per_element - 1.0).abs() < 0.03,
            "noise power per element {per_element}"
        );
    }

    #[test]
    fn snapshot_determinism_given_seed() {
        let g = ArrayGeometry::default_ula16();
        let scene = SourceScene::new(vec![4.0], vec![Complex64::ONE]).unwrap();
        let a = synthesize_snapshot(&g, &scene, Some(10.0), 5, &mut seeded_rng(5)).unwrap();
        let b = synthesize_snapshot(&g, &scene, Some(10.0), 5, &mut seeded_rng(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_impairment() {
        let spec = realize_impairment(0.0, None, 16, 1).unwrap();
        let dev = spec
            .matrix
            .sub(&CMatrix::identity(16))
            .unwrap()
            .frobenius_norm();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn impairment_off_diagonal_power_calibrated() {
        // Medium level: gamma = 30 dB -> mean off-diagonal power 1e-3.
        let mut total = 0.0;
        let mut count = 0usize;
        for seed in 0..100 {
            let spec = realize_impairment(5.0, Some(30.0), 16, seed).unwrap();
            for i in 0..16 {
                for j in 0..16 {
                    if i != j {
                        total += spec.matrix[(i, j)].norm_sqr();
                        count += 1;
                    }
                }
            }
        }
        let mean = total / count as f64;
        assert!(
            (mean - 1e-3).abs() <= 0.1e-3,
            "mean off-diagonal power {mean}"
        );
    }

    #[test]
    fn impairment_diagonal_phase_spread() {
        // High level: sigma = 10 degrees; pool diagonal phases over
        // realizations and check the sample std.
        let mut phases = Vec::new();
        for seed in 0..100 {
            let spec = realize_impairment(10.0, Some(20.0), 16, seed).unwrap();
            for i in 0..16 {
                assert!((spec.matrix[(i, i)].norm() - 1.0).abs() < 1e-12);
                phases.push(spec.matrix[(i, i)].arg().to_degrees());
            }
        }
        let n = phases.len() as f64;
        let mean = phases.iter().sum::<f64>() / n;
        let var = phases.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        assert!((std - 10.0).abs() <= 1.5, "phase std {std}");
    }

    #[test]
    fn apply_impairment_matches_matvec() {
        let g = ArrayGeometry::default_ula16();
        let scene = SourceScene::new(vec![6.0], vec![Complex64::ONE]).unwrap();
        let snap = synthesize_snapshot(&g, &scene, Some(20.0), 3, &mut seeded_rng(3)).unwrap();
        let spec = realize_impairment(5.0, Some(30.0), 16, 17).unwrap();
        let out = apply_impairment(&spec, &snap).unwrap();
        let expect = spec.matrix.mul_vec(&snap.observation).unwrap();
        for (a, b) in out.observation.iter().zip(expect) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(out.scene, snap.scene);
        assert_eq!(out.impairment_id, Some(17));
    }

    #[test]
    fn phase_only_impairment_preserves_magnitudes() {
        let g = ArrayGeometry::default_ula16();
        let scene = SourceScene::new(vec![6.0], vec![Complex64::ONE]).unwrap();
        let snap = synthesize_snapshot(&g, &scene, Some(20.0), 3, &mut seeded_rng(3)).unwrap();
        let spec = realize_impairment(8.0, None, 16, 9).unwrap();
        let out = apply_impairment(&spec, &snap).unwrap();
        for (a, b) in out.observation.iter().zip(&snap.observation) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_scene_within_fov() {
        let dist = SceneDistribution {
            source_count_law: SourceCountLaw::Fixed { m: 4 },
            ..SceneDistribution::default()
        };
        let mut rng = seeded_rng(12);
        for _ in 0..100 {
            let scene = sample_scene(&dist, &mut rng).unwrap();
            assert_eq!(scene.source_count(), 4);
            for &a in &scene.angles_deg {
                assert!((-25.0..25.0).contains(&a));
            }
        }
    }

    #[test]
    fn min_separation_respected() {
        let dist = SceneDistribution {
            source_count_law: SourceCountLaw::Fixed { m: 3 },
            min_separation_deg: 5.0,
            ..SceneDistribution::default()
        };
        let mut rng = seeded_rng(13);
        for _ in 0..200 {
            let scene = sample_scene(&dist, &mut rng).unwrap();
            for i in 0..3 {
                for j in (i + 1)..3 {
                    assert!((scene.angles_deg[i] - scene.angles_deg[j]).abs() >= 5.0);
                }
            }
        }
    }

    #[test]
    fn infeasible_separation_errors() {
        let dist = SceneDistribution {
            source_count_law: SourceCountLaw::Fixed { m: 4 },
            min_separation_deg: 30.0, // 4 sources cannot fit in 50 degrees
            ..SceneDistribution::default()
        };
        let got = sample_scene(&dist, &mut seeded_rng(14));
        assert!(matches!(got, Err(Error::SeparationInfeasible { .. })));
    }

    #[test]
    fn amplitude_deciles_uniform() {
        let dist = SceneDistribution {
            source_count_law: SourceCountLaw::Fixed { m: 1 },
            ..SceneDistribution::default()
        };
        let mut rng = seeded_rng(15);
        let n = 100_000;
        let mut deciles = [0usize; 10];
        for _ in 0..n {
            let scene = sample_scene(&dist, &mut rng).unwrap();
            let amp = scene.gains[0].norm();
            let bin = (((amp - 0.5) / 1.0) * 10.0).floor() as usize;
            deciles[bin.min(9)] += 1;
        }
        for (i, &c) in deciles.iter().enumerate() {
            let frac = c as f64 / n as f64;
            assert!(
                (frac - 0.1).abs() <= 0.002,
                "decile {i} fraction {frac}"
            );
        }
    }
}

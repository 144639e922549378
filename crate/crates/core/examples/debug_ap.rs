use aoa_lab::array_model::*;
use aoa_lab::classical::{ml_estimate, GridSpec};
use aoa_lab::net::{self, NetworkSpec};
use aoa_lab::numerics::{derive_seed, seeded_rng};
use aoa_lab::train::{train, TrainConfig};
use rayon::prelude::*;
use std::time::Instant;

fn main() {
    let iters: u64 = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(8000);
    let geometry = ArrayGeometry::default_ula16();
    let network = NetworkSpec {
        input_dim: 32,
        hidden_widths: vec![256, 256, 256],
        dense_connectivity: false,
        fov_half_width_deg: 10.0,
    };
    let dist = SceneDistribution {
        source_count_law: SourceCountLaw::Uniform { lo: 1, hi: 2 },
        ..SceneDistribution::default().with_fov_width(20.0)
    };
    let mut cfg = TrainConfig::new(geometry.clone(), network, dist.clone());
    cfg.batch_size = 256;
    cfg.iterations = iters;
    cfg.lr = 0.02;
    cfg.checkpoint_every = 2000;
    cfg.validation_size = 1000;
    cfg.seed = 20260810;
    let t0 = Instant::now();
    let outcome = train(&cfg, None).unwrap();
    println!("trained {iters} iters in {:.1} min", t0.elapsed().as_secs_f64() / 60.0);
    for v in &outcome.log.validations {
        println!("val @ {}: loss {:.4} acc {:.3} rmse1 {:?} rmse2 {:?}", v.iteration, v.loss, v.accuracy,
                 v.rmse_deg_per_count[0], v.rmse_deg_per_count[1]);
    }

    // Shared 2000-trial test set at SNR 20.
    let grid = GridSpec::new((-10.0, 10.0), 0.1).unwrap();
    let test_seed = 777u64;
    let trials: Vec<_> = (0..2000u64).map(|t| {
        let seed = derive_seed(test_seed, t);
        let mut rng = seeded_rng(seed);
        let scene = sample_scene(&dist, &mut rng).unwrap();
        synthesize_snapshot(&geometry, &scene, Some(20.0), seed, &mut rng).unwrap()
    }).collect();
    let sq = |truth: &[f64], est: &[f64]| -> f64 {
        truth.iter().map(|t| est.iter().map(|e| (e-t)*(e-t)).fold(f64::INFINITY, f64::min)).sum::<f64>() / truth.len() as f64
    };
    let t1 = Instant::now();
    let ml_sq: f64 = trials.par_iter().map(|snap| {
        let est = ml_estimate(&geometry, snap, snap.scene.source_count(), &grid).unwrap();
        sq(&snap.scene.angles_deg, &est.angles_deg)
    }).sum::<f64>() / trials.len() as f64;
    let dnn_sq: f64 = trials.par_iter().map(|snap| {
        let est = net::predict_with_order(&outcome.params, snap, snap.scene.source_count()).unwrap();
        sq(&snap.scene.angles_deg, &est.angles_deg)
    }).sum::<f64>() / trials.len() as f64;
    println!("ML rmse {:.4} deg ({:.1}s), DNN rmse {:.4} deg, ratio {:.2}",
             ml_sq.sqrt(), t1.elapsed().as_secs_f64(), dnn_sq.sqrt(), dnn_sq.sqrt() / ml_sq.sqrt());
}

//! Seeded random generation.
//!
//! Every stochastic component of the crate draws from a [`ChaCha8Rng`]
//! built by [`seeded_rng`]. Parallel workers never share a generator;
//! they derive independent child seeds with [`derive_seed`].

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Deterministic, portable generator from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed for stream `stream` (SplitMix64 mix).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `n` i.i.d. circularly symmetric complex Gaussian entries with
/// per-entry variance `variance` (`variance / 2` per real and imaginary
/// component).
pub fn sample_complex_gaussian(
    n: usize,
    variance: f64,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>> {
    if !(variance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "complex Gaussian variance must be positive, got {variance}"
        )));
    }
    let std = (variance / 2.0).sqrt();
    Ok((0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * std, im * std)
        })
        .collect())
}

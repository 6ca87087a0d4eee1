use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Plane;
use crate::error::{Error, Result};

/// Additive white Gaussian noise, clamped to the 8-bit range.
///
/// Samples come from ChaCha20 (`rand_chacha`) seeded with `seed` and are
/// shaped by `rand_distr`'s ziggurat standard normal, drawn in row-major
/// pixel order. Output is reproducible across platforms for a given seed.
pub fn add_awgn(plane: &Plane, sigma: f64, seed: u64) -> Result<Plane> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::input(format!("noise sigma must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(plane.clone());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let data = plane
        .as_slice()
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (v + sigma * z).clamp(0.0, 255.0)
        })
        .collect();
    Plane::new(plane.width(), plane.height(), data)
}

#![allow(dead_code)]

use depthgraph::{Plane, RgbdImage, WeightParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random color and depth with a few flat patches so some edges survive the cut-off.
pub fn random_image(width: usize, height: usize, seed: u64) -> RgbdImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: f64 = rng.gen_range(20.0..200.0);
    let depth = Plane::from_fn(width, height, |r, c| {
        let step = if (r + c) % 5 == 0 { 40.0 } else { 0.0 };
        (base + step + rng.gen_range(-15.0..15.0)).clamp(0.0, 255.0)
    });
    let rgb = (0..width * height)
        .map(|_| [rng.gen(), rng.gen(), rng.gen()])
        .collect();
    RgbdImage::new(width, height, rgb, depth).unwrap()
}

pub fn random_params(seed: u64) -> WeightParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    WeightParams {
        delta_th: rng.gen_range(10.0..80.0),
        sigma_d: rng.gen_range(5.0..40.0),
        sigma_a: rng.gen_range(5.0..30.0),
        sigma_b: rng.gen_range(5.0..30.0),
    }
}

pub fn random_signal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf00d);
    (0..n).map(|_| rng.gen_range(0.0..255.0)).collect()
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

mod common;

use common::*;
use depthgraph::imaging::{add_awgn, psnr, synthetic_scene};
use depthgraph::*;

#[test]
fn output_is_clamped_deterministic_and_keeps_color() {
    let config = DenoiseConfig {
        iterations: 4,
        ..DenoiseConfig::default()
    };
    for seed in 0..5 {
        let image = random_image(18, 13, seed);
        let (a, trace) = denoise(&image, &config).unwrap();
        let (b, _) = denoise(&image, &config).unwrap();
        assert_eq!(trace.len(), 4);
        assert!(a.depth().as_slice().iter().all(|v| (0.0..=255.0).contains(v)));
        let bits = |p: &Plane| p.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a.depth()), bits(b.depth()));
        assert_eq!(a.rgb(), image.rgb());
        assert_eq!(a.lab_a(), image.lab_a());
        assert_eq!(a.lab_b(), image.lab_b());
    }
}

#[test]
fn trace_parameters_tighten_geometrically() {
    let image = random_image(10, 9, 2);
    let config = DenoiseConfig::default();
    let (_, trace) = denoise(&image, &config).unwrap();
    for (t, rec) in trace.iterations.iter().enumerate() {
        let g = 0.85f64.powi(t as i32);
        assert!((rec.params.delta_th - config.initial_params.delta_th * g).abs() < 1e-9);
        assert!((rec.params.sigma_d - config.initial_params.sigma_d * g).abs() < 1e-9);
        assert_eq!(rec.params.sigma_a, config.initial_params.sigma_a);
    }
}

#[test]
fn denoising_improves_psnr_on_synthetic_scenes() {
    for sigma in [10.0, 20.0, 30.0] {
        let config = DenoiseConfig::for_noise_sigma(sigma).unwrap();
        let mut improved = 0;
        for trial in 0..100u64 {
            let scene = synthetic_scene(48, 40, trial).unwrap();
            let clean = scene.image.depth();
            let noisy = add_awgn(clean, sigma, 1000 + trial).unwrap().quantized();
            let (out, _) = denoise(&scene.image.with_depth(noisy.clone()).unwrap(), &config).unwrap();
            if psnr(clean, out.depth()).unwrap() > psnr(clean, &noisy).unwrap() {
                improved += 1;
            }
        }
        assert!(improved >= 95, "sigma {sigma}: {improved}/100");
    }
}

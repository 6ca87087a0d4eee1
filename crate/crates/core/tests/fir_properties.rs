mod common;

use std::cell::Cell;

use common::*;
use depthgraph::fir::complexity::{count_dense_operations, dense_fir_counted, DenseVariant};
use depthgraph::fir::{butterworth_response, lambda_max_bound};
use depthgraph::*;
use proptest::prelude::*;

struct Counting<'a> {
    inner: &'a SparseLaplacian,
    calls: Cell<usize>,
}

impl LinearOperator for Counting<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.calls.set(self.calls.get() + 1);
        self.inner.apply(x, out);
    }
}

proptest! {
    #[test]
    fn horner_matches_native(
        width in 1usize..=16,
        height in 2usize..=16,
        seed in any::<u64>(),
        coeffs in prop::collection::vec(-3.0..3.0f64, 2..=13),
    ) {
        let image = random_image(width, height, seed);
        let lap = laplacian(&build_similarity_graph(&image, &random_params(seed)).unwrap());
        let f = random_signal(lap.dim(), seed);
        let scale = lambda_max_bound(&lap).unwrap().max(1.0);
        let fir = FirCoefficients::new(coeffs, scale, 0.0).unwrap();
        let fast = apply_fir(&lap, &f, &fir).unwrap();
        let native = apply_fir_native(&lap, &f, &fir).unwrap();
        prop_assert!(max_abs_diff(&fast, &native) <= 1e-9 * inf_norm(&f));
    }

    #[test]
    fn horner_uses_exactly_k_products(k in 0usize..=12, seed in any::<u64>()) {
        let image = random_image(7, 5, seed);
        let lap = laplacian(&build_similarity_graph(&image, &random_params(seed)).unwrap());
        let op = Counting { inner: &lap, calls: Cell::new(0) };
        let fir = FirCoefficients::new(vec![0.5; k + 1], 4.0, 0.0).unwrap();
        apply_fir(&op, &random_signal(35, seed), &fir).unwrap();
        prop_assert_eq!(op.calls.get(), k);
    }

    #[test]
    fn butterworth_is_strictly_decreasing(order in 1u32..=6, lc in 0.01..10.0f64, a in 1e-6..50.0f64, gap in 1e-6..10.0f64) {
        prop_assert!(butterworth_response(a + gap, lc, order) < butterworth_response(a, lc, order));
    }

    #[test]
    fn operator_scaling_is_absorbed_by_coefficients(
        seed in any::<u64>(),
        coeffs in prop::collection::vec(-1.0..1.0f64, 1..=8),
        scale in 0.5..8.0f64,
    ) {
        let image = random_image(8, 6, seed);
        let lap = laplacian(&build_similarity_graph(&image, &random_params(seed)).unwrap());
        let f = random_signal(lap.dim(), seed);
        let scaled = FirCoefficients::new(coeffs.clone(), scale, 0.0).unwrap();
        let raw: Vec<f64> = coeffs.iter().enumerate().map(|(k, c)| c / scale.powi(k as i32)).collect();
        let unscaled = FirCoefficients::new(raw, 1.0, 0.0).unwrap();
        let a = apply_fir(&lap, &f, &scaled).unwrap();
        let b = apply_fir(&lap, &f, &unscaled).unwrap();
        prop_assert!(max_abs_diff(&a, &b) <= 1e-9 * inf_norm(&f));
    }
}

#[test]
fn butterworth_anchor_values() {
    for order in 1..=5 {
        assert_eq!(butterworth_response(0.0, 2.0, order), 1.0);
        assert!((butterworth_response(2.0, 2.0, order) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}

#[test]
fn instrumented_dense_counts_match_closed_form() {
    for n in 1..=8usize {
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                matrix[i * n + j] = if i == j { 2.0 } else { -1.0 / n as f64 };
            }
        }
        let f: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        for k in 1..=4usize {
            let coeffs: Vec<f64> = (0..=k).map(|i| 1.0 / (i + 1) as f64).collect();
            let (horner, horner_ops) = dense_fir_counted(&matrix, &f, &coeffs, DenseVariant::Horner);
            let (native, native_ops) = dense_fir_counted(&matrix, &f, &coeffs, DenseVariant::Native);
            let expected_h = count_dense_operations(n as u64, k as u64, DenseVariant::Horner);
            let expected_n = count_dense_operations(n as u64, k as u64, DenseVariant::Native);
            assert_eq!(horner_ops, expected_h);
            assert_eq!(native_ops.multiplications, expected_n.multiplications);
            let gap = native_ops.additions - expected_n.additions;
            assert_eq!(gap, ((k - 1) * n * n) as u64, "n={n} k={k}");
            assert!(max_abs_diff(&horner, &native) <= 1e-10 * inf_norm(&native));
        }
    }
}

#[test]
fn default_design_passes_dc_and_attenuates_high_frequencies() {
    let fir = FilterDesign::default().fit(8.0).unwrap();
    assert!((fir.eval(0.0) - 1.0).abs() < 1e-12);
    assert!(fir.eval(8.0).abs() < 0.3);
    assert!(fir.fit_residual() > 0.0);
}

#[test]
fn edgeless_graph_bound_is_positive_zero() {
    let lap = SparseLaplacian::from_edges(4, &[]).unwrap();
    assert_eq!(lambda_max_bound(&lap).unwrap().to_bits(), 0.0f64.to_bits());
    let image = RgbdImage::from_depth(Plane::from_fn(2, 2, |r, c| if r == c { 0.0 } else { 200.0 }));
    let params = WeightParams {
        delta_th: 10.0,
        sigma_d: 5.0,
        sigma_a: 10.0,
        sigma_b: 10.0,
    };
    let lap = laplacian(&build_similarity_graph(&image, &params).unwrap());
    assert_eq!(lambda_max_bound(&lap).unwrap().to_bits(), 0.0f64.to_bits());
}

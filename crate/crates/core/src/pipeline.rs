//! Iterative color-guided depth denoising.
//!
//! Each iteration builds the similarity graph from the current depth estimate
//! (chroma always comes from the original color image), filters the depth
//! signal with the fitted polynomial, clamps to [0, 255], and shrinks the depth
//! cut-off and depth kernel width.

use std::path::Path;
use std::time::{Duration, Instant};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fir::{apply_fir, lambda_max_bound, FilterDesign, FirCoefficients};
use crate::graph::{build_similarity_graph, extract_depth_signal, laplacian, write_depth_signal, WeightParams};
use crate::imaging::{psnr, write_depth, write_gray, Plane, RgbdImage};
use crate::spectral::spectral_profile;

/// How filter coefficients follow the changing graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientMode {
    /// Refit against each iteration's λ_max bound.
    #[default]
    Refit,
    /// Fit once on the first graph and reuse coefficients and scale.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    pub initial_params: WeightParams,
    pub gamma_th: f64,
    pub gamma_d: f64,
    pub iterations: usize,
    pub filter_design: FilterDesign,
    pub coefficients: CoefficientMode,
    /// Graphs up to this many vertices get a low-band energy entry in the trace.
    pub trace_spectrum_limit: usize,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            initial_params: WeightParams {
                delta_th: 60.0,
                sigma_d: 40.0,
                sigma_a: 10.0,
                sigma_b: 10.0,
            },
            gamma_th: 0.85,
            gamma_d: 0.85,
            iterations: 8,
            filter_design: FilterDesign::default(),
            coefficients: CoefficientMode::Refit,
            trace_spectrum_limit: 0,
        }
    }
}

impl DenoiseConfig {
    /// Defaults with the depth kernel tied to a known noise level:
    /// `delta_th = 6σ`, `sigma_d = 2σ`.
    pub fn for_noise_sigma(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::input(format!("noise sigma must be finite and > 0, got {sigma}")));
        }
        let mut config = Self::default();
        config.initial_params.delta_th = 6.0 * sigma;
        config.initial_params.sigma_d = 2.0 * sigma;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.initial_params.validate()?;
        check_gamma("gamma_th", self.gamma_th)?;
        check_gamma("gamma_d", self.gamma_d)?;
        if self.iterations == 0 {
            return Err(Error::input("iterations must be >= 1"));
        }
        self.filter_design.validate()
    }
}

fn check_gamma(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::input(format!("{name} must lie strictly inside (0, 1), got {v}")));
    }
    Ok(())
}

/// Shrinks `delta_th` and `sigma_d`; chroma widths are untouched.
pub fn update_params(params: &WeightParams, gamma_th: f64, gamma_d: f64) -> Result<WeightParams> {
    check_gamma("gamma_th", gamma_th)?;
    check_gamma("gamma_d", gamma_d)?;
    Ok(WeightParams {
        delta_th: gamma_th * params.delta_th,
        sigma_d: gamma_d * params.sigma_d,
        ..*params
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub graph_secs: f64,
    pub fit_secs: f64,
    pub filter_secs: f64,
}

impl StageTimings {
    pub fn total_secs(&self) -> f64 {
        self.graph_secs + self.fit_secs + self.filter_secs
    }

    fn add(&mut self, other: &StageTimings) {
        self.graph_secs += other.graph_secs;
        self.fit_secs += other.fit_secs;
        self.filter_secs += other.filter_secs;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub params: WeightParams,
    pub edges: usize,
    pub lambda_bound: f64,
    pub lambda_scale: f64,
    pub fit_residual: f64,
    /// Share of energy in the lowest 10% of frequencies of this iteration's input.
    pub low_band_energy: Option<f64>,
    pub psnr: Option<f64>,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iterations: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn total_timings(&self) -> StageTimings {
        let mut total = StageTimings::default();
        for record in &self.iterations {
            total.add(&record.timings);
        }
        total
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DenoiseOptions<'a> {
    /// Ground truth for per-iteration PSNR.
    pub reference: Option<&'a Plane>,
    /// Directory for `depth_NN.pgm` and `edges_NN.pgm` per iteration.
    pub dump_dir: Option<&'a Path>,
}

pub fn denoise(image: &RgbdImage, config: &DenoiseConfig) -> Result<(RgbdImage, IterationTrace)> {
    denoise_with(image, config, DenoiseOptions::default())
}

pub fn denoise_with(
    image: &RgbdImage,
    config: &DenoiseConfig,
    options: DenoiseOptions<'_>,
) -> Result<(RgbdImage, IterationTrace)> {
    config.validate()?;
    if let Some(reference) = options.reference {
        if reference.dims() != image.depth().dims() {
            return Err(Error::input("reference depth does not match image size"));
        }
    }
    if let Some(dir) = options.dump_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let mut current = image.clone();
    let mut params = config.initial_params;
    let mut fixed: Option<FirCoefficients> = None;
    let mut trace = IterationTrace::default();

    for t in 1..=config.iterations {
        let start = Instant::now();
        let graph = build_similarity_graph(&current, &params)?;
        let lap = laplacian(&graph);
        let f = extract_depth_signal(&current);
        let graph_done = Instant::now();

        let bound = lambda_max_bound(&lap)?;
        let fir = match config.coefficients {
            CoefficientMode::Fixed => match &fixed {
                Some(fir) => fir.clone(),
                None => {
                    let fir = fit_for(&config.filter_design, bound)?;
                    fixed = Some(fir.clone());
                    fir
                }
            },
            CoefficientMode::Refit => fit_for(&config.filter_design, bound)?,
        };
        let fit_done = Instant::now();

        let mut filtered = apply_fir(&lap, &f, &fir)?;
        for v in &mut filtered {
            *v = v.clamp(0.0, 255.0);
        }
        let next = write_depth_signal(&current, &filtered)?;
        let filter_done = Instant::now();

        let low_band_energy = if lap.dim() <= config.trace_spectrum_limit {
            spectral_profile(&lap, &f).and_then(|p| p.band_energy(0.1)).ok()
        } else {
            None
        };
        let psnr = options.reference.map(|r| psnr(r, next.depth())).transpose()?;
        if let Some(dir) = options.dump_dir {
            write_depth(dir.join(format!("depth_{t:02}.pgm")), next.depth())?;
            let map = graph.edge_map();
            let bytes: Vec<u8> = map.as_slice().iter().map(|&w| (w * 255.0).round() as u8).collect();
            write_gray(dir.join(format!("edges_{t:02}.pgm")), map.width(), map.height(), &bytes)?;
        }

        let record = IterationRecord {
            iteration: t,
            params,
            edges: graph.num_edges(),
            lambda_bound: bound,
            lambda_scale: fir.lambda_scale(),
            fit_residual: fir.fit_residual(),
            low_band_energy,
            psnr,
            timings: StageTimings {
                graph_secs: secs(graph_done - start),
                fit_secs: secs(fit_done - graph_done),
                filter_secs: secs(filter_done - fit_done),
            },
        };
        debug!(
            "iteration {t}: delta_th {:.3} sigma_d {:.3} edges {} bound {:.4}",
            params.delta_th,
            params.sigma_d,
            record.edges,
            bound
        );
        trace.iterations.push(record);
        current = next;
        params = update_params(&params, config.gamma_th, config.gamma_d)?;
    }
    Ok((current, trace))
}

fn fit_for(design: &FilterDesign, bound: f64) -> Result<FirCoefficients> {
    if bound == 0.0 {
        // no edges: every polynomial reduces to c₀ = h(0)
        return Ok(FirCoefficients::constant(design.response(1.0)(0.0)));
    }
    design.fit(bound)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> DenoiseConfig {
        DenoiseConfig {
            iterations: 3,
            ..DenoiseConfig::default()
        }
    }

    #[test]
    fn update_scales_depth_terms_only() {
        let p = WeightParams {
            delta_th: 30.0,
            sigma_d: 20.0,
            sigma_a: 7.0,
            sigma_b: 9.0,
        };
        let q = update_params(&p, 0.8, 0.8).unwrap();
        assert_eq!((q.delta_th, q.sigma_d, q.sigma_a, q.sigma_b), (24.0, 16.0, 7.0, 9.0));
        assert!(update_params(&p, 1.0, 0.5).is_err());
        assert!(update_params(&p, 0.5, 0.0).is_err());
        let mut r = p;
        for _ in 0..5 {
            r = update_params(&r, 0.9, 0.7).unwrap();
        }
        assert!((r.delta_th - 30.0 * 0.9f64.powi(5)).abs() < 1e-12);
        assert!((r.sigma_d - 20.0 * 0.7f64.powi(5)).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(DenoiseConfig::default().validate().is_ok());
        assert!(DenoiseConfig { iterations: 0, ..small_config() }.validate().is_err());
        assert!(DenoiseConfig { gamma_th: 1.0, ..small_config() }.validate().is_err());
        assert!(DenoiseConfig::for_noise_sigma(0.0).is_err());
        let c = DenoiseConfig::for_noise_sigma(20.0).unwrap();
        assert_eq!((c.initial_params.delta_th, c.initial_params.sigma_d), (120.0, 40.0));
    }

    #[test]
    fn constant_image_is_a_fixed_point() {
        let img = RgbdImage::from_depth(Plane::filled(9, 7, 87.0));
        let (out, trace) = denoise(&img, &small_config()).unwrap();
        assert_eq!(trace.len(), 3);
        assert!(out.depth().max_abs_diff(img.depth()) < 1e-6);
    }

    #[test]
    fn single_iteration_matches_manual_composition() {
        let depth = Plane::from_fn(8, 6, |r, c| ((r * 31 + c * 17) % 97) as f64 + 60.0);
        let img = RgbdImage::from_depth(depth);
        let config = DenoiseConfig {
            iterations: 1,
            ..DenoiseConfig::default()
        };
        let (out, _) = denoise(&img, &config).unwrap();

        let lap = laplacian(&build_similarity_graph(&img, &config.initial_params).unwrap());
        let fir = config.filter_design.fit(lambda_max_bound(&lap).unwrap()).unwrap();
        let filtered: Vec<f64> = apply_fir(&lap, &extract_depth_signal(&img), &fir)
            .unwrap()
            .into_iter()
            .map(|v| v.clamp(0.0, 255.0))
            .collect();
        assert_eq!(out, write_depth_signal(&img, &filtered).unwrap());
    }

    #[test]
    fn fixed_mode_reuses_first_scale() {
        let depth = Plane::from_fn(10, 10, |r, c| if c < 5 { 50.0 } else { 150.0 } + (r % 3) as f64);
        let img = RgbdImage::from_depth(depth);
        let config = DenoiseConfig {
            coefficients: CoefficientMode::Fixed,
            ..small_config()
        };
        let (_, trace) = denoise(&img, &config).unwrap();
        let first = trace.iterations[0].lambda_scale;
        assert!(trace.iterations.iter().all(|r| r.lambda_scale == first));
    }

    #[test]
    fn dumps_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let img = RgbdImage::from_depth(Plane::from_fn(6, 5, |r, c| (r * 6 + c) as f64));
        let opts = DenoiseOptions {
            reference: Some(img.depth()),
            dump_dir: Some(dir.path()),
        };
        let (_, trace) = denoise_with(&img, &small_config(), opts).unwrap();
        assert!(trace.iterations.iter().all(|r| r.psnr.is_some()));
        for t in 1..=3 {
            assert!(dir.path().join(format!("depth_{t:02}.pgm")).exists());
            assert!(dir.path().join(format!("edges_{t:02}.pgm")).exists());
        }
    }
}

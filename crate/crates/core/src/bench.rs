//! Evaluation harness: noise synthesis, denoising over a dataset, PSNR from
//! saved files, per-stage timing, and spectrum studies.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ConfigFile;
use crate::error::{Error, Result};
use crate::graph::{build_similarity_graph, extract_depth_signal, laplacian};
use crate::imaging::{add_awgn, load_rgbd, psnr, read_depth, write_depth, RgbdImage};
use crate::pipeline::{denoise, DenoiseConfig, StageTimings};
use crate::spectral::{spectral_profile, SpectralProfile, DEFAULT_ORACLE_CAP};

/// One aligned color/depth pair of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetEntry {
    pub name: String,
    pub color: PathBuf,
    pub depth: PathBuf,
}

const COLOR_NAMES: [&str; 4] = ["color.png", "color.ppm", "view1.png", "view1.ppm"];
const DEPTH_NAMES: [&str; 4] = ["depth.png", "depth.pgm", "disp1.png", "disp1.pgm"];

/// Finds image pairs in `dir`: subdirectories holding `color.{png,ppm}` and
/// `depth.{png,pgm}` (or Middlebury-style `view1.png` / `disp1.png`), and
/// top-level files named `NAME_color.EXT` / `NAME_depth.EXT`. Sorted by name.
pub fn discover_dataset(dir: impl AsRef<Path>) -> Result<Vec<DatasetEntry>> {
    let dir = dir.as_ref();
    let read = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = read
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?
        .into_iter()
        .map(|e| e.path())
        .collect();
    paths.sort();

    let mut entries = Vec::new();
    let mut flat: BTreeSet<String> = BTreeSet::new();
    for path in &paths {
        if path.is_dir() {
            let first = |names: &[&str]| names.iter().map(|n| path.join(n)).find(|p| p.is_file());
            if let (Some(color), Some(depth)) = (first(&COLOR_NAMES), first(&DEPTH_NAMES)) {
                let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
                entries.push(DatasetEntry { name, color, depth });
            }
        } else if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            if let Some(name) = stem.strip_suffix("_color") {
                flat.insert(name.to_owned());
            }
        }
    }
    for name in flat {
        let find = |suffix: &str, exts: &[&str]| {
            exts.iter()
                .map(|ext| dir.join(format!("{name}_{suffix}.{ext}")))
                .find(|p| p.is_file())
        };
        if let (Some(color), Some(depth)) = (find("color", &["png", "ppm"]), find("depth", &["png", "pgm"])) {
            entries.push(DatasetEntry { name, color, depth });
        }
    }
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(entries)
}

#[derive(Debug, Clone)]
pub struct BenchmarkOptions {
    pub sigmas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Base configuration; each cell adds `noise_sigma = σ` underneath it.
    pub config: ConfigFile,
    /// Threads for the denoising pass. Timing always runs alone.
    pub workers: usize,
    /// Timed repetitions after one warm-up; the median is reported.
    pub timing_runs: usize,
    /// Noisy inputs and outputs are written here.
    pub output_dir: PathBuf,
}

/// One (image, σ) cell, averaged over seeds.
#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub image: String,
    pub sigma: f64,
    pub width: usize,
    pub height: usize,
    pub seeds: Vec<u64>,
    pub noisy_psnr: Vec<f64>,
    pub denoised_psnr: Vec<f64>,
    pub mean_noisy_psnr: f64,
    pub mean_denoised_psnr: f64,
    /// Median per-stage wall-clock seconds of one full denoise.
    pub timings: StageTimings,
    pub total_secs: f64,
    pub iterations: usize,
    pub noisy_files: Vec<PathBuf>,
    pub denoised_files: Vec<PathBuf>,
    pub config: Option<DenoiseConfig>,
    pub error: Option<String>,
}

impl CellReport {
    fn failed(image: &str, sigma: f64, err: &Error) -> Self {
        Self {
            image: image.to_owned(),
            sigma,
            width: 0,
            height: 0,
            seeds: Vec::new(),
            noisy_psnr: Vec::new(),
            denoised_psnr: Vec::new(),
            mean_noisy_psnr: f64::NAN,
            mean_denoised_psnr: f64::NAN,
            timings: StageTimings::default(),
            total_secs: f64::NAN,
            iterations: 0,
            noisy_files: Vec::new(),
            denoised_files: Vec::new(),
            config: None,
            error: Some(format!("{}: {err}", err.category())),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BenchmarkReport {
    pub cells: Vec<CellReport>,
}

impl BenchmarkReport {
    /// Human-readable table, one row per cell.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<16} {:>6} {:>11} {:>9} {:>11} {:>8} {:>8} {:>8} {:>8}\n",
            "image", "sigma", "size", "noisy dB", "denoised dB", "graph s", "fit s", "filter s", "total s"
        );
        for c in &self.cells {
            if let Some(err) = &c.error {
                out.push_str(&format!("{:<16} {:>6} failed: {err}\n", c.image, c.sigma));
                continue;
            }
            out.push_str(&format!(
                "{:<16} {:>6} {:>11} {:>9.2} {:>11.2} {:>8.3} {:>8.4} {:>8.3} {:>8.3}\n",
                c.image,
                c.sigma,
                format!("{}x{}", c.width, c.height),
                c.mean_noisy_psnr,
                c.mean_denoised_psnr,
                c.timings.graph_secs,
                c.timings.fit_secs,
                c.timings.filter_secs,
                c.total_secs
            ));
        }
        out
    }

    /// One JSON object per cell per line.
    pub fn to_jsonl(&self) -> String {
        self.cells
            .iter()
            .map(|c| serde_json::to_string(c).expect("report serializes") + "\n")
            .collect()
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }
}

fn sigma_tag(sigma: f64) -> String {
    format!("s{sigma}").replace('.', "_")
}

fn cell_config(base: &ConfigFile, sigma: f64) -> Result<DenoiseConfig> {
    let noise = ConfigFile {
        noise_sigma: (sigma > 0.0).then_some(sigma),
        ..ConfigFile::default()
    };
    base.merged(&noise).resolve()
}

struct Job<'a> {
    cell: usize,
    image: &'a RgbdImage,
    config: &'a DenoiseConfig,
    sigma: f64,
    seed: u64,
    dir: PathBuf,
}

struct JobResult {
    cell: usize,
    noisy_file: PathBuf,
    denoised_file: PathBuf,
}

fn run_job(job: &Job<'_>) -> Result<JobResult> {
    let noisy = add_awgn(job.image.depth(), job.sigma, job.seed)?.quantized();
    let noisy_file = job.dir.join(format!("noisy_seed{}.pgm", job.seed));
    write_depth(&noisy_file, &noisy)?;
    let (out, _) = denoise(&job.image.with_depth(noisy)?, job.config)?;
    let denoised_file = job.dir.join(format!("denoised_seed{}.pgm", job.seed));
    write_depth(&denoised_file, out.depth())?;
    Ok(JobResult {
        cell: job.cell,
        noisy_file,
        denoised_file,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs every (image, σ, seed) combination. Failures are recorded in their
/// cell and the run continues.
pub fn run_benchmark(entries: &[DatasetEntry], options: &BenchmarkOptions) -> Result<BenchmarkReport> {
    let mut report = BenchmarkReport::default();
    if options.sigmas.is_empty() || entries.is_empty() {
        return Ok(report);
    }
    if options.seeds.is_empty() {
        return Err(Error::input("at least one seed is required"));
    }
    std::fs::create_dir_all(&options.output_dir).map_err(|e| Error::io(&options.output_dir, e))?;

    struct Cell {
        entry: usize,
        sigma: f64,
        config: DenoiseConfig,
        dir: PathBuf,
    }
    let mut images: Vec<Option<RgbdImage>> = Vec::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut slots: Vec<Option<CellReport>> = Vec::new();
    for (e, entry) in entries.iter().enumerate() {
        let image = load_rgbd(&entry.color, &entry.depth);
        for &sigma in &options.sigmas {
            let prepared = image.as_ref().map_err(|e| e.clone_summary()).and_then(|_| {
                let config = cell_config(&options.config, sigma)?;
                let dir = options.output_dir.join(&entry.name).join(sigma_tag(sigma));
                std::fs::create_dir_all(&dir).map_err(|err| Error::io(&dir, err))?;
                Ok((config, dir))
            });
            match prepared {
                Ok((config, dir)) => {
                    cells.push(Cell { entry: e, sigma, config, dir });
                    slots.push(None);
                }
                Err(err) => {
                    warn!("{} sigma {sigma}: {err}", entry.name);
                    slots.push(Some(CellReport::failed(&entry.name, sigma, &err)));
                }
            }
        }
        images.push(image.ok());
    }

    let jobs: Vec<Job<'_>> = cells
        .iter()
        .enumerate()
        .flat_map(|(i, cell)| {
            let image = images[cell.entry].as_ref().expect("loaded");
            options.seeds.iter().map(move |&seed| Job {
                cell: i,
                image,
                config: &cell.config,
                sigma: cell.sigma,
                seed,
                dir: cell.dir.clone(),
            })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<JobResult>> = pool.install(|| jobs.par_iter().map(run_job).collect());

    let mut per_cell: Vec<Vec<JobResult>> = (0..cells.len()).map(|_| Vec::new()).collect();
    let mut cell_errors: Vec<Option<Error>> = (0..cells.len()).map(|_| None).collect();
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(r) => per_cell[r.cell].push(r),
            Err(err) => {
                cell_errors[job.cell].get_or_insert(err);
            }
        }
    }

    let mut cell_reports = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let entry = &entries[cell.entry];
        let image = images[cell.entry].as_ref().expect("loaded");
        let built = match cell_errors[i].take() {
            Some(err) => Err(err),
            None => finish_cell(entry, image, cell.sigma, &cell.config, &per_cell[i], options),
        };
        cell_reports.push(built.unwrap_or_else(|err| CellReport::failed(&entry.name, cell.sigma, &err)));
    }
    let mut built = cell_reports.into_iter();
    report.cells = slots
        .into_iter()
        .map(|slot| slot.unwrap_or_else(|| built.next().expect("one report per cell")))
        .collect();
    Ok(report)
}

fn finish_cell(
    entry: &DatasetEntry,
    image: &RgbdImage,
    sigma: f64,
    config: &DenoiseConfig,
    results: &[JobResult],
    options: &BenchmarkOptions,
) -> Result<CellReport> {
    // quality comes from the files on disk, not from in-memory results
    let clean = read_depth(&entry.depth)?;
    let mut noisy_psnr = Vec::new();
    let mut denoised_psnr = Vec::new();
    for r in results {
        noisy_psnr.push(psnr(&clean, &read_depth(&r.noisy_file)?)?);
        denoised_psnr.push(psnr(&clean, &read_depth(&r.denoised_file)?)?);
    }

    let timing_input = image.with_depth(read_depth(&results[0].noisy_file)?)?;
    denoise(&timing_input, config)?;
    let mut runs = Vec::new();
    for _ in 0..options.timing_runs.max(1) {
        let (_, trace) = denoise(&timing_input, config)?;
        runs.push(trace.total_timings());
    }
    let timings = StageTimings {
        graph_secs: median(runs.iter().map(|t| t.graph_secs).collect()),
        fit_secs: median(runs.iter().map(|t| t.fit_secs).collect()),
        filter_secs: median(runs.iter().map(|t| t.filter_secs).collect()),
    };
    let total_secs = median(runs.iter().map(|t| t.total_secs()).collect());
    info!("{} sigma {sigma}: {:.2} dB, {total_secs:.3} s", entry.name, mean(&denoised_psnr));

    Ok(CellReport {
        image: entry.name.clone(),
        sigma,
        width: image.width(),
        height: image.height(),
        seeds: options.seeds.clone(),
        mean_noisy_psnr: mean(&noisy_psnr),
        mean_denoised_psnr: mean(&denoised_psnr),
        noisy_psnr,
        denoised_psnr,
        timings,
        total_secs,
        iterations: config.iterations,
        noisy_files: results.iter().map(|r| r.noisy_file.clone()).collect(),
        denoised_files: results.iter().map(|r| r.denoised_file.clone()).collect(),
        config: Some(config.clone()),
        error: None,
    })
}

/// Clean and optionally noisy spectra of one image, each on its own graph.
#[derive(Debug, Clone)]
pub struct SpectrumStudy {
    pub band_fraction: f64,
    pub clean: SpectralProfile,
    pub clean_low_band: f64,
    pub noisy: Option<SpectralProfile>,
    pub noisy_low_band: Option<f64>,
}

/// Graph parameters come from the noise-level defaults (or the plain defaults
/// without `sigma`). The noisy depth is quantized to 8 bits like a stored file.
pub fn spectrum_study(image: &RgbdImage, sigma: Option<f64>, seed: u64, band_fraction: f64) -> Result<SpectrumStudy> {
    if image.num_pixels() > DEFAULT_ORACLE_CAP {
        return Err(Error::Capacity {
            what: "spectrum input",
            size: image.num_pixels(),
            cap: DEFAULT_ORACLE_CAP,
        });
    }
    let params = match sigma {
        Some(s) if s > 0.0 => DenoiseConfig::for_noise_sigma(s)?.initial_params,
        _ => DenoiseConfig::default().initial_params,
    };
    let profile_of = |img: &RgbdImage| -> Result<SpectralProfile> {
        let lap = laplacian(&build_similarity_graph(img, &params)?);
        debug_assert_eq!(lap.dim(), img.num_pixels());
        spectral_profile(&lap, &extract_depth_signal(img))
    };
    let clean = profile_of(image)?;
    let clean_low_band = clean.band_energy(band_fraction)?;
    let (noisy, noisy_low_band) = match sigma {
        Some(s) => {
            let noisy_img = image.with_depth(add_awgn(image.depth(), s, seed)?.quantized())?;
            let p = profile_of(&noisy_img)?;
            let low = p.band_energy(band_fraction)?;
            (Some(p), Some(low))
        }
        None => (None, None),
    };
    Ok(SpectrumStudy {
        band_fraction,
        clean,
        clean_low_band,
        noisy,
        noisy_low_band,
    })
}

impl Error {
    /// Owned copy carrying the category and message, for errors shared by
    /// several report cells.
    fn clone_summary(&self) -> Error {
        match self {
            Error::Io { path, source } => Error::Io {
                path: path.clone(),
                source: std::io::Error::new(source.kind(), source.to_string()),
            },
            Error::Format { path, reason } => Error::Format {
                path: path.clone(),
                reason: reason.clone(),
            },
            Error::Alignment { color, depth } => Error::Alignment {
                color: *color,
                depth: *depth,
            },
            other => Error::InputDomain(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_tags() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(sigma_tag(12.5), "s12_5");
    }

    #[test]
    fn cell_config_uses_sigma_defaults_under_explicit_keys() {
        let base = ConfigFile {
            sigma_d: Some(7.0),
            ..ConfigFile::default()
        };
        let c = cell_config(&base, 10.0).unwrap();
        assert_eq!(c.initial_params.delta_th, 60.0);
        assert_eq!(c.initial_params.sigma_d, 7.0);
    }
}

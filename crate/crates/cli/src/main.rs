use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use depthgraph::bench::{discover_dataset, run_benchmark, spectrum_study, BenchmarkOptions};
use depthgraph::config::ConfigFile;
use depthgraph::imaging::{add_awgn, load_rgbd, psnr, read_depth, save_rgbd, synthetic_scene, write_depth, write_gray};
use depthgraph::pipeline::{denoise_with, CoefficientMode, DenoiseOptions};
use depthgraph::{Error, Result};

/// Color-guided depth denoising with polynomial graph filters.
///
/// Every option can also be set through an environment variable named
/// DEPTHGRAPH_<OPTION>, e.g. DEPTHGRAPH_SIGMA=20. Command-line flags win over
/// the environment, which wins over the --config file.
#[derive(Parser, Debug)]
#[command(name = "depthgraph", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML configuration file
    #[arg(long, global = true, env = "DEPTHGRAPH_CONFIG")]
    config: Option<PathBuf>,
    /// Noise standard deviation in depth levels
    #[arg(long, global = true, env = "DEPTHGRAPH_SIGMA")]
    sigma: Option<f64>,
    /// Random seed for noise synthesis
    #[arg(long, global = true, env = "DEPTHGRAPH_SEED")]
    seed: Option<u64>,
    /// Denoising iterations [default: 8]
    #[arg(long, global = true, env = "DEPTHGRAPH_ITERATIONS")]
    iterations: Option<usize>,
    /// Polynomial degree K [default: 10]
    #[arg(long, global = true, env = "DEPTHGRAPH_POLY_DEGREE")]
    poly_degree: Option<usize>,
    /// Cutoff is lambda_max divided by this [default: 43]
    #[arg(long, global = true, env = "DEPTHGRAPH_CUTOFF_DIVISOR")]
    cutoff_divisor: Option<f64>,
    /// Butterworth order [default: 2]
    #[arg(long, global = true, env = "DEPTHGRAPH_ORDER")]
    order: Option<u32>,
    /// Write per-iteration depth and edge maps here
    #[arg(long, global = true, env = "DEPTHGRAPH_DUMP_DIR")]
    dump_dir: Option<PathBuf>,
    /// Worker threads for the benchmark [default: 1]
    #[arg(long, global = true, env = "DEPTHGRAPH_WORKERS")]
    workers: Option<usize>,
    /// Refit filter coefficients every iteration or keep the first fit
    #[arg(long, global = true, env = "DEPTHGRAPH_COEFFICIENTS", value_parser = parse_mode)]
    coefficients: Option<CoefficientMode>,
}

fn parse_mode(s: &str) -> std::result::Result<CoefficientMode, String> {
    match s {
        "refit" => Ok(CoefficientMode::Refit),
        "fixed" => Ok(CoefficientMode::Fixed),
        other => Err(format!("expected refit or fixed, got {other}")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Denoise a depth map guided by its aligned color image
    Denoise {
        color: PathBuf,
        depth: PathBuf,
        /// Output depth map (.png or .pgm)
        #[arg(short, long)]
        output: PathBuf,
        /// Clean depth map for PSNR reporting
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Add seeded Gaussian noise to a depth map
    Synthesize {
        depth: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Denoise every image of a dataset at several noise levels
    Benchmark {
        dataset: PathBuf,
        /// Comma-separated noise levels
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        sigmas: Vec<f64>,
        /// Comma-separated seeds [default: --seed or 0]
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Noisy inputs, outputs and reports go here
        #[arg(short, long)]
        output_dir: PathBuf,
        /// Timed runs per cell after one warm-up
        #[arg(long, default_value_t = 3)]
        timing_runs: usize,
    },
    /// Graph spectrum of the clean (and noisy, with --sigma) depth signal
    Spectrum {
        color: PathBuf,
        depth: PathBuf,
        #[arg(short, long)]
        output_dir: PathBuf,
        /// Block-mean downsampling factor applied first
        #[arg(long)]
        downsample: Option<usize>,
        /// Share of lowest frequencies counted as low band
        #[arg(long, default_value_t = 0.1)]
        band: f64,
    },
    /// Write a synthetic RGB-D scene (color.png, depth.png)
    MakeSynthetic {
        #[arg(short, long)]
        output_dir: PathBuf,
        #[arg(long, default_value_t = 320)]
        width: usize,
        #[arg(long, default_value_t = 240)]
        height: usize,
    },
}

impl Common {
    fn overrides(&self) -> ConfigFile {
        ConfigFile {
            noise_sigma: self.sigma,
            iterations: self.iterations,
            poly_degree: self.poly_degree,
            cutoff_divisor: self.cutoff_divisor,
            order: self.order,
            coefficients: self.coefficients,
            ..ConfigFile::default()
        }
    }

    fn config_file(&self) -> Result<ConfigFile> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(base.merged(&self.overrides()))
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.category() {
        "input" => 10,
        "alignment" => 11,
        "format" => 12,
        "file" => 13,
        "capacity" => 14,
        "numeric" => 15,
        "config" => 16,
        _ => 1,
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        Value::Null
    }
}

fn run(cli: &Cli) -> Result<Value> {
    let common = &cli.common;
    match &cli.command {
        Command::Denoise {
            color,
            depth,
            output,
            reference,
        } => {
            let config = common.config_file()?.resolve()?;
            let image = load_rgbd(color, depth)?;
            let reference = reference.as_ref().map(read_depth).transpose()?;
            let start = Instant::now();
            let options = DenoiseOptions {
                reference: reference.as_ref(),
                dump_dir: common.dump_dir.as_deref(),
            };
            let (out, trace) = denoise_with(&image, &config, options)?;
            let secs = start.elapsed().as_secs_f64();
            write_depth(output, out.depth())?;
            let mut summary = json!({
                "command": "denoise",
                "status": "ok",
                "output": output,
                "width": out.width(),
                "height": out.height(),
                "iterations": trace.len(),
                "seconds": secs,
                "timings": trace.total_timings(),
                "final_fit_residual": trace.iterations.last().map(|r| r.fit_residual),
            });
            if let Some(reference) = &reference {
                // measured on the written file
                let written = read_depth(output)?;
                summary["psnr_input"] = finite(psnr(reference, image.depth())?);
                summary["psnr_output"] = finite(psnr(reference, &written)?);
            }
            if let Some(dir) = &common.dump_dir {
                let trace_path = dir.join("trace.json");
                let text = serde_json::to_string_pretty(&trace).expect("trace serializes");
                std::fs::write(&trace_path, text).map_err(|e| Error::Io {
                    path: trace_path,
                    source: e,
                })?;
            }
            Ok(summary)
        }
        Command::Synthesize { depth, output } => {
            let sigma = common
                .sigma
                .ok_or_else(|| Error::Config("synthesize needs --sigma".into()))?;
            let seed = common.seed.unwrap_or(0);
            let clean = read_depth(depth)?;
            let noisy = add_awgn(&clean, sigma, seed)?;
            write_depth(output, &noisy)?;
            let written = read_depth(output)?;
            Ok(json!({
                "command": "synthesize",
                "status": "ok",
                "output": output,
                "sigma": sigma,
                "seed": seed,
                "psnr": finite(psnr(&clean, &written)?),
            }))
        }
        Command::Benchmark {
            dataset,
            sigmas,
            seeds,
            output_dir,
            timing_runs,
        } => {
            let base = match &common.config {
                Some(path) => ConfigFile::load(path)?,
                None => ConfigFile::default(),
            };
            // sigma comes from the list, not from --sigma
            let overrides = ConfigFile {
                noise_sigma: None,
                ..common.overrides()
            };
            let seeds = if seeds.is_empty() { vec![common.seed.unwrap_or(0)] } else { seeds.clone() };
            let entries = discover_dataset(dataset)?;
            let options = BenchmarkOptions {
                sigmas: sigmas.clone(),
                seeds,
                config: base.merged(&overrides),
                workers: common.workers.unwrap_or(1),
                timing_runs: *timing_runs,
                output_dir: output_dir.clone(),
            };
            let report = run_benchmark(&entries, &options)?;
            create_dir(output_dir)?;
            let table = report.to_table();
            eprint!("{table}");
            let table_path = output_dir.join("report.txt");
            std::fs::write(&table_path, &table).map_err(|e| Error::Io {
                path: table_path,
                source: e,
            })?;
            let jsonl = output_dir.join("report.jsonl");
            report.write_jsonl(&jsonl)?;
            let failed = report.cells.iter().filter(|c| c.error.is_some()).count();
            Ok(json!({
                "command": "benchmark",
                "status": "ok",
                "images": entries.len(),
                "cells": report.cells.len(),
                "failed_cells": failed,
                "report": jsonl,
            }))
        }
        Command::Spectrum {
            color,
            depth,
            output_dir,
            downsample,
            band,
        } => {
            let mut image = load_rgbd(color, depth)?;
            if let Some(factor) = downsample {
                image = image.downsample(*factor)?;
            }
            let study = spectrum_study(&image, common.sigma, common.seed.unwrap_or(0), *band)?;
            create_dir(output_dir)?;
            let clean_path = output_dir.join("clean_spectrum.txt");
            study.clean.write_dump(&clean_path)?;
            let mut summary = json!({
                "command": "spectrum",
                "status": "ok",
                "width": image.width(),
                "height": image.height(),
                "band_fraction": study.band_fraction,
                "clean_low_band": study.clean_low_band,
                "clean_spectrum": clean_path,
            });
            if let (Some(noisy), Some(low)) = (&study.noisy, study.noisy_low_band) {
                let noisy_path = output_dir.join("noisy_spectrum.txt");
                noisy.write_dump(&noisy_path)?;
                summary["noisy_low_band"] = json!(low);
                summary["noisy_spectrum"] = json!(noisy_path);
            }
            Ok(summary)
        }
        Command::MakeSynthetic {
            output_dir,
            width,
            height,
        } => {
            let seed = common.seed.unwrap_or(0);
            let scene = synthetic_scene(*width, *height, seed)?;
            create_dir(output_dir)?;
            let color = output_dir.join("color.png");
            let depth = output_dir.join("depth.png");
            save_rgbd(&scene.image, &color, &depth)?;
            let edges: Vec<u8> = scene.discontinuities.iter().map(|&e| if e { 255 } else { 0 }).collect();
            let edges_path = output_dir.join("discontinuities.png");
            write_gray(&edges_path, *width, *height, &edges)?;
            Ok(json!({
                "command": "make-synthetic",
                "status": "ok",
                "color": color,
                "depth": depth,
                "discontinuities": edges_path,
                "seed": seed,
            }))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    log::debug!("{cli:?}");
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error[{}]: {err}", err.category());
            println!(
                "{}",
                json!({"status": "error", "category": err.category(), "message": err.to_string()})
            );
            ExitCode::from(exit_code(&err))
        }
    }
}

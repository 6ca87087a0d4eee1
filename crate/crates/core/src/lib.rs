//! Color-guided depth-map denoising with polynomial graph filters.
//!
//! An aligned RGB-D image is turned into a 4-neighbor pixel graph whose edge
//! weights come from depth and CIELAB chroma differences. The depth map is
//! treated as a signal on that graph and smoothed with a low-pass filter that
//! is approximated by a polynomial in the Laplacian, so filtering costs a
//! handful of sparse matrix-vector products instead of an eigendecomposition.
//! [`pipeline::denoise`] iterates this while tightening the depth kernel.
//!
//! The dense [`spectral`] module is the exact (and slow) reference used to
//! check the fast path.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod error;
pub mod fir;
pub mod graph;
pub mod imaging;
pub mod pipeline;
pub mod spectral;

pub use error::{Error, Result};
pub use fir::{apply_fir, apply_fir_native, FilterDesign, FirCoefficients};
pub use graph::{
    build_similarity_graph, extract_depth_signal, laplacian, write_depth_signal, LinearOperator,
    SimilarityGraph, SparseLaplacian, WeightParams,
};
pub use imaging::{Plane, RgbdImage};
pub use pipeline::{denoise, CoefficientMode, DenoiseConfig, IterationTrace};
pub use spectral::{eigendecompose, spectral_profile, SpectralDecomposition, SpectralProfile};

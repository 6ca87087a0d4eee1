//! Image containers, color conversion, noise synthesis, quality metrics and file I/O.
//!
//! Planes are stored row-major. Graph code works with the column-major vertex
//! labeling instead; see [`crate::graph::vertex_index`].

mod color;
mod io;
mod metrics;
mod noise;
mod synthetic;

pub use color::{rgb_to_lab, Lab};
pub use io::{load_rgbd, read_color, read_depth, save_rgbd, write_color, write_depth, write_gray};
pub use metrics::{mse, psnr, PSNR_PEAK};
pub use noise::add_awgn;
pub use synthetic::{edge_clearance_mask, synthetic_scene, SyntheticScene};

use crate::error::{Error, Result};
use crate::graph::PixelDatum;

/// A single real-valued image channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::input(format!(
                "plane data has {} samples, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Zero-based (row, col) access.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Clamp every sample into the 8-bit depth range.
    pub fn clamped(&self) -> Plane {
        self.map(|v| v.clamp(0.0, 255.0))
    }

    /// Values as they would be written to an 8-bit file: clamp, then round half away from zero.
    pub fn quantized(&self) -> Plane {
        self.map(quantize)
    }

    pub fn max_abs_diff(&self, other: &Plane) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn quantize(v: f64) -> f64 {
    v.clamp(0.0, 255.0).round()
}

/// Aligned color + depth image.
///
/// The CIELAB chroma planes are derived from `rgb` at construction and never
/// change afterwards; depth can be replaced with [`RgbdImage::with_depth`].
#[derive(Debug, Clone, PartialEq)]
pub struct RgbdImage {
    width: usize,
    height: usize,
    rgb: Vec<[u8; 3]>,
    depth: Plane,
    lab_a: Plane,
    lab_b: Plane,
}

impl RgbdImage {
    pub fn new(width: usize, height: usize, rgb: Vec<[u8; 3]>, depth: Plane) -> Result<Self> {
        if depth.dims() != (width, height) {
            return Err(Error::Alignment {
                color: (width, height),
                depth: depth.dims(),
            });
        }
        if rgb.len() != width * height {
            return Err(Error::input(format!(
                "color data has {} pixels, expected {}x{}",
                rgb.len(),
                width,
                height
            )));
        }
        let mut a = Vec::with_capacity(rgb.len());
        let mut b = Vec::with_capacity(rgb.len());
        for px in &rgb {
            let lab = rgb_to_lab(px[0], px[1], px[2]);
            a.push(lab.a);
            b.push(lab.b);
        }
        Ok(Self {
            width,
            height,
            rgb,
            depth,
            lab_a: Plane::new(width, height, a)?,
            lab_b: Plane::new(width, height, b)?,
        })
    }

    /// Image with a uniform gray color plane; handy when only depth matters.
    pub fn from_depth(depth: Plane) -> Self {
        let (w, h) = depth.dims();
        Self::new(w, h, vec![[128, 128, 128]; w * h], depth).expect("dimensions agree")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixel rows (M).
    pub fn rows(&self) -> usize {
        self.height
    }

    /// Number of pixel columns (N).
    pub fn cols(&self) -> usize {
        self.width
    }

    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn depth(&self) -> &Plane {
        &self.depth
    }

    pub fn lab_a(&self) -> &Plane {
        &self.lab_a
    }

    pub fn lab_b(&self) -> &Plane {
        &self.lab_b
    }

    pub fn rgb(&self) -> &[[u8; 3]] {
        &self.rgb
    }

    /// Same color data, new depth plane.
    pub fn with_depth(&self, depth: Plane) -> Result<Self> {
        if depth.dims() != self.depth.dims() {
            return Err(Error::Alignment {
                color: (self.width, self.height),
                depth: depth.dims(),
            });
        }
        Ok(Self {
            depth,
            ..self.clone()
        })
    }

    /// Zero-based pixel access.
    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> PixelDatum {
        PixelDatum {
            d: self.depth.get(row, col),
            a: self.lab_a.get(row, col),
            b: self.lab_b.get(row, col),
        }
    }

    /// Block-mean downsampling by an integer factor. Trailing rows and
    /// columns that do not fill a whole block are dropped. Color is averaged
    /// in RGB and the chroma planes are re-derived from it.
    pub fn downsample(&self, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::input("downsample factor must be at least 2"));
        }
        if factor > self.width || factor > self.height {
            return Err(Error::input(format!(
                "downsample factor {} exceeds image size {}x{}",
                factor, self.width, self.height
            )));
        }
        let (w, h) = (self.width / factor, self.height / factor);
        let area = (factor * factor) as f64;
        let mut depth = Vec::with_capacity(w * h);
        let mut rgb = Vec::with_capacity(w * h);
        for row in 0..h {
            for col in 0..w {
                let mut d = 0.0;
                let mut c = [0.0f64; 3];
                for r in row * factor..(row + 1) * factor {
                    for k in col * factor..(col + 1) * factor {
                        d += self.depth.get(r, k);
                        let px = self.rgb[r * self.width + k];
                        for ch in 0..3 {
                            c[ch] += f64::from(px[ch]);
                        }
                    }
                }
                depth.push(d / area);
                rgb.push(c.map(|v| (v / area).round() as u8));
            }
        }
        Self::new(w, h, rgb, Plane::new(w, h, depth)?)
    }
}

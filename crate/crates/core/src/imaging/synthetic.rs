//! Piecewise-constant test scenes with depth edges that coincide with color edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{Plane, RgbdImage};
use crate::error::{Error, Result};

/// A synthetic RGB-D scene and its ground-truth depth discontinuities.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub image: RgbdImage,
    /// Row-major; true where a 4-neighbor has a different clean depth.
    pub discontinuities: Vec<bool>,
}

enum Shape {
    Rect { top: f64, bottom: f64, left: f64, right: f64 },
    Disc { row: f64, col: f64, radius: f64 },
}

impl Shape {
    fn contains(&self, r: f64, c: f64) -> bool {
        match *self {
            Shape::Rect { top, bottom, left, right } => r >= top && r < bottom && c >= left && c < right,
            Shape::Disc { row, col, radius } => (r - row).powi(2) + (c - col).powi(2) < radius * radius,
        }
    }
}

struct Region {
    shape: Shape,
    depth: f64,
    rgb: [u8; 3],
}

/// Builds a deterministic scene: a background wall, a floor, four objects at
/// distinct depths, and one color-only stripe on the wall. Every depth edge
/// is also a chroma edge; the stripe is a chroma edge without a depth edge.
/// `seed` jitters the object layout by a few percent.
pub fn synthetic_scene(width: usize, height: usize, seed: u64) -> Result<SyntheticScene> {
    if width < 16 || height < 16 {
        return Err(Error::input("synthetic scenes must be at least 16x16"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);
    let mut j = |v: f64| v + rng.gen_range(-0.03..0.03);

    let floor_top = j(0.72) * h;
    let regions = [
        Region {
            shape: Shape::Rect { top: floor_top, bottom: h, left: 0.0, right: w },
            depth: 95.0,
            rgb: [160, 120, 70],
        },
        Region {
            shape: Shape::Rect { top: 0.0, bottom: floor_top, left: j(0.05) * w, right: j(0.13) * w },
            depth: 60.0,
            rgb: [150, 80, 170],
        },
        Region {
            shape: Shape::Rect { top: j(0.15) * h, bottom: j(0.55) * h, left: j(0.18) * w, right: j(0.42) * w },
            depth: 150.0,
            rgb: [200, 60, 60],
        },
        Region {
            shape: Shape::Disc { row: j(0.40) * h, col: j(0.66) * w, radius: j(0.20) * w.min(h) },
            depth: 200.0,
            rgb: [60, 170, 80],
        },
        Region {
            shape: Shape::Rect { top: j(0.58) * h, bottom: j(0.86) * h, left: j(0.55) * w, right: j(0.80) * w },
            depth: 120.0,
            rgb: [220, 200, 60],
        },
        Region {
            shape: Shape::Rect { top: j(0.78) * h, bottom: j(0.93) * h, left: j(0.15) * w, right: j(0.35) * w },
            depth: 170.0,
            rgb: [190, 70, 150],
        },
    ];

    let mut depth = Plane::filled(width, height, 60.0);
    let mut rgb = vec![[70u8, 110, 170]; width * height];
    for row in 0..height {
        for col in 0..width {
            let (r, c) = (row as f64 + 0.5, col as f64 + 0.5);
            for region in &regions {
                if region.shape.contains(r, c) {
                    depth.set(row, col, region.depth);
                    rgb[row * width + col] = region.rgb;
                }
            }
        }
    }

    let discontinuities = depth_discontinuities(&depth);
    Ok(SyntheticScene {
        image: RgbdImage::new(width, height, rgb, depth)?,
        discontinuities,
    })
}

fn depth_discontinuities(depth: &Plane) -> Vec<bool> {
    let (w, h) = depth.dims();
    let mut out = vec![false; w * h];
    for row in 0..h {
        for col in 0..w {
            let v = depth.get(row, col);
            let differs = (row > 0 && depth.get(row - 1, col) != v)
                || (row + 1 < h && depth.get(row + 1, col) != v)
                || (col > 0 && depth.get(row, col - 1) != v)
                || (col + 1 < w && depth.get(row, col + 1) != v);
            out[row * w + col] = differs;
        }
    }
    out
}

/// Row-major mask of pixels whose Chebyshev distance to every marked pixel in
/// `edges` is at least `margin`.
pub fn edge_clearance_mask(edges: &[bool], width: usize, height: usize, margin: usize) -> Vec<bool> {
    assert_eq!(edges.len(), width * height);
    let reach = margin.saturating_sub(1);
    let mut keep = vec![true; width * height];
    for row in 0..height {
        for col in 0..width {
            if !edges[row * width + col] {
                continue;
            }
            for r in row.saturating_sub(reach)..=(row + reach).min(height - 1) {
                for c in col.saturating_sub(reach)..=(col + reach).min(width - 1) {
                    keep[r * width + c] = false;
                }
            }
        }
    }
    keep
}

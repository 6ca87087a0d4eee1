//! Color-guided similarity graph over image pixels and its combinatorial Laplacian.
//!
//! Vertices are labeled column-major: pixel (m, n) in an M-row image becomes
//! vertex `(n - 1) * M + m` (1-based). Internally everything is 0-based, so the
//! pixel at zero-based (row, col) is vertex `col * M + row`. Each pixel is
//! connected to its up/down/left/right neighbors only; boundary pixels have
//! fewer neighbors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Plane, RgbdImage};

/// Depth plus CIELAB chroma of one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelDatum {
    pub d: f64,
    pub a: f64,
    pub b: f64,
}

/// Parameters of the edge-weight kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    /// Depth difference at or above which an edge is cut.
    pub delta_th: f64,
    pub sigma_d: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
}

impl WeightParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_th", self.delta_th),
            ("sigma_d", self.sigma_d),
            ("sigma_a", self.sigma_a),
            ("sigma_b", self.sigma_b),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::input(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// 1-based column-major vertex label of pixel (`row`, `col`) in an image of
/// `dims = (M rows, N cols)`.
pub fn vertex_index(row: usize, col: usize, dims: (usize, usize)) -> Result<usize> {
    let (m, n) = dims;
    if row == 0 || col == 0 || row > m || col > n {
        return Err(Error::input(format!(
            "pixel ({row}, {col}) outside a {m}x{n} image (1-based)"
        )));
    }
    Ok((col - 1) * m + row)
}

/// Gaussian-kernel similarity of two pixels, or exactly 0 when the depth gap
/// reaches `delta_th`.
#[inline]
pub fn edge_weight(p: &PixelDatum, q: &PixelDatum, params: &WeightParams) -> f64 {
    let dd = (p.d - q.d).abs();
    // written so that a NaN depth gap also cuts the edge
    if !(dd < params.delta_th) {
        return 0.0;
    }
    let da = (p.a - q.a).abs();
    let db = (p.b - q.b).abs();
    let exponent = dd * dd / (2.0 * params.sigma_d * params.sigma_d)
        + da * da / (2.0 * params.sigma_a * params.sigma_a)
        + db * db / (2.0 * params.sigma_b * params.sigma_b);
    (-exponent).exp()
}

/// Matrix-free linear operator on graph signals.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `out = A x`; `out` is overwritten.
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

/// Sparse symmetric 4-neighbor pixel graph with weights in (0, 1].
///
/// Adjacency is kept in CSR form with both directions of every edge stored
/// and column indices sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
}

impl SimilarityGraph {
    pub fn num_vertices(&self) -> usize {
        self.rows * self.cols
    }

    /// (M rows, N cols) of the source image.
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of undirected edges with nonzero weight.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Neighbors of zero-based vertex `v` with their weights, ascending by id.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[span.clone()].iter().copied().zip(self.weights[span].iter().copied())
    }

    /// Weight between zero-based vertices, 0 when not connected.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.neighbors(i).find(|&(k, _)| k == j).map_or(0.0, |(_, w)| w)
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.neighbors(v).fold(0.0, |s, (_, w)| s + w)
    }

    /// Undirected edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_vertices())
            .flat_map(move |i| self.neighbors(i).filter(move |&(j, _)| j > i).map(move |(j, w)| (i, j, w)))
    }

    /// Mean weight over each pixel's grid neighbors (cut edges count as 0), as a
    /// row-major plane in [0, 1].
    pub fn edge_map(&self) -> Plane {
        let (m, n) = (self.rows, self.cols);
        Plane::from_fn(n, m, |row, col| {
            let grid_neighbors = usize::from(row > 0)
                + usize::from(row + 1 < m)
                + usize::from(col > 0)
                + usize::from(col + 1 < n);
            if grid_neighbors == 0 {
                return 0.0;
            }
            self.degree(col * m + row) / grid_neighbors as f64
        })
    }
}

/// Builds the 4-neighbor similarity graph of `image`. Zero weights are not stored.
pub fn build_similarity_graph(image: &RgbdImage, params: &WeightParams) -> Result<SimilarityGraph> {
    params.validate()?;
    let (m, n) = (image.rows(), image.cols());
    if m < 2 && n < 2 {
        return Err(Error::input(format!("image {}x{} has no pixel pairs", n, m)));
    }

    // vertical[v]: weight to v + 1 (pixel below); horizontal[v]: weight to v + m (pixel right)
    let total = m * n;
    let mut vertical = vec![0.0; total];
    let mut horizontal = vec![0.0; total];
    for col in 0..n {
        for row in 0..m {
            let v = col * m + row;
            let p = image.pixel(row, col);
            if row + 1 < m {
                vertical[v] = edge_weight(&p, &image.pixel(row + 1, col), params);
            }
            if col + 1 < n {
                horizontal[v] = edge_weight(&p, &image.pixel(row, col + 1), params);
            }
        }
    }

    let mut offsets = Vec::with_capacity(total + 1);
    let mut neighbors = Vec::with_capacity(4 * total);
    let mut weights = Vec::with_capacity(4 * total);
    offsets.push(0);
    for col in 0..n {
        for row in 0..m {
            let v = col * m + row;
            // ascending neighbor ids: left, up, down, right
            let candidates = [
                (col > 0).then(|| (v - m, horizontal[v - m])),
                (row > 0).then(|| (v - 1, vertical[v - 1])),
                (row + 1 < m).then(|| (v + 1, vertical[v])),
                (col + 1 < n).then(|| (v + m, horizontal[v])),
            ];
            for (u, w) in candidates.into_iter().flatten() {
                if w > 0.0 {
                    neighbors.push(u);
                    weights.push(w);
                }
            }
            offsets.push(neighbors.len());
        }
    }

    Ok(SimilarityGraph {
        rows: m,
        cols: n,
        offsets,
        neighbors,
        weights,
    })
}

/// Combinatorial Laplacian `L = D - W` in CSR form, diagonal always stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLaplacian {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    max_degree: f64,
}

pub fn laplacian(graph: &SimilarityGraph) -> SparseLaplacian {
    let n = graph.num_vertices();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(graph.neighbors.len() + n);
    let mut values = Vec::with_capacity(graph.neighbors.len() + n);
    let mut max_degree = 0.0f64;
    row_ptr.push(0);
    for v in 0..n {
        let degree = graph.degree(v);
        max_degree = max_degree.max(degree);
        let mut diagonal_done = false;
        for (u, w) in graph.neighbors(v) {
            if !diagonal_done && u > v {
                col_idx.push(v);
                values.push(degree);
                diagonal_done = true;
            }
            col_idx.push(u);
            values.push(-w);
        }
        if !diagonal_done {
            col_idx.push(v);
            values.push(degree);
        }
        row_ptr.push(col_idx.len());
    }
    SparseLaplacian {
        dim: n,
        row_ptr,
        col_idx,
        values,
        max_degree,
    }
}

impl SparseLaplacian {
    /// Vertex count.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Laplacian of an arbitrary weighted graph on `n` vertices. Parallel
    /// edges are summed; self-loops and non-positive weights are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::input(format!("edge ({i}, {j}) outside {n} vertices")));
            }
            if i == j {
                return Err(Error::input("self-loops are not allowed"));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::input(format!("edge weight must be finite and > 0, got {w}")));
            }
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut max_degree = 0.0f64;
        for (v, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (j, w) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            let degree = merged.iter().fold(0.0, |s, &(_, w)| s + w);
            max_degree = max_degree.max(degree);
            let split = merged.partition_point(|&(j, _)| j < v);
            for &(j, w) in &merged[..split] {
                col_idx.push(j);
                values.push(-w);
            }
            col_idx.push(v);
            values.push(degree);
            for &(j, w) in &merged[split..] {
                col_idx.push(j);
                values.push(-w);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            dim: n,
            row_ptr,
            col_idx,
            values,
            max_degree,
        })
    }

    pub fn max_degree(&self) -> f64 {
        self.max_degree
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(k, _)| k == j).map_or(0.0, |(_, v)| v)
    }

    /// Largest |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.dim)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Row-major dense copy. Only for small oracle-sized instances.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for (j, v) in self.row(i) {
                dense[i * n + j] = v;
            }
        }
        dense
    }

    /// Relabels vertices: old vertex `v` becomes `perm[v]`. Returns `P L Pᵀ`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim;
        if perm.len() != n {
            return Err(Error::input("permutation length does not match dimension"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::input("not a permutation"));
            }
        }
        let mut inverse = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            inverse[new] = old;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_ptr.push(0);
        for &old in &inverse {
            let mut row: Vec<(usize, f64)> = self.row(old).map(|(j, v)| (perm[j], v)).collect();
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            dim: n,
            row_ptr,
            col_idx,
            values,
            max_degree: self.max_degree,
        })
    }
}

impl LinearOperator for SparseLaplacian {
    fn dim(&self) -> usize {
        self.dim
    }

    /// Row sums are correctly rounded, so the result does not depend on the
    /// order of entries within a row and relabeling vertices is exact.
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        let mut partials = Vec::with_capacity(8);
        for (i, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[i]..self.row_ptr[i + 1];
            partials.clear();
            for (&j, &v) in self.col_idx[span.clone()].iter().zip(&self.values[span]) {
                add_exact(&mut partials, v * x[j]);
            }
            *o = round_partials(&partials);
        }
    }
}

/// Shewchuk's error-free accumulation: `partials` stays a non-overlapping
/// expansion of the running sum, smallest magnitude first.
fn add_exact(partials: &mut Vec<f64>, mut x: f64) {
    let mut kept = 0;
    for k in 0..partials.len() {
        let mut y = partials[k];
        if x.abs() < y.abs() {
            std::mem::swap(&mut x, &mut y);
        }
        let hi = x + y;
        let lo = y - (hi - x);
        if lo != 0.0 {
            partials[kept] = lo;
            kept += 1;
        }
        x = hi;
    }
    partials.truncate(kept);
    partials.push(x);
}

fn round_partials(partials: &[f64]) -> f64 {
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        let y = partials[n - 1];
        n -= 1;
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // round half to even across the remaining partials
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// Depth values as a graph signal in vertex order.
pub fn extract_depth_signal(image: &RgbdImage) -> Vec<f64> {
    let (m, n) = (image.rows(), image.cols());
    let depth = image.depth();
    let mut signal = vec![0.0; m * n];
    for col in 0..n {
        for row in 0..m {
            signal[col * m + row] = depth.get(row, col);
        }
    }
    signal
}

/// Inverse of [`extract_depth_signal`]: a copy of `image` whose depth is `signal`.
pub fn write_depth_signal(image: &RgbdImage, signal: &[f64]) -> Result<RgbdImage> {
    let (m, n) = (image.rows(), image.cols());
    if signal.len() != m * n {
        return Err(Error::input(format!(
            "signal length {} does not match {} pixels",
            signal.len(),
            m * n
        )));
    }
    let depth = Plane::from_fn(n, m, |row, col| signal[col * m + row]);
    image.with_depth(depth)
}

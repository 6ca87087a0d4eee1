//! Eigenvalues of a symmetric banded matrix together with the coordinates of
//! one vector in its eigenbasis, without accumulating eigenvectors.
//!
//! Givens band-to-tridiagonal reduction (bulge chasing, one diagonal at a
//! time), followed by implicit QL on the tridiagonal. Every rotation applied
//! to the matrix as `A ← G A Gᵀ` is applied to the tracked vector as
//! `g ← G g`, so at the end `g` holds `Zᵀ Q f` where `Q` is the reduction and
//! `Z` diagonalizes the tridiagonal.

use crate::error::{Error, Result};
use crate::graph::SparseLaplacian;

/// Lower band storage with room for one bulge below the band.
struct LowerBand {
    width: usize,
    data: Vec<f64>,
}

impl LowerBand {
    #[inline(always)]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= j && i - j < self.width);
        j * self.width + (i - j)
    }

    #[inline(always)]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    #[inline(always)]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }
}

/// Returns unsorted eigenvalues and the matching coefficients `uᵢᵀ f`.
pub(super) fn eigen_coefficients(lap: &SparseLaplacian, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = lap.dim();
    let band = lap.bandwidth();
    let mut g = f.to_vec();
    let (d, e) = if band <= 1 {
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        super::for_each_lower_entry(lap, |i, j, v| if i == j { d[i] = v } else { e[j] = v });
        (d, e)
    } else {
        let mut a = LowerBand {
            width: band + 2,
            data: vec![0.0; n * (band + 2)],
        };
        super::for_each_lower_entry(lap, |i, j, v| a.set(i, j, v));
        reduce_to_tridiagonal(&mut a, n, band, &mut g);
        let d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
        let e: Vec<f64> = (0..n).map(|i| if i + 1 < n { a.get(i + 1, i) } else { 0.0 }).collect();
        (d, e)
    };
    let mut d = d;
    let mut e = e;
    tridiagonal_ql(&mut d, &mut e, &mut g)?;
    Ok((d, g))
}

fn reduce_to_tridiagonal(a: &mut LowerBand, n: usize, band: usize, g: &mut [f64]) {
    for kb in (2..=band).rev() {
        for j0 in 0..n.saturating_sub(kb) {
            let mut col = j0;
            let mut row = j0 + kb;
            while row < n {
                let x = a.get(row - 1, col);
                let y = a.get(row, col);
                if y == 0.0 {
                    break;
                }
                let r = x.hypot(y);
                let (c, s) = (x / r, y / r);
                rotate(a, n, row - 1, kb, c, s);
                a.set(row - 1, col, r);
                a.set(row, col, 0.0);
                let (gp, gq) = (g[row - 1], g[row]);
                g[row - 1] = c * gp + s * gq;
                g[row] = -s * gp + c * gq;
                // the rotation leaves a bulge at (row + kb, row - 1)
                col = row - 1;
                row += kb;
            }
        }
    }
}

/// Similarity rotation in the plane (p, p + 1) of a matrix with current
/// half-bandwidth `kb` (plus at most one bulge).
#[inline]
fn rotate(a: &mut LowerBand, n: usize, p: usize, kb: usize, c: f64, s: f64) {
    let q = p + 1;
    let w = a.width;
    // rows p and q left of the diagonal: (p, k) and (q, k) are adjacent in column k
    let lo = p.saturating_sub(kb);
    if lo < p {
        let start = lo * w + (p - lo);
        let left = &mut a.data[start..p * w - w + 2 + 1];
        for pair in left.chunks_mut(w - 1) {
            if let [x, y, ..] = pair {
                let (vx, vy) = (*x, *y);
                *x = c * vx + s * vy;
                *y = -s * vx + c * vy;
            }
        }
    }
    let (app, apq, aqq) = (a.get(p, p), a.get(q, p), a.get(q, q));
    let (cc, ss, cs) = (c * c, s * s, c * s);
    a.set(p, p, cc * app + 2.0 * cs * apq + ss * aqq);
    a.set(q, q, ss * app - 2.0 * cs * apq + cc * aqq);
    a.set(q, p, cs * (aqq - app) + (cc - ss) * apq);
    // columns p and q below row q are contiguous runs
    let hi = (p + kb + 1).min(n - 1);
    if hi > q {
        let len = hi - q;
        let (head, tail) = a.data.split_at_mut(q * w);
        let col_p = &mut head[p * w + 2..p * w + 2 + len];
        let col_q = &mut tail[1..1 + len];
        for (x, y) in col_p.iter_mut().zip(col_q.iter_mut()) {
            let (vx, vy) = (*x, *y);
            *x = c * vx + s * vy;
            *y = -s * vx + c * vy;
        }
    }
}

/// Implicit QL with Wilkinson shifts on diagonal `d` and subdiagonal `e`
/// (`e[i]` couples `i` and `i + 1`). Rotations are applied to `v` in the
/// transposed sense, so `v` ends up as eigenbasis coordinates.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], v: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // couplings below ε²‖T‖ are treated as zero, as in the dense route
    let norm = (0..n).fold(0.0f64, |m, i| m.max(d[i].abs() + 2.0 * e[i].abs()));
    let floor = f64::EPSILON * f64::EPSILON * norm;
    let mut budget = 30 * n;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if budget == 0 {
                return Err(Error::NoConvergence);
            }
            budget -= 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let t = v[i + 1];
                v[i + 1] = s * v[i] + c * t;
                v[i] = c * v[i] - s * t;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigendecompose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rows: usize, cols: usize, seed: u64, drop: f64) -> SparseLaplacian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for c in 0..cols {
            for r in 0..rows {
                let v = c * rows + r;
                if r + 1 < rows && rng.gen::<f64>() >= drop {
                    edges.push((v, v + 1, rng.gen_range(0.01..1.0)));
                }
                if c + 1 < cols && rng.gen::<f64>() >= drop {
                    edges.push((v, v + rows, rng.gen_range(0.01..1.0)));
                }
            }
        }
        SparseLaplacian::from_edges(rows * cols, &edges).unwrap()
    }

    fn check_against_dense(lap: &SparseLaplacian, seed: u64) {
        let n = lap.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..255.0)).collect();
        let dense = eigendecompose(lap).unwrap().profile(&f).unwrap();
        let banded = crate::spectral::spectral_profile(lap, &f).unwrap();
        let scale = dense.eigenvalues().last().unwrap().max(1.0);
        for (a, b) in dense.eigenvalues().iter().zip(banded.eigenvalues()) {
            assert!((a - b).abs() < 1e-11 * scale, "{a} vs {b}");
        }
        let total: f64 = f.iter().map(|x| x * x).sum();
        let banded_total: f64 = banded.energies().iter().sum();
        assert!((total - banded_total).abs() < 1e-10 * total);
        for frac in [0.05, 0.1, 0.25, 0.5, 0.9] {
            let x = dense.band_energy(frac).unwrap();
            let y = banded.band_energy(frac).unwrap();
            assert!((x - y).abs() < 1e-8, "fraction {frac}: {x} vs {y}");
        }
    }

    #[test]
    fn matches_dense_on_random_grids() {
        for (seed, (rows, cols)) in [(7, 6), (12, 10), (5, 20), (16, 16)].into_iter().enumerate() {
            check_against_dense(&random_grid(rows, cols, seed as u64, 0.0), 100 + seed as u64);
        }
    }

    #[test]
    fn matches_dense_with_cut_edges() {
        check_against_dense(&random_grid(9, 11, 3, 0.3), 5);
    }

    #[test]
    fn path_graph_is_already_tridiagonal() {
        let lap = random_grid(1, 40, 9, 0.0);
        assert_eq!(lap.bandwidth(), 1);
        check_against_dense(&lap, 1);
    }

    #[test]
    fn edgeless_graph() {
        let lap = SparseLaplacian::from_edges(5, &[]).unwrap();
        let (d, g) = eigen_coefficients(&lap, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(d.iter().all(|&x| x == 0.0));
        assert_eq!(g, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }
}

//! Arithmetic cost of the two filter forms on a dense N×N Laplacian, both as
//! closed forms and as counted executions.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseVariant {
    /// Explicit powers `Σ c_k L^k f`.
    Native,
    /// Nested `c₀f + L(c₁f + L(…))`.
    Horner,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OperationCount {
    pub multiplications: u64,
    pub additions: u64,
}

/// Published closed-form counts for a dense realization.
///
/// Horner: `K N² + (K+1) N` multiplications and `K N²` additions.
/// Native: `K(K-1)/2 · N³ + (K+2) N²` multiplications and
/// `K(K-1)/2 · N³ + (K(1-K)+4)/2 · N² - N` additions.
///
/// The native addition formula is smaller by `(K-1) N²` than what
/// [`dense_fir_counted`] performs for K > 1: summing K+1 dense matrices
/// takes K N² additions, which the closed form does not account for.
pub fn count_dense_operations(n: u64, k: u64, variant: DenseVariant) -> OperationCount {
    match variant {
        DenseVariant::Horner => OperationCount {
            multiplications: k * n * n + (k + 1) * n,
            additions: k * n * n,
        },
        DenseVariant::Native => {
            let pairs = k * k.saturating_sub(1) / 2;
            let n2 = (n * n) as i128;
            let quad = (k as i128 * (1 - k as i128) + 4) * n2 / 2;
            OperationCount {
                multiplications: pairs * n * n * n + (k + 2) * n * n,
                additions: (pairs as i128 * n2 * n as i128 + quad - n as i128) as u64,
            }
        }
    }
}

#[derive(Default)]
struct Counter {
    ops: OperationCount,
}

impl Counter {
    #[inline]
    fn mul(&mut self, a: f64, b: f64) -> f64 {
        self.ops.multiplications += 1;
        a * b
    }

    #[inline]
    fn add(&mut self, a: f64, b: f64) -> f64 {
        self.ops.additions += 1;
        a + b
    }

    /// Row-major `n×n` times `n×n`, or times a vector when `cols == 1`.
    fn matmul(&mut self, a: &[f64], b: &[f64], n: usize, cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * cols];
        for i in 0..n {
            for j in 0..cols {
                let mut acc = self.mul(a[i * n], b[j]);
                for l in 1..n {
                    let t = self.mul(a[i * n + l], b[l * cols + j]);
                    acc = self.add(acc, t);
                }
                out[i * cols + j] = acc;
            }
        }
        out
    }
}

/// Evaluates the filter on a dense row-major `matrix` with every floating
/// point multiplication and addition counted. Coefficients apply to the
/// matrix as given (no scaling).
pub fn dense_fir_counted(matrix: &[f64], f: &[f64], coeffs: &[f64], variant: DenseVariant) -> (Vec<f64>, OperationCount) {
    let n = f.len();
    assert_eq!(matrix.len(), n * n, "matrix must be n×n");
    assert!(!coeffs.is_empty());
    let k = coeffs.len() - 1;
    let mut ctr = Counter::default();
    let out = match variant {
        DenseVariant::Horner => {
            let mut y: Vec<f64> = f.iter().map(|&v| ctr.mul(coeffs[k], v)).collect();
            for step in (0..k).rev() {
                let ly = ctr.matmul(matrix, &y, n, 1);
                y = ly
                    .iter()
                    .zip(f)
                    .map(|(&a, &fi)| {
                        let t = ctr.mul(coeffs[step], fi);
                        ctr.add(a, t)
                    })
                    .collect();
            }
            y
        }
        DenseVariant::Native => {
            // H = c₀ I, then H += c_k L^k with each power built from scratch
            let mut h: Vec<f64> = (0..n * n)
                .map(|idx| ctr.mul(coeffs[0], if idx / n == idx % n { 1.0 } else { 0.0 }))
                .collect();
            for (power, &ck) in coeffs.iter().enumerate().skip(1) {
                let mut p = matrix.to_vec();
                for _ in 1..power {
                    p = ctr.matmul(matrix, &p, n, n);
                }
                for (hv, pv) in h.iter_mut().zip(&p) {
                    let t = ctr.mul(ck, *pv);
                    *hv = ctr.add(*hv, t);
                }
            }
            ctr.matmul(&h, f, n, 1)
        }
    };
    (out, ctr.ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let h = count_dense_operations(4, 3, DenseVariant::Horner);
        assert_eq!((h.multiplications, h.additions), (64, 48));
        assert_eq!(count_dense_operations(4, 3, DenseVariant::Native).multiplications, 272);
        assert_eq!(count_dense_operations(1, 1, DenseVariant::Horner).multiplications, 3);
    }

    #[test]
    fn counted_forms_agree_numerically() {
        let m = [2.0, -1.0, -1.0, -1.0, 1.5, -0.5, -1.0, -0.5, 1.5];
        let f = [1.0, 2.0, -3.0];
        let c = [0.5, 0.25, -0.125, 0.0625];
        let (a, _) = dense_fir_counted(&m, &f, &c, DenseVariant::Horner);
        let (b, _) = dense_fir_counted(&m, &f, &c, DenseVariant::Native);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn native_addition_gap() {
        for n in 1..=6u64 {
            for k in 1..=5u64 {
                let m: Vec<f64> = (0..n * n).map(|i| i as f64 * 0.01).collect();
                let f = vec![1.0; n as usize];
                let c = vec![0.5; k as usize + 1];
                let (_, counted) = dense_fir_counted(&m, &f, &c, DenseVariant::Native);
                let closed = count_dense_operations(n, k, DenseVariant::Native);
                assert_eq!(counted.multiplications, closed.multiplications);
                assert_eq!(counted.additions - closed.additions, (k - 1) * n * n);
            }
        }
    }
}

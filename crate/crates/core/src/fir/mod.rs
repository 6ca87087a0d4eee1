//! Polynomial (FIR) graph filters applied with sparse matrix-vector products.
//!
//! A spectral response `h(λ)` on `[0, λ_max]` is fitted by a degree-K
//! polynomial in `s = λ / λ_max`. The filter `p(L / λ_max) f` is then evaluated
//! in Horner form with exactly K products by the sparse Laplacian.

pub mod complexity;

use std::io::Write;
use std::path::Path;

use faer::linalg::solvers::SpSolverLstsq;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LinearOperator, SparseLaplacian};
use crate::spectral::DEFAULT_ORACLE_CAP;

/// Monomial coefficients `c₀..c_K` for the scaled operator `L / lambda_scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirCoefficients {
    coeffs: Vec<f64>,
    lambda_scale: f64,
    fit_residual: f64,
}

impl FirCoefficients {
    pub fn new(coeffs: Vec<f64>, lambda_scale: f64, fit_residual: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::input("at least one coefficient is required"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("coefficients must be finite"));
        }
        if !(lambda_scale > 0.0) || !lambda_scale.is_finite() {
            return Err(Error::input(format!("lambda scale must be finite and > 0, got {lambda_scale}")));
        }
        if !fit_residual.is_finite() {
            return Err(Error::input("fit residual must be finite"));
        }
        Ok(Self {
            coeffs,
            lambda_scale,
            fit_residual,
        })
    }

    /// Filter that multiplies by `c0`. Used for graphs without edges.
    pub fn constant(c0: f64) -> Self {
        Self {
            coeffs: vec![c0],
            lambda_scale: 1.0,
            fit_residual: 0.0,
        }
    }

    /// Polynomial degree K.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn lambda_scale(&self) -> f64 {
        self.lambda_scale
    }

    /// Max abs deviation of the polynomial from the target on the fit grid.
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    /// Same coefficients applied with a different scale.
    pub fn with_lambda_scale(&self, lambda_scale: f64) -> Result<Self> {
        Self::new(self.coeffs.clone(), lambda_scale, self.fit_residual)
    }

    /// `p(s)` in the scaled variable.
    pub fn eval_scaled(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// `p(λ / lambda_scale)`.
    pub fn eval(&self, lambda: f64) -> f64 {
        self.eval_scaled(lambda / self.lambda_scale)
    }
}

/// Low-pass target and fitting setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDesign {
    /// Butterworth order n.
    pub order: u32,
    /// `λ_c = λ_max / cutoff_divisor`.
    pub cutoff_divisor: f64,
    /// Polynomial degree K.
    pub poly_degree: usize,
    /// Uniform fit grid size P over `[0, λ_max]`.
    pub grid_points: usize,
    /// Pin `p(0) = h(0)` so constant signals pass unchanged.
    pub preserve_dc: bool,
}

impl Default for FilterDesign {
    fn default() -> Self {
        Self {
            order: 2,
            cutoff_divisor: 43.0,
            poly_degree: 10,
            grid_points: 256,
            preserve_dc: true,
        }
    }
}

impl FilterDesign {
    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::input("filter order must be >= 1"));
        }
        if !(self.cutoff_divisor > 1.0) || !self.cutoff_divisor.is_finite() {
            return Err(Error::input(format!(
                "cutoff divisor must be finite and > 1, got {}",
                self.cutoff_divisor
            )));
        }
        if !(2..=20).contains(&self.poly_degree) {
            return Err(Error::input(format!(
                "polynomial degree must be in 2..=20, got {}",
                self.poly_degree
            )));
        }
        if self.grid_points < self.poly_degree + 1 {
            return Err(Error::UnderdeterminedFit {
                points: self.grid_points,
                degree: self.poly_degree,
            });
        }
        Ok(())
    }

    /// Butterworth target for a graph whose spectrum lies in `[0, lambda_max]`.
    pub fn response(&self, lambda_max: f64) -> impl Fn(f64) -> f64 {
        let lambda_c = lambda_max / self.cutoff_divisor;
        let order = self.order;
        move |lambda| butterworth_response(lambda, lambda_c, order)
    }

    pub fn fit(&self, lambda_max: f64) -> Result<FirCoefficients> {
        self.validate()?;
        let h = self.response(lambda_max);
        if self.preserve_dc {
            fit_polynomial_dc(h, lambda_max, self.poly_degree, self.grid_points)
        } else {
            fit_polynomial(h, lambda_max, self.poly_degree, self.grid_points)
        }
    }

    /// Writes `λ h(λ) p(λ)` over the fit grid.
    pub fn write_dump(&self, fir: &FirCoefficients, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let lambda_max = fir.lambda_scale();
        let h = self.response(lambda_max);
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            writeln!(out, "# lambda h_target p_fit")?;
            for s in grid(self.grid_points) {
                let lambda = s * lambda_max;
                writeln!(out, "{lambda:.10e} {:.10e} {:.10e}", h(lambda), fir.eval_scaled(s))?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }
}

/// `1 / sqrt(1 + (λ/λ_c)^(2n))`.
pub fn butterworth_response(lambda: f64, lambda_c: f64, order: u32) -> f64 {
    let x = lambda / lambda_c;
    1.0 / (1.0 + x.powi(2 * order as i32)).sqrt()
}

/// Upper bound on the largest Laplacian eigenvalue: `2 · max degree`.
///
/// 0 for an edgeless graph; callers treat that as a pure `c₀` gain.
pub fn lambda_max_bound(lap: &SparseLaplacian) -> Result<f64> {
    if lap.dim() == 0 {
        return Err(Error::input("empty graph"));
    }
    Ok(2.0 * lap.max_degree())
}

/// Power-iteration estimate of the largest eigenvalue. It approaches λ_max
/// from below, so it is a diagnostic and never a safe scale on its own.
pub fn estimate_lambda_max(op: &(impl LinearOperator + ?Sized), max_iter: usize, rel_tol: f64) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    // deterministic start with components in every direction
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 104_729) as f64 / 104_729.0).collect();
    let mut y = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= norm);
        op.apply(&x, &mut y);
        let next: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        std::mem::swap(&mut x, &mut y);
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

fn grid(points: usize) -> impl Iterator<Item = f64> {
    let last = (points.max(2) - 1) as f64;
    (0..points).map(move |j| j as f64 / last)
}

fn check_fit_inputs(lambda_max: f64, degree: usize, grid_points: usize) -> Result<()> {
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::input(format!("lambda_max must be finite and > 0, got {lambda_max}")));
    }
    if degree < 1 {
        return Err(Error::input("polynomial degree must be >= 1"));
    }
    if grid_points < degree + 1 {
        return Err(Error::UnderdeterminedFit {
            points: grid_points,
            degree,
        });
    }
    Ok(())
}

/// Least squares on the monomial columns `s^first..=s^degree` by Householder QR.
fn lstsq_monomials(s: &[f64], rhs: &[f64], first: usize, degree: usize) -> Result<Vec<f64>> {
    let cols = degree + 1 - first;
    let v = Mat::<f64>::from_fn(s.len(), cols, |j, k| s[j].powi((first + k) as i32));
    let b = Mat::<f64>::from_fn(s.len(), 1, |j, _| rhs[j]);
    let qr = v.qr();
    let r = qr.compute_thin_r();
    let diag: Vec<f64> = (0..cols).map(|k| r.read(k, k).abs()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    let smallest = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smallest > s.len() as f64 * f64::EPSILON * largest) {
        return Err(Error::Conditioning(format!(
            "Vandermonde system of degree {degree} on {} points is numerically rank deficient",
            s.len()
        )));
    }
    let mut x = qr.solve_lstsq(&b);
    // one refinement step against the residual recovers digits lost to the
    // monomial basis when the target is (nearly) a polynomial
    let residual = &b - &v * &x;
    x += qr.solve_lstsq(&residual);
    Ok((0..cols).map(|k| x.read(k, 0)).collect())
}

fn finish_fit(coeffs: Vec<f64>, s: &[f64], target: &[f64], lambda_max: f64) -> Result<FirCoefficients> {
    let mut fir = FirCoefficients::new(coeffs, lambda_max, 0.0)?;
    fir.fit_residual = s
        .iter()
        .zip(target)
        .map(|(&sj, &hj)| (fir.eval_scaled(sj) - hj).abs())
        .fold(0.0, f64::max);
    Ok(fir)
}

/// Least-squares fit of `h` by a degree-`degree` polynomial on `grid_points`
/// uniform samples of `[0, lambda_max]`.
pub fn fit_polynomial(
    h: impl Fn(f64) -> f64,
    lambda_max: f64,
    degree: usize,
    grid_points: usize,
) -> Result<FirCoefficients> {
    check_fit_inputs(lambda_max, degree, grid_points)?;
    let s: Vec<f64> = grid(grid_points).collect();
    let target: Vec<f64> = s.iter().map(|&sj| h(sj * lambda_max)).collect();
    let coeffs = lstsq_monomials(&s, &target, 0, degree)?;
    finish_fit(coeffs, &s, &target, lambda_max)
}

/// Like [`fit_polynomial`] with the constraint `p(0) = h(0)`: `c₀` is fixed and
/// `c₁..c_K` are the least-squares fit of `h - h(0)`.
pub fn fit_polynomial_dc(
    h: impl Fn(f64) -> f64,
    lambda_max: f64,
    degree: usize,
    grid_points: usize,
) -> Result<FirCoefficients> {
    check_fit_inputs(lambda_max, degree, grid_points)?;
    let s: Vec<f64> = grid(grid_points).collect();
    let target: Vec<f64> = s.iter().map(|&sj| h(sj * lambda_max)).collect();
    let c0 = h(0.0);
    let shifted: Vec<f64> = target.iter().map(|t| t - c0).collect();
    let mut coeffs = vec![c0];
    coeffs.extend(lstsq_monomials(&s, &shifted, 1, degree)?);
    finish_fit(coeffs, &s, &target, lambda_max)
}

fn check_signal(op: &(impl LinearOperator + ?Sized), f: &[f64]) -> Result<()> {
    if f.len() != op.dim() {
        return Err(Error::input(format!(
            "signal length {} does not match operator dimension {}",
            f.len(),
            op.dim()
        )));
    }
    Ok(())
}

/// `c₀f + L'(c₁f + L'(c₂f + …))` with `L' = L / lambda_scale`, using exactly
/// K operator applications.
pub fn apply_fir(op: &(impl LinearOperator + ?Sized), f: &[f64], fir: &FirCoefficients) -> Result<Vec<f64>> {
    check_signal(op, f)?;
    let c = fir.coeffs();
    let k = fir.degree();
    let inv = 1.0 / fir.lambda_scale();
    let mut y: Vec<f64> = f.iter().map(|v| c[k] * v).collect();
    let mut ly = vec![0.0; f.len()];
    for step in (0..k).rev() {
        op.apply(&y, &mut ly);
        let ck = c[step];
        let mut finite = true;
        for ((yi, &lyi), &fi) in y.iter_mut().zip(&ly).zip(f) {
            *yi = lyi * inv + ck * fi;
            finite &= yi.is_finite();
        }
        if !finite {
            return Err(Error::NumericalOverflow { step: k - step });
        }
    }
    if k == 0 && y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalOverflow { step: 0 });
    }
    Ok(y)
}

/// `Σ c_k (L')^k f` with every power recomputed from `f`. Reference only.
pub fn apply_fir_native(
    op: &(impl LinearOperator + ?Sized),
    f: &[f64],
    fir: &FirCoefficients,
) -> Result<Vec<f64>> {
    check_signal(op, f)?;
    if op.dim() > DEFAULT_ORACLE_CAP {
        return Err(Error::Capacity {
            what: "native filter input",
            size: op.dim(),
            cap: DEFAULT_ORACLE_CAP,
        });
    }
    let c = fir.coeffs();
    let inv = 1.0 / fir.lambda_scale();
    let n = f.len();
    let mut acc: Vec<f64> = f.iter().map(|v| c[0] * v).collect();
    let mut power = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for (k, &ck) in c.iter().enumerate().skip(1) {
        power.copy_from_slice(f);
        for _ in 0..k {
            op.apply(&power, &mut scratch);
            for (p, s) in power.iter_mut().zip(&scratch) {
                *p = s * inv;
            }
        }
        for (a, p) in acc.iter_mut().zip(&power) {
            *a += ck * p;
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalOverflow { step: k });
        }
    }
    Ok(acc)
}

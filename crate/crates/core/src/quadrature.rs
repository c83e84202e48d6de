//! Quadrature for periodic integrals against the logarithmic kernel
//! `ln M(ξ)(θ,θ')`.
//!
//! The kernel is split as `ln(4 sin²((θ−θ')/2)) + S(θ,θ')` with `S` smooth.
//! The first part is integrated with translation-invariant trigonometric
//! weights that realise the Fourier multiplier `−2π/|k|` exactly; the second
//! part uses the periodic trapezoid rule, with the diagonal of `S` set to its
//! continuous limit `ln |∂_θ w|²`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{boundary, BoundaryGeometry, EllipseParams, RadialDeformation};
use crate::grid::Grid;

/// Translation-invariant weights `R_{|i−j|}` for `ln(4 sin²((θ_i−θ')/2))`.
#[derive(Debug, Clone)]
pub struct LogKernelRule {
    pub grid: Grid,
    pub weights: Vec<f64>,
    /// `ln(4 sin²(πm/N))` for `m ≥ 1`; entry 0 is unused.
    log_sin2: Vec<f64>,
}

/// Multiplier of the log kernel on `e^{ikθ}` as realised by the rule.
pub fn log_multiplier(k: i64, n_points: usize) -> f64 {
    let half = (n_points / 2) as i64;
    let k = k.abs();
    if k == 0 {
        0.0
    } else if k < half {
        -2.0 * PI / k as f64
    } else {
        -2.0 * PI / half as f64
    }
}

pub fn build_log_rule(grid: &Grid) -> LogKernelRule {
    let n = grid.n_points();
    let half = n / 2;
    let weights = (0..n)
        .map(|m| {
            let mut s = 0.0;
            for k in 1..half {
                let arg = 2.0 * PI * ((k * m) % n) as f64 / n as f64;
                s += 2.0 * log_multiplier(k as i64, n) * arg.cos();
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            s += log_multiplier(half as i64, n) * sign;
            s / n as f64
        })
        .collect();
    let log_sin2 = (0..n)
        .map(|m| {
            if m == 0 {
                0.0
            } else {
                let s = (PI * m as f64 / n as f64).sin();
                (4.0 * s * s).ln()
            }
        })
        .collect();
    LogKernelRule {
        grid: grid.clone(),
        weights,
        log_sin2,
    }
}

impl LogKernelRule {
    /// Rule for `grid`, shared across calls with the same resolution.
    pub fn shared(grid: &Grid) -> Arc<LogKernelRule> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<LogKernelRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(grid.n_points())
            .or_insert_with(|| Arc::new(build_log_rule(grid)))
            .clone()
    }

    pub fn n_points(&self) -> usize {
        self.weights.len()
    }

    /// Weight coupling nodes `i` and `j`.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let n = self.weights.len();
        self.weights[(j + n - i) % n]
    }

    /// `ln(4 sin²((θ_i−θ_j)/2))` for `i ≠ j`.
    #[inline]
    pub fn log_sin2(&self, i: usize, j: usize) -> f64 {
        let n = self.weights.len();
        self.log_sin2[(j + n - i) % n]
    }

    /// `∫ ln(4 sin²((θ−θ')/2)) f(θ') dθ'` at the nodes.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n_points();
        (0..n)
            .map(|i| (0..n).map(|j| self.weight(i, j) * f[j]).sum())
            .collect()
    }
}

/// Quadrature matrix `A` with `∫ ln M(ξ)(θ_i,θ') f(θ') dθ' ≈ Σ_j A_ij f_j`.
#[derive(Debug, Clone)]
pub struct SplitKernel {
    pub n: usize,
    pub matrix: Vec<f64>,
    pub geometry: BoundaryGeometry,
}

fn smooth_part(rule: &LogKernelRule, b: &BoundaryGeometry, i: usize, j: usize) -> Result<f64> {
    let m = (b.w[i] - b.w[j]).norm_sqr();
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::SelfIntersecting(format!("M(θ_{i}, θ_{j}) = {m:e}")));
    }
    Ok(m.ln() - rule.log_sin2(i, j))
}

/// Continuous limit of the smooth part on the diagonal.
fn smooth_diagonal(b: &BoundaryGeometry, i: usize) -> Result<f64> {
    let d = b.dw[i].norm_sqr();
    if !(d > 0.0) {
        return Err(Error::SelfIntersecting(format!("|∂_θ w(θ_{i})| = 0")));
    }
    Ok(d.ln())
}

impl SplitKernel {
    pub fn new(xi: &RadialDeformation, params: &EllipseParams) -> Result<Self> {
        let rule = LogKernelRule::shared(&xi.grid);
        let geometry = boundary(xi, params)?;
        Self::from_geometry(&rule, geometry)
    }

    pub fn from_geometry(rule: &LogKernelRule, geometry: BoundaryGeometry) -> Result<Self> {
        let n = rule.n_points();
        let h = rule.grid.spacing();
        let b = &geometry;
        let mut matrix = vec![0.0; n * n];
        matrix
            .par_chunks_mut(n)
            .enumerate()
            .try_for_each(|(i, row)| -> Result<()> {
                row[i] = h * smooth_diagonal(b, i)?;
                for (j, r) in row.iter_mut().enumerate().skip(i + 1) {
                    *r = h * smooth_part(rule, b, i, j)?;
                }
                Ok(())
            })?;
        for i in 0..n {
            for j in 0..i {
                matrix[i * n + j] = matrix[j * n + i];
            }
        }
        for i in 0..n {
            for j in 0..n {
                matrix[i * n + j] += rule.weight(i, j);
            }
        }
        Ok(SplitKernel {
            n,
            matrix,
            geometry,
        })
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    /// `∫ ln M(θ_i,θ') f(θ_i,θ') dθ'` for every node `i`.
    pub fn integrate_rows<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let n = self.n;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let row = &self.matrix[i * n..(i + 1) * n];
                row.iter().enumerate().map(|(j, a)| a * f(i, j)).sum()
            })
            .collect()
    }

    /// `∫ ln M(θ_i,θ') q(θ') dθ'`.
    pub fn apply(&self, q: &[f64]) -> Vec<f64> {
        self.integrate_rows(|_, j| q[j])
    }
}

/// `I(θ) = ∫ ln M(ξ)(θ,θ') f(θ,θ') dθ'` at the nodes; `f` receives node
/// indices `(i, j)`.
pub fn log_m_convolve<F>(xi: &RadialDeformation, params: &EllipseParams, f: F) -> Result<Vec<f64>>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    Ok(SplitKernel::new(xi, params)?.integrate_rows(f))
}

/// `W(ξ)[q](θ) = (1/4π) ∫ ln M(ξ)(θ,θ') q(θ') dθ'`.
pub fn w_operator_apply(
    xi: &RadialDeformation,
    params: &EllipseParams,
    q: &[f64],
) -> Result<Vec<f64>> {
    let k = SplitKernel::new(xi, params)?;
    Ok(k.apply(q).into_iter().map(|v| v / (4.0 * PI)).collect())
}

/// `(1/4π) ∫ ln M(ξ)(θ,θ') Im[∂_θ'w(θ') conj ∂_θw(θ)] dθ'`, the nonlocal part
/// of the evolution law, accumulated over node pairs using the symmetry of
/// `ln M` and the antisymmetry of the integrand.
pub fn transport_integral(rule: &LogKernelRule, b: &BoundaryGeometry) -> Result<Vec<f64>> {
    let n = rule.n_points();
    let h = rule.grid.spacing();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let dwi = b.dw[i].conj();
        let wi = b.w[i];
        let mut acc = 0.0;
        for j in (i + 1)..n {
            let m = (wi - b.w[j]).norm_sqr();
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::SelfIntersecting(format!("M(θ_{i}, θ_{j}) = {m:e}")));
            }
            let a = rule.weight(i, j) + h * (m.ln() - rule.log_sin2(i, j));
            let k = (b.dw[j] * dwi).im;
            let t = a * k;
            acc += t;
            out[j] -= t;
        }
        out[i] += acc;
    }
    let s = 1.0 / (4.0 * PI);
    out.iter_mut().for_each(|v| *v *= s);
    Ok(out)
}

/// `Im[a conj b]`.
#[inline]
pub fn cross(a: Complex64, b: Complex64) -> f64 {
    (a * b.conj()).im
}

//! Uniform periodic grid on the circle and FFT-based spectral utilities.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Result};

/// Uniform grid `θ_j = 2πj/N` with `N` even and at least 8.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n_points", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 8 || n_points % 2 != 0 {
            return Err(domain(format!(
                "n_points must be even and >= 8, got {n_points}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Grid {
            n: n_points,
            fwd: planner.plan_fft_forward(n_points),
            inv: planner.plan_fft_inverse(n_points),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Grid spacing `2π/N`, also the periodic trapezoid weight.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.spacing() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Samples of `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|j| f(self.node(j))).collect()
    }

    /// Periodic trapezoid rule for `∫_𝕋 f`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.spacing() * f.iter().sum::<f64>()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() / self.n as f64
    }

    /// Discrete `L²(𝕋)` inner product.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.spacing() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }

    /// Unnormalized forward DFT of real samples.
    pub fn fft(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse of [`Grid::fft`], keeping the real part.
    pub fn ifft_real(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut coeffs);
        let s = 1.0 / self.n as f64;
        coeffs.iter().map(|c| c.re * s).collect()
    }

    /// Signed wavenumber of DFT slot `k`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Applies the Fourier multiplier `m(k)` for `|k| < N/2`; the Nyquist
    /// slot is multiplied by `nyquist`.
    pub fn multiplier(
        &self,
        f: &[f64],
        m: impl Fn(i64) -> Complex64,
        nyquist: Complex64,
    ) -> Vec<f64> {
        let mut c = self.fft(f);
        let half = self.n / 2;
        for (k, ck) in c.iter_mut().enumerate() {
            if k == half {
                *ck *= nyquist;
            } else {
                *ck *= m(self.wavenumber(k));
            }
        }
        self.ifft_real(c)
    }

    /// Spectral derivative `∂_θ f`; the Nyquist mode is dropped.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        self.multiplier(
            f,
            |k| Complex64::new(0.0, k as f64),
            Complex64::new(0.0, 0.0),
        )
    }

    /// Zero-mean antiderivative `∂_θ^{-1} f` of a zero-mean function.
    pub fn antiderivative(&self, f: &[f64]) -> Vec<f64> {
        self.multiplier(
            f,
            |k| {
                if k == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -1.0 / k as f64)
                }
            },
            Complex64::new(0.0, 0.0),
        )
    }

    /// Removes the grid mean.
    pub fn project_zero_mean(&self, f: &mut [f64]) {
        let m = self.mean(f);
        f.iter_mut().for_each(|x| *x -= m);
    }

    /// Trigonometric interpolant of the samples.
    pub fn interpolant(&self, f: &[f64]) -> TrigInterpolant {
        let c = self.fft(f);
        let n = self.n;
        let s = 1.0 / n as f64;
        let half = n / 2;
        let mut coeffs = Vec::with_capacity(half + 1);
        coeffs.push(Complex64::new(c[0].re * s, 0.0));
        for ck in c.iter().take(half).skip(1) {
            coeffs.push(ck * (2.0 * s));
        }
        coeffs.push(Complex64::new(c[half].re * s, 0.0));
        TrigInterpolant { coeffs }
    }
}

/// Real trigonometric polynomial `Re Σ_{k=0}^{N/2} c_k e^{ikx}` interpolating
/// grid samples, with the Nyquist term taken as a cosine.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn eval(&self, x: f64) -> f64 {
        let step = Complex64::from_polar(1.0, x);
        let mut z = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        let last = self.coeffs.len() - 1;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k == last {
                // Nyquist term: exact cosine rather than the rotated power.
                acc += c.re * (k as f64 * x).cos();
            } else {
                acc += (c * z).re;
                z *= step;
            }
        }
        acc
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(6).is_err());
        assert!(Grid::new(9).is_err());
        assert!(Grid::new(8).is_ok());
    }

    #[test]
    fn derivative_of_trig_polynomial() {
        let g = Grid::new(32).unwrap();
        let f = g.sample(|t| (3.0 * t).sin() + 0.5 * (7.0 * t).cos());
        let df = g.derivative(&f);
        for (j, v) in df.iter().enumerate() {
            let t = g.node(j);
            let ex = 3.0 * (3.0 * t).cos() - 3.5 * (7.0 * t).sin();
            assert!((v - ex).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolant_reproduces_off_grid() {
        let g = Grid::new(16).unwrap();
        let f =
            g.sample(|t| 1.0 + (2.0 * t).cos() - 0.25 * (5.0 * t).sin() + 0.1 * (8.0 * t).cos());
        let p = g.interpolant(&f);
        for x in [0.1f64, 1.3, 2.9, 5.5] {
            let ex = 1.0 + (2.0 * x).cos() - 0.25 * (5.0 * x).sin() + 0.1 * (8.0 * x).cos();
            assert!((p.eval(x) - ex).abs() < 1e-13);
        }
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let g = Grid::new(32).unwrap();
        let f = g.sample(|t| (t).sin() - 0.3 * (4.0 * t).cos());
        let back = g.antiderivative(&g.derivative(&f));
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}

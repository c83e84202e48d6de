//! Elliptic-coordinate primitives: aspect-ratio constants, the boundary weight
//! `g_γ`, the straightening diffeomorphism and the kernel `M(ξ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::grid::Grid;

/// Aspect ratio `γ ≥ 1` and its derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseParams {
    pub gamma: f64,
    /// Angular velocity of the rigidly rotating ellipse, `γ/(1+γ)²`.
    pub omega_gamma: f64,
    /// `√2/(√π(γ−γ⁻¹))`; `None` at `γ = 1`.
    pub aleph: Option<f64>,
    /// `(γ²+1)√2/((γ²−1)√π)`; `None` at `γ = 1`.
    pub alpha_const: Option<f64>,
}

pub fn ellipse_params(gamma: f64) -> Result<EllipseParams> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(domain(format!(
            "aspect ratio must satisfy γ >= 1, got {gamma}"
        )));
    }
    let omega_gamma = gamma / ((1.0 + gamma) * (1.0 + gamma));
    let (aleph, alpha_const) = if gamma > 1.0 {
        let s = (2.0 / PI).sqrt();
        (
            Some(s / (gamma - 1.0 / gamma)),
            Some(s * (gamma * gamma + 1.0) / (gamma * gamma - 1.0)),
        )
    } else {
        (None, None)
    };
    Ok(EllipseParams {
        gamma,
        omega_gamma,
        aleph,
        alpha_const,
    })
}

impl EllipseParams {
    pub fn new(gamma: f64) -> Result<Self> {
        ellipse_params(gamma)
    }

    pub fn aleph(&self) -> Result<f64> {
        self.aleph.ok_or_else(|| domain("ℵ is undefined at γ = 1"))
    }

    pub fn alpha_const(&self) -> Result<f64> {
        self.alpha_const
            .ok_or_else(|| domain("α is undefined at γ = 1"))
    }

    /// `κ_n = ((γ−1)/(γ+1))^n`, evaluated in log form; zero at `γ = 1`.
    pub fn kappa(&self, n: u32) -> f64 {
        kappa(self.gamma, n)
    }

    pub fn g(&self, theta: f64) -> f64 {
        g_gamma(self, theta)
    }

    /// `∂_θ g_γ = (γ⁻¹ − γ) sin 2θ`.
    pub fn dg(&self, theta: f64) -> f64 {
        (1.0 / self.gamma - self.gamma) * (2.0 * theta).sin()
    }
}

pub fn kappa(gamma: f64, n: u32) -> f64 {
    if gamma <= 1.0 || n == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * ((gamma - 1.0) / (gamma + 1.0)).ln()).exp()
}

/// `g_γ(θ) = γ cos²θ + γ⁻¹ sin²θ`.
pub fn g_gamma(params: &EllipseParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    params.gamma * c * c + s * s / params.gamma
}

/// `β(θ) = arctan(tan θ/γ) − θ`, continued π-periodically.
pub fn beta(params: &EllipseParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let ig = 1.0 / params.gamma;
    (s * c * (ig - 1.0)).atan2(c * c + s * s * ig)
}

/// `β̆(y) = arctan(γ tan y) − y`, continued π-periodically.
pub fn beta_inv(params: &EllipseParams, y: f64) -> f64 {
    let (s, c) = y.sin_cos();
    let g = params.gamma;
    (s * c * (g - 1.0)).atan2(c * c + g * s * s)
}

/// Straightening map `θ ↦ θ + β(θ)`.
pub fn straighten(params: &EllipseParams, theta: f64) -> f64 {
    theta + beta(params, theta)
}

/// Inverse straightening map `y ↦ y + β̆(y)`.
pub fn unstraighten(params: &EllipseParams, y: f64) -> f64 {
    y + beta_inv(params, y)
}

/// Nodal samples of the straightening diffeomorphism and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffeoPair {
    pub beta: Vec<f64>,
    pub beta_inv: Vec<f64>,
    /// `β_θ = 1/g_γ − 1`.
    pub beta_theta: Vec<f64>,
}

pub fn straightening_diffeo(params: &EllipseParams, grid: &Grid) -> DiffeoPair {
    DiffeoPair {
        beta: grid.sample(|t| beta(params, t)),
        beta_inv: grid.sample(|t| beta_inv(params, t)),
        beta_theta: grid.sample(|t| 1.0 / g_gamma(params, t) - 1.0),
    }
}

/// Zero-mean samples of the radial deformation `ξ`, with `1 + 2ξ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDeformation {
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// Tolerance on the grid mean accepted by [`RadialDeformation::new`].
pub const MEAN_TOLERANCE: f64 = 1e-12;

impl RadialDeformation {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(domain(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(1.0 + 2.0 * **v > 0.0)) {
            return Err(domain(format!("1 + 2ξ must be positive, found ξ = {v}")));
        }
        let m = grid.mean(&values);
        if m.abs() > MEAN_TOLERANCE {
            return Err(domain(format!("ξ must have zero mean, mean = {m:e}")));
        }
        Ok(RadialDeformation { grid, values })
    }

    /// Builds a state after removing the grid mean of `values`.
    pub fn projected(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(domain("sample count does not match grid"));
        }
        grid.project_zero_mean(&mut values);
        Self::new(grid, values)
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let v = grid.sample(f);
        Self::projected(grid, v)
    }

    pub fn zero(grid: Grid) -> Self {
        let n = grid.n_points();
        RadialDeformation {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Smooth zero-mean state with `modes` random Fourier modes of decaying
    /// size, scaled so that `max|ξ| = amplitude`.
    pub fn random_smooth(grid: Grid, modes: usize, amplitude: f64, seed: u64) -> Result<Self> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<(f64, f64)> = (1..=modes)
            .map(|n| {
                let d = 1.0 / (n * n) as f64;
                (d * rng.gen_range(-1.0..1.0), d * rng.gen_range(-1.0..1.0))
            })
            .collect();
        let mut v = grid.sample(|t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let (s, c) = ((k + 1) as f64 * t).sin_cos();
                    a * c + b * s
                })
                .sum()
        });
        grid.project_zero_mean(&mut v);
        let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if m > 0.0 {
            v.iter_mut().for_each(|x| *x *= amplitude / m);
        }
        Self::projected(grid, v)
    }

    /// Reversibility involution `(𝒮ξ)(θ) = ξ(−θ)`.
    pub fn reflect(&self) -> Self {
        RadialDeformation {
            grid: self.grid.clone(),
            values: reflect_samples(&self.values),
        }
    }
}

/// Node permutation `f(θ_j) ↦ f(−θ_j)`.
pub fn reflect_samples(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n).map(|j| f[(n - j) % n]).collect()
}

/// Boundary curve `w = ρ w₀` and its derivative at the nodes, with
/// `ρ = (1+2ξ)^{1/2}` and `w₀ = √γ cos θ + i sin θ/√γ`.
#[derive(Debug, Clone)]
pub struct BoundaryGeometry {
    pub rho: Vec<f64>,
    pub drho: Vec<f64>,
    pub w: Vec<Complex64>,
    pub dw: Vec<Complex64>,
}

pub fn boundary(xi: &RadialDeformation, params: &EllipseParams) -> Result<BoundaryGeometry> {
    let grid = &xi.grid;
    let mut rho = Vec::with_capacity(xi.n_points());
    for &v in &xi.values {
        let f = 1.0 + 2.0 * v;
        if f <= 0.0 {
            return Err(domain(format!("1 + 2ξ must be positive, found {f}")));
        }
        rho.push(f.sqrt());
    }
    let drho = grid.derivative(&rho);
    let sg = params.gamma.sqrt();
    let mut w = Vec::with_capacity(rho.len());
    let mut dw = Vec::with_capacity(rho.len());
    for j in 0..rho.len() {
        let (s, c) = grid.node(j).sin_cos();
        let w0 = Complex64::new(sg * c, s / sg);
        let dw0 = Complex64::new(-sg * s, c / sg);
        w.push(w0 * rho[j]);
        dw.push(w0 * drho[j] + dw0 * rho[j]);
    }
    Ok(BoundaryGeometry { rho, drho, w, dw })
}

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// `M(ξ)(θ_i, θ_j) = |w(θ_i) − w(θ_j)|²`.
pub fn kernel_m(xi: &RadialDeformation, params: &EllipseParams) -> Result<DenseMatrix> {
    let b = boundary(xi, params)?;
    let n = xi.n_points();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let m = (b.w[i] - b.w[j]).norm_sqr();
            data[i * n + j] = m;
            data[j * n + i] = m;
        }
    }
    Ok(DenseMatrix { n, data })
}

/// Closed form of `M(0)` at a pair of angles.
pub fn kernel_m0_factorized(params: &EllipseParams, theta: f64, theta_p: f64) -> f64 {
    let g = params.gamma;
    if g == 1.0 {
        let s = ((theta_p - theta) / 2.0).sin();
        return 4.0 * s * s;
    }
    let s = ((theta_p - theta) / 2.0).sin();
    2.0 * ((g * g - 1.0) / g) * s * s * ((g * g + 1.0) / (g * g - 1.0) - (theta + theta_p).cos())
}

/// Stationary profile `ξ_p = ½(1/g_γ − 1)` of the affine momentum flow.
pub fn xi_particular(params: &EllipseParams, grid: &Grid) -> Result<RadialDeformation> {
    let v = grid.sample(|t| 0.5 * (1.0 / g_gamma(params, t) - 1.0));
    // The continuum mean is exactly zero; remove the quadrature residue.
    RadialDeformation::projected(grid.clone(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn constants() {
        let p = ellipse_params(1.0).unwrap();
        assert_eq!(p.omega_gamma, 0.25);
        assert!(p.aleph.is_none() && p.alpha_const.is_none());
        let p = ellipse_params(2.0).unwrap();
        assert!((p.omega_gamma - 2.0 / 9.0).abs() < 1e-16);
        assert!((p.aleph.unwrap() - 0.531_923_040_535_243_6).abs() < 1e-14);
        let p = ellipse_params(3.0).unwrap();
        assert!((p.omega_gamma - 3.0 / 16.0).abs() < 1e-16);
        assert!(ellipse_params(0.5).is_err());
    }

    #[test]
    fn weight_values() {
        let p = ellipse_params(2.0).unwrap();
        assert_eq!(g_gamma(&p, 0.0), 2.0);
        assert!((g_gamma(&p, PI / 2.0) - 0.5).abs() < 1e-15);
        let p1 = ellipse_params(1.0).unwrap();
        assert!((g_gamma(&p1, 0.7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diffeo_values() {
        let p = ellipse_params(2.0).unwrap();
        assert_eq!(beta(&p, 0.0), 0.0);
        assert!((beta(&p, FRAC_PI_4) - (-0.321_750_554_396_642_2)).abs() < 1e-14);
        let p1 = ellipse_params(1.0).unwrap();
        let grid = Grid::new(16).unwrap();
        let d = straightening_diffeo(&p1, &grid);
        assert!(d.beta.iter().all(|b| b.abs() < 1e-15));
    }

    #[test]
    fn diffeo_inverse_and_derivative() {
        let grid = Grid::new(64).unwrap();
        for gamma in [1.3, 2.0, 5.0] {
            let p = ellipse_params(gamma).unwrap();
            let d = straightening_diffeo(&p, &grid);
            let db = grid.derivative(&d.beta);
            for j in 0..grid.n_points() {
                let t = grid.node(j);
                assert!((d.beta[j] + beta_inv(&p, t + d.beta[j])).abs() < 1e-10);
                assert!(((1.0 + d.beta_theta[j]) * g_gamma(&p, t) - 1.0).abs() < 1e-10);
                if gamma < 3.0 {
                    assert!((db[j] - d.beta_theta[j]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn kernel_values() {
        let grid = Grid::new(32).unwrap();
        let p = ellipse_params(2.0).unwrap();
        let m = kernel_m(&RadialDeformation::zero(grid.clone()), &p).unwrap();
        assert!((m.get(0, 16) - 8.0).abs() < 1e-13);
        let p1 = ellipse_params(1.0).unwrap();
        let m1 = kernel_m(&RadialDeformation::zero(grid.clone()), &p1).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let s = ((grid.node(i) - grid.node(j)) / 2.0).sin();
                assert!((m1.get(i, j) - 4.0 * s * s).abs() < 1e-13);
            }
        }
        for gamma in [1.0, 1.5, 2.0, 4.0] {
            let p = ellipse_params(gamma).unwrap();
            let m = kernel_m(&RadialDeformation::zero(grid.clone()), &p).unwrap();
            for i in 0..32 {
                for j in 0..32 {
                    let f = kernel_m0_factorized(&p, grid.node(i), grid.node(j));
                    assert!((m.get(i, j) - f).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn particular_profile() {
        let grid = Grid::new(64).unwrap();
        let p = ellipse_params(2.0).unwrap();
        let xp = xi_particular(&p, &grid).unwrap();
        assert!((xp.values[0] + 0.25).abs() < 1e-12);
        let raw: Vec<f64> = grid.sample(|t| 0.5 * (1.0 / g_gamma(&p, t) - 1.0));
        assert!(grid.mean(&raw).abs() < 1e-12);
        let p1 = ellipse_params(1.0).unwrap();
        let m1 = xi_particular(&p1, &grid).unwrap().max_abs();
        assert!(m1 < 1e-15);
    }

    #[test]
    fn deformation_invariants() {
        let grid = Grid::new(16).unwrap();
        assert!(RadialDeformation::new(grid.clone(), vec![0.1; 16]).is_err());
        let mut v = vec![0.0; 16];
        v[0] = -0.6;
        v[1] = 0.6;
        assert!(RadialDeformation::new(grid.clone(), v).is_err());
        let r = RadialDeformation::from_fn(grid, |t| 0.1 * (t).sin()).unwrap();
        let s = r.reflect();
        assert!((s.values[1] + r.values[1]).abs() < 1e-15);
    }
}

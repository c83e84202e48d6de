//! Linear theory at the Kirchhoff ellipse: mode coefficients, frequencies,
//! symmetrizers, stability classes, critical aspect ratios, explicit linear
//! solutions and frequency asymptotics.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::LinearizedOperator;
use crate::error::{domain, Result};
use crate::geometry::{kappa, EllipseParams, RadialDeformation};
use crate::grid::Grid;

/// Normalization of the mode basis: `𝚌_n = cos(nθ)/√π` (times `√2` at `n = 2`).
pub fn basis_scale(n: u32) -> f64 {
    if n == 2 {
        (2.0 / PI).sqrt()
    } else {
        1.0 / PI.sqrt()
    }
}

/// Samples of `𝚌_n`.
pub fn cos_mode(grid: &Grid, n: u32) -> Vec<f64> {
    let s = basis_scale(n);
    grid.sample(|t| s * (n as f64 * t).cos())
}

/// Samples of `𝚜_n`.
pub fn sin_mode(grid: &Grid, n: u32) -> Vec<f64> {
    let s = basis_scale(n);
    grid.sample(|t| s * (n as f64 * t).sin())
}

/// Real mode coordinates `(α_n, β_n)` for `n = 1..=n_max`; index `n − 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierModes {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl FourierModes {
    pub fn zeros(n_max: usize) -> Self {
        FourierModes {
            alpha: vec![0.0; n_max],
            beta: vec![0.0; n_max],
        }
    }

    pub fn n_max(&self) -> usize {
        self.alpha.len()
    }

    /// Coordinates of `q`: `α₂ = ½(q,𝚌₂)`, `α_n = (q,𝚌_n)` otherwise.
    pub fn from_samples(grid: &Grid, q: &[f64], n_max: usize) -> Result<Self> {
        if n_max >= grid.n_points() / 2 {
            return Err(domain("n_max must lie below the Nyquist mode"));
        }
        let c = grid.fft(q);
        let h = grid.spacing();
        let mut m = FourierModes::zeros(n_max);
        for n in 1..=n_max {
            let factor = if n == 2 { 0.5 } else { 1.0 } * basis_scale(n as u32) * h;
            m.alpha[n - 1] = factor * c[n].re;
            m.beta[n - 1] = -factor * c[n].im;
        }
        Ok(m)
    }

    pub fn to_samples(&self, grid: &Grid) -> Vec<f64> {
        grid.sample(|t| {
            let mut acc = 0.0;
            for n in 1..=self.n_max() {
                let (s, c) = (n as f64 * t).sin_cos();
                acc += basis_scale(n as u32) * (self.alpha[n - 1] * c + self.beta[n - 1] * s);
            }
            acc
        })
    }
}

/// Fourier-side action of `W` at the ellipse: `α_n ↦ −(1+κ_n)/(2n) α_n`,
/// `β_n ↦ −(1−κ_n)/(2n) β_n`.
pub fn w0_apply(q: &FourierModes, params: &EllipseParams) -> FourierModes {
    let mut out = FourierModes::zeros(q.n_max());
    for n in 1..=q.n_max() {
        let k = params.kappa(n as u32);
        let nf = 2.0 * n as f64;
        out.alpha[n - 1] = -(1.0 + k) / nf * q.alpha[n - 1];
        out.beta[n - 1] = -(1.0 - k) / nf * q.beta[n - 1];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityClass {
    Elliptic,
    Hyperbolic,
    Degenerate,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Elliptic => "elliptic",
            StabilityClass::Hyperbolic => "hyperbolic",
            StabilityClass::Degenerate => "degenerate",
        }
    }
}

/// Spectral record of one mode: `α̇_n = −μ⁺β_n`, `β̇_n = μ⁻α_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeData {
    pub n: u32,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub omega_n: f64,
    pub m_n: f64,
    pub class: StabilityClass,
}

/// `(μ_n⁺, μ_n⁻)` at aspect ratio `γ`.
pub fn mu_pair(n: u32, gamma: f64) -> (f64, f64) {
    let k = kappa(gamma, n);
    if n == 2 {
        // 2Ω_γ − ½ = −κ₂/2 identically.
        return (0.0, -k);
    }
    let base = n as f64 * gamma / ((1.0 + gamma) * (1.0 + gamma)) - 0.5;
    (base + 0.5 * k, base - 0.5 * k)
}

/// Linear frequency `Ω_n(γ) = |μ⁺μ⁻|^{1/2}`.
pub fn omega_n(n: u32, gamma: f64) -> f64 {
    let (p, m) = mu_pair(n, gamma);
    (p * m).abs().sqrt()
}

pub fn mode_data(n: u32, params: &EllipseParams) -> Result<ModeData> {
    if n == 0 {
        return Err(domain("mode index must be >= 1"));
    }
    let (mu_plus, mu_minus) = mu_pair(n, params.gamma);
    let prod = mu_plus * mu_minus;
    let class = if n == 2 {
        StabilityClass::Degenerate
    } else if prod < 0.0 {
        StabilityClass::Hyperbolic
    } else {
        StabilityClass::Elliptic
    };
    let m_n = if n == 2 {
        1.0
    } else {
        (mu_plus.abs() / mu_minus.abs()).powf(0.25)
    };
    Ok(ModeData {
        n,
        mu_plus,
        mu_minus,
        omega_n: prod.abs().sqrt(),
        m_n,
        class,
    })
}

/// Closed-form `dμ_n⁻/dγ = −n(γ²−1)/(1+γ)⁴ − nκ_{n−1}/(1+γ)²`.
pub fn dmu_minus_dgamma(n: u32, gamma: f64) -> f64 {
    let g1 = 1.0 + gamma;
    let nf = n as f64;
    -nf * (gamma * gamma - 1.0) / g1.powi(4) - nf * kappa(gamma, n - 1) / (g1 * g1)
}

/// Bisection tolerance in `γ` for [`critical_gamma`].
pub const CRITICAL_TOL: f64 = 1e-13;

/// Unique root `γ̄_n > 1` of `μ_n⁻(γ) = 0`, `n ≥ 3`.
pub fn critical_gamma(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(domain("critical aspect ratios exist for n >= 3"));
    }
    let f = |g: f64| mu_pair(n, g).1;
    let mut lo = 3.0;
    if f(lo) <= 0.0 {
        return Ok(lo);
    }
    let mut hi = 6.0;
    while f(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > CRITICAL_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    debug_assert!(dmu_minus_dgamma(n, root) < 0.0);
    Ok(root)
}

/// `q(t,θ) = Σ a_n M_n cos(Ω_n t) cos nθ + a_n M_n⁻¹ sin(Ω_n t) sin nθ`.
pub fn linear_solution(
    t: f64,
    amplitudes: &[(u32, f64)],
    params: &EllipseParams,
    n_threshold: u32,
    grid: &Grid,
) -> Result<Vec<f64>> {
    let mut modes = Vec::with_capacity(amplitudes.len());
    for &(n, a) in amplitudes {
        let md = mode_data(n, params)?;
        if n <= n_threshold || md.class != StabilityClass::Elliptic || !(md.mu_plus > 0.0) {
            return Err(domain(format!(
                "mode {n} is not an elliptic mode above the threshold {n_threshold}"
            )));
        }
        modes.push((n as f64, a, md));
    }
    Ok(grid.sample(|th| {
        modes
            .iter()
            .map(|(n, a, md)| {
                let (st, ct) = (md.omega_n * t).sin_cos();
                a * md.m_n * ct * (n * th).cos() + a / md.m_n * st * (n * th).sin()
            })
            .sum()
    }))
}

/// `r(n,γ)` with `Ω_n = nΩ₁ − ½ + r(n,γ)`, in the cancellation-free form
/// `−κ_n² / (4a(√(1 − κ_n²/(4a²)) + 1))`, `a = nΩ₁ − ½`.
pub fn asymptotic_remainder(n: u32, params: &EllipseParams) -> Result<f64> {
    let a = n as f64 * params.omega_gamma - 0.5;
    let k = params.kappa(n);
    let ratio = k * k / (4.0 * a * a);
    if !(a > 0.0) || !(ratio < 1.0) {
        return Err(domain(format!(
            "mode {n} is not elliptic at γ = {}",
            params.gamma
        )));
    }
    Ok(-k * k / (4.0 * a * ((1.0 - ratio).sqrt() + 1.0)))
}

/// Assembles the 2×2 matrix of the linearized vector field at the ellipse
/// on `span(𝚌_n, 𝚜_n)` in the coordinates `(α_n, β_n)`.
pub fn assemble_block(n: u32, params: &EllipseParams, grid: &Grid) -> Result<[[f64; 2]; 2]> {
    if n as usize >= grid.n_points() / 2 {
        return Err(domain("mode index must lie below the Nyquist mode"));
    }
    let op = LinearizedOperator::new(
        &RadialDeformation::zero(grid.clone()),
        params.omega_gamma,
        params,
    )?;
    assemble_block_with(&op, n, grid)
}

pub fn assemble_block_with(op: &LinearizedOperator, n: u32, grid: &Grid) -> Result<[[f64; 2]; 2]> {
    let nm = n as usize;
    let lc = FourierModes::from_samples(grid, &op.apply(&cos_mode(grid, n))?, nm)?;
    let ls = FourierModes::from_samples(grid, &op.apply(&sin_mode(grid, n))?, nm)?;
    Ok([
        [lc.alpha[nm - 1], ls.alpha[nm - 1]],
        [lc.beta[nm - 1], ls.beta[nm - 1]],
    ])
}

/// Empirical `c = min Ω_n(γ)/n` over `n ∈ (n̄, n_max]` and a `γ` sample.
pub fn empirical_lower_bound(gammas: &[f64], n_bar: u32, n_max: u32) -> f64 {
    let mut c = f64::INFINITY;
    for &g in gammas {
        for n in (n_bar + 1)..=n_max {
            c = c.min(omega_n(n, g) / n as f64);
        }
    }
    c
}

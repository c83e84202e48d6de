//! Nonlinear contour-dynamics vector field, its linearization, the conserved
//! functionals, the Hamiltonian and explicit time integration.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geometry::{boundary, g_gamma, EllipseParams, RadialDeformation};
use crate::quadrature::{transport_integral, LogKernelRule, SplitKernel};

/// Minimum of `1 + 2ξ` below which time integration aborts.
pub const BLOW_UP_MARGIN: f64 = 0.1;

/// Conserved functionals of a patch state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedSet {
    /// `C = π + ∫ξ`.
    pub circulation: f64,
    /// `|Z|` with `Z = ⅓ ∫ (1+2ξ)^{3/2} w₀`.
    pub center_modulus: f64,
    /// `J = ¼ ∫ (1+2ξ)² g_γ`.
    pub angular_momentum: f64,
    /// Pseudo-energy `E`.
    pub pseudo_energy: f64,
    /// `𝒥 = ℵ(J₁ + J₂)`; `None` at `γ = 1`.
    pub rectified_momentum: Option<f64>,
}

fn weight_samples(xi: &RadialDeformation, params: &EllipseParams) -> Vec<f64> {
    xi.grid.sample(|t| g_gamma(params, t))
}

/// `∂_t ξ = (Ω/2) ∂_θ(g_γ(1+2ξ)) + (1/4π) ∫ ln M(ξ) ∂²_{θθ'}[ρ(θ)ρ(θ') sin(θ'−θ)] dθ'`.
pub fn evera_rhs(xi: &RadialDeformation, omega: f64, params: &EllipseParams) -> Result<Vec<f64>> {
    let grid = &xi.grid;
    let rule = LogKernelRule::shared(grid);
    let b = boundary(xi, params)?;
    let mut out = transport_integral(&rule, &b)?;
    let gw: Vec<f64> = (0..grid.n_points())
        .map(|j| g_gamma(params, grid.node(j)) * (1.0 + 2.0 * xi.values[j]))
        .collect();
    let d = grid.derivative(&gw);
    for (o, dv) in out.iter_mut().zip(d) {
        *o += 0.5 * omega * dv;
    }
    Ok(out)
}

/// `(𝒥₁, 𝒥₂)`-free part: `J₁ = ∫ ξ g_γ` and `J₂ = ∫ ξ² g_γ`.
pub fn momentum_parts(xi: &RadialDeformation, params: &EllipseParams) -> (f64, f64) {
    let g = weight_samples(xi, params);
    let grid = &xi.grid;
    let j1 = grid.integrate(
        &xi.values
            .iter()
            .zip(&g)
            .map(|(x, w)| x * w)
            .collect::<Vec<_>>(),
    );
    let j2 = grid.integrate(
        &xi.values
            .iter()
            .zip(&g)
            .map(|(x, w)| x * x * w)
            .collect::<Vec<_>>(),
    );
    (j1, j2)
}

/// Rectified momentum `𝒥(ξ) = ℵ(J₁ + J₂)`.
pub fn rectified_momentum(xi: &RadialDeformation, params: &EllipseParams) -> Result<f64> {
    let aleph = params.aleph()?;
    let (j1, j2) = momentum_parts(xi, params);
    Ok(aleph * (j1 + j2))
}

/// Pseudo-energy `E = (1/32π) ∫∫ [ln M − 2] M ∂²_{θθ'}M`.
pub fn pseudo_energy(xi: &RadialDeformation, params: &EllipseParams) -> Result<f64> {
    let k = SplitKernel::new(xi, params)?;
    Ok(pseudo_energy_from(&k, xi.grid.spacing()))
}

fn pseudo_energy_from(k: &SplitKernel, h: f64) -> f64 {
    let b = &k.geometry;
    let n = k.n;
    // P = M ∂²M with ∂²_{θθ'}M = −2 Re[w'(θ) conj w'(θ')]; P vanishes on the diagonal.
    let p = |i: usize, j: usize| -> f64 {
        if i == j {
            return 0.0;
        }
        let m = (b.w[i] - b.w[j]).norm_sqr();
        -2.0 * m * (b.dw[i] * b.dw[j].conj()).re
    };
    // Compensated sums keep the functional smooth to rounding level, which
    // finite differences of E rely on.
    let mut total = Neumaier::default();
    for i in 0..n {
        for j in 0..n {
            let pij = p(i, j);
            total.add(h * k.entry(i, j) * pij);
            total.add(-2.0 * h * h * pij);
        }
    }
    total.value() / (32.0 * PI)
}

/// Neumaier compensated summation.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn conserved_set(xi: &RadialDeformation, params: &EllipseParams) -> Result<ConservedSet> {
    let grid = &xi.grid;
    let circulation = PI + grid.integrate(&xi.values);
    let sg = params.gamma.sqrt();
    let mut z = Complex64::new(0.0, 0.0);
    for (j, v) in xi.values.iter().enumerate() {
        let (s, c) = grid.node(j).sin_cos();
        z += Complex64::new(sg * c, s / sg) * (1.0 + 2.0 * v).powf(1.5);
    }
    z *= grid.spacing() / 3.0;
    let g = weight_samples(xi, params);
    let am: Vec<f64> = xi
        .values
        .iter()
        .zip(&g)
        .map(|(v, w)| (1.0 + 2.0 * v).powi(2) * w)
        .collect();
    let angular_momentum = 0.25 * grid.integrate(&am);
    let pseudo_energy = pseudo_energy(xi, params)?;
    let rectified_momentum = params.aleph.map(|a| {
        let (j1, j2) = momentum_parts(xi, params);
        a * (j1 + j2)
    });
    Ok(ConservedSet {
        circulation,
        center_modulus: z.norm(),
        angular_momentum,
        pseudo_energy,
        rectified_momentum,
    })
}

/// `H_Ω = −½E + (Ω/2)J`.
pub fn hamiltonian(xi: &RadialDeformation, omega: f64, params: &EllipseParams) -> Result<f64> {
    let e = pseudo_energy(xi, params)?;
    let g = weight_samples(xi, params);
    let am: Vec<f64> = xi
        .values
        .iter()
        .zip(&g)
        .map(|(v, w)| (1.0 + 2.0 * v).powi(2) * w)
        .collect();
    let j = 0.25 * xi.grid.integrate(&am);
    Ok(-0.5 * e + 0.5 * omega * j)
}

/// Multiplication symbol `v(ξ) = (1/4π) ∫ ln M(ξ) ∂_θ'[(ρ(θ')/ρ(θ)) sin(θ'−θ)] dθ'`.
pub fn potential_v(xi: &RadialDeformation, params: &EllipseParams) -> Result<Vec<f64>> {
    let k = SplitKernel::new(xi, params)?;
    Ok(potential_v_from(&k, xi))
}

fn potential_v_from(k: &SplitKernel, xi: &RadialDeformation) -> Vec<f64> {
    let b = &k.geometry;
    let grid = &xi.grid;
    let n = grid.n_points();
    let h = grid.spacing();
    let (sin_t, cos_t): (Vec<f64>, Vec<f64>) = (0..n).map(|m| (h * m as f64).sin_cos()).unzip();
    k.integrate_rows(|i, j| {
        let m = (j + n - i) % n;
        (b.drho[j] * sin_t[m] + b.rho[j] * cos_t[m]) / (4.0 * PI * b.rho[i])
    })
}

/// `L(ξ)q = ∂_θ((Ω g_γ + v(ξ)) q − W(ξ)[q])`.
pub fn linearized_apply(
    xi: &RadialDeformation,
    q: &[f64],
    omega: f64,
    params: &EllipseParams,
) -> Result<Vec<f64>> {
    let op = LinearizedOperator::new(xi, omega, params)?;
    op.apply(q)
}

/// Linearized vector field at a fixed state, reusable across directions.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    kernel: SplitKernel,
    grid: crate::grid::Grid,
    /// `Ω g_γ + v(ξ)` at the nodes.
    pub symbol: Vec<f64>,
}

impl LinearizedOperator {
    pub fn new(xi: &RadialDeformation, omega: f64, params: &EllipseParams) -> Result<Self> {
        let kernel = SplitKernel::new(xi, params)?;
        let v = potential_v_from(&kernel, xi);
        let symbol = (0..xi.n_points())
            .map(|j| omega * g_gamma(params, xi.grid.node(j)) + v[j])
            .collect();
        Ok(LinearizedOperator {
            kernel,
            grid: xi.grid.clone(),
            symbol,
        })
    }

    /// `(Ω g_γ + v(ξ)) q − W(ξ)[q]`, the gradient part before `∂_θ`.
    pub fn symmetric_part(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.grid.n_points() {
            return Err(domain("direction has wrong length"));
        }
        let wq = self.kernel.apply(q);
        Ok((0..q.len())
            .map(|j| self.symbol[j] * q[j] - wq[j] / (4.0 * PI))
            .collect())
    }

    pub fn apply(&self, q: &[f64]) -> Result<Vec<f64>> {
        Ok(self.grid.derivative(&self.symmetric_part(q)?))
    }
}

/// Time series produced by [`integrate`].
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub gamma: f64,
    pub omega: f64,
    pub n_points: usize,
    pub dt: f64,
    pub method: String,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub diagnostics: Vec<ConservedSet>,
}

impl TrajectoryRecord {
    fn push(&mut self, t: f64, xi: &RadialDeformation, params: &EllipseParams) -> Result<()> {
        self.times.push(t);
        self.states.push(xi.values.clone());
        self.diagnostics.push(conserved_set(xi, params)?);
        Ok(())
    }

    pub fn max_abs(&self, k: usize) -> f64 {
        self.states[k].iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn axpy(base: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    base.iter().zip(d).map(|(x, y)| x + a * y).collect()
}

/// One classical Runge–Kutta step with mean re-projection.
pub fn rk4_step(
    xi: &RadialDeformation,
    omega: f64,
    params: &EllipseParams,
    dt: f64,
) -> Result<RadialDeformation> {
    let grid = xi.grid.clone();
    let stage = |v: Vec<f64>| RadialDeformation {
        grid: grid.clone(),
        values: v,
    };
    let k1 = evera_rhs(xi, omega, params)?;
    let k2 = evera_rhs(&stage(axpy(&xi.values, 0.5 * dt, &k1)), omega, params)?;
    let k3 = evera_rhs(&stage(axpy(&xi.values, 0.5 * dt, &k2)), omega, params)?;
    let k4 = evera_rhs(&stage(axpy(&xi.values, dt, &k3)), omega, params)?;
    let mut next: Vec<f64> = (0..xi.values.len())
        .map(|j| xi.values[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect();
    grid.project_zero_mean(&mut next);
    Ok(stage(next))
}

/// Integrates from `t = 0` to `t_end` with RK4. The step is `t_end / n`
/// with `n = ⌈t_end/dt⌉`; every `record_stride`-th step and the final state
/// are recorded.
pub fn integrate(
    xi0: &RadialDeformation,
    omega: f64,
    params: &EllipseParams,
    dt: f64,
    t_end: f64,
    record_stride: usize,
) -> Result<TrajectoryRecord> {
    if !(dt > 0.0) || !(t_end >= 0.0) || record_stride == 0 {
        return Err(domain("need dt > 0, t_end >= 0 and record_stride >= 1"));
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { dt } else { t_end / steps as f64 };
    let mut rec = TrajectoryRecord {
        gamma: params.gamma,
        omega,
        n_points: xi0.n_points(),
        dt: h,
        method: "rk4".into(),
        times: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
    };
    let mut xi = xi0.clone();
    rec.push(0.0, &xi, params)?;
    for s in 1..=steps {
        xi = rk4_step(&xi, omega, params, h)?;
        let t = s as f64 * h;
        let min_factor = xi
            .values
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(1.0 + 2.0 * v));
        if !(min_factor >= BLOW_UP_MARGIN) {
            rec.times.push(t);
            rec.states.push(xi.values.clone());
            return Err(Error::BlowUp {
                time: t,
                min_factor,
                record: Box::new(rec),
            });
        }
        if s % record_stride == 0 || s == steps {
            rec.push(t, &xi, params)?;
        }
    }
    Ok(rec)
}

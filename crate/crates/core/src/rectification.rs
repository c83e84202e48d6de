//! Symplectic rectification of the angular momentum.
//!
//! The quadratic part `𝒥₂` of the rectified momentum generates a transport
//! flow which becomes a rigid rotation after the straightening change of
//! variable `θ ↦ θ + β(θ)`. The full momentum `𝒥` generates an affine flow
//! around the stationary profile `ξ_p`. The time `t̄(ξ)` that this flow needs
//! to reach the section `{(ξ, 𝚜₂) = 0}` together with `𝒥` replaces the
//! degenerate mode `(α₂, β₂)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::rectified_momentum;
use crate::error::{domain, Error, Result};
use crate::geometry::{
    g_gamma, straighten, unstraighten, xi_particular, EllipseParams, RadialDeformation,
};
use crate::grid::Grid;
use crate::spectral::{cos_mode, sin_mode};

/// Default bound on `max|ξ|` accepted by [`time_of_impact`].
pub const SMALLNESS_RADIUS: f64 = 0.05;
/// Newton iteration cap for [`time_of_impact`].
pub const NEWTON_MAX_ITER: usize = 50;

/// `(𝒥(ξ), t̄(ξ), Π₂⊥Φ^{t̄}_𝒥 ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectifiedState {
    pub j_coord: f64,
    pub t_coord: f64,
    pub u_perp: Vec<f64>,
}

fn warp(params: &EllipseParams, theta: f64, shift: f64) -> f64 {
    unstraighten(params, straighten(params, theta) + shift)
}

/// `Φᵗ_{𝒥₂} f(θ) = g_γ(θ)⁻¹ (g_γ f)(F⁻¹(F(θ) + 2ℵt))` with `F(θ) = θ + β(θ)`,
/// evaluated by trigonometric interpolation at the warped nodes.
pub fn flow_j2_samples(grid: &Grid, params: &EllipseParams, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    let aleph = params.aleph()?;
    if t == 0.0 {
        return Ok(f.to_vec());
    }
    let g = grid.sample(|x| g_gamma(params, x));
    let gf: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a * b).collect();
    let p = grid.interpolant(&gf);
    let shift = 2.0 * aleph * t;
    Ok((0..grid.n_points())
        .map(|j| p.eval(warp(params, grid.node(j), shift)) / g[j])
        .collect())
}

/// `L²` adjoint of `Φᵗ_{𝒥₂}`: `h ↦ h ∘ F⁻¹(F(·) − 2ℵt)`.
pub fn flow_j2_adjoint_samples(
    grid: &Grid,
    params: &EllipseParams,
    t: f64,
    h: &[f64],
) -> Result<Vec<f64>> {
    let aleph = params.aleph()?;
    let p = grid.interpolant(h);
    let shift = -2.0 * aleph * t;
    Ok((0..grid.n_points())
        .map(|j| p.eval(warp(params, grid.node(j), shift)))
        .collect())
}

fn wrap(xi: &RadialDeformation, mut v: Vec<f64>) -> RadialDeformation {
    xi.grid.project_zero_mean(&mut v);
    RadialDeformation {
        grid: xi.grid.clone(),
        values: v,
    }
}

pub fn flow_j2(
    t: f64,
    xi: &RadialDeformation,
    params: &EllipseParams,
) -> Result<RadialDeformation> {
    let v = flow_j2_samples(&xi.grid, params, t, &xi.values)?;
    Ok(wrap(xi, v))
}

/// `Φᵗ_𝒥 ξ = (Id − Φᵗ_{𝒥₂}) ξ_p + Φᵗ_{𝒥₂} ξ`.
pub fn flow_j(t: f64, xi: &RadialDeformation, params: &EllipseParams) -> Result<RadialDeformation> {
    params.aleph()?;
    let xp = xi_particular(params, &xi.grid)?;
    let diff: Vec<f64> = xi
        .values
        .iter()
        .zip(&xp.values)
        .map(|(a, b)| a - b)
        .collect();
    let moved = flow_j2_samples(&xi.grid, params, t, &diff)?;
    let v = moved.iter().zip(&xp.values).map(|(a, b)| a + b).collect();
    Ok(wrap(xi, v))
}

/// `X_𝒥(ξ) = ℵ ∂_θ(g_γ(1 + 2ξ))`.
pub fn momentum_vector_field(xi: &RadialDeformation, params: &EllipseParams) -> Result<Vec<f64>> {
    let aleph = params.aleph()?;
    let grid = &xi.grid;
    let f: Vec<f64> = (0..grid.n_points())
        .map(|j| g_gamma(params, grid.node(j)) * (1.0 + 2.0 * xi.values[j]))
        .collect();
    Ok(grid.derivative(&f).into_iter().map(|v| aleph * v).collect())
}

/// `t̄(ξ)` with the default smallness radius.
pub fn time_of_impact(xi: &RadialDeformation, params: &EllipseParams) -> Result<f64> {
    time_of_impact_with(xi, params, SMALLNESS_RADIUS)
}

/// Solves `(𝚜₂, Φᵗ_𝒥 ξ) = 0` for `t` by Newton's method started at
/// `β₂(ξ) = ½(ξ, 𝚜₂)`.
pub fn time_of_impact_with(
    xi: &RadialDeformation,
    params: &EllipseParams,
    radius: f64,
) -> Result<f64> {
    params.aleph()?;
    if xi.max_abs() > radius {
        return Err(domain(format!(
            "max|ξ| = {} exceeds the smallness radius {radius}",
            xi.max_abs()
        )));
    }
    let grid = &xi.grid;
    let s2 = sin_mode(grid, 2);
    let mut t = 0.5 * grid.inner(&xi.values, &s2);
    for _ in 0..NEWTON_MAX_ITER {
        let u = flow_j(t, xi, params)?;
        let f = grid.inner(&s2, &u.values);
        let df = grid.inner(&s2, &momentum_vector_field(&u, params)?);
        if !(df.abs() > 0.0) || !f.is_finite() {
            break;
        }
        let step = f / df;
        t -= step;
        if step.abs() <= 1e-14 * t.abs().max(1.0) {
            return Ok(t);
        }
    }
    Err(Error::NonConvergence(
        "outside rectification neighborhood: time-of-impact Newton iteration failed".into(),
    ))
}

/// Removes the `𝚌₂`, `𝚜₂` components.
pub fn project_off_degenerate(grid: &Grid, u: &[f64]) -> Vec<f64> {
    let c2 = cos_mode(grid, 2);
    let s2 = sin_mode(grid, 2);
    let a = 0.5 * grid.inner(u, &c2);
    let b = 0.5 * grid.inner(u, &s2);
    (0..u.len()).map(|j| u[j] - a * c2[j] - b * s2[j]).collect()
}

/// `Φ(ξ) = (𝒥(ξ), t̄(ξ), Π₂⊥Φ^{t̄}_𝒥 ξ)`.
pub fn rectify(xi: &RadialDeformation, params: &EllipseParams) -> Result<RectifiedState> {
    let t = time_of_impact(xi, params)?;
    let j = rectified_momentum(xi, params)?;
    let moved = flow_j(t, xi, params)?;
    Ok(RectifiedState {
        j_coord: j,
        t_coord: t,
        u_perp: project_off_degenerate(&xi.grid, &moved.values),
    })
}

/// Closed-form inverse of `y ↦ y + y²` on `(−¼, ¾)`.
pub fn psi(z: f64) -> Result<f64> {
    if !(z > -0.25 && z < 0.75) {
        return Err(domain(format!("ψ argument {z} outside (-1/4, 3/4)")));
    }
    // (−1 + √(1+4z))/2 rewritten to avoid cancellation near z = 0.
    Ok(2.0 * z / (1.0 + (1.0 + 4.0 * z).sqrt()))
}

/// `Φ⁻¹(η) = Φ^{−η_s}_𝒥(v_c 𝚌₂ + η⊥)` with
/// `v_c = (a₁/α) ψ(α(η_c − ℵ(η⊥², g_γ))/a₁²)` and `a₁ = 1 + (𝚌₄, η⊥)/√π`.
pub fn rectify_inverse(
    eta_c: f64,
    eta_s: f64,
    eta_perp: &[f64],
    grid: &Grid,
    params: &EllipseParams,
) -> Result<RadialDeformation> {
    let aleph = params.aleph()?;
    let alpha = params.alpha_const()?;
    if eta_perp.len() != grid.n_points() {
        return Err(domain("η⊥ has wrong length"));
    }
    let perp = project_off_degenerate(grid, eta_perp);
    let c4 = cos_mode(grid, 4);
    let a1 = 1.0 + grid.inner(&c4, &perp) / PI.sqrt();
    let g = grid.sample(|t| g_gamma(params, t));
    let q: f64 = grid.inner(&perp.iter().map(|v| v * v).collect::<Vec<_>>(), &g);
    let z = alpha * (eta_c - aleph * q) / (a1 * a1);
    let vc = a1 / alpha * psi(z)?;
    let c2 = cos_mode(grid, 2);
    let mut base: Vec<f64> = (0..grid.n_points()).map(|j| vc * c2[j] + perp[j]).collect();
    grid.project_zero_mean(&mut base);
    let start = RadialDeformation::new(grid.clone(), base)?;
    flow_j(-eta_s, &start, params)
}

/// `∇t̄(ξ) = −(Φ^{t̄}_{𝒥₂})* 𝚜₂ / (𝚜₂, X_𝒥(Φ^{t̄}_𝒥 ξ))`.
pub fn time_of_impact_gradient(xi: &RadialDeformation, params: &EllipseParams) -> Result<Vec<f64>> {
    let t = time_of_impact(xi, params)?;
    let grid = &xi.grid;
    let s2 = sin_mode(grid, 2);
    let moved = flow_j(t, xi, params)?;
    let denom = grid.inner(&s2, &momentum_vector_field(&moved, params)?);
    let adj = flow_j2_adjoint_samples(grid, params, t, &s2)?;
    let mut g: Vec<f64> = adj.into_iter().map(|v| -v / denom).collect();
    grid.project_zero_mean(&mut g);
    Ok(g)
}

/// Sup-norm distance of `Φ⁻¹(Φ(ξ))` from `ξ`.
pub fn round_trip_error(xi: &RadialDeformation, params: &EllipseParams) -> Result<f64> {
    let r = rectify(xi, params)?;
    let back = rectify_inverse(r.j_coord, r.t_coord, &r.u_perp, &xi.grid, params)?;
    Ok(back
        .values
        .iter()
        .zip(&xi.values)
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// Largest amplitude in `ladder` (ascending) for which random round trips
/// stay within `tol`; the scan stops at the first failure.
pub fn empirical_radius(
    grid: &Grid,
    params: &EllipseParams,
    ladder: &[f64],
    samples: usize,
    tol: f64,
) -> f64 {
    let mut best = 0.0;
    for &amp in ladder {
        let ok = (0..samples).all(|s| {
            RadialDeformation::random_smooth(grid.clone(), 6, amp, 1000 + s as u64)
                .and_then(|xi| round_trip_error(&xi, params))
                .map(|e| e <= tol)
                .unwrap_or(false)
        });
        if !ok {
            break;
        }
        best = amp;
    }
    best
}

//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let (mut q0, mut q1) = (1.0, z);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                break;
            }
        }
    }
    (x, w)
}

/// `∫_0^{2π} f(u) du` for `f` with logarithmic singularities at both ends,
/// on panels graded geometrically towards `0` and `2π`.
pub fn graded_integral(f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(20);
    let mut cuts = vec![0.0];
    let mut a = PI * 0.2f64.powi(24);
    while a < PI {
        cuts.push(a);
        a *= 5.0;
        if a > PI / 5.0 {
            break;
        }
    }
    let mut fine = cuts.clone();
    for k in 1..=4 {
        fine.push(PI / 5.0 + k as f64 * (PI - PI / 5.0) / 4.0);
    }
    fine.retain(|&c| c <= PI);
    fine.sort_by(|a, b| a.total_cmp(b));
    fine.dedup();
    let mut panels: Vec<(f64, f64)> = fine.windows(2).map(|p| (p[0], p[1])).collect();
    let mirrored: Vec<(f64, f64)> = panels
        .iter()
        .map(|&(a, b)| (2.0 * PI - b, 2.0 * PI - a))
        .collect();
    panels.extend(mirrored);
    let mut s = 0.0;
    for (a, b) in panels {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * h * f(c + h * xi);
        }
    }
    s
}

/// Boundary point `w(θ) = √(1+2ξ(θ)) (√γ cos θ + i sin θ/√γ)` as `(re, im)`.
pub fn boundary_point(gamma: f64, xi: &dyn Fn(f64) -> f64, t: f64) -> (f64, f64) {
    let r = (1.0 + 2.0 * xi(t)).sqrt();
    (r * gamma.sqrt() * t.cos(), r * t.sin() / gamma.sqrt())
}

/// `M(ξ)(θ, θ')` from closed-form `ξ`.
pub fn kernel_m(gamma: f64, xi: &dyn Fn(f64) -> f64, t: f64, tp: f64) -> f64 {
    let (a, b) = boundary_point(gamma, xi, t);
    let (c, d) = boundary_point(gamma, xi, tp);
    (a - c).powi(2) + (b - d).powi(2)
}

/// `∂_θ w` from closed-form `ξ` and `ξ'`.
pub fn boundary_tangent(
    gamma: f64,
    xi: &dyn Fn(f64) -> f64,
    dxi: &dyn Fn(f64) -> f64,
    t: f64,
) -> (f64, f64) {
    let r = (1.0 + 2.0 * xi(t)).sqrt();
    let dr = dxi(t) / r;
    let sg = gamma.sqrt();
    (
        dr * sg * t.cos() - r * sg * t.sin(),
        dr * t.sin() / sg + r * t.cos() / sg,
    )
}

/// Pseudo-energy `(1/32π) ∫∫ (ln M − 2) M ∂²_{θθ'}M` by outer trapezoid and
/// inner graded Gauss–Legendre quadrature.
pub fn pseudo_energy_reference(
    gamma: f64,
    xi: &dyn Fn(f64) -> f64,
    dxi: &dyn Fn(f64) -> f64,
    n_outer: usize,
) -> f64 {
    let mut total = 0.0;
    for i in 0..n_outer {
        let t = 2.0 * PI * i as f64 / n_outer as f64;
        let (ta, tb) = boundary_tangent(gamma, xi, dxi, t);
        total += graded_integral(|u| {
            let tp = t + u;
            let m = kernel_m(gamma, xi, t, tp);
            if m == 0.0 {
                return 0.0;
            }
            let (pa, pb) = boundary_tangent(gamma, xi, dxi, tp);
            let d2 = -2.0 * (ta * pa + tb * pb);
            (m.ln() - 2.0) * m * d2
        });
    }
    total * (2.0 * PI / n_outer as f64) / (32.0 * PI)
}

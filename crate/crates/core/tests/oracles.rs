//! Reference values and independent oracles for geometry, quadrature,
//! dynamics and spectral operations.

mod common;

use std::f64::consts::PI;

use vortex_patch::dynamics::{
    conserved_set, evera_rhs, hamiltonian, integrate, linearized_apply, pseudo_energy,
    rectified_momentum, LinearizedOperator,
};
use vortex_patch::geometry::{
    beta, ellipse_params, g_gamma, kernel_m, kernel_m0_factorized, straightening_diffeo,
    xi_particular,
};
use vortex_patch::quadrature::{build_log_rule, log_m_convolve, w_operator_apply};
use vortex_patch::spectral::{
    assemble_block, asymptotic_remainder, basis_scale, cos_mode, critical_gamma, linear_solution,
    mode_data, omega_n, StabilityClass,
};
use vortex_patch::{Grid, RadialDeformation};

/// `γ̄₄` from a 40-digit root of `4γ/(1+γ)² − ½ − ½((γ−1)/(γ+1))⁴`.
const GAMMA_BAR_4: f64 = 4.611_581_789_308_715;

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn xi_closed(t: f64) -> f64 {
    0.05 * (3.0 * t).cos() + 0.03 * t.sin() - 0.02 * (2.0 * t).sin()
}

fn dxi_closed(t: f64) -> f64 {
    -0.15 * (3.0 * t).sin() + 0.03 * t.cos() - 0.04 * (2.0 * t).cos()
}

#[test]
fn ellipse_constants() {
    let p = ellipse_params(1.0).unwrap();
    assert_eq!(p.omega_gamma, 0.25);
    assert!(p.aleph.is_none() && p.alpha_const.is_none());
    let p = ellipse_params(2.0).unwrap();
    assert!((p.omega_gamma - 2.0 / 9.0).abs() < 1e-16);
    assert!((p.aleph().unwrap() - 2.0 * 2f64.sqrt() / (3.0 * PI.sqrt())).abs() < 1e-15);
    assert!((p.aleph().unwrap() - 0.531_923_040_535_243_6).abs() < 1e-15);
    assert!((p.alpha_const().unwrap() - 5.0 * 2f64.sqrt() / (3.0 * PI.sqrt())).abs() < 1e-15);
    assert!((ellipse_params(3.0).unwrap().omega_gamma - 3.0 / 16.0).abs() < 1e-16);
    assert!(ellipse_params(0.9).is_err());
    assert!(ellipse_params(f64::NAN).is_err());
}

#[test]
fn weight_and_diffeo_values() {
    let p = ellipse_params(2.0).unwrap();
    assert_eq!(g_gamma(&p, 0.0), 2.0);
    assert!((g_gamma(&p, PI / 2.0) - 0.5).abs() < 1e-16);
    assert_eq!(beta(&p, 0.0), 0.0);
    // arctan(1/2) − π/4
    assert!((beta(&p, PI / 4.0) + 0.321_750_554_396_642_2).abs() < 1e-15);
    let grid = Grid::new(64).unwrap();
    let d = straightening_diffeo(&ellipse_params(1.0).unwrap(), &grid);
    assert!(d.beta.iter().all(|b| b.abs() < 1e-15));
}

#[test]
fn kernel_reference_values() {
    let grid = Grid::new(32).unwrap();
    let p = ellipse_params(2.0).unwrap();
    let m = kernel_m(&RadialDeformation::zero(grid.clone()), &p).unwrap();
    assert!((m.get(0, 16) - 8.0).abs() < 1e-13);
    for i in 0..32 {
        assert_eq!(m.get(i, i), 0.0);
        for j in 0..32 {
            assert_eq!(m.get(i, j), m.get(j, i));
            let f = kernel_m0_factorized(&p, grid.node(i), grid.node(j));
            assert!((m.get(i, j) - f).abs() < 1e-12);
        }
    }
}

#[test]
fn particular_solution_values() {
    let grid = Grid::new(64).unwrap();
    let xp = xi_particular(&ellipse_params(2.0).unwrap(), &grid).unwrap();
    assert!((xp.values[0] + 0.25).abs() < 1e-12);
    assert!(grid.mean(&xp.values).abs() < 1e-14);
}

#[test]
fn log_rule_multipliers() {
    let grid = Grid::new(64).unwrap();
    let rule = build_log_rule(&grid);
    let ones = vec![1.0; 64];
    assert!(rule.apply(&ones).iter().all(|v| v.abs() < 1e-10));
    for (k, odd) in [(3.0, false), (5.0, true), (1.0, false), (31.0, true)] {
        let f = grid.sample(|t| if odd { (k * t).sin() } else { (k * t).cos() });
        let ex: Vec<f64> = f.iter().map(|v| -2.0 * PI / k * v).collect();
        assert!(max_diff(&rule.apply(&f), &ex) < 1e-10, "k = {k}");
    }
}

#[test]
fn log_convolution_reference_points() {
    let grid = Grid::new(256).unwrap();
    let p = ellipse_params(2.0).unwrap();
    let nodes = grid.nodes();
    let xi = RadialDeformation::zero(grid.clone());
    let i = log_m_convolve(&xi, &p, |a, b| (nodes[b] - nodes[a]).sin() / (4.0 * PI)).unwrap();
    // θ = π/4 is node 32.
    assert!((i[32] - 1.0 / 6.0).abs() < 1e-12);
    let p1 = ellipse_params(1.0).unwrap();
    let i1 = log_m_convolve(&xi, &p1, |a, b| (nodes[b] - nodes[a]).sin() / (4.0 * PI)).unwrap();
    assert!(i1.iter().all(|v| v.abs() < 1e-12));
    let c = log_m_convolve(&xi, &p, |_, _| 1.0).unwrap();
    assert!(c.iter().all(|v| (v - c[0]).abs() < 1e-10));
}

#[test]
fn log_convolution_matches_graded_gauss_legendre() {
    let grid = Grid::new(128).unwrap();
    let q = |t: f64| (2.0 * t).cos() + 0.3 * (5.0 * t).sin();
    for gamma in [1.0, 2.0, 3.5] {
        let p = ellipse_params(gamma).unwrap();
        let xi = RadialDeformation::from_fn(grid.clone(), xi_closed).unwrap();
        let qs = grid.sample(q);
        let got = log_m_convolve(&xi, &p, |_, j| qs[j]).unwrap();
        for i in (0..128).step_by(9) {
            let t = grid.node(i);
            let ex = common::graded_integral(|u| {
                let m = common::kernel_m(gamma, &xi_closed, t, t + u);
                if m > 0.0 {
                    m.ln() * q(t + u)
                } else {
                    0.0
                }
            });
            assert!(
                (got[i] - ex).abs() < 1e-9,
                "γ = {gamma}, i = {i}: {} vs {ex}",
                got[i]
            );
        }
    }
}

#[test]
fn log_convolution_resolution_convergence() {
    let p = ellipse_params(2.0).unwrap();
    let q = |t: f64| (3.0 * t).cos() - 0.2 * t.sin();
    let run = |n: usize| {
        let grid = Grid::new(n).unwrap();
        let xi = RadialDeformation::from_fn(grid.clone(), xi_closed).unwrap();
        let qs = grid.sample(q);
        log_m_convolve(&xi, &p, |_, j| qs[j]).unwrap()
    };
    let coarse = run(64);
    let fine = run(128);
    let err = (0..64).fold(0.0f64, |m, i| m.max((coarse[i] - fine[2 * i]).abs()));
    assert!(err < 1e-8, "{err}");
}

#[test]
fn w_operator_reference_multipliers() {
    let grid = Grid::new(128).unwrap();
    for gamma in [1.0, 2.0] {
        let p = ellipse_params(gamma).unwrap();
        let xi = RadialDeformation::zero(grid.clone());
        for j in [1u32, 2, 7, 20] {
            let jf = j as f64;
            let k = p.kappa(j);
            let c = grid.sample(|t| (jf * t).cos());
            let s = grid.sample(|t| (jf * t).sin());
            let wc = w_operator_apply(&xi, &p, &c).unwrap();
            let ws = w_operator_apply(&xi, &p, &s).unwrap();
            let ec: Vec<f64> = c.iter().map(|v| -(1.0 + k) / (2.0 * jf) * v).collect();
            let es: Vec<f64> = s.iter().map(|v| -(1.0 - k) / (2.0 * jf) * v).collect();
            assert!(max_diff(&wc, &ec) < 1e-12);
            assert!(max_diff(&ws, &es) < 1e-12);
        }
    }
}

#[test]
fn pseudo_energy_of_the_disk() {
    let grid = Grid::new(128).unwrap();
    let p = ellipse_params(1.0).unwrap();
    let e = pseudo_energy(&RadialDeformation::zero(grid.clone()), &p).unwrap();
    assert!((e + PI / 8.0).abs() < 1e-13, "{e}");
    let zero = |_: f64| 0.0;
    let reference = common::pseudo_energy_reference(1.0, &zero, &zero, 16);
    assert!((reference + PI / 8.0).abs() < 1e-10);
    let h = hamiltonian(&RadialDeformation::zero(grid), 0.0, &p).unwrap();
    assert!((h - PI / 16.0).abs() < 1e-13);
}

#[test]
fn pseudo_energy_matches_reference_quadrature() {
    let grid = Grid::new(256).unwrap();
    for gamma in [2.0, 3.0] {
        let p = ellipse_params(gamma).unwrap();
        let xi = RadialDeformation::from_fn(grid.clone(), xi_closed).unwrap();
        let e = pseudo_energy(&xi, &p).unwrap();
        let reference = common::pseudo_energy_reference(gamma, &xi_closed, &dxi_closed, 64);
        assert!(
            (e - reference).abs() < 1e-10,
            "γ = {gamma}: {e} vs {reference}"
        );
    }
}

#[test]
fn conserved_quantities_at_rest() {
    let grid = Grid::new(128).unwrap();
    let p = ellipse_params(2.0).unwrap();
    let c = conserved_set(&RadialDeformation::zero(grid.clone()), &p).unwrap();
    assert!((c.circulation - PI).abs() < 1e-14);
    assert!(c.center_modulus < 1e-14);
    assert!((c.angular_momentum - 5.0 * PI / 8.0).abs() < 1e-13);
    assert_eq!(c.rectified_momentum, Some(0.0));
    for eps in [1e-3, 1e-4] {
        let xi = RadialDeformation::new(
            grid.clone(),
            cos_mode(&grid, 2).iter().map(|v| eps * v).collect(),
        )
        .unwrap();
        let j = rectified_momentum(&xi, &p).unwrap();
        assert!((j - eps).abs() < 2.0 * eps * eps, "{j} vs {eps}");
    }
}

#[test]
fn hamiltonian_is_affine_in_omega() {
    let grid = Grid::new(64).unwrap();
    let p = ellipse_params(2.0).unwrap();
    let xi = RadialDeformation::random_smooth(grid, 6, 1e-2, 3).unwrap();
    let j = conserved_set(&xi, &p).unwrap().angular_momentum;
    let d = hamiltonian(&xi, 0.7, &p).unwrap() - hamiltonian(&xi, 0.2, &p).unwrap();
    assert!((d - 0.25 * j).abs() < 1e-14);
}

#[test]
fn rhs_reference_behaviour() {
    let grid = Grid::new(128).unwrap();
    let p = ellipse_params(2.0).unwrap();
    let zero = RadialDeformation::zero(grid.clone());
    assert!(evera_rhs(&zero, p.omega_gamma, &p)
        .unwrap()
        .iter()
        .all(|v| v.abs() < 1e-12));
    let r0 = evera_rhs(&zero, 0.0, &p).unwrap();
    for (j, v) in r0.iter().enumerate() {
        let ex = -0.5 * p.omega_gamma * p.dg(grid.node(j));
        assert!((v - ex).abs() < 1e-13);
    }
    let eps = 1e-4;
    let q: Vec<f64> = grid.sample(|t| eps * (2.0 / PI).sqrt() * (4.0 * t).cos());
    let xi = RadialDeformation::new(grid.clone(), q.clone()).unwrap();
    let nl = evera_rhs(&xi, p.omega_gamma, &p).unwrap();
    let lin = linearized_apply(&zero, &q, p.omega_gamma, &p).unwrap();
    assert!(max_diff(&nl, &lin) < 1e-7);
}

#[test]
fn rk4_is_fourth_order() {
    let grid = Grid::new(64).unwrap();
    let p = ellipse_params(2.0).unwrap();
    let xi0 = RadialDeformation::random_smooth(grid, 6, 5e-2, 11).unwrap();
    let end = |dt: f64| {
        let r = integrate(&xi0, p.omega_gamma, &p, dt, 0.4, 1_000_000).unwrap();
        r.states.last().unwrap().clone()
    };
    let reference = end(0.1 / 8.0);
    let e1 = max_diff(&end(0.1), &reference);
    let e2 = max_diff(&end(0.05), &reference);
    let ratio = e1 / e2;
    assert!(
        (12.0..=20.0).contains(&ratio),
        "ratio {ratio} ({e1:e}, {e2:e})"
    );
}

#[test]
fn integrate_keeps_equilibrium() {
    let grid = Grid::new(64).unwrap();
    let p = ellipse_params(2.0).unwrap();
    let r = integrate(
        &RadialDeformation::zero(grid),
        p.omega_gamma,
        &p,
        1e-2,
        1.0,
        10,
    )
    .unwrap();
    assert!((0..r.times.len()).all(|k| r.max_abs(k) < 1e-9));
    assert!(r.times.windows(2).all(|w| w[1] > w[0]));
    assert!((r.times.last().unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn mode_data_reference_values() {
    let p1 = ellipse_params(1.0).unwrap();
    let m = mode_data(4, &p1).unwrap();
    assert!((m.omega_n - 0.5).abs() < 1e-15);
    assert_eq!(m.class, StabilityClass::Elliptic);
    let p3 = ellipse_params(3.0).unwrap();
    let m = mode_data(3, &p3).unwrap();
    assert!(m.mu_minus.abs() < 1e-15 && m.omega_n.abs() < 1e-7);
    for gamma in [1.5, 2.0, 4.0] {
        let p = ellipse_params(gamma).unwrap();
        let m2 = mode_data(2, &p).unwrap();
        assert_eq!(m2.mu_plus, 0.0);
        assert_eq!(m2.omega_n, 0.0);
        assert_eq!(m2.m_n, 1.0);
        assert_eq!(m2.class, StabilityClass::Degenerate);
        let m1 = mode_data(1, &p).unwrap();
        assert!((m1.omega_n - p.omega_gamma).abs() < 1e-15);
        for n in 3..40 {
            let (a, b) = (mode_data(n, &p).unwrap(), mode_data(n + 1, &p).unwrap());
            assert!(b.mu_plus > a.mu_plus && b.mu_minus > a.mu_minus);
        }
    }
}

#[test]
fn critical_gammas_against_high_precision_root() {
    assert!((critical_gamma(3).unwrap() - 3.0).abs() < 1e-10);
    let g4 = critical_gamma(4).unwrap();
    assert!((g4 - GAMMA_BAR_4).abs() < 1e-10);
    let mut prev = 3.0;
    for n in 4..12 {
        let g = critical_gamma(n).unwrap();
        assert!(g > prev);
        prev = g;
    }
    assert!(critical_gamma(2).is_err());
}

#[test]
fn stability_transition_between_critical_ratios() {
    let gs: Vec<f64> = (3..=7).map(|n| critical_gamma(n).unwrap()).collect();
    for (k, w) in gs.windows(2).enumerate() {
        let n = k as u32 + 3;
        let p = ellipse_params(0.5 * (w[0] + w[1])).unwrap();
        for m in 3..=n {
            assert_eq!(
                mode_data(m, &p).unwrap().class,
                StabilityClass::Hyperbolic,
                "n={n} m={m}"
            );
        }
        for m in n + 1..n + 20 {
            assert_eq!(mode_data(m, &p).unwrap().class, StabilityClass::Elliptic);
        }
    }
}

#[test]
fn assembled_blocks_match_mode_data() {
    let grid = Grid::new(128).unwrap();
    for gamma in [1.5, 2.0, 4.0] {
        let p = ellipse_params(gamma).unwrap();
        let op = LinearizedOperator::new(&RadialDeformation::zero(grid.clone()), p.omega_gamma, &p)
            .unwrap();
        for n in 1..=32u32 {
            let b = vortex_patch::spectral::assemble_block_with(&op, n, &grid).unwrap();
            let m = mode_data(n, &p).unwrap();
            // α̇ = −μ⁺β, β̇ = μ⁻α.
            assert!(b[0][0].abs() < 1e-9 && b[1][1].abs() < 1e-9);
            if n == 2 {
                assert!(b[0][1].abs() < 1e-9);
            } else {
                let prod = -b[0][1] * b[1][0];
                assert!(
                    (prod.abs().sqrt() - m.omega_n).abs() < 1e-9,
                    "γ={gamma} n={n}"
                );
                assert!((b[0][1] + m.mu_plus).abs() < 1e-9 && (b[1][0] - m.mu_minus).abs() < 1e-9);
            }
        }
    }
    assert!(assemble_block(64, &ellipse_params(2.0).unwrap(), &grid).is_err());
}

#[test]
fn linear_solution_reference_behaviour() {
    let grid = Grid::new(64).unwrap();
    let p = ellipse_params(2.0).unwrap();
    let m4 = mode_data(4, &p).unwrap();
    let q0 = linear_solution(0.0, &[(4, 1.0)], &p, 2, &grid).unwrap();
    let ex = grid.sample(|t| m4.m_n * (4.0 * t).cos());
    assert!(max_diff(&q0, &ex) < 1e-15);
    let period = 2.0 * PI / m4.omega_n;
    let q1 = linear_solution(period, &[(4, 1.0)], &p, 2, &grid).unwrap();
    assert!(max_diff(&q0, &q1) < 1e-12);
    assert!(linear_solution(0.0, &[(2, 1.0)], &p, 2, &grid).is_err());
    let p4 = ellipse_params(4.0).unwrap();
    assert!(linear_solution(0.0, &[(3, 1.0)], &p4, 2, &grid).is_err());
}

#[test]
fn asymptotic_remainder_reference_behaviour() {
    let p1 = ellipse_params(1.0).unwrap();
    for n in 3..20 {
        assert_eq!(asymptotic_remainder(n, &p1).unwrap(), 0.0);
    }
    let p = ellipse_params(2.5).unwrap();
    for n in 4..=64u32 {
        let r = asymptotic_remainder(n, &p).unwrap();
        let id = omega_n(n, 2.5) - (n as f64 * p.omega_gamma - 0.5) - r;
        assert!(id.abs() < 1e-14, "n={n}: {id:e}");
    }
    let p2 = ellipse_params(2.0).unwrap();
    let scaled: Vec<f64> = (3..=512u32)
        .map(|n| n as f64 * asymptotic_remainder(n, &p2).unwrap().abs())
        .collect();
    assert!(scaled.iter().all(|v| *v < 1.0));
    let tail = &scaled[10..];
    assert!(tail.windows(2).all(|w| w[1] <= w[0]));
    assert!(scaled.last().unwrap() < &1e-100);
}

#[test]
fn basis_normalization() {
    let grid = Grid::new(64).unwrap();
    for n in 1..6u32 {
        let c = cos_mode(&grid, n);
        let norm = grid.inner(&c, &c);
        let ex = if n == 2 { 2.0 } else { 1.0 };
        assert!((norm - ex).abs() < 1e-14);
        assert!(basis_scale(n) > 0.0);
    }
}

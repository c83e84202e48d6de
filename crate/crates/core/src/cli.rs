//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a precondition is violated (bad flags,
//! invalid configuration, I/O), 2 on a numerical abort (blow-up,
//! non-convergence) or when `verify` reports a failing property.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dynamics::{integrate, rectified_momentum};
use crate::error::{Error, Result};
use crate::geometry::{ellipse_params, RadialDeformation};
use crate::grid::Grid;
use crate::io::{
    fmt_f64, to_json, write_resonance_csv, write_spectrum_csv, write_states_binary,
    write_trajectory_csv,
};
use crate::rectification::{
    empirical_radius, flow_j, momentum_vector_field, rectify, rectify_inverse, time_of_impact,
    time_of_impact_gradient,
};
use crate::resonance::{measure_estimate, ResonanceConfig, UpsilonSummary};
use crate::spectral::{critical_gamma, empirical_lower_bound, mode_data};
use crate::verify;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "VPATCH_WORKERS";

#[derive(Parser, Debug)]
#[command(
    name = "vpatch",
    version,
    about = "Vortex patches near Kirchhoff ellipses"
)]
struct Cli {
    /// Worker threads for parameter sweeps (0 = all cores).
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the contour-dynamics equation with RK4 and write diagnostics.
    Simulate(SimulateArgs),
    /// Tabulate μ_n^±, Ω_n, M_n and stability classes.
    Spectrum(SpectrumArgs),
    /// Critical aspect ratios γ̄_n.
    CriticalGammas(CriticalArgs),
    /// Round-trip and pairing checks of the rectification map (JSON).
    RectifyCheck(RectifyArgs),
    /// Melnikov margins and excluded-measure estimate on a γ grid.
    Resonance(ResonanceArgs),
    /// Run the acceptance-property suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 256)]
    n_points: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// `equilibrium` (Ω_γ) or a number.
    #[arg(long, default_value = "equilibrium")]
    omega: String,
    /// `zero`, `random` or `mode:<n>` (cosine mode).
    #[arg(long, default_value = "zero")]
    xi0: String,
    /// Sup norm of the initial datum for `random` and `mode:<n>`.
    #[arg(long, default_value_t = 1e-2)]
    amplitude: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fourier modes of the random initial datum.
    #[arg(long, default_value_t = 8)]
    modes: usize,
    /// Record every `stride` steps.
    #[arg(long, default_value_t = 100)]
    stride: usize,
    /// Diagnostics CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Binary state dump (little-endian f64 rows `[t, ξ…]`).
    #[arg(long)]
    states: Option<PathBuf>,
    /// Plain `(θ, ξ)` columns of the final state.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 32)]
    n_max: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report the empirical c = min Ω_n/n over `[γ₁, γ₂]` and `n > n̄`.
    #[arg(long, num_args = 2, value_names = ["G1", "G2"])]
    lower_bound: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    n_bar: u32,
}

#[derive(Args, Debug)]
struct CriticalArgs {
    /// A single mode index.
    #[arg(long, conflicts_with = "n_max")]
    n: Option<u32>,
    /// Table for `3 ≤ n ≤ n_max`.
    #[arg(long)]
    n_max: Option<u32>,
}

#[derive(Args, Debug)]
struct RectifyArgs {
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 64)]
    n_points: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    amplitude: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ResonanceArgs {
    /// Tangential sites 𝕊.
    #[arg(long, value_delimiter = ',', default_value = "4,5")]
    sites: Vec<u32>,
    #[arg(long, default_value_t = 2)]
    n_bar: u32,
    #[arg(long, default_value_t = 1e-4)]
    upsilon: f64,
    #[arg(long, default_value_t = 3.0)]
    tau: f64,
    #[arg(long, default_value_t = 20)]
    l_max: u32,
    #[arg(long, default_value_t = 64)]
    n_max: u32,
    #[arg(long)]
    j_max: Option<u32>,
    #[arg(long, default_value_t = 1.5)]
    gamma_min: f64,
    #[arg(long, default_value_t = 2.5)]
    gamma_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    d_gamma: f64,
    /// Constant shift 𝚖 added to Ω₁ in the modelled spectrum.
    #[arg(long, default_value_t = 0.0)]
    shift: f64,
    /// Additional υ values for the trend.
    #[arg(long, value_delimiter = ',')]
    trend: Vec<f64>,
    /// Skip indices that a lower bound shows cannot fall below υ.
    #[arg(long)]
    restrict: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u32>,
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn configure_workers(n: Option<usize>) {
    if let Some(n) = n {
        // A pool that is already installed keeps its size.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Parses `argv` (including the program name) and runs the subcommand,
/// writing to the given streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    configure_workers(cli.workers);
    let res = match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Spectrum(a) => spectrum(a, out, err),
        Command::CriticalGammas(a) => critical(a, out),
        Command::RectifyCheck(a) => rectify_check(a, out),
        Command::Resonance(a) => resonance(a, out),
        Command::Verify(a) => return run_verify(a, out),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::BlowUp { record, .. } = &e {
                let _ = writeln!(
                    err,
                    "last recorded time: {}",
                    record.times.last().copied().unwrap_or(0.0)
                );
            }
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run_with(argv, &mut out, &mut err);
    let _ = out.flush();
    code
}

fn parse_omega(s: &str, omega_gamma: f64) -> Result<f64> {
    if s == "equilibrium" {
        return Ok(omega_gamma);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            Error::Domain(format!(
                "--omega must be `equilibrium` or a finite number, got `{s}`"
            ))
        })
}

fn initial_datum(a: &SimulateArgs, grid: &Grid) -> Result<RadialDeformation> {
    match a.xi0.as_str() {
        "zero" => Ok(RadialDeformation::zero(grid.clone())),
        "random" => RadialDeformation::random_smooth(grid.clone(), a.modes, a.amplitude, a.seed),
        s => {
            let n: u32 = s
                .strip_prefix("mode:")
                .and_then(|v| v.parse().ok())
                .filter(|&n| n >= 1 && (n as usize) < grid.n_points() / 2)
                .ok_or_else(|| {
                    Error::Domain(format!(
                        "--xi0 must be `zero`, `random` or `mode:<n>` below Nyquist, got `{s}`"
                    ))
                })?;
            RadialDeformation::from_fn(grid.clone(), |t| a.amplitude * (n as f64 * t).cos())
        }
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let params = ellipse_params(a.gamma)?;
    let grid = Grid::new(a.n_points)?;
    let omega = parse_omega(&a.omega, params.omega_gamma)?;
    let xi0 = initial_datum(&a, &grid)?;
    let rec = integrate(&xi0, omega, &params, a.dt, a.t_end, a.stride)?;
    if let Some(p) = &a.out {
        let mut w = create(p)?;
        write_trajectory_csv(&rec, &mut w)?;
        w.flush()?;
    }
    if let Some(p) = &a.states {
        let mut w = create(p)?;
        write_states_binary(&rec, &mut w)?;
        w.flush()?;
    }
    let last = rec.times.len() - 1;
    if let Some(p) = &a.plot_data {
        let mut w = create(p)?;
        writeln!(w, "theta,xi")?;
        for (j, v) in rec.states[last].iter().enumerate() {
            writeln!(w, "{},{}", fmt_f64(grid.node(j)), fmt_f64(*v))?;
        }
        w.flush()?;
    }
    let peak = (0..rec.times.len())
        .map(|k| rec.max_abs(k))
        .fold(0.0, f64::max);
    let (d0, d1) = (&rec.diagnostics[0], &rec.diagnostics[last]);
    let rel = |a: f64, b: f64| {
        if a == 0.0 {
            (b - a).abs()
        } else {
            ((b - a) / a).abs()
        }
    };
    writeln!(out, "t_end = {}", fmt_f64(rec.times[last]))?;
    writeln!(out, "max|xi| = {}", fmt_f64(peak))?;
    writeln!(out, "final max|xi| = {}", fmt_f64(rec.max_abs(last)))?;
    writeln!(
        out,
        "drift C = {}",
        fmt_f64(rel(d0.circulation, d1.circulation))
    )?;
    writeln!(
        out,
        "drift J = {}",
        fmt_f64(rel(d0.angular_momentum, d1.angular_momentum))
    )?;
    writeln!(
        out,
        "drift E = {}",
        fmt_f64(rel(d0.pseudo_energy, d1.pseudo_energy))
    )?;
    Ok(())
}

fn spectrum(a: SpectrumArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let params = ellipse_params(a.gamma)?;
    if a.n_max < 1 {
        return Err(Error::Domain("--n-max must be >= 1".into()));
    }
    let rows = (1..=a.n_max)
        .map(|n| mode_data(n, &params))
        .collect::<Result<Vec<_>>>()?;
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            write_spectrum_csv(&rows, &mut w)?;
            w.flush()?;
        }
        None => write_spectrum_csv(&rows, &mut *out)?,
    }
    if let Some(r) = &a.lower_bound {
        let (g1, g2) = (r[0], r[1]);
        if !(g1 > 1.0 && g2 >= g1) {
            return Err(Error::Domain("--lower-bound needs 1 < G1 <= G2".into()));
        }
        let steps = 200;
        let gammas: Vec<f64> = (0..=steps)
            .map(|k| g1 + (g2 - g1) * k as f64 / steps as f64)
            .collect();
        let c = empirical_lower_bound(&gammas, a.n_bar, a.n_max);
        writeln!(
            err,
            "empirical c = {} over n in ({}, {}]",
            fmt_f64(c),
            a.n_bar,
            a.n_max
        )?;
    }
    Ok(())
}

fn critical(a: CriticalArgs, out: &mut dyn Write) -> Result<()> {
    match (a.n, a.n_max) {
        (Some(n), _) => writeln!(out, "{:.10}", critical_gamma(n)?)?,
        (None, Some(m)) => {
            writeln!(out, "n,gamma_bar")?;
            for n in 3..=m {
                writeln!(out, "{},{}", n, fmt_f64(critical_gamma(n)?))?;
            }
        }
        (None, None) => return Err(Error::Domain("give --n or --n-max".into())),
    }
    Ok(())
}

#[derive(Serialize)]
struct RectifyReport {
    gamma: f64,
    n_points: usize,
    samples: usize,
    amplitude: f64,
    round_trip_max_error: f64,
    momentum_max_error: f64,
    impact_time_max_error: f64,
    pairing_max_error: f64,
    flow_shift_max_error: f64,
    tolerance: f64,
    passed: bool,
    empirical_radius: f64,
    radius_ladder: Vec<f64>,
}

fn rectify_check(a: RectifyArgs, out: &mut dyn Write) -> Result<()> {
    let params = ellipse_params(a.gamma)?;
    params.aleph()?;
    let grid = Grid::new(a.n_points)?;
    let (mut rt, mut je, mut te, mut pe, mut fe) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let max_diff = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
    };
    for s in 0..a.samples {
        let xi = RadialDeformation::random_smooth(grid.clone(), 8, a.amplitude, 500 + s as u64)?;
        let r = rectify(&xi, &params)?;
        let back = rectify_inverse(r.j_coord, r.t_coord, &r.u_perp, &grid, &params)?;
        rt = rt.max(max_diff(&back.values, &xi.values));
        je = je.max((rectified_momentum(&back, &params)? - r.j_coord).abs());
        te = te.max((time_of_impact(&back, &params)? - r.t_coord).abs());
        let x = momentum_vector_field(&xi, &params)?;
        let d = grid.inner(&time_of_impact_gradient(&xi, &params)?, &x);
        pe = pe.max((d + 1.0).abs());
        let tau = 0.01;
        let moved = flow_j(tau, &xi, &params)?;
        fe = fe.max((time_of_impact(&moved, &params)? - (r.t_coord - tau)).abs());
    }
    let ladder = vec![1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2];
    let radius = empirical_radius(&grid, &params, &ladder, 10, a.tol);
    let report = RectifyReport {
        gamma: a.gamma,
        n_points: a.n_points,
        samples: a.samples,
        amplitude: a.amplitude,
        round_trip_max_error: rt,
        momentum_max_error: je,
        impact_time_max_error: te,
        pairing_max_error: pe,
        flow_shift_max_error: fe,
        tolerance: a.tol,
        passed: rt <= a.tol && je <= a.tol && te <= a.tol && pe <= a.tol && fe <= a.tol,
        empirical_radius: radius,
        radius_ladder: ladder,
    };
    let text = to_json("rectify-check", &report);
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ResonanceSummary<'a> {
    config: &'a ResonanceConfig,
    grid_points: usize,
    min_margin: f64,
    median_margin: f64,
    summaries: &'a [UpsilonSummary],
}

fn resonance(a: ResonanceArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = ResonanceConfig {
        sites: a.sites,
        n_bar: a.n_bar,
        upsilon: a.upsilon,
        tau: a.tau,
        l_max: a.l_max,
        n_max: a.n_max,
        j_max: a.j_max,
        gamma_min: a.gamma_min,
        gamma_max: a.gamma_max,
        d_gamma: a.d_gamma,
        shift: a.shift,
        restrict_indices: a.restrict,
    };
    cfg.validate()?;
    if a.trend.iter().any(|u| !(*u > 0.0)) {
        return Err(Error::Domain("--trend values must be positive".into()));
    }
    let report = measure_estimate(&cfg, &a.trend)?;
    if let Some(p) = &a.csv {
        let mut w = create(p)?;
        write_resonance_csv(&report, cfg.upsilon, &mut w)?;
        w.flush()?;
    }
    let summary = ResonanceSummary {
        config: &report.config,
        grid_points: report.records.len(),
        min_margin: report.min_margin,
        median_margin: report.median_margin,
        summaries: &report.summaries,
    };
    let text = to_json("resonance", &summary);
    match &a.json {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn run_verify(a: VerifyArgs, out: &mut dyn Write) -> i32 {
    let ids: Vec<u32> = if a.only.is_empty() {
        (1..=14).collect()
    } else {
        a.only
    };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=14).contains(&i)) {
        let _ = writeln!(out, "error: no criterion {bad}");
        return 1;
    }
    let mut all = true;
    for id in ids {
        let r = verify::criterion(id);
        all &= r.passed;
        let _ = writeln!(out, "{}", r.line());
        let _ = out.flush();
    }
    if all {
        0
    } else {
        2
    }
}

//! Diophantine and Melnikov conditions on the unperturbed frequency curves,
//! finite-difference transversality margins and a sampling estimator of the
//! resonant set in the aspect-ratio interval.
//!
//! Frequencies are `Ω_n(γ) + n·𝚖` with `𝚖` an optional constant shift. The
//! tangential frequency vector is `ω = (Ω_n)_{n∈𝕊}`; normal modes range over
//! `1..=n_max` minus `𝕊 ∪ {2,…,n̄}`. For an integer vector `ℓ`,
//! `⟨ℓ⟩ = max(1, |ℓ|₁)`. Each family reports the minimal normalized margin,
//! i.e. the combination divided by its weight, so that a condition with
//! constant `υ` holds iff the margin is at least `υ`:
//!
//! | family            | combination             | weight                 |
//! |-------------------|-------------------------|------------------------|
//! | zeroth            | `ω·ℓ`, `ℓ ≠ 0`          | `8⟨ℓ⟩^{−τ}`            |
//! | transport         | `ω·ℓ + Ω₁j`             | `8⟨j⟩⟨ℓ⟩^{−τ}`         |
//! | first             | `ω·ℓ + Ω_n`             | `4n⟨ℓ⟩^{−τ}`           |
//! | second difference | `ω·ℓ + Ω_n − Ω_n'`      | `4⟨n−n'⟩⟨ℓ⟩^{−τ}`      |
//! | second sum        | `ω·ℓ + Ω_n + Ω_n'`      | `4(n+n')⟨ℓ⟩^{−τ}`      |

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::ellipse_params;
use crate::spectral::{asymptotic_remainder, critical_gamma, omega_n};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Zeroth,
    Transport,
    First,
    SecondDifference,
    SecondSum,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Zeroth,
        Family::Transport,
        Family::First,
        Family::SecondDifference,
        Family::SecondSum,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Zeroth => "zeroth",
            Family::Transport => "transport",
            Family::First => "first",
            Family::SecondDifference => "second_difference",
            Family::SecondSum => "second_sum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceConfig {
    /// Tangential sites `𝕊`.
    pub sites: Vec<u32>,
    /// Hyperbolic threshold `n̄`.
    pub n_bar: u32,
    /// Diophantine constant `υ`.
    pub upsilon: f64,
    /// Diophantine exponent `τ`.
    pub tau: f64,
    /// Cutoff on `|ℓ|₁`.
    pub l_max: u32,
    /// Cutoff on normal modes.
    pub n_max: u32,
    /// Cutoff on `|j|` in the transport family; `None` means `n_max`.
    pub j_max: Option<u32>,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub d_gamma: f64,
    /// Constant frequency shift `𝚖`, entering as `Ω_n + n𝚖`.
    pub shift: f64,
    /// Skip indices that the a-priori bounds show cannot violate a condition
    /// with constant at most `υ`.
    pub restrict_indices: bool,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        ResonanceConfig {
            sites: vec![4, 5],
            n_bar: 2,
            upsilon: 1e-4,
            tau: 3.0,
            l_max: 20,
            n_max: 64,
            j_max: None,
            gamma_min: 1.5,
            gamma_max: 2.5,
            d_gamma: 1e-4,
            shift: 0.0,
            restrict_indices: false,
        }
    }
}

/// `γ̄_n` with the convention `γ̄_2 = 1`.
fn critical_or_one(n: u32) -> Result<f64> {
    if n <= 2 {
        Ok(1.0)
    } else {
        critical_gamma(n)
    }
}

impl ResonanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sites.is_empty() {
            return Err(domain("at least one tangential site is required"));
        }
        let set: BTreeSet<u32> = self.sites.iter().copied().collect();
        if set.len() != self.sites.len() {
            return Err(domain("tangential sites must be distinct"));
        }
        if self.n_bar < 2 {
            return Err(domain("n̄ must be >= 2"));
        }
        if let Some(s) = self.sites.iter().find(|&&s| s <= self.n_bar) {
            return Err(domain(format!(
                "tangential site {s} must exceed n̄ = {}",
                self.n_bar
            )));
        }
        if !(self.upsilon > 0.0) {
            return Err(domain("υ must be positive"));
        }
        if !(self.tau >= 1.0) {
            return Err(domain("τ must be >= 1"));
        }
        if self.n_max < 1 {
            return Err(domain("n_max must be >= 1"));
        }
        if !(self.d_gamma > 0.0) || !(self.gamma_max >= self.gamma_min) {
            return Err(domain("need δγ > 0 and γ₁ <= γ₂"));
        }
        let lo = critical_or_one(self.n_bar)?;
        let hi = critical_gamma(self.n_bar + 1)?;
        if !(self.gamma_min > lo && self.gamma_max < hi) {
            return Err(domain(format!(
                "[{}, {}] must lie inside ({lo}, {hi}) for n̄ = {}",
                self.gamma_min, self.gamma_max, self.n_bar
            )));
        }
        Ok(())
    }

    fn j_cut(&self) -> i64 {
        self.j_max.unwrap_or(self.n_max) as i64
    }

    /// Normal modes `1..=n_max` outside `𝕊 ∪ {2,…,n̄}`.
    pub fn normal_modes(&self) -> Vec<u32> {
        (1..=self.n_max)
            .filter(|n| !self.sites.contains(n) && !(2..=self.n_bar).contains(n))
            .collect()
    }

    /// Grid `γ₁ + kδγ` covering `[γ₁, γ₂]`.
    pub fn gamma_grid(&self) -> Vec<f64> {
        let k = ((self.gamma_max - self.gamma_min) / self.d_gamma).round() as usize;
        (0..=k)
            .map(|i| {
                if i == k {
                    self.gamma_max
                } else {
                    self.gamma_min + i as f64 * self.d_gamma
                }
            })
            .collect()
    }

    /// Integer vectors with `|ℓ|₁ ≤ L_max`.
    pub fn lattice(&self) -> Vec<Vec<i32>> {
        let d = self.sites.len();
        let l = self.l_max as i32;
        let mut out = Vec::new();
        let mut cur = vec![0i32; d];
        fn rec(k: usize, budget: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
            if k == cur.len() {
                out.push(cur.clone());
                return;
            }
            for v in -budget..=budget {
                cur[k] = v;
                rec(k + 1, budget - v.abs(), cur, out);
            }
            cur[k] = 0;
        }
        rec(0, l, &mut cur, &mut out);
        out
    }
}

/// `⟨ℓ⟩ = max(1, |ℓ|₁)`.
pub fn bracket(ell: &[i32]) -> f64 {
    (ell.iter()
        .map(|v| v.unsigned_abs() as u64)
        .sum::<u64>()
        .max(1)) as f64
}

fn bracket_int(j: i64) -> f64 {
    j.unsigned_abs().max(1) as f64
}

/// Frequencies `Ω_n(γ) + n𝚖` for `n = 0..=n_hi` (entry 0 unused).
fn frequency_table(gamma: f64, n_hi: u32, shift: f64) -> Vec<f64> {
    let mut v = vec![0.0; n_hi as usize + 1];
    for n in 1..=n_hi {
        v[n as usize] = omega_n(n, gamma) + n as f64 * shift;
    }
    v
}

/// Index realising a margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub ell: Vec<i32>,
    pub j: i64,
    pub n: u32,
    pub n_prime: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMargin {
    pub family: Family,
    pub margin: f64,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelnikovMargins {
    pub gamma: f64,
    pub families: Vec<FamilyMargin>,
}

impl MelnikovMargins {
    pub fn margin(&self, f: Family) -> f64 {
        self.families
            .iter()
            .find(|m| m.family == f)
            .map(|m| m.margin)
            .unwrap_or(f64::INFINITY)
    }

    pub fn min_margin(&self) -> f64 {
        self.families
            .iter()
            .fold(f64::INFINITY, |m, f| m.min(f.margin))
    }

    /// All truncated conditions hold with constant `υ`.
    pub fn passes(&self, upsilon: f64) -> bool {
        self.min_margin() >= upsilon
    }
}

/// Pair values grouped by `n − n'` (or `n + n'`), sorted within each group.
struct PairGroups {
    keys: Vec<i64>,
    weights: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    entries: Vec<Vec<(f64, u32, u32)>>,
}

impl PairGroups {
    fn build(modes: &[u32], freq: &[f64], sum: bool) -> Self {
        use std::collections::BTreeMap;
        let mut map: BTreeMap<i64, Vec<(f64, u32, u32)>> = BTreeMap::new();
        for &n in modes {
            for &np in modes {
                if sum && np < n {
                    continue;
                }
                let (key, val) = if sum {
                    ((n + np) as i64, freq[n as usize] + freq[np as usize])
                } else {
                    (n as i64 - np as i64, freq[n as usize] - freq[np as usize])
                };
                map.entry(key).or_default().push((val, n, np));
            }
        }
        let mut g = PairGroups {
            keys: vec![],
            weights: vec![],
            lo: vec![],
            hi: vec![],
            entries: vec![],
        };
        for (k, mut e) in map {
            e.sort_by(|a, b| a.0.total_cmp(&b.0));
            g.keys.push(k);
            g.weights.push(if sum {
                4.0 * k as f64
            } else {
                4.0 * bracket_int(k)
            });
            g.lo.push(e[0].0);
            g.hi.push(e[e.len() - 1].0);
            g.entries.push(e);
        }
        g
    }
}

fn dist_to_interval(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

struct Best {
    margin: f64,
    witness: Option<Witness>,
}

impl Best {
    fn new() -> Self {
        Best {
            margin: f64::INFINITY,
            witness: None,
        }
    }

    fn offer(&mut self, m: f64, w: impl FnOnce() -> Witness) {
        if m < self.margin {
            self.margin = m;
            self.witness = Some(w());
        }
    }
}

/// Per-γ context shared by the margin evaluations.
struct Context<'a> {
    cfg: &'a ResonanceConfig,
    lattice: &'a [Vec<i32>],
    /// `⟨ℓ⟩^τ` per lattice vector.
    scale: &'a [f64],
    modes: &'a [u32],
}

fn dot(omega: &[f64], ell: &[i32]) -> f64 {
    omega.iter().zip(ell).map(|(w, l)| w * *l as f64).sum()
}

/// `cap`: with the index restriction active, indices whose a-priori lower
/// bound on the normalized margin is at least `cap` are skipped; pass/fail
/// flags for every `υ ≤ cap` are unaffected.
fn margins_at(gamma: f64, ctx: &Context, cap: f64) -> MelnikovMargins {
    let cfg = ctx.cfg;
    let n_hi = cfg.n_max.max(*cfg.sites.iter().max().unwrap_or(&1));
    let freq = frequency_table(gamma, n_hi, cfg.shift);
    let omega: Vec<f64> = cfg.sites.iter().map(|&s| freq[s as usize]).collect();
    let om1 = freq[1];
    let jc = cfg.j_cut();
    let diff = PairGroups::build(ctx.modes, &freq, false);
    let sum = PairGroups::build(ctx.modes, &freq, true);
    let mut zeroth = Best::new();
    let mut transport = Best::new();
    let mut first = Best::new();
    let mut second_d = Best::new();
    let mut second_s = Best::new();
    let restrict = cfg.restrict_indices;
    for (ell, &sc) in ctx.lattice.iter().zip(ctx.scale) {
        let x = dot(&omega, ell);
        let is_zero = ell.iter().all(|&v| v == 0);
        if !is_zero {
            zeroth.offer(x.abs() * sc / 8.0, || Witness {
                ell: ell.clone(),
                j: 0,
                n: 0,
                n_prime: 0,
            });
        }
        for j in -jc..=jc {
            if is_zero && j == 0 {
                continue;
            }
            // |ω·ℓ + Ω₁j| ≥ |j|Ω₁ − |ω·ℓ|, which bounds |j| by a multiple of ⟨ℓ⟩.
            if restrict && (j.abs() as f64 * om1 - x.abs()) * sc / (8.0 * bracket_int(j)) >= cap {
                continue;
            }
            let m = (x + om1 * j as f64).abs() * sc / (8.0 * bracket_int(j));
            transport.offer(m, || Witness {
                ell: ell.clone(),
                j,
                n: 0,
                n_prime: 0,
            });
        }
        for &n in ctx.modes {
            if restrict && (freq[n as usize] - x.abs()) * sc / (4.0 * n as f64) >= cap {
                continue;
            }
            let m = (x + freq[n as usize]).abs() * sc / (4.0 * n as f64);
            first.offer(m, || Witness {
                ell: ell.clone(),
                j: 0,
                n,
                n_prime: 0,
            });
        }
        for (groups, best, is_sum) in [(&diff, &mut second_d, false), (&sum, &mut second_s, true)] {
            for g in 0..groups.keys.len() {
                let key = groups.keys[g];
                if !is_sum && is_zero && key == 0 {
                    continue;
                }
                let w = groups.weights[g];
                let bound = dist_to_interval(-x, groups.lo[g], groups.hi[g]) * sc / w;
                if bound >= best.margin || (restrict && bound >= cap) {
                    continue;
                }
                let e = &groups.entries[g];
                let pos = e.partition_point(|v| v.0 < -x);
                for idx in [pos.wrapping_sub(1), pos] {
                    if let Some(&(val, n, np)) = e.get(idx) {
                        if !is_sum && is_zero && n == np {
                            continue;
                        }
                        let m = (x + val).abs() * sc / w;
                        best.offer(m, || Witness {
                            ell: ell.clone(),
                            j: 0,
                            n,
                            n_prime: np,
                        });
                    }
                }
            }
        }
    }
    let fams = [
        (Family::Zeroth, zeroth),
        (Family::Transport, transport),
        (Family::First, first),
        (Family::SecondDifference, second_d),
        (Family::SecondSum, second_s),
    ];
    MelnikovMargins {
        gamma,
        families: fams
            .into_iter()
            .map(|(family, b)| FamilyMargin {
                family,
                margin: b.margin,
                witness: b.witness,
            })
            .collect(),
    }
}

fn lattice_scale(cfg: &ResonanceConfig, lattice: &[Vec<i32>]) -> Vec<f64> {
    lattice.iter().map(|l| bracket(l).powf(cfg.tau)).collect()
}

/// Minimal normalized margins of every family at one aspect ratio.
pub fn melnikov_margins(gamma: f64, cfg: &ResonanceConfig) -> Result<MelnikovMargins> {
    cfg.validate()?;
    let lattice = cfg.lattice();
    let scale = lattice_scale(cfg, &lattice);
    let modes = cfg.normal_modes();
    let ctx = Context {
        cfg,
        lattice: &lattice,
        scale: &scale,
        modes: &modes,
    };
    Ok(margins_at(gamma, &ctx, cfg.upsilon))
}

/// Exhaustive evaluation of the same margins, without grouping or pruning.
pub fn melnikov_margins_exhaustive(gamma: f64, cfg: &ResonanceConfig) -> Result<MelnikovMargins> {
    cfg.validate()?;
    let n_hi = cfg.n_max.max(*cfg.sites.iter().max().unwrap_or(&1));
    let freq = frequency_table(gamma, n_hi, cfg.shift);
    let omega: Vec<f64> = cfg.sites.iter().map(|&s| freq[s as usize]).collect();
    let modes = cfg.normal_modes();
    let jc = cfg.j_cut();
    let mut best = [f64::INFINITY; 5];
    for ell in cfg.lattice() {
        let sc = bracket(&ell).powf(cfg.tau);
        let x = dot(&omega, &ell);
        let is_zero = ell.iter().all(|&v| v == 0);
        if !is_zero {
            best[0] = best[0].min(x.abs() * sc / 8.0);
        }
        for j in -jc..=jc {
            if !(is_zero && j == 0) {
                best[1] = best[1].min((x + freq[1] * j as f64).abs() * sc / (8.0 * bracket_int(j)));
            }
        }
        for &n in &modes {
            best[2] = best[2].min((x + freq[n as usize]).abs() * sc / (4.0 * n as f64));
            for &np in &modes {
                if !(is_zero && n == np) {
                    let d = n as i64 - np as i64;
                    let v = x + freq[n as usize] - freq[np as usize];
                    best[3] = best[3].min(v.abs() * sc / (4.0 * bracket_int(d)));
                }
                let v = x + freq[n as usize] + freq[np as usize];
                best[4] = best[4].min(v.abs() * sc / (4.0 * (n + np) as f64));
            }
        }
    }
    Ok(MelnikovMargins {
        gamma,
        families: Family::ALL
            .iter()
            .zip(best)
            .map(|(&family, margin)| FamilyMargin {
                family,
                margin,
                witness: None,
            })
            .collect(),
    })
}

/// Second-difference combination for large modes via the frequency
/// asymptotics `Ω_n = nΩ₁ − ½ + r(n,γ)`:
/// `ω·ℓ + (n−n')Ω₁ + r(n,γ) − r(n',γ)`.
pub fn second_difference_asymptotic(
    omega_dot_ell: f64,
    n: u32,
    n_prime: u32,
    gamma: f64,
) -> Result<f64> {
    let p = ellipse_params(gamma)?;
    let r = asymptotic_remainder(n, &p)?;
    let rp = asymptotic_remainder(n_prime, &p)?;
    Ok(omega_dot_ell + (n as f64 - n_prime as f64) * p.omega_gamma + r - rp)
}

/// Upper bound of `|r(n,γ)|` over `n > n₀`; `r` decays monotonically.
pub fn remainder_bound(n0: u32, gamma: f64) -> Result<f64> {
    let p = ellipse_params(gamma)?;
    Ok(asymptotic_remainder(n0 + 1, &p)?.abs())
}

/// Per-γ exclusion record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRecord {
    pub gamma: f64,
    pub margins: Vec<FamilyMargin>,
}

/// Measure statistics for one value of `υ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpsilonSummary {
    pub upsilon: f64,
    pub excluded_points: usize,
    pub excluded_measure: f64,
    pub good_measure: f64,
    pub excluded_fraction: f64,
    /// Maximal runs of excluded grid points, as `[γ_a − δγ/2, γ_b + δγ/2]`
    /// clipped to the interval.
    pub excluded_intervals: Vec<(f64, f64)>,
    /// Excluded points per family.
    pub family_counts: Vec<(Family, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub config: ResonanceConfig,
    pub records: Vec<GammaRecord>,
    pub summaries: Vec<UpsilonSummary>,
    /// Smallest and median of the per-γ minimal margin.
    pub min_margin: f64,
    pub median_margin: f64,
}

impl ResonanceReport {
    pub fn summary(&self, upsilon: f64) -> Option<&UpsilonSummary> {
        self.summaries.iter().find(|s| s.upsilon == upsilon)
    }

    pub fn passes(&self, k: usize, upsilon: f64) -> bool {
        self.records[k].margins.iter().all(|m| m.margin >= upsilon)
    }
}

/// Margins on the whole `γ` grid, evaluated in parallel.
pub fn margin_sweep(cfg: &ResonanceConfig) -> Result<Vec<GammaRecord>> {
    margin_sweep_capped(cfg, cfg.upsilon)
}

fn margin_sweep_capped(cfg: &ResonanceConfig, cap: f64) -> Result<Vec<GammaRecord>> {
    cfg.validate()?;
    let lattice = cfg.lattice();
    let scale = lattice_scale(cfg, &lattice);
    let modes = cfg.normal_modes();
    let ctx = Context {
        cfg,
        lattice: &lattice,
        scale: &scale,
        modes: &modes,
    };
    Ok(cfg
        .gamma_grid()
        .par_iter()
        .map(|&g| {
            let m = margins_at(g, &ctx, cap);
            GammaRecord {
                gamma: g,
                margins: m.families,
            }
        })
        .collect())
}

fn summarize(cfg: &ResonanceConfig, records: &[GammaRecord], upsilon: f64) -> UpsilonSummary {
    let total = records.len();
    let len = cfg.gamma_max - cfg.gamma_min;
    let excluded: Vec<bool> = records
        .iter()
        .map(|r| r.margins.iter().any(|m| m.margin < upsilon))
        .collect();
    let count = excluded.iter().filter(|&&e| e).count();
    let fraction = if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    };
    let mut intervals = Vec::new();
    let mut k = 0;
    while k < total {
        if excluded[k] {
            let start = k;
            while k + 1 < total && excluded[k + 1] {
                k += 1;
            }
            let a = (records[start].gamma - 0.5 * cfg.d_gamma).max(cfg.gamma_min);
            let b = (records[k].gamma + 0.5 * cfg.d_gamma).min(cfg.gamma_max);
            intervals.push((a, b));
        }
        k += 1;
    }
    let family_counts = Family::ALL
        .iter()
        .map(|&f| {
            let c = records
                .iter()
                .filter(|r| {
                    r.margins
                        .iter()
                        .any(|m| m.family == f && m.margin < upsilon)
                })
                .count();
            (f, c)
        })
        .collect();
    UpsilonSummary {
        upsilon,
        excluded_points: count,
        excluded_measure: fraction * len,
        good_measure: (1.0 - fraction) * len,
        excluded_fraction: fraction,
        excluded_intervals: intervals,
        family_counts,
    }
}

/// Marks each grid `γ` as excluded when some truncated condition fails with
/// constant `υ`, for `υ = cfg.upsilon` and every value in `trend`.
pub fn measure_estimate(cfg: &ResonanceConfig, trend: &[f64]) -> Result<ResonanceReport> {
    let mut ups: Vec<f64> = trend.to_vec();
    if !ups.contains(&cfg.upsilon) {
        ups.push(cfg.upsilon);
    }
    let cap = ups.iter().copied().fold(0.0, f64::max);
    let records = margin_sweep_capped(cfg, cap)?;
    let summaries = ups.iter().map(|&u| summarize(cfg, &records, u)).collect();
    let mut mins: Vec<f64> = records
        .iter()
        .map(|r| r.margins.iter().fold(f64::INFINITY, |m, f| m.min(f.margin)))
        .collect();
    mins.sort_by(|a, b| a.total_cmp(b));
    let min_margin = mins.first().copied().unwrap_or(f64::NAN);
    let median_margin = mins.get(mins.len() / 2).copied().unwrap_or(f64::NAN);
    Ok(ResonanceReport {
        config: cfg.clone(),
        records,
        summaries,
        min_margin,
        median_margin,
    })
}

/// Step sizes of the Richardson-extrapolated central differences for the
/// first and second `γ`-derivatives.
pub const FD_STEP_1: f64 = 1e-3;
pub const FD_STEP_2: f64 = 1e-2;

/// `k`-th derivative (`k ≤ 2`) of `f` at `x` by Richardson-extrapolated
/// central differences.
pub fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64, k: u32) -> f64 {
    match k {
        0 => f(x),
        1 => {
            let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
            let h = FD_STEP_1;
            (4.0 * d(h / 2.0) - d(h)) / 3.0
        }
        2 => {
            let fx = f(x);
            let d = |h: f64| (f(x + h) - 2.0 * fx + f(x - h)) / (h * h);
            let h = FD_STEP_2;
            (4.0 * d(h / 2.0) - d(h)) / 3.0
        }
        _ => f64::NAN,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transversality {
    pub gamma: f64,
    /// Minimum over every family.
    pub rho_hat: f64,
    pub families: Vec<FamilyMargin>,
}

/// Derivative table `∂^k_γ(Ω_n + n𝚖)` for `k ≤ k_max`, `n = 0..=n_hi`.
fn derivative_table(gamma: f64, n_hi: u32, shift: f64, k_max: u32) -> Vec<Vec<f64>> {
    (0..=k_max)
        .map(|k| {
            let mut v = vec![0.0; n_hi as usize + 1];
            for n in 1..=n_hi {
                v[n as usize] = richardson_derivative(|g| omega_n(n, g), gamma, k);
                if k == 0 {
                    v[n as usize] += n as f64 * shift;
                }
            }
            v
        })
        .collect()
}

/// `max_{k ≤ k_max} |∂^k_γ c|/⟨ℓ⟩` minimized over the truncated index set
/// of every family. Modes in `(n_max, 2n_max]` enter the first family through
/// the dominant term `nΩ₁ − ½ + n𝚖`; for the second families the dominant
/// term of large modes reduces to the transport combination.
pub fn transversality_margins(
    gamma: f64,
    cfg: &ResonanceConfig,
    k_max: u32,
) -> Result<Transversality> {
    cfg.validate()?;
    if k_max > 2 {
        return Err(domain("k_max must be <= 2"));
    }
    let lattice = cfg.lattice();
    let modes = cfg.normal_modes();
    Ok(transversality_at(gamma, cfg, k_max, &lattice, &modes))
}

fn transversality_at(
    gamma: f64,
    cfg: &ResonanceConfig,
    k_max: u32,
    lattice: &[Vec<i32>],
    modes: &[u32],
) -> Transversality {
    let n_hi = cfg.n_max.max(*cfg.sites.iter().max().unwrap_or(&1));
    let der = derivative_table(gamma, n_hi, cfg.shift, k_max);
    let kk = (k_max + 1) as usize;
    let site_d: Vec<Vec<f64>> = (0..kk)
        .map(|k| cfg.sites.iter().map(|&s| der[k][s as usize]).collect())
        .collect();
    let jc = cfg.j_cut();
    let diff = PairGroups::build(modes, &der[0], false);
    let sum = PairGroups::build(modes, &der[0], true);
    let mut fam = [
        Best::new(),
        Best::new(),
        Best::new(),
        Best::new(),
        Best::new(),
    ];
    let combo = |ell: &[i32], extra: &dyn Fn(usize) -> f64| -> f64 {
        (0..kk)
            .map(|k| (dot(&site_d[k], ell) + extra(k)).abs())
            .fold(0.0, f64::max)
    };
    let tail_hi = 2 * cfg.n_max;
    for ell in lattice {
        let b = bracket(ell);
        let is_zero = ell.iter().all(|&v| v == 0);
        let x = dot(&site_d[0], ell);
        if !is_zero {
            let m = combo(ell, &|_| 0.0) / b;
            fam[0].offer(m, || Witness {
                ell: ell.clone(),
                j: 0,
                n: 0,
                n_prime: 0,
            });
        }
        for j in -jc..=jc {
            if is_zero && j == 0 {
                continue;
            }
            if (x + der[0][1] * j as f64).abs() / b >= fam[1].margin {
                continue;
            }
            let m = combo(ell, &|k| der[k][1] * j as f64) / b;
            fam[1].offer(m, || Witness {
                ell: ell.clone(),
                j,
                n: 0,
                n_prime: 0,
            });
        }
        for &n in modes {
            if (x + der[0][n as usize]).abs() / b >= fam[2].margin {
                continue;
            }
            let m = combo(ell, &|k| der[k][n as usize]) / b;
            fam[2].offer(m, || Witness {
                ell: ell.clone(),
                j: 0,
                n,
                n_prime: 0,
            });
        }
        for n in (cfg.n_max + 1)..=tail_hi {
            let nf = n as f64;
            let lead = |k: usize| nf * der[k][1] - if k == 0 { 0.5 } else { 0.0 };
            if (x + lead(0)).abs() / b >= fam[2].margin {
                continue;
            }
            let m = combo(ell, &lead) / b;
            fam[2].offer(m, || Witness {
                ell: ell.clone(),
                j: 0,
                n,
                n_prime: 0,
            });
        }
        for (groups, slot, is_sum) in [(&diff, 3usize, false), (&sum, 4usize, true)] {
            for g in 0..groups.keys.len() {
                let key = groups.keys[g];
                if !is_sum && is_zero && key == 0 {
                    continue;
                }
                let bound = dist_to_interval(-x, groups.lo[g], groups.hi[g]) / b;
                if bound >= fam[slot].margin {
                    continue;
                }
                let e = &groups.entries[g];
                let pos = e.partition_point(|v| v.0 < -x);
                // Walk outwards while the value term alone could still improve.
                let mut lo = pos;
                let mut hi = pos;
                loop {
                    let mut progressed = false;
                    for idx in [lo.wrapping_sub(1), hi] {
                        let Some(&(val, n, np)) = e.get(idx) else {
                            continue;
                        };
                        if (x + val).abs() / b >= fam[slot].margin {
                            continue;
                        }
                        progressed = true;
                        if !is_sum && is_zero && n == np {
                            continue;
                        }
                        let sign = if is_sum { 1.0 } else { -1.0 };
                        let m =
                            combo(ell, &|k| der[k][n as usize] + sign * der[k][np as usize]) / b;
                        fam[slot].offer(m, || Witness {
                            ell: ell.clone(),
                            j: 0,
                            n,
                            n_prime: np,
                        });
                    }
                    if !progressed {
                        break;
                    }
                    lo = lo.wrapping_sub(1);
                    hi += 1;
                    if lo == usize::MAX && hi >= e.len() {
                        break;
                    }
                }
            }
        }
    }
    let families: Vec<FamilyMargin> = Family::ALL
        .iter()
        .zip(fam)
        .map(|(&family, b)| FamilyMargin {
            family,
            margin: b.margin,
            witness: b.witness,
        })
        .collect();
    let rho_hat = families.iter().fold(f64::INFINITY, |m, f| m.min(f.margin));
    Transversality {
        gamma,
        rho_hat,
        families,
    }
}

/// Transversality margins on the whole `γ` grid.
pub fn transversality_sweep(cfg: &ResonanceConfig, k_max: u32) -> Result<Vec<Transversality>> {
    cfg.validate()?;
    if k_max > 2 {
        return Err(domain("k_max must be <= 2"));
    }
    let lattice = cfg.lattice();
    let modes = cfg.normal_modes();
    Ok(cfg
        .gamma_grid()
        .par_iter()
        .map(|&g| transversality_at(g, cfg, k_max, &lattice, &modes))
        .collect())
}

//! Deterministic CSV, JSON and binary emission.
//!
//! Floats are written with 17 significant digits so that values round-trip
//! exactly. JSON reports carry a `schema_version` field. Binary state dumps
//! are little-endian `f64`, row-major, one row `[t, ξ_0, …, ξ_{N−1}]` per
//! recorded time.

use std::io::Write;

use serde::Serialize;

use crate::dynamics::TrajectoryRecord;
use crate::error::Result;
use crate::resonance::ResonanceReport;
use crate::spectral::ModeData;

pub const SCHEMA_VERSION: u32 = 1;

/// 17-significant-digit scientific notation; `nan`/`inf` for non-finite.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "nan".into())
}

pub fn write_trajectory_csv(rec: &TrajectoryRecord, mut w: impl Write) -> Result<()> {
    writeln!(w, "t,C,abs_Z,J,E,J_rect,max_abs_xi")?;
    for (k, (t, d)) in rec.times.iter().zip(&rec.diagnostics).enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(d.circulation),
            fmt_f64(d.center_modulus),
            fmt_f64(d.angular_momentum),
            fmt_f64(d.pseudo_energy),
            fmt_opt(d.rectified_momentum),
            fmt_f64(rec.max_abs(k)),
        )?;
    }
    Ok(())
}

/// Rows `[t, ξ_0, …, ξ_{N−1}]` as little-endian `f64`.
pub fn write_states_binary(rec: &TrajectoryRecord, mut w: impl Write) -> Result<()> {
    for (t, s) in rec.times.iter().zip(&rec.states) {
        w.write_all(&t.to_le_bytes())?;
        for v in s {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Inverse of [`write_states_binary`] for `n_points` samples per row.
pub fn read_states_binary(bytes: &[u8], n_points: usize) -> Vec<(f64, Vec<f64>)> {
    let row = (n_points + 1) * 8;
    bytes
        .chunks_exact(row)
        .map(|c| {
            let vals: Vec<f64> = c
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                .collect();
            (vals[0], vals[1..].to_vec())
        })
        .collect()
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    data: &'a T,
}

/// Pretty JSON `{ "schema_version", "kind", "data" }`.
pub fn to_json<T: Serialize>(kind: &str, data: &T) -> String {
    serde_json::to_string_pretty(&Envelope {
        schema_version: SCHEMA_VERSION,
        kind,
        data,
    })
    .expect("serializable report")
}

pub fn write_spectrum_csv(rows: &[ModeData], mut w: impl Write) -> Result<()> {
    writeln!(w, "n,mu_plus,mu_minus,omega_n,m_n,class")?;
    for m in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            m.n,
            fmt_f64(m.mu_plus),
            fmt_f64(m.mu_minus),
            fmt_f64(m.omega_n),
            fmt_f64(m.m_n),
            m.class.as_str()
        )?;
    }
    Ok(())
}

pub fn write_resonance_csv(
    report: &ResonanceReport,
    upsilon: f64,
    mut w: impl Write,
) -> Result<()> {
    writeln!(w, "gamma,family,min_margin,pass")?;
    for r in &report.records {
        for m in &r.margins {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(r.gamma),
                m.family.as_str(),
                fmt_f64(m.margin),
                u8::from(m.margin >= upsilon)
            )?;
        }
    }
    Ok(())
}

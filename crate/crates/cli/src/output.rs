//! Time-series output: fixed-precision CSV (or JSON) plus a sidecar with
//! the fully resolved configuration and a content hash.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use distill_ssh::{EnsembleOutcome, LaserPulse, SamplePoint};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{OutputFormat, ResolvedSpec};

pub const CSV_HEADER: &str = "t_fs,P,P1,P2,dP1_site,dP2_site,dP1_energy,dP2_energy,\
dP1_bound_tight_energy,dP2_bound_tight_energy,dipole_eA,field_VperA";

fn fmt(x: f64) -> String {
    // 17 significant digits: lossless f64 round-trips for regression diffs.
    format!("{x:.16e}")
}

pub fn csv_line(s: &SamplePoint) -> String {
    [
        s.t,
        s.site.p,
        s.site.p1,
        s.site.p2,
        s.site.dp1,
        s.site.dp2,
        s.energy.dp1,
        s.energy.dp2,
        s.energy.bounds.p1_max_tight,
        s.energy.bounds.p2_max_tight,
        s.dipole,
        s.field,
    ]
    .map(fmt)
    .join(",")
}

pub fn render_csv(samples: &[SamplePoint]) -> String {
    let mut out = String::with_capacity(samples.len() * 220 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&csv_line(s));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonSample<'a> {
    t_fs: f64,
    site: &'a distill_core::PurityReport,
    energy: &'a distill_core::PurityReport,
    dipole_ea: f64,
    field_v_per_a: f64,
}

pub fn render_json(samples: &[SamplePoint]) -> anyhow::Result<String> {
    let rows: Vec<JsonSample> = samples
        .iter()
        .map(|s| JsonSample {
            t_fs: s.t,
            site: &s.site,
            energy: &s.energy,
            dipole_ea: s.dipole,
            field_v_per_a: s.field,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)?)
}

/// Git-blob-style content hash: `sha256("blob <len>\0" + bytes)`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", bytes.len()).as_bytes());
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[derive(Serialize)]
struct Sidecar<'a> {
    resolved_config: &'a ResolvedSpec,
    resolved_pulse: &'a Option<LaserPulse>,
    homo_lumo_gap_ev: f64,
    u_star: &'a [f64],
    orbital_energies_ev: &'a [f64],
    max_norm_deviation: f64,
    output_file: &'a str,
    content_hash_sha256: String,
}

/// Writes the series and its sidecar; returns (data path, sidecar path).
pub fn write_outputs(
    spec: &ResolvedSpec,
    outcome: &EnsembleOutcome,
) -> anyhow::Result<(PathBuf, PathBuf)> {
    let data_path = PathBuf::from(&spec.output.path);
    let rendered = match spec.output.format {
        OutputFormat::Csv => render_csv(&outcome.samples),
        OutputFormat::Json => render_json(&outcome.samples)?,
    };
    if let Some(dir) = data_path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
        }
    }
    write_atomic(&data_path, rendered.as_bytes())?;

    let sidecar = Sidecar {
        resolved_config: spec,
        resolved_pulse: &outcome.resolved_pulse,
        homo_lumo_gap_ev: outcome.homo_lumo_gap,
        u_star: &outcome.geometry.u_star,
        orbital_energies_ev: &outcome.geometry.orbital_energies,
        max_norm_deviation: outcome.max_norm_dev,
        output_file: &spec.output.path,
        content_hash_sha256: content_hash(rendered.as_bytes()),
    };
    let sidecar_path = data_path.with_extension("meta.json");
    write_atomic(
        &sidecar_path,
        serde_json::to_string_pretty(&sidecar)?.as_bytes(),
    )?;
    Ok((data_path, sidecar_path))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let mut f = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(())
}
